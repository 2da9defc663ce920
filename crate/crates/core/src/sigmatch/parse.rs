//! Parser for the supported subset of the YARA signature syntax.
//!
//! The subset (documented in `docs/signatures.md`): named rules with an
//! optional ignored `meta:` section, a `strings:` section of text, hex, and
//! regex patterns (text patterns may carry `nocase`), and a `condition:`
//! that is one of `any of them`, `all of them`, or `N of them`. Everything
//! else in the full language is rejected with an error that names the
//! unsupported construct.

use super::{Condition, PatternKind, RawPattern, RawSignature};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SigError {
    #[error("signature syntax error at line {line}: {message}")]
    Syntax { line: u32, message: String },

    #[error("unsupported signature construct at line {line}: {construct}")]
    UnsupportedFeature { line: u32, construct: String },

    #[error("signature `{rule}`: pattern ${id} is empty")]
    EmptyPattern { rule: String, id: String },

    #[error("signature `{rule}`: invalid regex in ${id}: {message}")]
    BadRegex {
        rule: String,
        id: String,
        message: String,
    },

    #[error("signature `{rule}`: duplicate pattern ${id}")]
    DuplicatePattern { rule: String, id: String },

    #[error("duplicate signature `{rule}`")]
    DuplicateRule { rule: String },

    #[error("signature `{rule}`: `{k} of them` is outside 1..={patterns}")]
    BadCount {
        rule: String,
        k: usize,
        patterns: usize,
    },
}

/// Parses signature source into raw (uncompiled) signatures.
pub fn parse_signatures(source: &str) -> Result<Vec<RawSignature>, SigError> {
    let mut s = Scanner::new(source);
    let mut rules: Vec<RawSignature> = Vec::new();
    loop {
        s.skip_trivia();
        if s.at_end() {
            break;
        }
        let word = s.ident()?;
        match word.as_str() {
            "rule" => {
                let rule = parse_rule(&mut s)?;
                if rules.iter().any(|r| r.name == rule.name) {
                    return Err(SigError::DuplicateRule { rule: rule.name });
                }
                rules.push(rule);
            }
            "import" | "include" => {
                return Err(SigError::UnsupportedFeature {
                    line: s.line,
                    construct: format!("`{word}` statement"),
                })
            }
            "private" | "global" => {
                return Err(SigError::UnsupportedFeature {
                    line: s.line,
                    construct: format!("`{word}` rule modifier"),
                })
            }
            other => {
                return Err(s.syntax(format!("expected `rule`, found `{other}`")));
            }
        }
    }
    Ok(rules)
}

fn parse_rule(s: &mut Scanner) -> Result<RawSignature, SigError> {
    s.skip_trivia();
    let name = s.ident()?;
    s.skip_trivia();
    // a `rule name : tag` form uses rule tags, which the subset drops
    if s.peek() == Some(':') {
        return Err(SigError::UnsupportedFeature {
            line: s.line,
            construct: "rule tags".to_string(),
        });
    }
    s.expect('{')?;

    // optional meta section, ignored
    s.skip_trivia();
    if s.peek_word("meta") {
        s.ident()?;
        s.expect(':')?;
        skip_meta(s)?;
    }

    s.skip_trivia();
    if !s.peek_word("strings") {
        return Err(s.syntax("expected `strings:` section"));
    }
    s.ident()?;
    s.expect(':')?;

    let mut patterns: Vec<RawPattern> = Vec::new();
    loop {
        s.skip_trivia();
        if s.peek() == Some('$') {
            let pat = parse_pattern(s, &name)?;
            if patterns.iter().any(|p| p.id == pat.id) {
                return Err(SigError::DuplicatePattern {
                    rule: name,
                    id: pat.id,
                });
            }
            patterns.push(pat);
        } else {
            break;
        }
    }
    if patterns.is_empty() {
        return Err(s.syntax("`strings:` section declares no patterns"));
    }

    s.skip_trivia();
    if !s.peek_word("condition") {
        return Err(s.syntax("expected `condition:` section"));
    }
    s.ident()?;
    s.expect(':')?;
    let condition = parse_condition(s)?;
    s.skip_trivia();
    s.expect('}')?;

    Ok(RawSignature {
        name,
        patterns,
        condition,
    })
}

fn skip_meta(s: &mut Scanner) -> Result<(), SigError> {
    loop {
        s.skip_trivia();
        if s.peek_word("strings") || s.peek_word("condition") || s.peek() == Some('}') {
            return Ok(());
        }
        s.ident()?;
        s.expect('=')?;
        s.skip_trivia();
        match s.peek() {
            Some('"') => {
                s.quoted_bytes()?;
            }
            Some(c) if c.is_ascii_digit() || c == '-' => {
                s.number()?;
            }
            Some(_) if s.peek_word("true") || s.peek_word("false") => {
                s.ident()?;
            }
            _ => return Err(s.syntax("malformed meta entry")),
        }
    }
}

fn parse_pattern(s: &mut Scanner, rule: &str) -> Result<RawPattern, SigError> {
    s.expect('$')?;
    let id = match s.ident() {
        Ok(id) => id,
        Err(_) => {
            return Err(SigError::UnsupportedFeature {
                line: s.line,
                construct: "anonymous pattern `$`".to_string(),
            })
        }
    };
    s.expect('=')?;
    s.skip_trivia();
    match s.peek() {
        Some('"') => {
            let bytes = s.quoted_bytes()?;
            if bytes.is_empty() {
                return Err(SigError::EmptyPattern {
                    rule: rule.to_string(),
                    id,
                });
            }
            let mut nocase = false;
            loop {
                s.skip_trivia_inline();
                if !s.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    break;
                }
                // lookahead: any word that is not a modifier belongs to the
                // next pattern or section
                let word = s.clone_ident_lookahead();
                match word.as_str() {
                    "nocase" => {
                        s.ident()?;
                        nocase = true;
                    }
                    "wide" | "ascii" | "fullword" | "xor" | "base64" | "base64wide"
                    | "private" => {
                        return Err(SigError::UnsupportedFeature {
                            line: s.line,
                            construct: format!("pattern modifier `{word}`"),
                        })
                    }
                    _ => break,
                }
            }
            Ok(RawPattern {
                id,
                kind: PatternKind::Text { bytes, nocase },
            })
        }
        Some('{') => {
            let items = parse_hex(s, rule, &id)?;
            if items.is_empty() {
                return Err(SigError::EmptyPattern {
                    rule: rule.to_string(),
                    id,
                });
            }
            Ok(RawPattern {
                id,
                kind: PatternKind::Hex { items },
            })
        }
        Some('/') => {
            let source = s.regex_body()?;
            s.skip_trivia_inline();
            if s.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                // a bare word straight after the regex is a modifier, none
                // of which the subset supports on regex patterns
                let word = s.clone_ident_lookahead();
                if word == "nocase" || word == "wide" || word == "ascii" || word == "fullword" {
                    return Err(SigError::UnsupportedFeature {
                        line: s.line,
                        construct: format!("regex pattern modifier `{word}`"),
                    });
                }
            }
            if source.is_empty() {
                return Err(SigError::EmptyPattern {
                    rule: rule.to_string(),
                    id,
                });
            }
            Ok(RawPattern {
                id,
                kind: PatternKind::Regex { source },
            })
        }
        _ => Err(s.syntax("expected a text, hex, or regex pattern")),
    }
}

/// Hex pattern items: `DE AD ?? EF`. Jumps and alternation are full-YARA
/// features outside the subset.
fn parse_hex(s: &mut Scanner, rule: &str, id: &str) -> Result<Vec<Option<u8>>, SigError> {
    s.expect('{')?;
    let mut items = Vec::new();
    loop {
        s.skip_trivia();
        match s.peek() {
            Some('}') => {
                s.bump();
                return Ok(items);
            }
            Some('[') => {
                return Err(SigError::UnsupportedFeature {
                    line: s.line,
                    construct: "hex jump `[..]`".to_string(),
                })
            }
            Some('(') | Some('|') => {
                return Err(SigError::UnsupportedFeature {
                    line: s.line,
                    construct: "hex alternation `(..|..)`".to_string(),
                })
            }
            Some(c1) => {
                s.bump();
                let c2 = match s.peek() {
                    Some(c) => c,
                    None => return Err(s.syntax("unterminated hex pattern")),
                };
                s.bump();
                match (c1, c2) {
                    ('?', '?') => items.push(None),
                    ('?', _) | (_, '?') => {
                        return Err(SigError::UnsupportedFeature {
                            line: s.line,
                            construct: "nibble wildcard (mixed hex digit and `?`)".to_string(),
                        })
                    }
                    (h, l) => {
                        let hi = h.to_digit(16).ok_or_else(|| {
                            syntax_at(s.line, format!("invalid hex digit `{h}` in ${id} of `{rule}`"))
                        })?;
                        let lo = l.to_digit(16).ok_or_else(|| {
                            syntax_at(s.line, format!("invalid hex digit `{l}` in ${id} of `{rule}`"))
                        })?;
                        items.push(Some((hi * 16 + lo) as u8));
                    }
                }
            }
            None => return Err(s.syntax("unterminated hex pattern")),
        }
    }
}

fn parse_condition(s: &mut Scanner) -> Result<Condition, SigError> {
    s.skip_trivia();
    let cond = match s.peek() {
        Some(c) if c.is_ascii_digit() => {
            let n = s.number()? as usize;
            expect_of_them(s)?;
            Condition::NOfThem(n)
        }
        Some(c) if !c.is_ascii_alphabetic() => {
            // `$a`, parentheses, negation… — richer than the subset carries
            return Err(SigError::UnsupportedFeature {
                line: s.line,
                construct: format!("condition form starting with `{c}`"),
            });
        }
        _ => {
            let word = s.ident()?;
            match word.as_str() {
                "any" => {
                    expect_of_them(s)?;
                    Condition::AnyOfThem
                }
                "all" => {
                    expect_of_them(s)?;
                    Condition::AllOfThem
                }
                other => {
                    return Err(SigError::UnsupportedFeature {
                        line: s.line,
                        construct: format!("condition form starting with `{other}`"),
                    })
                }
            }
        }
    };
    // anything else before `}` is a richer condition than the subset carries
    s.skip_trivia();
    if s.peek() != Some('}') {
        return Err(SigError::UnsupportedFeature {
            line: s.line,
            construct: "compound condition expression".to_string(),
        });
    }
    Ok(cond)
}

fn expect_of_them(s: &mut Scanner) -> Result<(), SigError> {
    s.skip_trivia();
    let of = s.ident()?;
    s.skip_trivia();
    let them = s.ident()?;
    if of != "of" || them != "them" {
        return Err(s.syntax("expected `of them`"));
    }
    Ok(())
}

fn syntax_at(line: u32, message: String) -> SigError {
    SigError::Syntax { line, message }
}

// ---------------------------------------------------------------------------

/// Character scanner with line tracking and `//` and `/* */` comment support.
struct Scanner<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
}

impl<'a> Scanner<'a> {
    fn new(source: &'a str) -> Self {
        Scanner {
            chars: source.chars().peekable(),
            line: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c == Some('\n') {
            self.line += 1;
        }
        c
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn syntax(&self, message: impl Into<String>) -> SigError {
        SigError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    /// Skips whitespace and comments, including newlines.
    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') => {
                    let mut clone = self.chars.clone();
                    clone.next();
                    match clone.peek() {
                        Some('/') => {
                            while let Some(c) = self.bump() {
                                if c == '\n' {
                                    break;
                                }
                            }
                        }
                        Some('*') => {
                            self.bump();
                            self.bump();
                            let mut prev = '\0';
                            while let Some(c) = self.bump() {
                                if prev == '*' && c == '/' {
                                    break;
                                }
                                prev = c;
                            }
                        }
                        _ => return,
                    }
                }
                _ => return,
            }
        }
    }

    /// Skips spaces and tabs but stops at a newline: used after a pattern,
    /// where modifiers must sit on the same line.
    fn skip_trivia_inline(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' || c == '\r' {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn ident(&mut self) -> Result<String, SigError> {
        self.skip_trivia();
        let mut out = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            other => {
                return Err(self.syntax(format!(
                    "expected identifier, found {:?}",
                    other.map(String::from).unwrap_or_else(|| "end of input".into())
                )))
            }
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    /// Peeks an identifier without consuming it.
    fn clone_ident_lookahead(&mut self) -> String {
        let mut out = String::new();
        let clone = self.chars.clone();
        for c in clone {
            if c.is_ascii_alphanumeric() || c == '_' {
                out.push(c);
            } else {
                break;
            }
        }
        out
    }

    fn peek_word(&mut self, word: &str) -> bool {
        self.clone_ident_lookahead() == word
    }

    fn expect(&mut self, c: char) -> Result<(), SigError> {
        self.skip_trivia();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            let found = self
                .peek()
                .map(String::from)
                .unwrap_or_else(|| "end of input".into());
            Err(self.syntax(format!("expected `{c}`, found {found:?}")))
        }
    }

    fn number(&mut self) -> Result<i64, SigError> {
        self.skip_trivia();
        let mut text = String::new();
        if self.peek() == Some('-') {
            text.push('-');
            self.bump();
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        text.parse::<i64>()
            .map_err(|_| self.syntax(format!("invalid number `{text}`")))
    }

    /// Double-quoted text pattern with C-style and `\xNN` escapes, returned
    /// as raw bytes.
    fn quoted_bytes(&mut self) -> Result<Vec<u8>, SigError> {
        self.expect('"')?;
        let mut out = Vec::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.syntax("unterminated string")),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('n') => out.push(b'\n'),
                    Some('t') => out.push(b'\t'),
                    Some('r') => out.push(b'\r'),
                    Some('"') => out.push(b'"'),
                    Some('\\') => out.push(b'\\'),
                    Some('x') => {
                        let h = self.bump().and_then(|c| c.to_digit(16));
                        let l = self.bump().and_then(|c| c.to_digit(16));
                        match (h, l) {
                            (Some(h), Some(l)) => out.push((h * 16 + l) as u8),
                            _ => return Err(self.syntax("invalid \\x escape")),
                        }
                    }
                    other => {
                        return Err(self.syntax(format!("unknown string escape {other:?}")))
                    }
                },
                Some(c) => {
                    let mut buf = [0u8; 4];
                    out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                }
            }
        }
    }

    /// Regex pattern body between unescaped `/` delimiters.
    fn regex_body(&mut self) -> Result<String, SigError> {
        self.expect('/')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.syntax("unterminated regex")),
                Some('/') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('/') => out.push('/'),
                    Some(c) => {
                        out.push('\\');
                        out.push(c);
                    }
                    None => return Err(self.syntax("unterminated regex")),
                },
                Some(c) => out.push(c),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_pattern_kinds() {
        let rules = parse_signatures(
            r#"
            // exec-injection indicators
            rule exec_injection {
                meta:
                    author = "ops"
                    severity = 9
                strings:
                    $cmd = "rm -rf" nocase
                    $elf = { 7F 45 4C ?? 46 }
                    $url = /https?:\/\/[a-z]+/
                condition:
                    any of them
            }
            "#,
        )
        .unwrap();
        assert_eq!(rules.len(), 1);
        let r = &rules[0];
        assert_eq!(r.name, "exec_injection");
        assert_eq!(r.patterns.len(), 3);
        assert!(matches!(
            &r.patterns[0].kind,
            PatternKind::Text { nocase: true, .. }
        ));
        match &r.patterns[1].kind {
            PatternKind::Hex { items } => {
                assert_eq!(items, &vec![Some(0x7f), Some(0x45), Some(0x4c), None, Some(0x46)]);
            }
            other => panic!("expected hex, got {other:?}"),
        }
        assert_eq!(r.condition, Condition::AnyOfThem);
    }

    #[test]
    fn conditions() {
        let src = |cond: &str| {
            format!(
                "rule r {{ strings: $a = \"x\" $b = \"y\" condition: {cond} }}"
            )
        };
        assert_eq!(
            parse_signatures(&src("all of them")).unwrap()[0].condition,
            Condition::AllOfThem
        );
        assert_eq!(
            parse_signatures(&src("2 of them")).unwrap()[0].condition,
            Condition::NOfThem(2)
        );
    }

    #[test]
    fn names_unsupported_constructs() {
        let err = parse_signatures("import \"pe\"\nrule r { strings: $a = \"x\" condition: any of them }")
            .unwrap_err();
        assert!(matches!(err, SigError::UnsupportedFeature { ref construct, .. } if construct.contains("import")), "{err}");

        let err = parse_signatures(
            "rule r { strings: $a = \"x\" wide condition: any of them }",
        )
        .unwrap_err();
        assert!(matches!(err, SigError::UnsupportedFeature { ref construct, .. } if construct.contains("wide")), "{err}");

        let err = parse_signatures(
            "rule r { strings: $a = { DE [2-4] AD } condition: any of them }",
        )
        .unwrap_err();
        assert!(matches!(err, SigError::UnsupportedFeature { ref construct, .. } if construct.contains("jump")), "{err}");

        let err = parse_signatures(
            "rule r { strings: $a = \"x\" condition: $a }",
        )
        .unwrap_err();
        assert!(matches!(err, SigError::UnsupportedFeature { ref construct, .. } if construct.contains("condition")), "{err}");

        let err = parse_signatures(
            "rule r { strings: $a = { D? } condition: any of them }",
        )
        .unwrap_err();
        assert!(matches!(err, SigError::UnsupportedFeature { ref construct, .. } if construct.contains("nibble")), "{err}");
    }

    #[test]
    fn rejects_empty_patterns() {
        let err = parse_signatures("rule r { strings: $a = \"\" condition: any of them }")
            .unwrap_err();
        assert!(matches!(err, SigError::EmptyPattern { .. }), "{err}");
        let err = parse_signatures("rule r { strings: $a = { } condition: any of them }")
            .unwrap_err();
        assert!(matches!(err, SigError::EmptyPattern { .. }), "{err}");
    }

    #[test]
    fn escapes_decode_to_bytes() {
        let rules = parse_signatures(
            r#"rule r { strings: $a = "a\x00b\n\"q\"" condition: any of them }"#,
        )
        .unwrap();
        match &rules[0].patterns[0].kind {
            PatternKind::Text { bytes, .. } => {
                assert_eq!(bytes, &vec![b'a', 0x00, b'b', b'\n', b'"', b'q', b'"']);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_are_stripped() {
        parse_signatures(
            "/* block\ncomment */ rule r { // inline\n strings: $a = \"x\" condition: any of them }",
        )
        .unwrap();
    }
}
