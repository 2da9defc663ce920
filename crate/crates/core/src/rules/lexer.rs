//! Hand-rolled lexer for the rule language.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum TokKind {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Assign,
    Arrow,     // ->
    BangArrow, // !->
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokKind::Str(_) => write!(f, "string literal"),
            TokKind::Int(i) => write!(f, "integer `{i}`"),
            TokKind::Float(x) => write!(f, "float `{x}`"),
            TokKind::LBrace => write!(f, "`{{`"),
            TokKind::RBrace => write!(f, "`}}`"),
            TokKind::LParen => write!(f, "`(`"),
            TokKind::RParen => write!(f, "`)`"),
            TokKind::Comma => write!(f, "`,`"),
            TokKind::Semi => write!(f, "`;`"),
            TokKind::Assign => write!(f, "`=`"),
            TokKind::Arrow => write!(f, "`->`"),
            TokKind::BangArrow => write!(f, "`!->`"),
            TokKind::Plus => write!(f, "`+`"),
            TokKind::Minus => write!(f, "`-`"),
            TokKind::Star => write!(f, "`*`"),
            TokKind::Slash => write!(f, "`/`"),
            TokKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
}

/// Words that cannot be used as identifiers for levels, rules, or variables.
pub const KEYWORDS: &[&str] = &[
    "level", "soft", "rule", "when", "do", "end", "and", "or", "not", "true", "false", "enter",
    "exit", "alert", "set", "exec", "trigger",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_keyword(s)
}

#[derive(Debug)]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut toks = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = source.chars().peekable();

    macro_rules! err {
        ($($arg:tt)*) => {
            return Err(LexError { line, col, message: format!($($arg)*) })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut push = |kind: TokKind| {
            toks.push(Token {
                kind,
                line: tl,
                col: tc,
            })
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                // line comment
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '{' => {
                chars.next();
                col += 1;
                push(TokKind::LBrace);
            }
            '}' => {
                chars.next();
                col += 1;
                push(TokKind::RBrace);
            }
            '(' => {
                chars.next();
                col += 1;
                push(TokKind::LParen);
            }
            ')' => {
                chars.next();
                col += 1;
                push(TokKind::RParen);
            }
            ',' => {
                chars.next();
                col += 1;
                push(TokKind::Comma);
            }
            ';' => {
                chars.next();
                col += 1;
                push(TokKind::Semi);
            }
            '=' => {
                chars.next();
                col += 1;
                push(TokKind::Assign);
            }
            '+' => {
                chars.next();
                col += 1;
                push(TokKind::Plus);
            }
            '*' => {
                chars.next();
                col += 1;
                push(TokKind::Star);
            }
            '/' => {
                chars.next();
                col += 1;
                push(TokKind::Slash);
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push(TokKind::Arrow);
                } else {
                    push(TokKind::Minus);
                }
            }
            '!' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'-') {
                    chars.next();
                    col += 1;
                    if chars.peek() == Some(&'>') {
                        chars.next();
                        col += 1;
                        push(TokKind::BangArrow);
                    } else {
                        err!("expected `!->`");
                    }
                } else {
                    err!("expected `!->`");
                }
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => err!("unterminated string literal"),
                        Some('\n') => err!("unterminated string literal"),
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            col += 1;
                            match chars.next() {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some('r') => s.push('\r'),
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some(other) => err!("unknown escape `\\{other}`"),
                                None => err!("unterminated string literal"),
                            }
                            col += 1;
                        }
                        Some(c) => {
                            col += 1;
                            s.push(c);
                        }
                    }
                }
                push(TokKind::Str(s));
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                let mut is_float = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else if c == '.' && !is_float {
                        is_float = true;
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if is_float {
                    match text.parse::<f64>() {
                        Ok(x) => push(TokKind::Float(x)),
                        Err(_) => err!("invalid float literal `{text}`"),
                    }
                } else {
                    match text.parse::<i64>() {
                        Ok(i) => push(TokKind::Int(i)),
                        Err(_) => err!("integer literal out of range `{text}`"),
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push(TokKind::Ident(text));
            }
            other => err!("unexpected character `{other}`"),
        }
    }
    toks.push(Token {
        kind: TokKind::Eof,
        line,
        col,
    });
    Ok(toks)
}
