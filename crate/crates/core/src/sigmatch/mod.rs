//! Payload signature matching: a compiled subset of the YARA language.
//!
//! Text patterns are searched with Aho-Corasick automata (including the
//! `nocase` modifier), hex patterns with a masked byte scan that honours
//! `??` wildcards, and regex patterns with byte-oriented regular
//! expressions. A signature fires according to its condition (`any of
//! them`, `all of them`, `N of them`); a payload matches a set when any
//! signature fires.

mod parse;

pub use parse::{parse_signatures, SigError};

use aho_corasick::AhoCorasick;

/// How many signatures a set needs before matching fans out across threads.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 8;

/// An uncompiled signature as parsed from source.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSignature {
    pub name: String,
    pub patterns: Vec<RawPattern>,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawPattern {
    pub id: String,
    pub kind: PatternKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternKind {
    Text { bytes: Vec<u8>, nocase: bool },
    /// One entry per byte position; `None` is the `??` wildcard.
    Hex { items: Vec<Option<u8>> },
    Regex { source: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    AnyOfThem,
    AllOfThem,
    NOfThem(usize),
}

/// A compiled signature file, ready for matching.
#[derive(Debug)]
pub struct SignatureSet {
    pub signatures: Vec<Signature>,
}

#[derive(Debug)]
pub struct Signature {
    pub name: String,
    pub condition: Condition,
    patterns: Vec<CompiledPattern>,
}

#[derive(Debug)]
struct CompiledPattern {
    #[allow(dead_code)] // kept for diagnostics and tests
    id: String,
    matcher: Matcher,
}

#[derive(Debug)]
enum Matcher {
    Text(AhoCorasick),
    Hex(Vec<Option<u8>>),
    Regex(regex::bytes::Regex),
}

impl SignatureSet {
    /// Parses and compiles signature source text.
    pub fn compile(source: &str) -> Result<SignatureSet, SigError> {
        Self::compile_raw(parse_signatures(source)?)
    }

    pub fn compile_raw(raw: Vec<RawSignature>) -> Result<SignatureSet, SigError> {
        let mut signatures = Vec::with_capacity(raw.len());
        for sig in raw {
            if let Condition::NOfThem(k) = sig.condition {
                if k < 1 || k > sig.patterns.len() {
                    return Err(SigError::BadCount {
                        rule: sig.name,
                        k,
                        patterns: sig.patterns.len(),
                    });
                }
            }
            let mut patterns = Vec::with_capacity(sig.patterns.len());
            for pat in sig.patterns {
                let matcher = match pat.kind {
                    PatternKind::Text { bytes, nocase } => {
                        let ac = AhoCorasick::builder()
                            .ascii_case_insensitive(nocase)
                            .build([&bytes])
                            .map_err(|e| SigError::Syntax {
                                line: 0,
                                message: format!("pattern ${}: {e}", pat.id),
                            })?;
                        Matcher::Text(ac)
                    }
                    PatternKind::Hex { items } => Matcher::Hex(items),
                    PatternKind::Regex { source } => {
                        let re = regex::bytes::RegexBuilder::new(&source)
                            .unicode(false)
                            .build()
                            .map_err(|e| SigError::BadRegex {
                                rule: sig.name.clone(),
                                id: pat.id.clone(),
                                message: e.to_string(),
                            })?;
                        Matcher::Regex(re)
                    }
                };
                patterns.push(CompiledPattern {
                    id: pat.id,
                    matcher,
                });
            }
            signatures.push(Signature {
                name: sig.name,
                condition: sig.condition,
                patterns,
            });
        }
        Ok(SignatureSet { signatures })
    }

    /// True when any signature in the set fires on the payload. Large sets
    /// fan out across threads when the `parallel` feature is enabled.
    pub fn matches_any(&self, payload: &[u8]) -> bool {
        #[cfg(feature = "parallel")]
        if self.signatures.len() >= PAR_THRESHOLD {
            return self.matches_any_par(payload);
        }
        self.matches_any_seq(payload)
    }

    pub fn matches_any_seq(&self, payload: &[u8]) -> bool {
        self.signatures.iter().any(|s| s.matches(payload))
    }

    #[cfg(feature = "parallel")]
    pub fn matches_any_par(&self, payload: &[u8]) -> bool {
        use rayon::prelude::*;
        self.signatures.par_iter().any(|s| s.matches(payload))
    }

    /// Names of every signature that fires, in declaration order.
    pub fn matching_names(&self, payload: &[u8]) -> Vec<&str> {
        self.signatures
            .iter()
            .filter(|s| s.matches(payload))
            .map(|s| s.name.as_str())
            .collect()
    }
}

impl Signature {
    pub fn matches(&self, payload: &[u8]) -> bool {
        match self.condition {
            Condition::AnyOfThem => self.patterns.iter().any(|p| p.matches(payload)),
            Condition::AllOfThem => self.patterns.iter().all(|p| p.matches(payload)),
            Condition::NOfThem(n) => {
                let mut count = 0usize;
                for p in &self.patterns {
                    if p.matches(payload) {
                        count += 1;
                        if count >= n {
                            return true;
                        }
                    }
                }
                // compile enforces 1 <= n <= |patterns|, so falling through
                // means fewer than n patterns hit
                false
            }
        }
    }
}

impl CompiledPattern {
    fn matches(&self, payload: &[u8]) -> bool {
        match &self.matcher {
            Matcher::Text(ac) => ac.is_match(payload),
            Matcher::Hex(items) => hex_matches(items, payload),
            Matcher::Regex(re) => re.is_match(payload),
        }
    }
}

/// Masked scan: does the byte sequence (with wildcards) occur anywhere?
fn hex_matches(items: &[Option<u8>], payload: &[u8]) -> bool {
    let n = items.len();
    if n == 0 || payload.len() < n {
        return false;
    }
    'outer: for start in 0..=payload.len() - n {
        for (i, item) in items.iter().enumerate() {
            if let Some(b) = item {
                if payload[start + i] != *b {
                    continue 'outer;
                }
            }
        }
        return true;
    }
    false
}
