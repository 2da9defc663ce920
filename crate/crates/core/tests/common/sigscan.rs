//! Brute-force signature matching, used as the reference the compiled
//! matcher is compared against. Text and hex patterns are checked by
//! scanning every payload offset by hand; conditions are counted naively.

use rips_core::sigmatch::{Condition, PatternKind, RawSignature};

/// Does this pattern occur anywhere in the payload?
pub fn pattern_hits(kind: &PatternKind, payload: &[u8]) -> bool {
    match kind {
        PatternKind::Text { bytes, nocase } => {
            assert!(!bytes.is_empty(), "generator never emits empty text patterns");
            if payload.len() < bytes.len() {
                return false;
            }
            payload.windows(bytes.len()).any(|w| {
                if *nocase {
                    w.eq_ignore_ascii_case(bytes)
                } else {
                    w == &bytes[..]
                }
            })
        }
        PatternKind::Hex { items } => {
            assert!(!items.is_empty(), "generator never emits empty hex patterns");
            if payload.len() < items.len() {
                return false;
            }
            payload.windows(items.len()).any(|w| {
                w.iter()
                    .zip(items)
                    .all(|(have, want)| want.map_or(true, |b| *have == b))
            })
        }
        PatternKind::Regex { source } => regex::bytes::RegexBuilder::new(source)
            .unicode(false)
            .build()
            .expect("generator only emits valid regexes")
            .is_match(payload),
    }
}

pub fn sig_matches(sig: &RawSignature, payload: &[u8]) -> bool {
    let hits = sig
        .patterns
        .iter()
        .filter(|p| pattern_hits(&p.kind, payload))
        .count();
    match sig.condition {
        Condition::AnyOfThem => hits >= 1,
        Condition::AllOfThem => hits == sig.patterns.len(),
        Condition::NOfThem(n) => hits >= n,
    }
}

pub fn any_matches(raw: &[RawSignature], payload: &[u8]) -> bool {
    raw.iter().any(|s| sig_matches(s, payload))
}

/// Names of the signatures that fire, in declaration order.
pub fn matching_names<'a>(raw: &'a [RawSignature], payload: &[u8]) -> Vec<&'a str> {
    raw.iter()
        .filter(|s| sig_matches(s, payload))
        .map(|s| s.name.as_str())
        .collect()
}
