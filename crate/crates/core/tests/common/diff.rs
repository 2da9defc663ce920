//! The differential-testing drivers shared by the dedicated oracle suites
//! and the acceptance gate:
//!
//! * engine rule evaluation vs. the naive tree-walking oracle,
//! * the compiled signature matcher vs. brute-force offset scanning,
//! * printer/parser round-trip identity.
//!
//! Each driver panics with full context on the first divergence and returns
//! counters so callers can assert the comparison was not vacuous.

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rips_core::engine::plugin::MapPlugins;
use rips_core::engine::Engine;
use rips_core::rules::{parse_ruleset, pretty_print, validate_ruleset, RuleSet};
use rips_core::sigmatch::{
    parse_signatures, Condition, PatternKind, RawPattern, RawSignature, SignatureSet,
};

use super::{gen, oracle, sigscan};

// ---- engine vs. naive oracle -------------------------------------------

/// The two signature files generated rules may reference.
pub fn raw_signature_files() -> BTreeMap<String, Vec<RawSignature>> {
    let a = vec![RawSignature {
        name: "exec_text".into(),
        patterns: vec![
            RawPattern {
                id: "rm".into(),
                kind: PatternKind::Text { bytes: b"rm -rf".to_vec(), nocase: true },
            },
            RawPattern {
                id: "curl".into(),
                kind: PatternKind::Regex { source: r"curl\s+-s".into() },
            },
        ],
        condition: Condition::AnyOfThem,
    }];
    let b = vec![
        RawSignature {
            name: "elf".into(),
            patterns: vec![RawPattern {
                id: "magic".into(),
                kind: PatternKind::Hex {
                    items: vec![Some(0x7f), Some(0x45), Some(0x4c), Some(0x46), None],
                },
            }],
            condition: Condition::AllOfThem,
        },
        RawSignature {
            name: "greek".into(),
            patterns: vec![
                RawPattern {
                    id: "a".into(),
                    kind: PatternKind::Text { bytes: b"alpha".to_vec(), nocase: false },
                },
                RawPattern {
                    id: "b".into(),
                    kind: PatternKind::Text { bytes: b"beta".to_vec(), nocase: false },
                },
                RawPattern {
                    id: "g".into(),
                    kind: PatternKind::Text { bytes: b"GAMMA".to_vec(), nocase: true },
                },
            ],
            condition: Condition::NOfThem(2),
        },
    ];
    let mut map = BTreeMap::new();
    map.insert("sigs/a.yar".to_string(), a);
    map.insert("sigs/b.yar".to_string(), b);
    map
}

fn compiled_signature_files(
    raw: &BTreeMap<String, Vec<RawSignature>>,
) -> BTreeMap<String, SignatureSet> {
    raw.iter()
        .map(|(path, sigs)| {
            (path.clone(), SignatureSet::compile_raw(sigs.clone()).expect("compiles"))
        })
        .collect()
}

pub fn plugin_table() -> BTreeMap<String, bool> {
    [("p0", true), ("p1", false), ("p2", true)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Compares engine evaluation with the oracle over `cases` generated rule
/// sets × `rounds` events each. Returns (rule-event pairs, activations).
pub fn engine_vs_oracle(seed: u64, cases: usize, rounds: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw_sigs = raw_signature_files();
    let plugins = plugin_table();

    let mut pairs = 0usize;
    let mut fired_total = 0usize;
    for case in 0..cases {
        // round-trip through the printer so the engine sees exactly what a
        // rule file on disk would have produced
        let generated = gen::gen_ruleset(&mut rng);
        let rs = parse_ruleset(&pretty_print(&generated)).expect("generated sets parse");
        validate_ruleset(&rs).expect("generated sets validate");

        let mut engine = Engine::builder(rs.clone())
            .signatures(compiled_signature_files(&raw_sigs))
            .plugins(Box::new(MapPlugins::new(
                plugins.iter().map(|(k, v)| (k.clone(), *v)),
            )))
            .build()
            .expect("generated sets build");

        for round in 0..rounds {
            let ev = gen::gen_event(&mut rng, (case * 10 + round) as i64);
            let evaluation = engine.process_event(&ev);
            let engine_fired: BTreeSet<String> =
                evaluation.activations.iter().map(|a| a.rule.clone()).collect();

            let ctx = oracle::OracleCtx {
                vars: engine.vars(),
                raw_sigs: &raw_sigs,
                plugins: &plugins,
            };
            let oracle_fired: BTreeSet<String> =
                oracle::fired(&ctx, &rs, &ev).into_iter().collect();

            assert_eq!(
                engine_fired, oracle_fired,
                "divergence in case {case} round {round}\nrules:\n{}\nevent: {ev:?}",
                pretty_print(&rs),
            );
            pairs += rs.rules.len();
            fired_total += engine_fired.len();
        }
    }
    (pairs, fired_total)
}

// ---- signature matcher vs. brute force ---------------------------------

/// Regex sources paired with a payload fragment that is guaranteed to match.
const REGEX_POOL: &[(&str, &[u8])] = &[
    (r"rm\s+-rf", b"rm  -rf"),
    (r"a+b", b"aaab"),
    (r"(cu)+rl", b"cucurl"),
    (r"be?ta", b"bta"),
    (r"[0-9]{3}", b"407"),
];

const TEXT_POOL: &[&[u8]] = &[b"rm -rf", b"curl", b"alpha", b"beta", b"GAMMA", b"ls -l", b"@!"];

fn gen_pattern<R: Rng>(rng: &mut R, id: usize) -> RawPattern {
    let kind = match rng.gen_range(0..3) {
        0 => PatternKind::Text {
            bytes: TEXT_POOL[rng.gen_range(0..TEXT_POOL.len())].to_vec(),
            nocase: rng.gen_bool(0.5),
        },
        1 => {
            let len = rng.gen_range(1..=5);
            let items = (0..len)
                .map(|_| rng.gen_bool(0.75).then(|| rng.gen::<u8>()))
                .collect();
            PatternKind::Hex { items }
        }
        _ => PatternKind::Regex {
            source: REGEX_POOL[rng.gen_range(0..REGEX_POOL.len())].0.to_string(),
        },
    };
    RawPattern { id: format!("p{id}"), kind }
}

pub fn gen_signature_set<R: Rng>(rng: &mut R) -> Vec<RawSignature> {
    (0..rng.gen_range(1..=4))
        .map(|s| {
            let patterns: Vec<RawPattern> =
                (0..rng.gen_range(1..=4)).map(|i| gen_pattern(rng, i)).collect();
            let condition = match rng.gen_range(0..3) {
                0 => Condition::AnyOfThem,
                1 => Condition::AllOfThem,
                _ => Condition::NOfThem(rng.gen_range(1..=patterns.len())),
            };
            RawSignature { name: format!("sig{s}"), patterns, condition }
        })
        .collect()
}

/// A payload that, half the time, has a witness for one random pattern of
/// the set spliced in — so both outcomes stay common.
pub fn gen_payload<R: Rng>(rng: &mut R, set: &[RawSignature]) -> Vec<u8> {
    let mut payload: Vec<u8> = (0..rng.gen_range(0..50)).map(|_| rng.gen()).collect();
    if rng.gen_bool(0.5) {
        let sig = &set[rng.gen_range(0..set.len())];
        let pat = &sig.patterns[rng.gen_range(0..sig.patterns.len())];
        let witness: Vec<u8> = match &pat.kind {
            PatternKind::Text { bytes, nocase } => {
                let mut w = bytes.clone();
                if *nocase && rng.gen_bool(0.5) {
                    for b in &mut w {
                        *b = if rng.gen_bool(0.5) {
                            b.to_ascii_uppercase()
                        } else {
                            b.to_ascii_lowercase()
                        };
                    }
                }
                w
            }
            PatternKind::Hex { items } => {
                items.iter().map(|i| i.unwrap_or_else(|| rng.gen())).collect()
            }
            PatternKind::Regex { source } => REGEX_POOL
                .iter()
                .find(|(s, _)| s == source)
                .expect("regex came from the pool")
                .1
                .to_vec(),
        };
        let at = rng.gen_range(0..=payload.len());
        payload.splice(at..at, witness);
    }
    payload
}

/// Renders a raw signature set in the textual grammar, for the parse path.
pub fn render_signatures(set: &[RawSignature]) -> String {
    let mut out = String::new();
    for sig in set {
        out.push_str(&format!("rule {} {{\n  strings:\n", sig.name));
        for pat in &sig.patterns {
            let rhs = match &pat.kind {
                PatternKind::Text { bytes, nocase } => {
                    let text = String::from_utf8(bytes.clone()).expect("pool text is UTF-8");
                    format!("\"{text}\"{}", if *nocase { " nocase" } else { "" })
                }
                PatternKind::Hex { items } => {
                    let cells: Vec<String> = items
                        .iter()
                        .map(|i| match i {
                            Some(b) => format!("{b:02X}"),
                            None => "??".to_string(),
                        })
                        .collect();
                    format!("{{ {} }}", cells.join(" "))
                }
                PatternKind::Regex { source } => format!("/{source}/"),
            };
            out.push_str(&format!("    ${} = {rhs}\n", pat.id));
        }
        let cond = match sig.condition {
            Condition::AnyOfThem => "any of them".to_string(),
            Condition::AllOfThem => "all of them".to_string(),
            Condition::NOfThem(n) => format!("{n} of them"),
        };
        out.push_str(&format!("  condition:\n    {cond}\n}}\n\n"));
    }
    out
}

/// Compares the compiled matcher with the brute-force scanner over `sets`
/// generated signature sets × `rounds` payloads each; every other set is
/// routed through the textual grammar first. Returns total signature hits.
pub fn matcher_vs_bruteforce(seed: u64, sets: usize, rounds: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut match_total = 0usize;
    for case in 0..sets {
        let raw = gen_signature_set(&mut rng);

        let compiled = if case % 2 == 0 {
            SignatureSet::compile_raw(raw.clone()).expect("compiles")
        } else {
            let source = render_signatures(&raw);
            let reparsed = parse_signatures(&source)
                .unwrap_or_else(|e| panic!("rendered source failed to parse: {e}\n{source}"));
            assert_eq!(reparsed, raw, "grammar round-trip changed the set:\n{source}");
            SignatureSet::compile_raw(reparsed).expect("compiles")
        };

        for round in 0..rounds {
            let payload = gen_payload(&mut rng, &raw);
            let expect_names = sigscan::matching_names(&raw, &payload);
            let got_names = compiled.matching_names(&payload);
            assert_eq!(
                got_names, expect_names,
                "case {case} round {round}: payload {payload:02x?}"
            );
            assert_eq!(
                compiled.matches_any(&payload),
                !expect_names.is_empty(),
                "case {case} round {round}"
            );
            // both execution paths, not just the dispatching wrapper
            assert_eq!(compiled.matches_any_seq(&payload), !expect_names.is_empty());
            #[cfg(feature = "parallel")]
            assert_eq!(compiled.matches_any_par(&payload), !expect_names.is_empty());
            match_total += got_names.len();
        }
    }
    match_total
}

// ---- printer/parser round trip -----------------------------------------

pub fn assert_roundtrip(rs: &RuleSet) {
    let printed = pretty_print(rs);
    let reparsed = parse_ruleset(&printed)
        .unwrap_or_else(|e| panic!("printed form failed to parse: {e}\n{printed}"));
    assert_eq!(&reparsed, rs, "round-trip changed the rule set:\n{printed}");
    assert_eq!(
        pretty_print(&reparsed),
        printed,
        "pretty-printing is not canonical"
    );
}

/// Round-trips `n` generated rule sets; returns how many were checked.
pub fn roundtrip_generated(seed: u64, n: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..n {
        let rs = gen::gen_ruleset(&mut rng);
        validate_ruleset(&rs).unwrap_or_else(|e| panic!("case {case} does not validate: {e:?}"));
        assert_roundtrip(&rs);
    }
    n
}

/// Round-trips every `.rips` file under `assets/`; returns how many.
pub fn roundtrip_shipped_files() -> usize {
    let dir = super::workspace_root().join("assets");
    let mut checked = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "rips") {
            let source = std::fs::read_to_string(&path).unwrap();
            let rs = parse_ruleset(&source)
                .unwrap_or_else(|e| panic!("{} failed to parse: {e}", path.display()));
            validate_ruleset(&rs)
                .unwrap_or_else(|e| panic!("{} failed to validate: {e:?}", path.display()));
            assert_roundtrip(&rs);
            checked += 1;
        }
    }
    assert!(checked >= 1, "no .rips files found in {}", dir.display());
    checked
}
