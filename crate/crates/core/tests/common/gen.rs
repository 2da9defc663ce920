//! Seeded random generators for rule sets and events.
//!
//! Generated rule sets are always well-formed: they parse back from their
//! pretty-printed form and pass `validate_ruleset`, so they can exercise the
//! printer, the parser, and the engine without hand-holding. Argument values
//! are drawn from small pools shared with the event generator, so a healthy
//! fraction of subexpressions actually hit.

use std::collections::BTreeSet;

use rand::prelude::*;
use rips_core::engine::event::{
    Event, EventBody, ExternalEvent, GraphChange, GraphEvent, MessageEvent,
};
use rips_core::rules::{
    catalog, Action, ActionChain, Arg, ChainOp, ChainStep, Expr, LevelDecl, Rule, RuleClass,
    RuleSet, SubexprCall, ValueExpr,
};
use rips_core::sim::{GraphSnapshot, TopicInfo};

pub const TOPICS: &[&str] = &["/cmd_vel", "/camera/image_raw", "/scan", "/tf", "/odom"];
pub const NODES: &[&str] = &["alpha", "beta", "gamma", "delta", "rogue"];
pub const SERVICES: &[&str] = &["reset", "configure", "describe"];
pub const MSG_TYPES: &[&str] = &["std_msgs", "sensor_msgs", "geometry_msgs"];
pub const MSG_SUBTYPES: &[&str] = &["String", "Image", "Twist", "Header"];
pub const ALERT_IDS: &[&str] = &["port_scan", "auth_fail", "fs_change"];
pub const SIGNALS: &[&str] = &["USR1", "USR2"];
/// All syntactically valid; `topicmatches` arguments must compile.
pub const REGEXES: &[&str] = &["^/cmd", "image_raw$", "/sc.n", "^/(tf|odom)$", "a.*m"];
/// Keys the oracle/engine signature maps are built around. The engine
/// refuses to build with an unresolvable signature path, so the pool only
/// names sets the tests actually register.
pub const SIG_PATHS: &[&str] = &["sigs/a.yar", "sigs/b.yar"];
/// `ghost` is deliberately absent from the plugin table.
pub const PLUGINS: &[&str] = &["p0", "p1", "p2", "ghost"];
pub const LEVEL_NAMES: &[&str] = &["DEFAULT", "ALERT", "COMPROMISED", "HALT", "LOCKDOWN"];
pub const EVAL_VARS: &[&str] = &["Time", "Uptime", "Level", "hits"];

const MESSAGE_FUNCS: &[&str] = &[
    "topicin",
    "topicmatches",
    "publishercount",
    "subscribercount",
    "publishersinclude",
    "subscribersinclude",
    "publishers",
    "subscribers",
    "msgtypein",
    "msgsubtype",
    "plugin",
    "payload",
];
const GRAPH_FUNCS: &[&str] = &[
    "nodes",
    "nodesinclude",
    "nodecount",
    "topics",
    "topicsinclude",
    "topiccount",
    "services",
    "servicesinclude",
    "servicecount",
    "topicsubscribers",
    "topicsubscribersinclude",
    "topicsubscribercount",
    "topicpublishers",
    "topicpublishersinclude",
    "topicpublishercount",
];
const EXTERNAL_FUNCS: &[&str] = &["idsalert", "signal"];

pub fn pick<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn subset<R: Rng>(rng: &mut R, pool: &[&str], p: f64) -> BTreeSet<String> {
    pool.iter()
        .filter(|_| rng.gen_bool(p))
        .map(|s| s.to_string())
        .collect()
}

/// Arguments for one catalog function, with strings drawn from the pools
/// the event generator also uses.
fn gen_args<R: Rng>(rng: &mut R, func: &str) -> Vec<Arg> {
    // Count arguments share one shape: closed range with some negatives and
    // some empty ranges, biased so hits and misses both happen.
    let range = |rng: &mut R| {
        let min = rng.gen_range(-1..=3i64);
        let max = min + rng.gen_range(0..=3i64);
        (Arg::Int(min), Arg::Int(max))
    };
    match func {
        "topicin" | "topicsinclude" | "topics" => vec![Arg::StrSet(subset(rng, TOPICS, 0.4))],
        "topicmatches" => vec![Arg::Str(pick(rng, REGEXES).into())],
        "publishercount" | "subscribercount" | "nodecount" | "topiccount" => {
            let (a, b) = range(rng);
            vec![a, b]
        }
        "publishersinclude" | "subscribersinclude" | "publishers" | "subscribers" | "nodes"
        | "nodesinclude" => vec![Arg::StrSet(subset(rng, NODES, 0.4))],
        "msgtypein" => vec![Arg::StrSet(subset(rng, MSG_TYPES, 0.4))],
        "msgsubtype" => vec![
            Arg::Str(pick(rng, MSG_TYPES).into()),
            Arg::Str(pick(rng, MSG_SUBTYPES).into()),
        ],
        "plugin" => vec![Arg::Str(pick(rng, PLUGINS).into())],
        "payload" => vec![Arg::Str(pick(rng, SIG_PATHS).into())],
        "services" | "servicesinclude" => vec![
            Arg::Str(pick(rng, NODES).into()),
            Arg::StrSet(subset(rng, SERVICES, 0.4)),
        ],
        "servicecount" => {
            let (a, b) = range(rng);
            vec![Arg::Str(pick(rng, NODES).into()), a, b]
        }
        "topicsubscribers" | "topicsubscribersinclude" | "topicpublishers"
        | "topicpublishersinclude" => vec![
            Arg::Str(pick(rng, TOPICS).into()),
            Arg::StrSet(subset(rng, NODES, 0.4)),
        ],
        "topicsubscribercount" | "topicpublishercount" => {
            let (a, b) = range(rng);
            vec![Arg::Str(pick(rng, TOPICS).into()), a, b]
        }
        "idsalert" => vec![Arg::Str(pick(rng, ALERT_IDS).into())],
        "signal" => vec![Arg::Str(pick(rng, SIGNALS).into())],
        "eval" => {
            let var = pick(rng, EVAL_VARS);
            let op = pick(rng, &["==", "!=", "<", ">", "<=", ">="]);
            let value = match var {
                "Level" => pick(rng, LEVEL_NAMES).to_string(),
                _ => rng.gen_range(0..200i64).to_string(),
            };
            vec![Arg::Str(var.into()), Arg::Str(op.into()), Arg::Str(value)]
        }
        other => panic!("no argument generator for `{other}`"),
    }
}

fn gen_call<R: Rng>(rng: &mut R, funcs: &[&str]) -> SubexprCall {
    let func = pick(rng, funcs).to_string();
    let args = gen_args(rng, &func);
    SubexprCall { func, args }
}

/// Expression over one event class (plus `eval` and literals). External
/// rules carry at most one external call, as the validator demands.
fn gen_expr<R: Rng>(rng: &mut R, depth: u32, class: RuleClass, ext_left: &mut u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.45) {
        return match class {
            RuleClass::Neutral => match rng.gen_range(0..3) {
                0 => Expr::Literal(rng.gen_bool(0.5)),
                _ => Expr::Call(gen_call(rng, &["eval"])),
            },
            RuleClass::External if *ext_left > 0 => {
                *ext_left -= 1;
                Expr::Call(gen_call(rng, EXTERNAL_FUNCS))
            }
            RuleClass::External => match rng.gen_range(0..2) {
                0 => Expr::Literal(rng.gen_bool(0.5)),
                _ => Expr::Call(gen_call(rng, &["eval"])),
            },
            RuleClass::Message => {
                let funcs = if rng.gen_bool(0.15) { &["eval"][..] } else { MESSAGE_FUNCS };
                Expr::Call(gen_call(rng, funcs))
            }
            RuleClass::Graph => {
                let funcs = if rng.gen_bool(0.15) { &["eval"][..] } else { GRAPH_FUNCS };
                Expr::Call(gen_call(rng, funcs))
            }
        };
    }
    match rng.gen_range(0..3) {
        0 => Expr::And(
            Box::new(gen_expr(rng, depth - 1, class, ext_left)),
            Box::new(gen_expr(rng, depth - 1, class, ext_left)),
        ),
        1 => Expr::Or(
            Box::new(gen_expr(rng, depth - 1, class, ext_left)),
            Box::new(gen_expr(rng, depth - 1, class, ext_left)),
        ),
        _ => Expr::Not(Box::new(gen_expr(rng, depth - 1, class, ext_left))),
    }
}

/// Value expression for `set` values and `exec` arguments. Numeric literals
/// are non-negative (negation is an explicit `Neg` node, matching how the
/// parser reads a leading minus) and floats are multiples of 0.25 so the
/// printed form reparses to the identical bits.
fn gen_vexpr<R: Rng>(rng: &mut R, depth: u32) -> ValueExpr {
    if depth == 0 || rng.gen_bool(0.5) {
        return match rng.gen_range(0..6) {
            0 => ValueExpr::Int(rng.gen_range(0..10_000)),
            1 => ValueExpr::Float(rng.gen_range(0..400) as f64 * 0.25),
            2 => ValueExpr::Str(pick(rng, &["hi", "warn: \"x\"", "a\tb", "n\nl", "w\\w"]).into()),
            3 => ValueExpr::Bool(rng.gen_bool(0.5)),
            4 => ValueExpr::Var(pick(rng, &["hits", "seen", "x1", "Time"]).into()),
            _ => {
                let n = rng.gen_range(0..=3);
                let elems = if rng.gen_bool(0.5) {
                    (0..n).map(|_| ValueExpr::Int(rng.gen_range(0..50))).collect()
                } else {
                    (0..n)
                        .map(|_| ValueExpr::Str(pick(rng, NODES).into()))
                        .collect()
                };
                ValueExpr::SetLit(elems)
            }
        };
    }
    let sub = |rng: &mut R| Box::new(gen_vexpr(rng, depth - 1));
    match rng.gen_range(0..5) {
        0 => ValueExpr::Add(sub(rng), sub(rng)),
        1 => ValueExpr::Sub(sub(rng), sub(rng)),
        2 => ValueExpr::Mul(sub(rng), sub(rng)),
        3 => ValueExpr::Div(sub(rng), sub(rng)),
        _ => ValueExpr::Neg(sub(rng)),
    }
}

fn gen_chain<R: Rng>(rng: &mut R, levels: &[LevelDecl]) -> ActionChain {
    let len = rng.gen_range(1..=4);
    let mut steps = Vec::with_capacity(len);
    for i in 0..len {
        let action = match rng.gen_range(0..4) {
            0 => Action::Alert(
                pick(rng, &["noticed", "warn: \"quoted\"", "tab\tsep", "uh oh"]).into(),
            ),
            1 => Action::Set {
                var: pick(rng, &["hits", "seen", "x1"]).into(),
                value: gen_vexpr(rng, 2),
            },
            2 => Action::Exec {
                program: pick(rng, &["usb_alarm", "bin/notify.sh", "spaced name"]).into(),
                args: (0..rng.gen_range(0..=2)).map(|_| gen_vexpr(rng, 1)).collect(),
            },
            _ => Action::Trigger(levels[rng.gen_range(0..levels.len())].name.clone()),
        };
        let op = if i + 1 == len {
            ChainOp::End
        } else {
            match rng.gen_range(0..3) {
                0 => ChainOp::ThenIfOk,
                1 => ChainOp::ThenIfFail,
                _ => ChainOp::Seq,
            }
        };
        steps.push(ChainStep { action, op });
    }
    ActionChain { steps }
}

/// Replicates the parser's class inference: the first non-neutral call wins.
fn infer_class(expr: &Expr) -> RuleClass {
    for call in expr.calls() {
        if let Some(sig) = catalog::lookup(&call.func) {
            if sig.class != RuleClass::Neutral {
                return sig.class;
            }
        }
    }
    RuleClass::Neutral
}

/// A complete random rule set: 1-4 levels, 1-5 rules, every syntactic
/// feature reachable. Always parses back and always validates.
pub fn gen_ruleset<R: Rng>(rng: &mut R) -> RuleSet {
    let mut names: Vec<&str> = LEVEL_NAMES.to_vec();
    names.shuffle(rng);
    names.truncate(rng.gen_range(1..=4));
    let levels: Vec<LevelDecl> = names
        .iter()
        .map(|n| LevelDecl {
            name: n.to_string(),
            soft: rng.gen_bool(0.4),
            enter_proc: rng.gen_bool(0.25).then(|| "procs/enter one.sh".to_string()),
            exit_proc: rng.gen_bool(0.25).then(|| "procs/exit.sh".to_string()),
        })
        .collect();

    let n_rules = rng.gen_range(1..=5);
    let mut rules = Vec::with_capacity(n_rules);
    let mut signature_paths = BTreeSet::new();
    for i in 0..n_rules {
        let class = match rng.gen_range(0..4) {
            0 => RuleClass::Message,
            1 => RuleClass::Graph,
            2 => RuleClass::External,
            _ => RuleClass::Neutral,
        };
        let mut ext_left = 1u32;
        let depth = rng.gen_range(0..=3);
        let expr = gen_expr(rng, depth, class, &mut ext_left);
        for call in expr.calls() {
            if call.func == "payload" {
                signature_paths.insert(call.args[0].as_str().unwrap().to_string());
            }
        }
        let chains: Vec<ActionChain> =
            (0..rng.gen_range(1..=3)).map(|_| gen_chain(rng, &levels)).collect();
        rules.push(Rule {
            name: format!("r{i}"),
            inferred_class: infer_class(&expr),
            expr,
            chains,
        });
    }
    RuleSet {
        levels,
        rules,
        signature_paths,
    }
}

fn payload_bytes<R: Rng>(rng: &mut R) -> Vec<u8> {
    let mut payload: Vec<u8> = (0..rng.gen_range(0..40)).map(|_| rng.gen_range(32..127)).collect();
    // plant recognisable fragments so `payload()` signatures sometimes hit
    if rng.gen_bool(0.4) {
        let plant: &[u8] = match rng.gen_range(0..4) {
            0 => b"rm -rf /tmp",
            1 => b"RM -RF",
            2 => b"curl -s http://x",
            _ => &[0x7f, 0x45, 0x4c, 0x46, 0x02, 0x01],
        };
        let at = rng.gen_range(0..=payload.len());
        payload.splice(at..at, plant.iter().copied());
    }
    payload
}

fn gen_snapshot<R: Rng>(rng: &mut R) -> GraphSnapshot {
    let mut snap = GraphSnapshot {
        nodes: subset(rng, NODES, 0.5),
        ..Default::default()
    };
    for topic in TOPICS {
        if rng.gen_bool(0.4) {
            snap.topics.insert(
                topic.to_string(),
                TopicInfo {
                    publishers: subset(rng, NODES, 0.3),
                    subscribers: subset(rng, NODES, 0.3),
                    msg_type: pick(rng, MSG_TYPES).into(),
                    msg_subtype: pick(rng, MSG_SUBTYPES).into(),
                },
            );
        }
    }
    for node in NODES {
        if rng.gen_bool(0.3) {
            snap.services.insert(node.to_string(), subset(rng, SERVICES, 0.5));
        }
    }
    snap.version = rng.gen_range(0..1000);
    snap
}

/// A random event of any class, built from the same pools the rule
/// generator draws arguments from.
pub fn gen_event<R: Rng>(rng: &mut R, tick: i64) -> Event {
    let body = match rng.gen_range(0..3) {
        0 => EventBody::Message(MessageEvent {
            topic: pick(rng, TOPICS).into(),
            msg_type: pick(rng, MSG_TYPES).into(),
            msg_subtype: pick(rng, MSG_SUBTYPES).into(),
            payload: payload_bytes(rng),
            publisher: pick(rng, NODES).into(),
            topic_publishers: subset(rng, NODES, 0.4),
            topic_subscribers: subset(rng, NODES, 0.4),
        }),
        1 => {
            let change = match rng.gen_range(0..6) {
                0 => GraphChange::NodeAdded { node: pick(rng, NODES).into() },
                1 => GraphChange::NodeRemoved { node: pick(rng, NODES).into() },
                2 => GraphChange::TopicAdded { topic: pick(rng, TOPICS).into() },
                3 => GraphChange::TopicRemoved { topic: pick(rng, TOPICS).into() },
                4 => GraphChange::EndpointChanged { topic: pick(rng, TOPICS).into() },
                _ => GraphChange::ServiceChanged {
                    node: pick(rng, NODES).into(),
                    service: pick(rng, SERVICES).into(),
                },
            };
            EventBody::Graph(GraphEvent {
                change,
                snapshot: gen_snapshot(rng),
            })
        }
        _ => EventBody::External(if rng.gen_bool(0.5) {
            ExternalEvent::IdsAlert { alert_id: pick(rng, ALERT_IDS).into() }
        } else {
            ExternalEvent::ControlSignal { sig: pick(rng, SIGNALS).into() }
        }),
    };
    Event { tick, body }
}
