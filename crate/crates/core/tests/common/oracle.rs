//! A deliberately naive rule evaluator, written directly from the language
//! contract and kept independent of the engine:
//!
//! * boolean operators evaluate **both** sides and then combine (the engine
//!   short-circuits — results must agree anyway);
//! * set relations are spelled out as element loops instead of set calls;
//! * payload signatures go through the brute-force scanner in
//!   [`crate::common::sigscan`], not the compiled matcher;
//! * `eval` coercion and comparison are re-derived from the variable's type.
//!
//! The only shared piece is the subexpression *name table* — which function
//! belongs to which event class — because that table is the contract itself.

use std::collections::{BTreeMap, BTreeSet};

use rips_core::engine::event::{Event, EventBody, ExternalEvent, GraphEvent, MessageEvent};
use rips_core::engine::vars::VariableStore;
use rips_core::rules::{Arg, Expr, Rule, RuleClass, RuleSet, SubexprCall};
use rips_core::sigmatch::RawSignature;
use rips_core::value::Value;

use super::sigscan;

pub struct OracleCtx<'a> {
    pub vars: &'a VariableStore,
    /// Uncompiled signature files keyed by the path string rules use.
    pub raw_sigs: &'a BTreeMap<String, Vec<RawSignature>>,
    /// Plugin verdicts; missing names read as a failed plugin (false).
    pub plugins: &'a BTreeMap<String, bool>,
}

/// Which event class a function belongs to, per the language contract.
fn func_class(func: &str) -> RuleClass {
    match func {
        "topicin" | "topicmatches" | "publishercount" | "subscribercount"
        | "publishersinclude" | "subscribersinclude" | "publishers" | "subscribers"
        | "msgtypein" | "msgsubtype" | "plugin" | "payload" => RuleClass::Message,
        "nodes" | "nodesinclude" | "nodecount" | "topics" | "topicsinclude" | "topiccount"
        | "services" | "servicesinclude" | "servicecount" | "topicsubscribers"
        | "topicsubscribersinclude" | "topicsubscribercount" | "topicpublishers"
        | "topicpublishersinclude" | "topicpublishercount" => RuleClass::Graph,
        "idsalert" | "signal" => RuleClass::External,
        _ => RuleClass::Neutral,
    }
}

fn rule_class(rule: &Rule) -> RuleClass {
    for call in rule.expr.calls() {
        let class = func_class(&call.func);
        if class != RuleClass::Neutral {
            return class;
        }
    }
    RuleClass::Neutral
}

/// Names of the rules that fire for this event, in declaration order.
/// Mirrors dispatch: a rule runs when its class matches the event's class,
/// or when the rule is class-neutral.
pub fn fired(ctx: &OracleCtx, rs: &RuleSet, ev: &Event) -> Vec<String> {
    let event_class = match ev.body {
        EventBody::Message(_) => RuleClass::Message,
        EventBody::Graph(_) => RuleClass::Graph,
        EventBody::External(_) => RuleClass::External,
    };
    rs.rules
        .iter()
        .filter(|rule| {
            let class = rule_class(rule);
            (class == event_class || class == RuleClass::Neutral) && eval_full(ctx, &rule.expr, ev)
        })
        .map(|rule| rule.name.clone())
        .collect()
}

/// Full (non-short-circuit) tree walk.
fn eval_full(ctx: &OracleCtx, expr: &Expr, ev: &Event) -> bool {
    match expr {
        Expr::Literal(b) => *b,
        Expr::Not(inner) => !eval_full(ctx, inner, ev),
        Expr::And(l, r) => {
            let lv = eval_full(ctx, l, ev);
            let rv = eval_full(ctx, r, ev);
            lv && rv
        }
        Expr::Or(l, r) => {
            let lv = eval_full(ctx, l, ev);
            let rv = eval_full(ctx, r, ev);
            lv || rv
        }
        Expr::Call(call) => eval_call(ctx, call, ev),
    }
}

fn str_arg<'a>(call: &'a SubexprCall, i: usize) -> &'a str {
    match &call.args[i] {
        Arg::Str(s) => s,
        other => panic!("argument {i} of {} is not a string: {other:?}", call.func),
    }
}

fn int_arg(call: &SubexprCall, i: usize) -> i64 {
    match &call.args[i] {
        Arg::Int(n) => *n,
        other => panic!("argument {i} of {} is not an int: {other:?}", call.func),
    }
}

fn set_arg<'a>(call: &'a SubexprCall, i: usize) -> &'a BTreeSet<String> {
    match &call.args[i] {
        Arg::StrSet(s) => s,
        other => panic!("argument {i} of {} is not a set: {other:?}", call.func),
    }
}

/// Every name in `wanted` occurs in `actual` (message-style include).
fn all_in(wanted: &BTreeSet<String>, actual: &BTreeSet<String>) -> bool {
    wanted.iter().all(|n| actual.iter().any(|m| m == n))
}

fn count_in(n: usize, min: i64, max: i64) -> bool {
    min <= n as i64 && n as i64 <= max
}

fn eval_call(ctx: &OracleCtx, call: &SubexprCall, ev: &Event) -> bool {
    match (&ev.body, func_class(&call.func)) {
        (_, RuleClass::Neutral) => eval_var_compare(ctx, call),
        (EventBody::Message(m), RuleClass::Message) => message_call(ctx, call, m),
        (EventBody::Graph(g), RuleClass::Graph) => graph_call(call, g),
        (EventBody::External(x), RuleClass::External) => external_call(call, x),
        // class mismatch: the contract says false (with a warning)
        _ => false,
    }
}

fn message_call(ctx: &OracleCtx, call: &SubexprCall, m: &MessageEvent) -> bool {
    match call.func.as_str() {
        "topicin" => set_arg(call, 0).iter().any(|t| *t == m.topic),
        "topicmatches" => match regex::Regex::new(str_arg(call, 0)) {
            Ok(re) => re.is_match(&m.topic),
            Err(_) => false,
        },
        "publishercount" => count_in(m.topic_publishers.len(), int_arg(call, 0), int_arg(call, 1)),
        "subscribercount" => {
            count_in(m.topic_subscribers.len(), int_arg(call, 0), int_arg(call, 1))
        }
        // message include: argument ⊆ actual participants
        "publishersinclude" => all_in(set_arg(call, 0), &m.topic_publishers),
        "subscribersinclude" => all_in(set_arg(call, 0), &m.topic_subscribers),
        "publishers" => {
            all_in(set_arg(call, 0), &m.topic_publishers)
                && all_in(&m.topic_publishers, set_arg(call, 0))
        }
        "subscribers" => {
            all_in(set_arg(call, 0), &m.topic_subscribers)
                && all_in(&m.topic_subscribers, set_arg(call, 0))
        }
        "msgtypein" => set_arg(call, 0).iter().any(|t| *t == m.msg_type),
        "msgsubtype" => m.msg_type == str_arg(call, 0) && m.msg_subtype == str_arg(call, 1),
        "plugin" => *ctx.plugins.get(str_arg(call, 0)).unwrap_or(&false),
        "payload" => match ctx.raw_sigs.get(str_arg(call, 0)) {
            Some(raw) => sigscan::any_matches(raw, &m.payload),
            None => false,
        },
        other => panic!("not a message function: {other}"),
    }
}

fn graph_call(call: &SubexprCall, g: &GraphEvent) -> bool {
    let snap = &g.snapshot;
    let topic_names: BTreeSet<String> = snap.topics.keys().cloned().collect();
    let node_services = |n: &str| -> BTreeSet<String> {
        snap.services.get(n).cloned().unwrap_or_default()
    };
    let topic_pubs = |t: &str| -> BTreeSet<String> {
        snap.topics.get(t).map(|i| i.publishers.clone()).unwrap_or_default()
    };
    let topic_subs = |t: &str| -> BTreeSet<String> {
        snap.topics.get(t).map(|i| i.subscribers.clone()).unwrap_or_default()
    };
    // graph include: actual entities ⊆ argument
    let eq = |a: &BTreeSet<String>, b: &BTreeSet<String>| all_in(a, b) && all_in(b, a);
    match call.func.as_str() {
        "nodes" => eq(&snap.nodes, set_arg(call, 0)),
        "nodesinclude" => all_in(&snap.nodes, set_arg(call, 0)),
        "nodecount" => count_in(snap.nodes.len(), int_arg(call, 0), int_arg(call, 1)),
        "topics" => eq(&topic_names, set_arg(call, 0)),
        "topicsinclude" => all_in(&topic_names, set_arg(call, 0)),
        "topiccount" => count_in(topic_names.len(), int_arg(call, 0), int_arg(call, 1)),
        "services" => eq(&node_services(str_arg(call, 0)), set_arg(call, 1)),
        "servicesinclude" => all_in(&node_services(str_arg(call, 0)), set_arg(call, 1)),
        "servicecount" => count_in(
            node_services(str_arg(call, 0)).len(),
            int_arg(call, 1),
            int_arg(call, 2),
        ),
        "topicsubscribers" => eq(&topic_subs(str_arg(call, 0)), set_arg(call, 1)),
        "topicsubscribersinclude" => all_in(&topic_subs(str_arg(call, 0)), set_arg(call, 1)),
        "topicsubscribercount" => count_in(
            topic_subs(str_arg(call, 0)).len(),
            int_arg(call, 1),
            int_arg(call, 2),
        ),
        "topicpublishers" => eq(&topic_pubs(str_arg(call, 0)), set_arg(call, 1)),
        "topicpublishersinclude" => all_in(&topic_pubs(str_arg(call, 0)), set_arg(call, 1)),
        "topicpublishercount" => count_in(
            topic_pubs(str_arg(call, 0)).len(),
            int_arg(call, 1),
            int_arg(call, 2),
        ),
        other => panic!("not a graph function: {other}"),
    }
}

fn external_call(call: &SubexprCall, x: &ExternalEvent) -> bool {
    match (call.func.as_str(), x) {
        ("idsalert", ExternalEvent::IdsAlert { alert_id }) => alert_id == str_arg(call, 0),
        ("signal", ExternalEvent::ControlSignal { sig }) => sig == str_arg(call, 0),
        _ => false,
    }
}

/// `eval(var, op, text)` re-derived: the variable's type decides how the
/// text coerces; undefined variables, unparsable text, and undefined
/// comparisons are all false.
fn eval_var_compare(ctx: &OracleCtx, call: &SubexprCall) -> bool {
    let Some(current) = ctx.vars.get(str_arg(call, 0)) else {
        return false;
    };
    let op = str_arg(call, 1);
    let text = str_arg(call, 2);
    let ord = match &current {
        Value::Int(a) => match text.trim().parse::<i64>() {
            Ok(b) => a.cmp(&b),
            Err(_) => return false,
        },
        Value::Float(a) => match text.trim().parse::<f64>() {
            Ok(b) => match a.partial_cmp(&b) {
                Some(o) => o,
                None => return false,
            },
            Err(_) => return false,
        },
        Value::Str(a) => a.as_str().cmp(text),
        Value::Bool(a) => match text.trim() {
            "true" => a.cmp(&true),
            "false" => a.cmp(&false),
            _ => return false,
        },
        // set-typed variables never appear in generated rules
        Value::Set(_) => return false,
    };
    match op {
        "==" => ord.is_eq(),
        "!=" => ord.is_ne(),
        "<" => ord.is_lt(),
        ">" => ord.is_gt(),
        "<=" => ord.is_le(),
        ">=" => ord.is_ge(),
        _ => false,
    }
}
