//! Subexpression evaluation against events.
//!
//! Semantics worth reading twice:
//! * message-class `*include(set)` asks whether every name in the argument
//!   participates (argument ⊆ actual);
//! * graph-class `*include(set)` mirrors `nodesinclude`: the actual entities
//!   must all be included in the argument (actual ⊆ argument);
//! * exact variants are set equality, `*count` variants are the closed
//!   interval [min..max];
//! * an absent topic or node reads as empty sets, then the normal rules
//!   apply.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use super::event::{Event, EventBody, ExternalEvent, GraphEvent, MessageEvent};
use super::plugin::PluginRunner;
use super::vars::VariableStore;
use super::Warning;
use crate::rules::{catalog, Arg, RuleClass, SubexprCall};
use crate::sigmatch::SignatureSet;
use crate::value::CompareOp;

/// Shared evaluation context: everything a subexpression may consult.
pub struct EvalCtx<'a> {
    pub rule: &'a str,
    pub vars: &'a VariableStore,
    pub signatures: &'a BTreeMap<String, SignatureSet>,
    pub plugins: &'a dyn PluginRunner,
    /// Total plugin invocations; short-circuit tests watch this.
    pub plugin_calls: &'a AtomicU64,
}

impl<'a> EvalCtx<'a> {
    fn warn(&self, warnings: &mut Vec<Warning>, message: impl Into<String>) {
        warnings.push(Warning {
            rule: self.rule.to_string(),
            message: message.into(),
        });
    }
}

/// Evaluates one subexpression call against an event. Runtime failures
/// (missing plugin, missing variable, class mismatch) yield `false` plus a
/// warning record — they never abort evaluation.
pub fn eval_call(
    ctx: &EvalCtx,
    call: &SubexprCall,
    event: &Event,
    warnings: &mut Vec<Warning>,
) -> bool {
    let Some(sig) = catalog::lookup(&call.func) else {
        ctx.warn(warnings, format!("unknown subexpression `{}`", call.func));
        return false;
    };
    match sig.class {
        RuleClass::Neutral => eval_neutral(ctx, call, warnings),
        RuleClass::Message => match &event.body {
            EventBody::Message(ev) => eval_msg_subexpr(ctx, call, ev, warnings),
            _ => {
                ctx.warn(
                    warnings,
                    format!("`{}` evaluated against a non-message event", call.func),
                );
                false
            }
        },
        RuleClass::Graph => match &event.body {
            EventBody::Graph(ev) => eval_graph_subexpr(ctx, call, ev, warnings),
            _ => {
                ctx.warn(
                    warnings,
                    format!("`{}` evaluated against a non-graph event", call.func),
                );
                false
            }
        },
        RuleClass::External => match &event.body {
            EventBody::External(ev) => eval_external_subexpr(call, ev),
            _ => {
                ctx.warn(
                    warnings,
                    format!("`{}` evaluated against a non-external event", call.func),
                );
                false
            }
        },
    }
}

fn arg_str(call: &SubexprCall, i: usize) -> &str {
    call.args.get(i).and_then(Arg::as_str).unwrap_or("")
}

fn arg_int(call: &SubexprCall, i: usize) -> i64 {
    call.args.get(i).and_then(Arg::as_int).unwrap_or(0)
}

fn empty_set() -> &'static BTreeSet<String> {
    static CELL: std::sync::OnceLock<BTreeSet<String>> = std::sync::OnceLock::new();
    CELL.get_or_init(BTreeSet::new)
}

fn arg_set(call: &SubexprCall, i: usize) -> &BTreeSet<String> {
    call.args.get(i).and_then(Arg::as_set).unwrap_or_else(|| empty_set())
}

fn in_range(n: usize, min: i64, max: i64) -> bool {
    let n = n as i64;
    min <= n && n <= max
}

pub fn eval_msg_subexpr(
    ctx: &EvalCtx,
    call: &SubexprCall,
    ev: &MessageEvent,
    warnings: &mut Vec<Warning>,
) -> bool {
    match call.func.as_str() {
        "topicin" => arg_set(call, 0).contains(&ev.topic),
        "topicmatches" => match regex::Regex::new(arg_str(call, 0)) {
            Ok(re) => re.is_match(&ev.topic),
            Err(e) => {
                ctx.warn(warnings, format!("topicmatches: invalid regex: {e}"));
                false
            }
        },
        "publishercount" => in_range(ev.topic_publishers.len(), arg_int(call, 0), arg_int(call, 1)),
        "subscribercount" => {
            in_range(ev.topic_subscribers.len(), arg_int(call, 0), arg_int(call, 1))
        }
        // message-class include: every name in the argument participates
        "publishersinclude" => arg_set(call, 0).is_subset(&ev.topic_publishers),
        "subscribersinclude" => arg_set(call, 0).is_subset(&ev.topic_subscribers),
        "publishers" => *arg_set(call, 0) == ev.topic_publishers,
        "subscribers" => *arg_set(call, 0) == ev.topic_subscribers,
        "msgtypein" => arg_set(call, 0).contains(&ev.msg_type),
        "msgsubtype" => ev.msg_type == arg_str(call, 0) && ev.msg_subtype == arg_str(call, 1),
        "plugin" => {
            ctx.plugin_calls.fetch_add(1, Ordering::SeqCst);
            match ctx.plugins.run(arg_str(call, 0), ev) {
                Ok(verdict) => verdict,
                Err(reason) => {
                    ctx.warn(warnings, reason);
                    false
                }
            }
        }
        "payload" => {
            let path = arg_str(call, 0);
            match ctx.signatures.get(path) {
                Some(set) => set.matches_any(&ev.payload),
                None => {
                    ctx.warn(warnings, format!("payload: signatures `{path}` not loaded"));
                    false
                }
            }
        }
        other => {
            ctx.warn(warnings, format!("`{other}` is not a message subexpression"));
            false
        }
    }
}

pub fn eval_graph_subexpr(
    ctx: &EvalCtx,
    call: &SubexprCall,
    ev: &GraphEvent,
    warnings: &mut Vec<Warning>,
) -> bool {
    let g = &ev.snapshot;
    let topic_names = || -> BTreeSet<String> { g.topics.keys().cloned().collect() };
    match call.func.as_str() {
        "nodes" => g.nodes == *arg_set(call, 0),
        // graph-class include: the actual entities fit inside the argument
        "nodesinclude" => g.nodes.is_subset(arg_set(call, 0)),
        "nodecount" => in_range(g.nodes.len(), arg_int(call, 0), arg_int(call, 1)),
        "topics" => topic_names() == *arg_set(call, 0),
        "topicsinclude" => topic_names().is_subset(arg_set(call, 0)),
        "topiccount" => in_range(g.topics.len(), arg_int(call, 0), arg_int(call, 1)),
        "services" => g.node_services(arg_str(call, 0)) == *arg_set(call, 1),
        "servicesinclude" => g.node_services(arg_str(call, 0)).is_subset(arg_set(call, 1)),
        "servicecount" => in_range(
            g.node_services(arg_str(call, 0)).len(),
            arg_int(call, 1),
            arg_int(call, 2),
        ),
        "topicsubscribers" => g.topic_subscribers(arg_str(call, 0)) == *arg_set(call, 1),
        "topicsubscribersinclude" => g
            .topic_subscribers(arg_str(call, 0))
            .is_subset(arg_set(call, 1)),
        "topicsubscribercount" => in_range(
            g.topic_subscribers(arg_str(call, 0)).len(),
            arg_int(call, 1),
            arg_int(call, 2),
        ),
        "topicpublishers" => g.topic_publishers(arg_str(call, 0)) == *arg_set(call, 1),
        "topicpublishersinclude" => g
            .topic_publishers(arg_str(call, 0))
            .is_subset(arg_set(call, 1)),
        "topicpublishercount" => in_range(
            g.topic_publishers(arg_str(call, 0)).len(),
            arg_int(call, 1),
            arg_int(call, 2),
        ),
        other => {
            ctx.warn(warnings, format!("`{other}` is not a graph subexpression"));
            false
        }
    }
}

pub fn eval_external_subexpr(call: &SubexprCall, ev: &ExternalEvent) -> bool {
    match (call.func.as_str(), ev) {
        ("idsalert", ExternalEvent::IdsAlert { alert_id }) => alert_id == arg_str(call, 0),
        ("signal", ExternalEvent::ControlSignal { sig }) => sig == arg_str(call, 0),
        _ => false,
    }
}

/// `eval(var, op, value)`: compares a variable against a textual value
/// coerced to the variable's type.
fn eval_neutral(ctx: &EvalCtx, call: &SubexprCall, warnings: &mut Vec<Warning>) -> bool {
    debug_assert_eq!(call.func, "eval");
    let var = arg_str(call, 0);
    let Some(current) = ctx.vars.get(var) else {
        ctx.warn(warnings, format!("eval: variable `{var}` is not defined"));
        return false;
    };
    let op_text = arg_str(call, 1);
    let Some(op) = CompareOp::parse(op_text) else {
        ctx.warn(warnings, format!("eval: unknown operator `{op_text}`"));
        return false;
    };
    let value_text = arg_str(call, 2);
    let Some(rhs) = current.parse_as_same_type(value_text) else {
        ctx.warn(
            warnings,
            format!(
                "eval: `{value_text}` is not comparable with {} variable `{var}`",
                current.type_name()
            ),
        );
        return false;
    };
    match current.compare(op, &rhs) {
        Some(verdict) => verdict,
        None => {
            ctx.warn(
                warnings,
                format!("eval: `{op_text}` is undefined for {} values", current.type_name()),
            );
            false
        }
    }
}
