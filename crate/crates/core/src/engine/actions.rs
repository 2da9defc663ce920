//! Action chain execution.
//!
//! Chains of one activation run sequentially in declaration order and are
//! isolated from each other: a failure in one chain never suppresses the
//! next. Within a chain, each step's operator decides whether the *next*
//! step runs: `->` requires success, `!->` requires failure, `,` always
//! continues, `end` terminates. A step whose condition is not met is
//! *skipped*, and a skipped action terminates its chain — operators further
//! right would have nothing executed to react to.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::subproc::{run_with_timeout, RunStatus};
use super::vars::{SetVarError, VariableStore};
use super::Warning;
use crate::levels::{LevelManager, TransitionRecord};
use crate::rules::{Action, ActionChain, ChainOp, ValueExpr};
use crate::value::{SetElem, Value};

/// How long an `exec` action's program may run.
pub const EXEC_TIMEOUT: Duration = Duration::from_secs(5);

/// One alert-log entry, serialized as a JSON line by the daemon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRecord {
    pub tick: i64,
    pub rule: String,
    pub message: String,
}

/// The result of one executed action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionOutcome {
    pub action: Action,
    pub success: bool,
    pub detail: String,
}

/// Everything the executor may touch. It mutates state only through the
/// variable store (`set`), the alert log (`alert`), and the level manager
/// (`trigger`).
pub struct ActionCtx<'a> {
    pub tick: i64,
    pub rule: &'a str,
    pub vars: &'a mut VariableStore,
    pub levels: &'a mut LevelManager,
    /// Directory `exec` programs are resolved in; `None` disables `exec`.
    pub actions_dir: Option<&'a Path>,
    pub exec_timeout: Duration,
    pub alerts: &'a mut Vec<AlertRecord>,
    pub transitions: &'a mut Vec<TransitionRecord>,
    pub warnings: &'a mut Vec<Warning>,
}

impl<'a> ActionCtx<'a> {
    fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(Warning {
            rule: self.rule.to_string(),
            message: message.into(),
        });
    }
}

/// Executes every chain of one activation. Returns the outcomes of all
/// actions that actually ran, in execution order.
pub fn execute_chains(ctx: &mut ActionCtx, chains: &[ActionChain]) -> Vec<ActionOutcome> {
    let mut outcomes = Vec::new();
    for chain in chains {
        for step in &chain.steps {
            let outcome = execute_action(ctx, &step.action);
            let success = outcome.success;
            outcomes.push(outcome);
            let continue_chain = match step.op {
                ChainOp::End => false,
                ChainOp::Seq => true,
                ChainOp::ThenIfOk => success,
                ChainOp::ThenIfFail => !success,
            };
            if !continue_chain {
                break;
            }
        }
    }
    outcomes
}

fn execute_action(ctx: &mut ActionCtx, action: &Action) -> ActionOutcome {
    let (success, detail) = match action {
        Action::Alert(message) => act_alert(ctx, message),
        Action::Set { var, value } => act_set(ctx, var, value),
        Action::Exec { program, args } => act_exec(ctx, program, args),
        Action::Trigger(level) => act_trigger(ctx, level),
    };
    ActionOutcome {
        action: action.clone(),
        success,
        detail,
    }
}

fn act_alert(ctx: &mut ActionCtx, message: &str) -> (bool, String) {
    ctx.alerts.push(AlertRecord {
        tick: ctx.tick,
        rule: ctx.rule.to_string(),
        message: message.to_string(),
    });
    (true, format!("alert: {message}"))
}

fn act_set(ctx: &mut ActionCtx, var: &str, value: &ValueExpr) -> (bool, String) {
    let value = match eval_value(value, ctx.vars) {
        Ok(v) => v,
        Err(reason) => {
            ctx.warn(format!("set {var}: {reason}"));
            return (false, reason);
        }
    };
    match ctx.vars.set_user(var, value.clone()) {
        Ok(()) => (true, format!("{var} = {value}")),
        Err(SetVarError::Predefined(name)) => {
            let reason = format!("`{name}` is predefined and read-only");
            ctx.warn(format!("set {var}: {reason}"));
            (false, reason)
        }
        Err(SetVarError::TypeChange { name, from, to }) => {
            let reason = format!("`{name}` is {from}; refusing to store a {to} value");
            ctx.warn(format!("set {var}: {reason}"));
            (false, reason)
        }
    }
}

fn act_exec(ctx: &mut ActionCtx, program: &str, args: &[ValueExpr]) -> (bool, String) {
    let Some(dir) = ctx.actions_dir else {
        return (false, "no actions directory configured".to_string());
    };
    if program.contains('/') || program.contains("..") {
        return (
            false,
            format!("`{program}`: programs are resolved in the actions directory only"),
        );
    }
    let Some(path) = resolve_program(dir, program) else {
        let reason = format!("`{program}` not found in actions directory");
        ctx.warn(format!("exec: {reason}"));
        return (false, reason);
    };
    let mut rendered = Vec::with_capacity(args.len());
    for arg in args {
        match eval_value(arg, ctx.vars) {
            Ok(v) => rendered.push(v.to_string()),
            Err(reason) => {
                ctx.warn(format!("exec {program}: {reason}"));
                return (false, reason);
            }
        }
    }
    let mut cmd = std::process::Command::new(&path);
    cmd.args(&rendered);
    match run_with_timeout(&mut cmd, None, ctx.exec_timeout) {
        Ok(RunStatus::Exited(0)) => (true, format!("{program} exited 0")),
        Ok(RunStatus::Exited(code)) => (false, format!("{program} exited {code}")),
        Ok(RunStatus::TimedOut) => {
            let reason = format!(
                "{program} exceeded the {} ms timeout",
                ctx.exec_timeout.as_millis()
            );
            ctx.warn(format!("exec: {reason}"));
            (false, reason)
        }
        Err(e) => (false, format!("{program} failed to spawn: {e}")),
    }
}

/// Resolution mirrors plugins: the bare name, then `.py`, then `.sh`.
fn resolve_program(dir: &Path, program: &str) -> Option<PathBuf> {
    let candidates = [
        dir.join(program),
        dir.join(format!("{program}.py")),
        dir.join(format!("{program}.sh")),
    ];
    candidates.into_iter().find(|c| c.is_file())
}

fn act_trigger(ctx: &mut ActionCtx, target: &str) -> (bool, String) {
    match ctx.levels.trigger_level(target, ctx.rule, ctx.tick) {
        Ok(None) => (true, format!("already at {target}")),
        Ok(Some(record)) => {
            ctx.vars.set_level(&record.to_level);
            let detail = format!("{} -> {}", record.from_level, record.to_level);
            ctx.transitions.push(record);
            (true, detail)
        }
        Err(e) => {
            ctx.warn(format!("trigger {target}: {e}"));
            (false, e.to_string())
        }
    }
}

/// Evaluates a `set`/`exec` value expression. Arithmetic is same-type over
/// integers and floats; `+` concatenates strings; anything else is a type
/// error reported as an action failure.
pub fn eval_value(expr: &ValueExpr, vars: &VariableStore) -> Result<Value, String> {
    match expr {
        ValueExpr::Int(i) => Ok(Value::Int(*i)),
        ValueExpr::Float(x) => Ok(Value::Float(*x)),
        ValueExpr::Str(s) => Ok(Value::Str(s.clone())),
        ValueExpr::Bool(b) => Ok(Value::Bool(*b)),
        ValueExpr::Var(name) => vars
            .get(name)
            .ok_or_else(|| format!("variable `{name}` is not defined")),
        ValueExpr::SetLit(elems) => {
            let mut out = Vec::with_capacity(elems.len());
            for e in elems {
                out.push(match eval_value(e, vars)? {
                    Value::Int(i) => SetElem::Int(i),
                    Value::Str(s) => SetElem::Str(s),
                    Value::Bool(b) => SetElem::Bool(b),
                    other => {
                        return Err(format!(
                            "{} values cannot be set elements",
                            other.type_name()
                        ))
                    }
                });
            }
            Value::set_from(out)
        }
        ValueExpr::Neg(inner) => match eval_value(inner, vars)? {
            Value::Int(i) => i
                .checked_neg()
                .map(Value::Int)
                .ok_or_else(|| "integer overflow".to_string()),
            Value::Float(x) => Ok(Value::Float(-x)),
            other => Err(format!("cannot negate a {} value", other.type_name())),
        },
        ValueExpr::Add(l, r) => match (eval_value(l, vars)?, eval_value(r, vars)?) {
            (Value::Int(a), Value::Int(b)) => a
                .checked_add(b)
                .map(Value::Int)
                .ok_or_else(|| "integer overflow".to_string()),
            (Value::Float(a), Value::Float(b)) => Ok(Value::Float(a + b)),
            (Value::Str(a), Value::Str(b)) => Ok(Value::Str(a + &b)),
            (a, b) => Err(type_mismatch("+", &a, &b)),
        },
        ValueExpr::Sub(l, r) => arith(l, r, vars, "-", i64::checked_sub, |a, b| a - b),
        ValueExpr::Mul(l, r) => arith(l, r, vars, "*", i64::checked_mul, |a, b| a * b),
        ValueExpr::Div(l, r) => {
            let (a, b) = (eval_value(l, vars)?, eval_value(r, vars)?);
            match (a, b) {
                (Value::Int(_), Value::Int(0)) => Err("division by zero".to_string()),
                (Value::Int(a), Value::Int(b)) => a
                    .checked_div(b)
                    .map(Value::Int)
                    .ok_or_else(|| "integer overflow".to_string()),
                (Value::Float(_), Value::Float(b)) if b == 0.0 => {
                    Err("division by zero".to_string())
                }
                (Value::Float(a), Value::Float(b)) => Ok(Value::Float(a / b)),
                (a, b) => Err(type_mismatch("/", &a, &b)),
            }
        }
    }
}

fn arith(
    l: &ValueExpr,
    r: &ValueExpr,
    vars: &VariableStore,
    op: &str,
    int_op: fn(i64, i64) -> Option<i64>,
    float_op: fn(f64, f64) -> f64,
) -> Result<Value, String> {
    match (eval_value(l, vars)?, eval_value(r, vars)?) {
        (Value::Int(a), Value::Int(b)) => int_op(a, b)
            .map(Value::Int)
            .ok_or_else(|| "integer overflow".to_string()),
        (Value::Float(a), Value::Float(b)) => Ok(Value::Float(float_op(a, b))),
        (a, b) => Err(type_mismatch(op, &a, &b)),
    }
}

fn type_mismatch(op: &str, a: &Value, b: &Value) -> String {
    format!(
        "`{op}` is not defined for {} and {} operands",
        a.type_name(),
        b.type_name()
    )
}
