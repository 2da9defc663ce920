//! Static validation of parsed rule sets.
//!
//! The parser only enforces syntax; everything that needs the subexpression
//! catalog or cross-references (arities, argument types, event-class
//! coherence, trigger targets) lives here. `rips check` surfaces the full
//! error list rather than stopping at the first problem.

use std::collections::BTreeSet;

use super::catalog::{self, ArgType};
use super::{Arg, Rule, RuleClass, RuleSet};
use crate::value::{parse_set_literal, CompareOp};

/// Signal names accepted by the `signal()` subexpression. These are the
/// signals the daemon traps and republishes as external events.
pub const SUPPORTED_SIGNALS: &[&str] = &["USR1", "USR2"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("rule `{rule}`: unknown subexpression `{func}`")]
    UnknownFunction { rule: String, func: String },

    #[error("rule `{rule}`: `{func}` takes {expected} argument(s), found {found}")]
    BadArity {
        rule: String,
        func: String,
        expected: usize,
        found: usize,
    },

    #[error("rule `{rule}`: `{func}` argument {index} must be {expected}")]
    BadArgType {
        rule: String,
        func: String,
        /// 1-based position of the offending argument.
        index: usize,
        expected: &'static str,
    },

    #[error("rule `{rule}`: mixes message-, graph-, or external-class subexpressions")]
    MixedEventClasses { rule: String },

    #[error("rule `{rule}`: at most one external subexpression is allowed per rule")]
    ExternalCombination { rule: String },

    #[error("rule `{rule}`: invalid regular expression in `{func}`: {message}")]
    InvalidRegex {
        rule: String,
        func: String,
        message: String,
    },

    #[error("rule `{rule}`: `trigger({level})` names an undeclared level")]
    UnknownTriggerLevel { rule: String, level: String },

    #[error("rule `{rule}`: `eval` operator `{op}` is not one of ==, !=, <, >, <=, >=")]
    InvalidEvalOperator { rule: String, op: String },

    #[error("rule `{rule}`: ordering comparison `{op}` is undefined for set values")]
    SetOrderingUnsupported { rule: String, op: String },

    #[error("rule `{rule}`: malformed set literal `{text}`")]
    InvalidSetLiteral { rule: String, text: String },

    #[error("rule `{rule}`: `signal({name})` is not a supported signal (USR1, USR2)")]
    InvalidSignalName { rule: String, name: String },
}

/// Checks every rule against the catalog and the level table. All problems
/// are reported, not just the first.
pub fn validate_ruleset(rs: &RuleSet) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    for rule in &rs.rules {
        validate_rule(rs, rule, &mut errors);
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn validate_rule(rs: &RuleSet, rule: &Rule, errors: &mut Vec<ValidationError>) {
    let mut classes = BTreeSet::new();
    let mut external_calls = 0usize;

    for call in rule.expr.calls() {
        let Some(sig) = catalog::lookup(&call.func) else {
            errors.push(ValidationError::UnknownFunction {
                rule: rule.name.clone(),
                func: call.func.clone(),
            });
            continue;
        };
        match sig.class {
            RuleClass::Neutral => {}
            RuleClass::External => {
                external_calls += 1;
                classes.insert("external");
            }
            RuleClass::Message => {
                classes.insert("message");
            }
            RuleClass::Graph => {
                classes.insert("graph");
            }
        }

        if call.args.len() != sig.args.len() {
            errors.push(ValidationError::BadArity {
                rule: rule.name.clone(),
                func: call.func.clone(),
                expected: sig.args.len(),
                found: call.args.len(),
            });
            continue;
        }
        for (i, (arg, want)) in call.args.iter().zip(sig.args).enumerate() {
            let ok = matches!(
                (arg, want),
                (Arg::Str(_), ArgType::Str)
                    | (Arg::Int(_), ArgType::Int)
                    | (Arg::StrSet(_), ArgType::StrSet)
            );
            if !ok {
                errors.push(ValidationError::BadArgType {
                    rule: rule.name.clone(),
                    func: call.func.clone(),
                    index: i + 1,
                    expected: match want {
                        ArgType::Str => "a string",
                        ArgType::Int => "an integer",
                        ArgType::StrSet => "a set of strings",
                    },
                });
            }
        }

        validate_call_details(rule, call, errors);
    }

    if classes.len() > 1 {
        errors.push(ValidationError::MixedEventClasses {
            rule: rule.name.clone(),
        });
    }
    if external_calls > 1 {
        errors.push(ValidationError::ExternalCombination {
            rule: rule.name.clone(),
        });
    }

    for chain in &rule.chains {
        for step in &chain.steps {
            if let super::Action::Trigger(level) = &step.action {
                if rs.level(level).is_none() {
                    errors.push(ValidationError::UnknownTriggerLevel {
                        rule: rule.name.clone(),
                        level: level.clone(),
                    });
                }
            }
        }
    }
}

/// Per-function checks beyond arity and argument kinds.
fn validate_call_details(
    rule: &Rule,
    call: &super::SubexprCall,
    errors: &mut Vec<ValidationError>,
) {
    match call.func.as_str() {
        "topicmatches" => {
            if let Some(Arg::Str(pattern)) = call.args.first() {
                if let Err(e) = regex::Regex::new(pattern) {
                    errors.push(ValidationError::InvalidRegex {
                        rule: rule.name.clone(),
                        func: call.func.clone(),
                        message: e.to_string(),
                    });
                }
            }
        }
        "eval" => {
            let op_text = call.args.get(1).and_then(Arg::as_str).unwrap_or_default();
            let value_text = call.args.get(2).and_then(Arg::as_str).unwrap_or_default();
            let op = match CompareOp::parse(op_text) {
                Some(op) => op,
                None => {
                    errors.push(ValidationError::InvalidEvalOperator {
                        rule: rule.name.clone(),
                        op: op_text.to_string(),
                    });
                    return;
                }
            };
            if value_text.trim_start().starts_with('{') {
                if parse_set_literal(value_text).is_none() {
                    errors.push(ValidationError::InvalidSetLiteral {
                        rule: rule.name.clone(),
                        text: value_text.to_string(),
                    });
                } else if op.is_ordering() {
                    errors.push(ValidationError::SetOrderingUnsupported {
                        rule: rule.name.clone(),
                        op: op_text.to_string(),
                    });
                }
            }
        }
        "signal" => {
            if let Some(Arg::Str(name)) = call.args.first() {
                if !SUPPORTED_SIGNALS.contains(&name.as_str()) {
                    errors.push(ValidationError::InvalidSignalName {
                        rule: rule.name.clone(),
                        name: name.clone(),
                    });
                }
            }
        }
        _ => {}
    }
}
