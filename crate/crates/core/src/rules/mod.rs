//! The rule language: lexer, parser, validator, and pretty-printer.
//!
//! Rule files are UTF-8 text (`.rips` extension, `#` line comments) shaped as
//! a block of level declarations followed by rule declarations:
//!
//! ```text
//! level DEFAULT;
//! level soft ALERT;
//! level COMPROMISED enter="procs/lockdown.sh";
//! level HALT;
//!
//! rule rogue_publisher {
//!   when topicpublishercount("/cmd_vel", 2, 99)
//!   do alert("warning: unexpected publisher") -> trigger(ALERT) end
//! }
//! ```
//!
//! Chain operators are written `->` (run right iff left succeeded), `!->`
//! (iff left failed), `,` (unconditional sequence) and `end` (terminator).
//! Boolean operators bind `not` > `and` > `or`; equal-precedence operands
//! associate right-to-left.

mod lexer;
mod parser;
mod print;
mod validate;

pub mod catalog;

pub use parser::{parse_ruleset, ParseError};
pub use print::pretty_print;
pub use validate::{validate_ruleset, ValidationError};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// A parsed rule file: the ordered alert levels plus the detection rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    /// Declaration order is increasing restrictiveness; the first level is
    /// the start level.
    pub levels: Vec<LevelDecl>,
    pub rules: Vec<Rule>,
    /// Every path referenced by a `payload()` subexpression.
    pub signature_paths: BTreeSet<String>,
}

impl RuleSet {
    pub fn level(&self, name: &str) -> Option<&LevelDecl> {
        self.levels.iter().find(|l| l.name == name)
    }

    pub fn level_index(&self, name: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDecl {
    pub name: String,
    /// A soft level may be left autonomously toward a less restrictive one.
    pub soft: bool,
    pub enter_proc: Option<String>,
    pub exit_proc: Option<String>,
}

impl LevelDecl {
    pub fn named(name: &str) -> Self {
        LevelDecl {
            name: name.to_string(),
            soft: false,
            enter_proc: None,
            exit_proc: None,
        }
    }
}

/// The event class a rule reacts to, inferred from its expression.
/// Neutral rules (only `eval`/literals) are evaluated for every event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleClass {
    Message,
    Graph,
    External,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub expr: Expr,
    pub chains: Vec<ActionChain>,
    /// Computed from the expression's subexpressions, never user-declared.
    pub inferred_class: RuleClass,
}

/// Boolean expression AST. `And`/`Or` are binary and right-associated by the
/// parser; evaluation short-circuits left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Call(SubexprCall),
    Literal(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubexprCall {
    pub func: String,
    pub args: Vec<Arg>,
}

/// An argument to a subexpression call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Arg {
    Str(String),
    Int(i64),
    StrSet(BTreeSet<String>),
}

impl Arg {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Arg::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Arg::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<String>> {
        match self {
            Arg::StrSet(s) => Some(s),
            _ => None,
        }
    }
}

/// One chain of actions. The operator stored with each step connects it to
/// the following step; the final step always carries [`ChainOp::End`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionChain {
    pub steps: Vec<ChainStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub action: Action,
    pub op: ChainOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainOp {
    /// `->`: run the next action only if this one succeeded.
    ThenIfOk,
    /// `!->`: run the next action only if this one failed.
    ThenIfFail,
    /// `,`: run the next action regardless of this one's result.
    Seq,
    /// `end`: terminate the chain.
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Alert(String),
    Set { var: String, value: ValueExpr },
    Exec { program: String, args: Vec<ValueExpr> },
    Trigger(String),
}

/// Arithmetic/string expression used by `set` values and `exec` arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ValueExpr {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    SetLit(Vec<ValueExpr>),
    Var(String),
    Add(Box<ValueExpr>, Box<ValueExpr>),
    Sub(Box<ValueExpr>, Box<ValueExpr>),
    Mul(Box<ValueExpr>, Box<ValueExpr>),
    Div(Box<ValueExpr>, Box<ValueExpr>),
    Neg(Box<ValueExpr>),
}

impl Expr {
    /// Iterates over every subexpression call in the tree.
    pub fn calls(&self) -> Vec<&SubexprCall> {
        let mut out = Vec::new();
        self.collect_calls(&mut out);
        out
    }

    fn collect_calls<'a>(&'a self, out: &mut Vec<&'a SubexprCall>) {
        match self {
            Expr::And(l, r) | Expr::Or(l, r) => {
                l.collect_calls(out);
                r.collect_calls(out);
            }
            Expr::Not(e) => e.collect_calls(out),
            Expr::Call(c) => out.push(c),
            Expr::Literal(_) => {}
        }
    }
}
