//! Canonical pretty-printer. `parse_ruleset(pretty_print(rs))` reproduces
//! `rs` exactly, so rule sets survive a print/parse cycle bit-for-bit.

use std::fmt::Write;

use super::lexer::is_ident;
use super::{Action, ActionChain, Arg, ChainOp, Expr, RuleSet, ValueExpr};

/// Renders a rule set in canonical form: levels first, one per line, then
/// each rule in a brace block.
pub fn pretty_print(rs: &RuleSet) -> String {
    let mut out = String::new();
    for level in &rs.levels {
        out.push_str("level ");
        if level.soft {
            out.push_str("soft ");
        }
        out.push_str(&level.name);
        if let Some(p) = &level.enter_proc {
            write!(out, " enter={}", quote(p)).unwrap();
        }
        if let Some(p) = &level.exit_proc {
            write!(out, " exit={}", quote(p)).unwrap();
        }
        out.push_str(";\n");
    }
    for rule in &rs.rules {
        out.push('\n');
        writeln!(out, "rule {} {{", rule.name).unwrap();
        writeln!(out, "  when {}", print_expr(&rule.expr, 0, false)).unwrap();
        for (i, chain) in rule.chains.iter().enumerate() {
            let head = if i == 0 { "  do " } else { "     " };
            let tail = if i + 1 == rule.chains.len() { "" } else { ";" };
            writeln!(out, "{head}{}{tail}", print_chain(chain)).unwrap();
        }
        out.push_str("}\n");
    }
    out
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Precedence: `or` = 1, `and` = 2, `not` = 3, atoms = 4. The parser
/// associates binary operators to the right, so a left operand of equal
/// precedence needs parentheses to survive the roundtrip.
fn print_expr(e: &Expr, parent_prec: u8, is_left: bool) -> String {
    let prec = match e {
        Expr::Or(..) => 1,
        Expr::And(..) => 2,
        Expr::Not(..) => 3,
        Expr::Call(..) | Expr::Literal(..) => 4,
    };
    let body = match e {
        Expr::Or(l, r) => format!(
            "{} or {}",
            print_expr(l, prec, true),
            print_expr(r, prec, false)
        ),
        Expr::And(l, r) => format!(
            "{} and {}",
            print_expr(l, prec, true),
            print_expr(r, prec, false)
        ),
        Expr::Not(inner) => format!("not {}", print_expr(inner, prec, false)),
        Expr::Literal(b) => b.to_string(),
        Expr::Call(call) => {
            let args: Vec<String> = call.args.iter().map(print_arg).collect();
            format!("{}({})", call.func, args.join(", "))
        }
    };
    if prec < parent_prec || (prec == parent_prec && is_left) {
        format!("({body})")
    } else {
        body
    }
}

fn print_arg(arg: &Arg) -> String {
    match arg {
        Arg::Str(s) => quote(s),
        Arg::Int(i) => i.to_string(),
        Arg::StrSet(set) => {
            let elems: Vec<String> = set.iter().map(|s| quote(s)).collect();
            format!("{{{}}}", elems.join(", "))
        }
    }
}

fn print_chain(chain: &ActionChain) -> String {
    let mut out = String::new();
    for step in &chain.steps {
        out.push_str(&print_action(&step.action));
        match step.op {
            ChainOp::ThenIfOk => out.push_str(" -> "),
            ChainOp::ThenIfFail => out.push_str(" !-> "),
            ChainOp::Seq => out.push_str(", "),
            ChainOp::End => out.push_str(" end"),
        }
    }
    out
}

fn print_action(a: &Action) -> String {
    match a {
        Action::Alert(msg) => format!("alert({})", quote(msg)),
        Action::Set { var, value } => format!("set({var}, {})", print_vexpr(value, 0, false)),
        Action::Exec { program, args } => {
            let prog = if is_ident(program) {
                program.clone()
            } else {
                quote(program)
            };
            let mut parts = vec![prog];
            parts.extend(args.iter().map(|a| print_vexpr(a, 0, false)));
            format!("exec({})", parts.join(", "))
        }
        Action::Trigger(level) => format!("trigger({level})"),
    }
}

/// Precedence: `+`/`-` = 1, `*`/`/` = 2, unary `-` = 3, atoms = 4. Binary
/// value operators associate to the left, so here it is the *right* operand
/// of equal precedence that needs parentheses.
fn print_vexpr(e: &ValueExpr, parent_prec: u8, is_right: bool) -> String {
    let prec = match e {
        ValueExpr::Add(..) | ValueExpr::Sub(..) => 1,
        ValueExpr::Mul(..) | ValueExpr::Div(..) => 2,
        ValueExpr::Neg(..) => 3,
        _ => 4,
    };
    let body = match e {
        ValueExpr::Int(i) => i.to_string(),
        ValueExpr::Float(x) => {
            if x.fract() == 0.0 {
                format!("{x:.1}")
            } else {
                format!("{x}")
            }
        }
        ValueExpr::Str(s) => quote(s),
        ValueExpr::Bool(b) => b.to_string(),
        ValueExpr::Var(v) => v.clone(),
        ValueExpr::SetLit(elems) => {
            let parts: Vec<String> = elems.iter().map(|e| print_vexpr(e, 0, false)).collect();
            format!("{{{}}}", parts.join(", "))
        }
        ValueExpr::Add(l, r) => format!(
            "{} + {}",
            print_vexpr(l, prec, false),
            print_vexpr(r, prec, true)
        ),
        ValueExpr::Sub(l, r) => format!(
            "{} - {}",
            print_vexpr(l, prec, false),
            print_vexpr(r, prec, true)
        ),
        ValueExpr::Mul(l, r) => format!(
            "{} * {}",
            print_vexpr(l, prec, false),
            print_vexpr(r, prec, true)
        ),
        ValueExpr::Div(l, r) => format!(
            "{} / {}",
            print_vexpr(l, prec, false),
            print_vexpr(r, prec, true)
        ),
        ValueExpr::Neg(inner) => format!("-{}", print_vexpr(inner, prec, false)),
    };
    if prec < parent_prec || (prec == parent_prec && is_right) {
        format!("({body})")
    } else {
        body
    }
}
