//! Recursive-descent parser for rule files.

use std::collections::BTreeSet;

use super::catalog;
use super::lexer::{is_ident, lex, LexError, TokKind, Token};
use super::{
    Action, ActionChain, Arg, ChainOp, ChainStep, Expr, LevelDecl, Rule, RuleClass, RuleSet,
    SubexprCall, ValueExpr,
};

/// A syntax error with its source position.
#[derive(Debug, Clone, thiserror::Error)]
#[error("parse error at line {line}, col {col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            line: e.line,
            col: e.col,
            message: e.message,
        }
    }
}

/// Parses a complete rule file into a [`RuleSet`].
///
/// Level and rule declarations may interleave; levels keep their relative
/// declaration order (which defines restrictiveness). At least one level is
/// required, and names must be unique within their kind.
pub fn parse_ruleset(source: &str) -> Result<RuleSet, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    p.ruleset()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, kind: &TokKind) -> Result<Token, ParseError> {
        if &self.peek().kind == kind {
            Ok(self.next())
        } else {
            self.err(format!("expected {}, found {}", kind, self.peek().kind))
        }
    }

    /// Consumes the next token if it is the given bare word.
    fn eat_word(&mut self, word: &str) -> bool {
        if let TokKind::Ident(s) = &self.peek().kind {
            if s == word {
                self.next();
                return true;
            }
        }
        false
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat_word(word) {
            Ok(())
        } else {
            self.err(format!("expected `{}`, found {}", word, self.peek().kind))
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokKind::Ident(s) if is_ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected {what} name, found {other}")),
        }
    }

    fn expect_string(&mut self) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokKind::Str(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected string literal, found {other}")),
        }
    }

    fn ruleset(&mut self) -> Result<RuleSet, ParseError> {
        let mut levels: Vec<LevelDecl> = Vec::new();
        let mut rules: Vec<Rule> = Vec::new();
        loop {
            match &self.peek().kind {
                TokKind::Eof => break,
                TokKind::Ident(w) if w == "level" => {
                    let decl = self.level_decl()?;
                    if levels.iter().any(|l| l.name == decl.name) {
                        return self.err(format!("duplicate level `{}`", decl.name));
                    }
                    levels.push(decl);
                }
                TokKind::Ident(w) if w == "rule" => {
                    let rule = self.rule_decl()?;
                    if rules.iter().any(|r| r.name == rule.name) {
                        return self.err(format!("duplicate rule `{}`", rule.name));
                    }
                    rules.push(rule);
                }
                other => {
                    return self.err(format!(
                        "expected `level` or `rule` declaration, found {other}"
                    ))
                }
            }
        }
        if levels.is_empty() {
            return self.err("at least one level declaration is required");
        }
        let mut signature_paths = BTreeSet::new();
        for rule in &rules {
            for call in rule.expr.calls() {
                if call.func == "payload" {
                    if let Some(Arg::Str(path)) = call.args.first() {
                        signature_paths.insert(path.clone());
                    }
                }
            }
        }
        Ok(RuleSet {
            levels,
            rules,
            signature_paths,
        })
    }

    /// `level [soft] NAME [enter="PATH"] [exit="PATH"] ;`
    fn level_decl(&mut self) -> Result<LevelDecl, ParseError> {
        self.expect_word("level")?;
        let soft = self.eat_word("soft");
        let name = self.expect_name("level")?;
        let mut enter_proc = None;
        let mut exit_proc = None;
        loop {
            if self.eat_word("enter") {
                self.expect(&TokKind::Assign)?;
                if enter_proc.replace(self.expect_string()?).is_some() {
                    return self.err("duplicate `enter` attribute");
                }
            } else if self.eat_word("exit") {
                self.expect(&TokKind::Assign)?;
                if exit_proc.replace(self.expect_string()?).is_some() {
                    return self.err("duplicate `exit` attribute");
                }
            } else {
                break;
            }
        }
        self.expect(&TokKind::Semi)?;
        Ok(LevelDecl {
            name,
            soft,
            enter_proc,
            exit_proc,
        })
    }

    /// `rule NAME { when EXPR do CHAIN (; CHAIN)* }`
    fn rule_decl(&mut self) -> Result<Rule, ParseError> {
        self.expect_word("rule")?;
        let name = self.expect_name("rule")?;
        self.expect(&TokKind::LBrace)?;
        self.expect_word("when")?;
        let expr = self.or_expr()?;
        self.expect_word("do")?;
        let mut chains = vec![self.chain()?];
        while self.peek().kind == TokKind::Semi {
            self.next();
            chains.push(self.chain()?);
        }
        self.expect(&TokKind::RBrace)?;
        let inferred_class = infer_class(&expr);
        Ok(Rule {
            name,
            expr,
            chains,
            inferred_class,
        })
    }

    /// `ACTION ((-> | !-> | ,) ACTION)* end`
    fn chain(&mut self) -> Result<ActionChain, ParseError> {
        let mut steps = Vec::new();
        loop {
            let action = self.action()?;
            let op = match &self.peek().kind {
                TokKind::Arrow => {
                    self.next();
                    ChainOp::ThenIfOk
                }
                TokKind::BangArrow => {
                    self.next();
                    ChainOp::ThenIfFail
                }
                TokKind::Comma => {
                    self.next();
                    ChainOp::Seq
                }
                TokKind::Ident(w) if w == "end" => {
                    self.next();
                    ChainOp::End
                }
                other => {
                    return self.err(format!(
                        "expected chain operator (`->`, `!->`, `,`) or `end`, found {other}"
                    ))
                }
            };
            let done = op == ChainOp::End;
            steps.push(ChainStep { action, op });
            if done {
                break;
            }
        }
        Ok(ActionChain { steps })
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        let word = match &self.peek().kind {
            TokKind::Ident(w) => w.clone(),
            other => return self.err(format!("expected an action, found {other}")),
        };
        match word.as_str() {
            "alert" => {
                self.next();
                self.expect(&TokKind::LParen)?;
                let msg = self.expect_string()?;
                self.expect(&TokKind::RParen)?;
                Ok(Action::Alert(msg))
            }
            "set" => {
                self.next();
                self.expect(&TokKind::LParen)?;
                let var = self.expect_name("variable")?;
                self.expect(&TokKind::Comma)?;
                let value = self.value_expr()?;
                self.expect(&TokKind::RParen)?;
                Ok(Action::Set { var, value })
            }
            "exec" => {
                self.next();
                self.expect(&TokKind::LParen)?;
                let program = match &self.peek().kind {
                    TokKind::Str(s) => {
                        let s = s.clone();
                        self.next();
                        s
                    }
                    TokKind::Ident(s) if is_ident(s) => {
                        let s = s.clone();
                        self.next();
                        s
                    }
                    other => return self.err(format!("expected program name, found {other}")),
                };
                let mut args = Vec::new();
                while self.peek().kind == TokKind::Comma {
                    self.next();
                    args.push(self.value_expr()?);
                }
                self.expect(&TokKind::RParen)?;
                Ok(Action::Exec { program, args })
            }
            "trigger" => {
                self.next();
                self.expect(&TokKind::LParen)?;
                let level = self.expect_name("level")?;
                self.expect(&TokKind::RParen)?;
                Ok(Action::Trigger(level))
            }
            other => self.err(format!(
                "unknown action `{other}` (expected alert, set, exec, or trigger)"
            )),
        }
    }

    // ---- boolean expressions -------------------------------------------

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.and_expr()?;
        if self.eat_word("or") {
            let rhs = self.or_expr()?;
            Ok(Expr::Or(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.not_expr()?;
        if self.eat_word("and") {
            let rhs = self.and_expr()?;
            Ok(Expr::And(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_word("not") {
            Ok(Expr::Not(Box::new(self.not_expr()?)))
        } else {
            self.primary_expr()
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        match &self.peek().kind {
            TokKind::LParen => {
                self.next();
                let e = self.or_expr()?;
                self.expect(&TokKind::RParen)?;
                Ok(e)
            }
            TokKind::Ident(w) if w == "true" => {
                self.next();
                Ok(Expr::Literal(true))
            }
            TokKind::Ident(w) if w == "false" => {
                self.next();
                Ok(Expr::Literal(false))
            }
            TokKind::Ident(w) if is_ident(w) => {
                let func = w.clone();
                self.next();
                self.expect(&TokKind::LParen)?;
                let mut args = Vec::new();
                if self.peek().kind != TokKind::RParen {
                    args.push(self.call_arg()?);
                    while self.peek().kind == TokKind::Comma {
                        self.next();
                        args.push(self.call_arg()?);
                    }
                }
                self.expect(&TokKind::RParen)?;
                Ok(Expr::Call(SubexprCall { func, args }))
            }
            other => self.err(format!("expected an expression, found {other}")),
        }
    }

    /// Subexpression arguments: string, integer, or a set of strings.
    fn call_arg(&mut self) -> Result<Arg, ParseError> {
        match &self.peek().kind {
            TokKind::Str(s) => {
                let s = s.clone();
                self.next();
                Ok(Arg::Str(s))
            }
            TokKind::Int(i) => {
                let i = *i;
                self.next();
                Ok(Arg::Int(i))
            }
            TokKind::Minus => {
                self.next();
                match &self.peek().kind {
                    TokKind::Int(i) => {
                        let i = -*i;
                        self.next();
                        Ok(Arg::Int(i))
                    }
                    other => self.err(format!("expected integer after `-`, found {other}")),
                }
            }
            TokKind::LBrace => {
                self.next();
                let mut set = BTreeSet::new();
                if self.peek().kind != TokKind::RBrace {
                    set.insert(self.expect_string()?);
                    while self.peek().kind == TokKind::Comma {
                        self.next();
                        set.insert(self.expect_string()?);
                    }
                }
                self.expect(&TokKind::RBrace)?;
                Ok(Arg::StrSet(set))
            }
            other => self.err(format!(
                "expected string, integer, or string set argument, found {other}"
            )),
        }
    }

    // ---- value expressions ---------------------------------------------

    /// Additive level, left-associative.
    fn value_expr(&mut self) -> Result<ValueExpr, ParseError> {
        let mut lhs = self.value_term()?;
        loop {
            match self.peek().kind {
                TokKind::Plus => {
                    self.next();
                    let rhs = self.value_term()?;
                    lhs = ValueExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                TokKind::Minus => {
                    self.next();
                    let rhs = self.value_term()?;
                    lhs = ValueExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn value_term(&mut self) -> Result<ValueExpr, ParseError> {
        let mut lhs = self.value_factor()?;
        loop {
            match self.peek().kind {
                TokKind::Star => {
                    self.next();
                    let rhs = self.value_factor()?;
                    lhs = ValueExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                TokKind::Slash => {
                    self.next();
                    let rhs = self.value_factor()?;
                    lhs = ValueExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn value_factor(&mut self) -> Result<ValueExpr, ParseError> {
        match &self.peek().kind {
            TokKind::Minus => {
                self.next();
                Ok(ValueExpr::Neg(Box::new(self.value_factor()?)))
            }
            TokKind::Int(i) => {
                let i = *i;
                self.next();
                Ok(ValueExpr::Int(i))
            }
            TokKind::Float(x) => {
                let x = *x;
                self.next();
                Ok(ValueExpr::Float(x))
            }
            TokKind::Str(s) => {
                let s = s.clone();
                self.next();
                Ok(ValueExpr::Str(s))
            }
            TokKind::Ident(w) if w == "true" => {
                self.next();
                Ok(ValueExpr::Bool(true))
            }
            TokKind::Ident(w) if w == "false" => {
                self.next();
                Ok(ValueExpr::Bool(false))
            }
            TokKind::Ident(w) if is_ident(w) => {
                let v = w.clone();
                self.next();
                Ok(ValueExpr::Var(v))
            }
            TokKind::LBrace => {
                self.next();
                let mut elems = Vec::new();
                if self.peek().kind != TokKind::RBrace {
                    elems.push(self.value_expr()?);
                    while self.peek().kind == TokKind::Comma {
                        self.next();
                        elems.push(self.value_expr()?);
                    }
                }
                self.expect(&TokKind::RBrace)?;
                Ok(ValueExpr::SetLit(elems))
            }
            TokKind::LParen => {
                self.next();
                let e = self.value_expr()?;
                self.expect(&TokKind::RParen)?;
                Ok(e)
            }
            other => self.err(format!("expected a value expression, found {other}")),
        }
    }
}

/// Infers a rule's event class from the functions its expression calls.
///
/// Neutral calls never pin a class. When classes genuinely conflict the first
/// non-neutral one wins here; validation rejects the mix outright, so the
/// engine only ever sees coherent rules.
pub(super) fn infer_class(expr: &Expr) -> RuleClass {
    for call in expr.calls() {
        if let Some(sig) = catalog::lookup(&call.func) {
            if sig.class != RuleClass::Neutral {
                return sig.class;
            }
        }
    }
    RuleClass::Neutral
}
