//! Runtime values for rule variables: the abstract types rules operate on.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A value held by a rule variable.
///
/// Sets are homogeneous and may only contain basic (non-set) values; this is
/// enforced by [`Value::set_from`] and by the rule validator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Set(BTreeSet<SetElem>),
}

/// A basic value usable as a set element. Floats are excluded from sets so
/// elements have a total order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetElem {
    Int(i64),
    Str(String),
    Bool(bool),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Float(_) => "float",
            Value::Str(_) => "string",
            Value::Bool(_) => "boolean",
            Value::Set(_) => "set",
        }
    }

    /// Builds a homogeneous set value; mixed element kinds are rejected.
    pub fn set_from(elems: Vec<SetElem>) -> Result<Value, String> {
        let mut kinds = elems.iter().map(std::mem::discriminant);
        if let Some(first) = kinds.next() {
            if kinds.any(|k| k != first) {
                return Err("set elements must all have the same type".into());
            }
        }
        Ok(Value::Set(elems.into_iter().collect()))
    }

    /// Parses `text` as a value of the same type as `self`.
    ///
    /// This is the coercion used by the `eval` subexpression: the variable's
    /// type decides how the textual third parameter is read.
    pub fn parse_as_same_type(&self, text: &str) -> Option<Value> {
        let t = text.trim();
        match self {
            Value::Int(_) => t.parse::<i64>().ok().map(Value::Int),
            Value::Float(_) => t.parse::<f64>().ok().map(Value::Float),
            Value::Str(_) => Some(Value::Str(text.to_string())),
            Value::Bool(_) => match t {
                "true" => Some(Value::Bool(true)),
                "false" => Some(Value::Bool(false)),
                _ => None,
            },
            Value::Set(_) => parse_set_literal(t).map(Value::Set),
        }
    }

    /// Compares with an operator from the `eval` catalog. Returns `None` when
    /// the comparison is not defined (type mismatch, or ordering on sets).
    pub fn compare(&self, op: CompareOp, other: &Value) -> Option<bool> {
        use CompareOp::*;
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(op.apply_ord(a.cmp(b))),
            (Value::Float(a), Value::Float(b)) => {
                a.partial_cmp(b).map(|ord| op.apply_ord(ord))
            }
            (Value::Str(a), Value::Str(b)) => Some(op.apply_ord(a.cmp(b))),
            (Value::Bool(a), Value::Bool(b)) => Some(op.apply_ord(a.cmp(b))),
            (Value::Set(a), Value::Set(b)) => match op {
                Eq => Some(a == b),
                Ne => Some(a != b),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Textual set literal of the form `{"a", "b"}`, `{1, 2}`, or `{true}`.
/// Used when coercing the `eval` value parameter against a set variable.
pub fn parse_set_literal(text: &str) -> Option<BTreeSet<SetElem>> {
    let inner = text.strip_prefix('{')?.strip_suffix('}')?.trim();
    let mut out = BTreeSet::new();
    if inner.is_empty() {
        return Some(out);
    }
    // Split on commas outside quotes.
    let mut parts = Vec::new();
    let mut depth_quote = false;
    let mut cur = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '"' => {
                depth_quote = !depth_quote;
                cur.push(c);
            }
            '\\' if depth_quote => {
                cur.push(c);
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            ',' if !depth_quote => {
                parts.push(cur.trim().to_string());
                cur = String::new();
            }
            _ => cur.push(c),
        }
    }
    parts.push(cur.trim().to_string());

    let mut kind: Option<u8> = None;
    for p in parts {
        let elem = if let Some(stripped) = p.strip_prefix('"') {
            let s = stripped.strip_suffix('"')?;
            SetElem::Str(unescape(s)?)
        } else if p == "true" || p == "false" {
            SetElem::Bool(p == "true")
        } else {
            SetElem::Int(p.parse::<i64>().ok()?)
        };
        let k = match elem {
            SetElem::Int(_) => 0,
            SetElem::Str(_) => 1,
            SetElem::Bool(_) => 2,
        };
        if *kind.get_or_insert(k) != k {
            return None;
        }
        out.insert(elem);
    }
    Some(out)
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                'n' => out.push('\n'),
                't' => out.push('\t'),
                'r' => out.push('\r'),
                '"' => out.push('"'),
                '\\' => out.push('\\'),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

/// The comparison operators accepted by the `eval` subexpression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CompareOp {
    pub fn parse(s: &str) -> Option<CompareOp> {
        Some(match s {
            "==" => CompareOp::Eq,
            "!=" => CompareOp::Ne,
            "<" => CompareOp::Lt,
            ">" => CompareOp::Gt,
            "<=" => CompareOp::Le,
            ">=" => CompareOp::Ge,
            _ => return None,
        })
    }

    pub fn is_ordering(self) -> bool {
        matches!(
            self,
            CompareOp::Lt | CompareOp::Gt | CompareOp::Le | CompareOp::Ge
        )
    }

    fn apply_ord(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Eq => ord == Equal,
            CompareOp::Ne => ord != Equal,
            CompareOp::Lt => ord == Less,
            CompareOp::Gt => ord == Greater,
            CompareOp::Le => ord != Greater,
            CompareOp::Ge => ord != Less,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Set(set) => {
                write!(f, "{{")?;
                for (i, e) in set.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    match e {
                        SetElem::Int(v) => write!(f, "{v}")?,
                        SetElem::Str(s) => write!(f, "\"{s}\"")?,
                        SetElem::Bool(b) => write!(f, "{b}")?,
                    }
                }
                write!(f, "}}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coercion_follows_variable_type() {
        assert_eq!(
            Value::Int(0).parse_as_same_type("42"),
            Some(Value::Int(42))
        );
        assert_eq!(
            Value::Float(0.0).parse_as_same_type("1.5"),
            Some(Value::Float(1.5))
        );
        assert_eq!(Value::Int(0).parse_as_same_type("abc"), None);
        assert_eq!(
            Value::Str(String::new()).parse_as_same_type("DEFAULT"),
            Some(Value::Str("DEFAULT".into()))
        );
    }

    #[test]
    fn set_literal_text() {
        let v = Value::Set(Default::default());
        let parsed = v.parse_as_same_type(r#"{"a", "b"}"#).unwrap();
        match parsed {
            Value::Set(s) => {
                assert_eq!(s.len(), 2);
                assert!(s.contains(&SetElem::Str("a".into())));
            }
            other => panic!("expected set, got {other:?}"),
        }
        // mixed element kinds rejected
        assert_eq!(v.parse_as_same_type(r#"{1, "b"}"#), None);
    }

    #[test]
    fn set_ordering_undefined() {
        let a = Value::Set(Default::default());
        let b = Value::Set(Default::default());
        assert_eq!(a.compare(CompareOp::Eq, &b), Some(true));
        assert_eq!(a.compare(CompareOp::Lt, &b), None);
    }

    #[test]
    fn ordering_defined_for_all_basic_types() {
        assert_eq!(
            Value::Str("abc".into()).compare(CompareOp::Lt, &Value::Str("abd".into())),
            Some(true)
        );
        assert_eq!(
            Value::Bool(false).compare(CompareOp::Lt, &Value::Bool(true)),
            Some(true)
        );
        assert_eq!(
            Value::Float(1.0).compare(CompareOp::Ge, &Value::Float(1.0)),
            Some(true)
        );
    }
}
