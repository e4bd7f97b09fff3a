//! Concrete evaluation under SMT-LIB string semantics.
//!
//! Strings are ASCII and indexed by byte. Operations never fail on
//! out-of-range indices; they return the SMT-LIB default instead.

use std::collections::HashMap;

use crate::ast::{Example, Op, Program, Term, Value};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("term contains a hole")]
    Hole,
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("ill-sorted application of `{0}`")]
    Sort(Op),
    #[error("integer overflow in `{0}`")]
    Overflow(Op),
}

/// Input bindings for one example.
pub type Env = HashMap<String, Value>;

pub fn eval(t: &Term, env: &Env) -> Result<Value, EvalError> {
    match t {
        Term::Const(v) => Ok(v.clone()),
        Term::Var(n) => env
            .get(&**n)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(n.to_string())),
        Term::Hole(_) => Err(EvalError::Hole),
        Term::App(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval(a, env))
                .collect::<Result<Vec<_>, _>>()?;
            apply(*op, &vals)
        }
    }
}

/// Binds the program's parameters to an example's inputs.
pub fn bind(p: &Program, ex: &Example) -> Env {
    p.params
        .iter()
        .map(|(n, _)| n.clone())
        .zip(ex.inputs.iter().cloned())
        .collect()
}

/// True when the program reproduces every example. Evaluation errors count
/// as a mismatch.
pub fn test_program(p: &Program, examples: &[Example]) -> bool {
    examples
        .iter()
        .all(|ex| matches!(eval(&p.body, &bind(p, ex)), Ok(v) if v == ex.output))
}

/// Applies an operator to already evaluated arguments.
pub fn apply(op: Op, args: &[Value]) -> Result<Value, EvalError> {
    use Value::{Bool, Int, Str};
    let bad = || EvalError::Sort(op);
    Ok(match (op, args) {
        (Op::Concat, [Str(a), Str(b)]) => {
            let mut s = String::with_capacity(a.len() + b.len());
            s.push_str(a);
            s.push_str(b);
            Str(s)
        }
        (Op::Len, [Str(s)]) => Int(s.len() as i64),
        (Op::Substr, [Str(s), Int(i), Int(n)]) => Str(substr(s, *i, *n).to_string()),
        (Op::At, [Str(s), Int(i)]) => Str(substr(s, *i, 1).to_string()),
        (Op::IndexOf, [Str(s), Str(t), Int(i)]) => Int(indexof(s, t, *i)),
        (Op::Replace, [Str(s), Str(t), Str(u)]) => Str(replace(s, t, u)),
        (Op::Contains, [Str(s), Str(t)]) => Bool(s.contains(t.as_str())),
        (Op::PrefixOf, [Str(s), Str(t)]) => Bool(t.starts_with(s.as_str())),
        (Op::SuffixOf, [Str(s), Str(t)]) => Bool(t.ends_with(s.as_str())),
        (Op::IntToStr, [Int(n)]) => Str(if *n < 0 { String::new() } else { n.to_string() }),
        (Op::StrToInt, [Str(s)]) => Int(str_to_int(s)),
        (Op::Add, [Int(a), Int(b)]) => Int(a.checked_add(*b).ok_or(EvalError::Overflow(op))?),
        (Op::Sub, [Int(a), Int(b)]) => Int(a.checked_sub(*b).ok_or(EvalError::Overflow(op))?),
        _ => return Err(bad()),
    })
}

/// `(str.substr s i n)`: empty unless `0 <= i < |s|` and `n > 0`.
pub fn substr(s: &str, i: i64, n: i64) -> &str {
    let len = s.len() as i64;
    if i < 0 || i >= len || n <= 0 {
        return "";
    }
    let end = i.saturating_add(n).min(len);
    &s[i as usize..end as usize]
}

pub fn indexof(s: &str, t: &str, i: i64) -> i64 {
    let len = s.len() as i64;
    if i < 0 || i > len {
        return -1;
    }
    if t.is_empty() {
        return i;
    }
    match s[i as usize..].find(t) {
        Some(k) => i + k as i64,
        None => -1,
    }
}

/// Replaces the first occurrence of `t`; an empty `t` prepends `u`.
pub fn replace(s: &str, t: &str, u: &str) -> String {
    if t.is_empty() {
        return format!("{u}{s}");
    }
    s.replacen(t, u, 1)
}

/// Decimal numeral to integer; anything else (including the empty string)
/// maps to -1. Numerals too large for `i64` also map to -1.
pub fn str_to_int(s: &str) -> i64 {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return -1;
    }
    s.parse().unwrap_or(-1)
}
