//! Output annotations (`--abs-out`) and the abstract spec they produce.

use std::fmt;
use std::sync::Arc;

use super::sexp::{read, Sexp};
use crate::domains::len_elem;
use crate::lattice::{Abstraction, BoundsEnv, DomainId, DomainSet, Payload};
use crate::solver::{LinExpr, SolverVar};
use crate::synth::{AbsSpec, Problem};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnnotError {
    #[error("annotation `{0}` must look like prefix:\"..\", suffix:\"..\" or len:<expr>")]
    Syntax(String),
    #[error("bad length expression `{0}`")]
    LenExpr(String),
    #[error("length expression mentions unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("annotation for the {0} domain, which is not active")]
    InactiveDomain(String),
    #[error("two annotations for the {0} domain")]
    Duplicate(String),
    #[error("length expression overflows")]
    Overflow,
}

/// `constant + Σ coeff·len(param)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LenExpr {
    pub constant: i64,
    pub terms: Vec<(i64, String)>,
}

impl LenExpr {
    fn add(&mut self, other: LenExpr, sign: i64) -> Result<(), AnnotError> {
        let scaled = other.scale(sign)?;
        self.constant = self
            .constant
            .checked_add(scaled.constant)
            .ok_or(AnnotError::Overflow)?;
        self.terms.extend(scaled.terms);
        Ok(())
    }

    fn scale(self, k: i64) -> Result<LenExpr, AnnotError> {
        Ok(LenExpr {
            constant: self.constant.checked_mul(k).ok_or(AnnotError::Overflow)?,
            terms: self
                .terms
                .into_iter()
                .map(|(c, p)| c.checked_mul(k).map(|c| (c, p)).ok_or(AnnotError::Overflow))
                .collect::<Result<_, _>>()?,
        })
    }

    fn is_const(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for LenExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, p) in &self.terms {
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}len({p})")?;
            } else {
                write!(f, "{sign}{mag}*len({p})")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0 {
            let sign = if self.constant < 0 { "-" } else { "+" };
            write!(f, "{sign}{}", self.constant.unsigned_abs())
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbsOut {
    Prefix(String),
    Suffix(String),
    Len(LenExpr),
}

impl AbsOut {
    pub fn domain(&self) -> DomainId {
        match self {
            AbsOut::Prefix(_) => DomainId::Prefix,
            AbsOut::Suffix(_) => DomainId::Suffix,
            AbsOut::Len(_) => DomainId::Length,
        }
    }
}

/// A string value written either as an SMT-LIB literal or taken verbatim.
fn string_value(s: &str) -> Result<String, AnnotError> {
    if s.starts_with('"') {
        let doc = read(s).map_err(|_| AnnotError::Syntax(s.to_string()))?;
        match doc.forms.as_slice() {
            [(_, Sexp::Str(x))] => Ok(x.clone()),
            _ => Err(AnnotError::Syntax(s.to_string())),
        }
    } else {
        Ok(s.to_string())
    }
}

pub fn parse_abs_out(s: &str) -> Result<AbsOut, AnnotError> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| AnnotError::Syntax(s.to_string()))?;
    match kind.trim() {
        "prefix" => Ok(AbsOut::Prefix(string_value(rest)?)),
        "suffix" => Ok(AbsOut::Suffix(string_value(rest)?)),
        "len" | "length" => Ok(AbsOut::Len(parse_len_expr(rest)?)),
        _ => Err(AnnotError::Syntax(s.to_string())),
    }
}

/// Parses infix `2*len(x) - 3` or prefix `(- (str.len x) 3)` notation.
pub fn parse_len_expr(s: &str) -> Result<LenExpr, AnnotError> {
    let t = s.trim();
    let bad = || AnnotError::LenExpr(s.to_string());
    if t.starts_with('(') {
        let doc = read(t).map_err(|_| bad())?;
        return match doc.forms.as_slice() {
            [(_, e)] => from_sexp(e).ok_or_else(bad),
            _ => Err(bad()),
        };
    }
    Infix {
        src: s,
        toks: tokens(t).ok_or_else(bad)?,
        at: 0,
    }
    .expr()
}

fn from_sexp(e: &Sexp) -> Option<LenExpr> {
    match e {
        Sexp::Int(n) => Some(LenExpr {
            constant: *n,
            terms: vec![],
        }),
        Sexp::List(xs) => match (e.head()?, &xs[1..]) {
            ("str.len", [Sexp::Symbol(p)]) => Some(LenExpr {
                constant: 0,
                terms: vec![(1, p.clone())],
            }),
            ("-", [a]) => from_sexp(a)?.scale(-1).ok(),
            ("+" | "-", [a, rest @ ..]) if !rest.is_empty() => {
                let sign = if e.head()? == "-" { -1 } else { 1 };
                let mut acc = from_sexp(a)?;
                for r in rest {
                    acc.add(from_sexp(r)?, sign).ok()?;
                }
                Some(acc)
            }
            ("*", [a, b]) => {
                let (a, b) = (from_sexp(a)?, from_sexp(b)?);
                match (a.is_const(), b.is_const()) {
                    (true, _) => b.scale(a.constant).ok(),
                    (_, true) => a.scale(b.constant).ok(),
                    _ => None,
                }
            }
            _ => None,
        },
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Sym(char),
}

fn tokens(s: &str) -> Option<Vec<Tok>> {
    let mut out = Vec::new();
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let j = i + b[i..].iter().take_while(|x| x.is_ascii_digit()).count();
            out.push(Tok::Int(s[i..j].parse().ok()?));
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' || c == '.' {
            let j = i + b[i..]
                .iter()
                .take_while(|x| x.is_ascii_alphanumeric() || matches!(x, b'_' | b'.' | b'-'))
                .count();
            out.push(Tok::Ident(s[i..j].to_string()));
            i = j;
        } else if "+-*()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return None;
        }
    }
    Some(out)
}

struct Infix<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    at: usize,
}

impl Infix<'_> {
    fn bad(&self) -> AnnotError {
        AnnotError::LenExpr(self.src.to_string())
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn expr(mut self) -> Result<LenExpr, AnnotError> {
        let mut acc = LenExpr::default();
        let mut sign = 1;
        if self.peek() == Some(&Tok::Sym('-')) {
            self.at += 1;
            sign = -1;
        }
        loop {
            let t = self.term()?;
            acc.add(t, sign)?;
            match self.next() {
                None => return Ok(acc),
                Some(Tok::Sym('+')) => sign = 1,
                Some(Tok::Sym('-')) => sign = -1,
                _ => return Err(self.bad()),
            }
        }
    }

    fn term(&mut self) -> Result<LenExpr, AnnotError> {
        let a = self.factor()?;
        if self.peek() == Some(&Tok::Sym('*')) {
            self.at += 1;
            let b = self.factor()?;
            return match (a.is_const(), b.is_const()) {
                (true, _) => b.scale(a.constant),
                (_, true) => a.scale(b.constant),
                _ => Err(self.bad()),
            };
        }
        Ok(a)
    }

    fn factor(&mut self) -> Result<LenExpr, AnnotError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(LenExpr {
                constant: n,
                terms: vec![],
            }),
            Some(Tok::Ident(f)) if f == "len" || f == "str.len" => {
                match (self.next(), self.next(), self.next()) {
                    (Some(Tok::Sym('(')), Some(Tok::Ident(p)), Some(Tok::Sym(')'))) => Ok(LenExpr {
                        constant: 0,
                        terms: vec![(1, p)],
                    }),
                    _ => Err(self.bad()),
                }
            }
            _ => Err(self.bad()),
        }
    }
}

/// Builds the abstract spec for `problem`: every parameter starts at `Top`,
/// a parameter mentioned in a length annotation gets a solver symbol for
/// its length, and the goal takes each annotation in its domain.
pub fn build_spec(
    problem: &Problem,
    domains: DomainSet,
    outs: &[AbsOut],
    max_len: i64,
) -> Result<AbsSpec, AnnotError> {
    let mut spec = AbsSpec::top(domains, problem.params.len(), max_len);
    let mut seen: Vec<DomainId> = Vec::new();
    let mut symbols: Vec<(usize, SolverVar)> = Vec::new();
    for out in outs {
        let id = out.domain();
        let Some(k) = spec.domains.iter().position(|d| d.id() == id) else {
            return Err(AnnotError::InactiveDomain(id.name()));
        };
        if seen.contains(&id) {
            return Err(AnnotError::Duplicate(id.name()));
        }
        seen.push(id);
        spec.goal.0[k] = match out {
            AbsOut::Prefix(s) => Abstraction::elem(id, Payload::Str(Arc::from(s.as_str()))),
            AbsOut::Suffix(s) => Abstraction::elem(id, Payload::Str(Arc::from(s.as_str()))),
            AbsOut::Len(e) => {
                let mut lin = LinExpr::constant(e.constant);
                for (c, p) in &e.terms {
                    let i = problem
                        .params
                        .iter()
                        .position(|(n, _)| n == p)
                        .ok_or_else(|| AnnotError::UnknownParam(p.clone()))?;
                    let v = match symbols.iter().find(|(j, _)| *j == i) {
                        Some((_, v)) => *v,
                        None => {
                            let v = symbol(&mut spec.benv);
                            spec.params[i].0[k] = len_elem(LinExpr::var(v));
                            symbols.push((i, v));
                            v
                        }
                    };
                    lin = lin
                        .checked_add(&LinExpr::term(*c, v))
                        .ok_or(AnnotError::Overflow)?;
                }
                len_elem(lin)
            }
        };
    }
    Ok(spec)
}

fn symbol(benv: &mut BoundsEnv) -> SolverVar {
    benv.fresh_symbol(crate::ast::Sort::String)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_quoted_or_raw() {
        assert_eq!(
            parse_abs_out("prefix:\"Dr. \"").unwrap(),
            AbsOut::Prefix("Dr. ".into())
        );
        assert_eq!(
            parse_abs_out("prefix:Dr. ").unwrap(),
            AbsOut::Prefix("Dr. ".into())
        );
        assert_eq!(
            parse_abs_out("suffix:\"a\"\"b\"").unwrap(),
            AbsOut::Suffix("a\"b".into())
        );
        assert!(parse_abs_out("nope").is_err());
        assert!(parse_abs_out("colour:red").is_err());
    }

    #[test]
    fn length_expressions() {
        let e = parse_len_expr("len(name) - 3").unwrap();
        assert_eq!(
            e,
            LenExpr {
                constant: -3,
                terms: vec![(1, "name".into())]
            }
        );
        assert_eq!(e.to_string(), "len(name)-3");
        assert_eq!(parse_len_expr("(- (str.len name) 3)").unwrap(), e);
        let e = parse_len_expr("-2 + 2*len(x) + len(y)*3").unwrap();
        assert_eq!(e.constant, -2);
        assert_eq!(e.terms, vec![(2, "x".into()), (3, "y".into())]);
        assert_eq!(parse_len_expr("7").unwrap().to_string(), "7");
        assert!(parse_len_expr("len(x)*len(y)").is_err());
        assert!(parse_len_expr("len x").is_err());
        assert!(parse_len_expr("3 $").is_err());
    }
}
