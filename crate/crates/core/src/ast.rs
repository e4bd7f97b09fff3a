//! Terms of the target language: the SyGuS string-theory fragment without
//! branching, plus holes labelled with product abstractions.

use std::fmt;
use std::sync::Arc;

use crate::lattice::{Abstraction, ProductAbs, VarId};

/// Sorts of the string theory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    String,
    Int,
    Bool,
}

impl Sort {
    pub fn name(self) -> &'static str {
        match self {
            Sort::String => "String",
            Sort::Int => "Int",
            Sort::Bool => "Bool",
        }
    }

    pub fn from_name(name: &str) -> Option<Sort> {
        match name {
            "String" => Some(Sort::String),
            "Int" => Some(Sort::Int),
            "Bool" => Some(Sort::Bool),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Str(String),
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Str(_) => Sort::String,
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    /// SMT-LIB literal syntax: doubled quotes inside strings, `(- n)` for
    /// negative integers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Value::Int(n) if *n < 0 => write!(f, "(- {})", n.unsigned_abs()),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Operators of the theory. `ite` is deliberately absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Concat,
    Len,
    Substr,
    IndexOf,
    Replace,
    At,
    Contains,
    PrefixOf,
    SuffixOf,
    IntToStr,
    StrToInt,
    Add,
    Sub,
}

/// Parameter and return sorts of an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpSignature {
    pub op: Op,
    pub params: &'static [Sort],
    pub ret: Sort,
}

use Sort::{Bool as B, Int as I, String as S};

impl Op {
    pub const ALL: [Op; 13] = [
        Op::Concat,
        Op::Len,
        Op::Substr,
        Op::IndexOf,
        Op::Replace,
        Op::At,
        Op::Contains,
        Op::PrefixOf,
        Op::SuffixOf,
        Op::IntToStr,
        Op::StrToInt,
        Op::Add,
        Op::Sub,
    ];

    pub fn signature(self) -> OpSignature {
        let (params, ret): (&'static [Sort], Sort) = match self {
            Op::Concat => (&[S, S], S),
            Op::Len => (&[S], I),
            Op::Substr => (&[S, I, I], S),
            Op::IndexOf => (&[S, S, I], I),
            Op::Replace => (&[S, S, S], S),
            Op::At => (&[S, I], S),
            Op::Contains => (&[S, S], B),
            Op::PrefixOf => (&[S, S], B),
            Op::SuffixOf => (&[S, S], B),
            Op::IntToStr => (&[I], S),
            Op::StrToInt => (&[S], I),
            Op::Add => (&[I, I], I),
            Op::Sub => (&[I, I], I),
        };
        OpSignature {
            op: self,
            params,
            ret,
        }
    }

    pub fn arity(self) -> usize {
        self.signature().params.len()
    }

    pub fn ret(self) -> Sort {
        self.signature().ret
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Concat => "str.++",
            Op::Len => "str.len",
            Op::Substr => "str.substr",
            Op::IndexOf => "str.indexof",
            Op::Replace => "str.replace",
            Op::At => "str.at",
            Op::Contains => "str.contains",
            Op::PrefixOf => "str.prefixof",
            Op::SuffixOf => "str.suffixof",
            Op::IntToStr => "int.to.str",
            Op::StrToInt => "str.to.int",
            Op::Add => "+",
            Op::Sub => "-",
        }
    }

    /// Accepts both the SyGuS v1 names and the SMT-LIB 2.6 spellings.
    pub fn from_name(name: &str) -> Option<Op> {
        Some(match name {
            "str.++" => Op::Concat,
            "str.len" => Op::Len,
            "str.substr" => Op::Substr,
            "str.indexof" => Op::IndexOf,
            "str.replace" => Op::Replace,
            "str.at" => Op::At,
            "str.contains" => Op::Contains,
            "str.prefixof" => Op::PrefixOf,
            "str.suffixof" => Op::SuffixOf,
            "int.to.str" | "str.from_int" | "str.from-int" => Op::IntToStr,
            "str.to.int" | "str.to_int" | "str.to-int" => Op::StrToInt,
            "+" => Op::Add,
            "-" => Op::Sub,
            _ => return None,
        })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HoleId(pub u32);

/// An unexpanded position. The sort is carried so that expansion only
/// proposes well-sorted replacements.
#[derive(Clone, Debug, PartialEq)]
pub struct Hole {
    pub id: HoleId,
    pub sort: Sort,
    pub label: Arc<ProductAbs>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Const(Value),
    Var(Arc<str>),
    App(Op, Arc<[Term]>),
    Hole(Hole),
}

/// Position of a subterm: argument indices from the root.
pub type Path = Vec<usize>;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SortError {
    #[error("`{op}` expects {expected} arguments, got {found}")]
    Arity {
        op: Op,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{op}` has sort {found}, expected {expected}")]
    Mismatch {
        op: Op,
        index: usize,
        expected: Sort,
        found: Sort,
    },
    #[error("unbound variable `{0}`")]
    Unbound(String),
}

impl Term {
    pub fn str(s: impl Into<String>) -> Term {
        Term::Const(Value::Str(s.into()))
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Value::Int(n))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    /// Builds an application, checking arity only. Use [`Term::sort_of`] for
    /// a full sort check.
    pub fn app(op: Op, args: Vec<Term>) -> Result<Term, SortError> {
        if args.len() != op.arity() {
            return Err(SortError::Arity {
                op,
                expected: op.arity(),
                found: args.len(),
            });
        }
        Ok(Term::App(op, args.into()))
    }

    pub fn hole(id: HoleId, sort: Sort, label: ProductAbs) -> Term {
        Term::Hole(Hole {
            id,
            sort,
            label: Arc::new(label),
        })
    }

    /// Number of AST nodes; a hole counts as one node.
    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn height(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::height).max().unwrap_or(0),
            _ => 1,
        }
    }

    pub fn no_hole(&self) -> bool {
        match self {
            Term::Hole(_) => false,
            Term::App(_, args) => args.iter().all(Term::no_hole),
            _ => true,
        }
    }

    /// Number of function applications in the term.
    pub fn app_count(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::app_count).sum::<usize>(),
            _ => 0,
        }
    }

    /// Holes in pre-order (leftmost first) with their paths.
    pub fn holes(&self) -> Vec<(Path, &Hole)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        collect_holes(self, &mut path, &mut out);
        out
    }

    /// Abstract variables appearing in hole labels, in order of first
    /// occurrence.
    pub fn label_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for (_, h) in self.holes() {
            for c in &h.label.0 {
                if let Abstraction::Var(v) = c {
                    if !out.contains(v) {
                        out.push(*v);
                    }
                }
            }
        }
        out
    }

    pub fn leftmost_hole(&self) -> Option<(Path, &Hole)> {
        fn go<'a>(t: &'a Term, path: &mut Path) -> Option<&'a Hole> {
            match t {
                Term::Hole(h) => Some(h),
                Term::App(_, args) => {
                    for (i, a) in args.iter().enumerate() {
                        path.push(i);
                        if let Some(h) = go(a, path) {
                            return Some(h);
                        }
                        path.pop();
                    }
                    None
                }
                _ => None,
            }
        }
        let mut path = Vec::new();
        go(self, &mut path).map(|h| (path, h))
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::App(_, args) => args.get(i)?.subterm(rest),
                _ => None,
            },
        }
    }

    /// Returns a copy with the subterm at `path` replaced. Siblings off the
    /// path are shared, not copied.
    pub fn replace_at(&self, path: &[usize], with: Term) -> Term {
        match path.split_first() {
            None => with,
            Some((&i, rest)) => match self {
                Term::App(op, args) => {
                    let mut new_args: Vec<Term> = args.to_vec();
                    new_args[i] = new_args[i].replace_at(rest, with);
                    Term::App(*op, new_args.into())
                }
                _ => panic!("path does not address a subterm"),
            },
        }
    }

    /// Sort of the term given the sorts of the free variables.
    pub fn sort_of(&self, params: &[(String, Sort)]) -> Result<Sort, SortError> {
        match self {
            Term::Const(v) => Ok(v.sort()),
            Term::Var(name) => params
                .iter()
                .find(|(n, _)| n.as_str() == &**name)
                .map(|(_, s)| *s)
                .ok_or_else(|| SortError::Unbound(name.to_string())),
            Term::Hole(h) => Ok(h.sort),
            Term::App(op, args) => {
                let sig = op.signature();
                if args.len() != sig.params.len() {
                    return Err(SortError::Arity {
                        op: *op,
                        expected: sig.params.len(),
                        found: args.len(),
                    });
                }
                for (index, (a, &expected)) in args.iter().zip(sig.params).enumerate() {
                    let found = a.sort_of(params)?;
                    if found != expected {
                        return Err(SortError::Mismatch {
                            op: *op,
                            index,
                            expected,
                            found,
                        });
                    }
                }
                Ok(sig.ret)
            }
        }
    }

    /// Free variable names, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Arc<str>> {
        fn go(t: &Term, out: &mut Vec<Arc<str>>) {
            match t {
                Term::Var(n) => {
                    if !out.iter().any(|m| m == n) {
                        out.push(n.clone());
                    }
                }
                Term::App(_, args) => args.iter().for_each(|a| go(a, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

fn collect_holes<'a>(t: &'a Term, path: &mut Path, out: &mut Vec<(Path, &'a Hole)>) {
    match t {
        Term::Hole(h) => out.push((path.clone(), h)),
        Term::App(_, args) => {
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                collect_holes(a, path, out);
                path.pop();
            }
        }
        _ => {}
    }
}

impl fmt::Display for Term {
    /// SMT-LIB s-expression syntax. Holes print as `??`, which is not valid
    /// SyGuS; only hole-free terms are meant to leave the process.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(v) => write!(f, "{v}"),
            Term::Var(n) => f.write_str(n),
            Term::Hole(h) => {
                write!(f, "??")?;
                if f.alternate() {
                    write!(f, "{}", h.label)?;
                }
                Ok(())
            }
            Term::App(op, args) => {
                write!(f, "({op}")?;
                for a in args.iter() {
                    if f.alternate() {
                        write!(f, " {a:#}")?;
                    } else {
                        write!(f, " {a}")?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

/// A single-function program `(define-fun name params ret body)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub ret: Sort,
    pub body: Term,
}

impl Program {
    /// Checks that the body is well-sorted, closed over the parameters, and
    /// of the declared return sort.
    pub fn check(&self) -> Result<(), SortError> {
        let s = self.body.sort_of(&self.params)?;
        if s != self.ret {
            return Err(SortError::Mismatch {
                op: Op::Concat,
                index: 0,
                expected: self.ret,
                found: s,
            });
        }
        Ok(())
    }

    pub fn to_define_fun(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(n, s)| format!("({n} {s})"))
            .collect();
        format!(
            "(define-fun {} ({}) {} {})",
            self.name,
            params.join(" "),
            self.ret,
            self.body
        )
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_define_fun())
    }
}

/// One input/output pair; inputs are in parameter order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub inputs: Vec<Value>,
    pub output: Value,
}

/// Convenience used by tests and the book: a label made of `Top` in every
/// one of `n` domains.
pub fn top_label(n: usize) -> ProductAbs {
    ProductAbs::new(vec![Abstraction::Top; n])
}
