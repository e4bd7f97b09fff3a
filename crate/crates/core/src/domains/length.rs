use crate::ast::{Op, Sort, Value};
use crate::lattice::{Abstraction, BoundsEnv, Domain, DomainId, Elem, Payload};
use crate::solver::{Constraint, LinExpr, SatResult, SolverVar};

/// String lengths and integers as linear expressions over solver
/// variables. A string of length n and the integer n are the same
/// element; booleans abstract to themselves.
///
/// Two symbolic elements are ordered when they can be equal under the
/// current constraints, and committing to the order asserts the equality.
/// A symbolic element's membership test cannot see the constraint context
/// and answers `true`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LengthDomain;

pub fn len_elem(e: LinExpr) -> Abstraction {
    Abstraction::elem(DomainId::Length, Payload::Lin(e))
}

fn len_const(n: i64) -> Abstraction {
    len_elem(LinExpr::constant(n))
}

fn bool_elem(b: bool) -> Abstraction {
    Abstraction::elem(DomainId::Length, Payload::Bool(b))
}

enum Arg {
    Lin(LinExpr),
    Unknown,
}

fn resolve(a: &Abstraction, sort: Sort, benv: &mut BoundsEnv) -> Arg {
    match a {
        Abstraction::Elem(e) => match &e.payload {
            Payload::Lin(l) => Arg::Lin(l.clone()),
            _ => Arg::Unknown,
        },
        Abstraction::Var(v) => {
            let hi = match benv.get(*v) {
                Ok(b) => b.hi.clone(),
                Err(_) => return Arg::Unknown,
            };
            match hi {
                Abstraction::Elem(_) => resolve(&hi, sort, benv),
                _ if sort == Sort::Bool => Arg::Unknown,
                _ => Arg::Lin(LinExpr::var(benv.symbol_for(*v, sort))),
            }
        }
        Abstraction::Top | Abstraction::Bot => Arg::Unknown,
    }
}

fn le(a: &LinExpr, b: &LinExpr) -> Option<Constraint> {
    Constraint::le(a, b)
}

fn lt(a: &LinExpr, b: &LinExpr) -> Option<Constraint> {
    Constraint::le(&a.checked_add_const(1)?, b)
}

fn k(n: i64) -> LinExpr {
    LinExpr::constant(n)
}

/// Whether the constraints can hold together with the context. Overflowed
/// constraints and solver timeouts count as feasible.
fn feasible(benv: &BoundsEnv, cs: &[Option<Constraint>]) -> bool {
    let mut symbolic = Vec::with_capacity(cs.len());
    for c in cs {
        let Some(c) = c else { return true };
        if c.expr.as_const().is_some() {
            if !c.holds(&[]) {
                return false;
            }
        } else {
            symbolic.push(c.clone());
        }
    }
    if symbolic.is_empty() {
        return true;
    }
    benv.solver.check_with(&symbolic) != SatResult::Unsat
}

/// `a <= b` in every model.
fn entails_le(benv: &BoundsEnv, a: &LinExpr, b: &LinExpr) -> bool {
    !feasible(benv, &[lt(b, a)])
}

fn entails_eq(benv: &BoundsEnv, a: &LinExpr, b: &LinExpr) -> bool {
    a == b || (entails_le(benv, a, b) && entails_le(benv, b, a))
}

/// The single expression left after discarding infeasible cases, if the
/// feasible ones agree.
fn pick(benv: &BoundsEnv, cases: Vec<(Vec<Option<Constraint>>, Option<LinExpr>)>) -> Abstraction {
    let mut result: Option<LinExpr> = None;
    for (guards, value) in cases {
        if !feasible(benv, &guards) {
            continue;
        }
        let Some(value) = value else {
            return Abstraction::Top;
        };
        match &result {
            None => result = Some(value),
            Some(r) if *r == value => {}
            Some(_) => return Abstraction::Top,
        }
    }
    // No feasible case means the context is already contradictory.
    result.map_or(Abstraction::Bot, len_elem)
}

fn digits(n: i64) -> i64 {
    if n < 0 {
        0
    } else {
        n.to_string().len() as i64
    }
}

fn is_free(benv: &BoundsEnv, w: SolverVar, except: &[Option<Constraint>]) -> bool {
    !benv
        .solver
        .constraints()
        .iter()
        .filter(|c| !except.iter().any(|e| e.as_ref() == Some(*c)))
        .any(|c| c.expr.mentions(w))
}

fn substr(args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
    let (Arg::Lin(s), Arg::Lin(i)) = (
        resolve(&args[0], Sort::String, benv),
        resolve(&args[1], Sort::Int, benv),
    ) else {
        return Abstraction::Top;
    };
    // A length argument that is still an open hole can take any value, so
    // the result ranges over [0, s - i] whenever i is in [0, s].
    let open_len = match &args[2] {
        Abstraction::Var(v) => match benv.get(*v) {
            Ok(b) if !matches!(b.hi, Abstraction::Elem(_)) => Some(benv.symbol_for(*v, Sort::Int)),
            _ => None,
        },
        _ => None,
    };
    if let Some(w) = open_len {
        let wv = LinExpr::var(w);
        let guards = vec![le(&k(0), &wv), i.checked_add(&wv).and_then(|e| le(&e, &s))];
        if is_free(benv, w, &guards) {
            if !feasible(benv, &[lt(&i, &k(0))]) && !feasible(benv, &[lt(&s, &i)]) {
                for g in guards.into_iter().flatten() {
                    benv.solver.assert(g);
                }
                return len_elem(wv);
            }
            if !feasible(benv, &[le(&k(0), &i), le(&i, &s)]) {
                return len_const(0);
            }
        }
    }
    let Arg::Lin(n) = resolve(&args[2], Sort::Int, benv) else {
        return Abstraction::Top;
    };
    if let (Some(s), Some(i), Some(n)) = (s.as_const(), i.as_const(), n.as_const()) {
        let r = if 0 <= i && i < s && n > 0 {
            n.min(s - i)
        } else {
            0
        };
        return len_const(r);
    }
    let end = i.checked_add(&n);
    let rest = s.checked_sub(&i);
    let in_range = |extra: Option<Constraint>| vec![le(&k(0), &i), lt(&i, &s), lt(&k(0), &n), extra];
    pick(
        benv,
        vec![
            (in_range(end.as_ref().and_then(|e| le(e, &s))), Some(n.clone())),
            (in_range(end.as_ref().and_then(|e| lt(&s, e))), rest),
            (vec![lt(&i, &k(0))], Some(k(0))),
            (vec![le(&s, &i)], Some(k(0))),
            (vec![le(&n, &k(0))], Some(k(0))),
        ],
    )
}

fn at(args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
    let (Arg::Lin(s), Arg::Lin(i)) = (
        resolve(&args[0], Sort::String, benv),
        resolve(&args[1], Sort::Int, benv),
    ) else {
        return Abstraction::Top;
    };
    pick(
        benv,
        vec![
            (vec![le(&k(0), &i), lt(&i, &s)], Some(k(1))),
            (vec![lt(&i, &k(0))], Some(k(0))),
            (vec![le(&s, &i)], Some(k(0))),
        ],
    )
}

fn replace(args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
    let (Arg::Lin(s), Arg::Lin(t), Arg::Lin(u)) = (
        resolve(&args[0], Sort::String, benv),
        resolve(&args[1], Sort::String, benv),
        resolve(&args[2], Sort::String, benv),
    ) else {
        return Abstraction::Top;
    };
    if entails_eq(benv, &t, &u) {
        return len_elem(s);
    }
    if entails_eq(benv, &t, &k(0)) {
        return u.checked_add(&s).map_or(Abstraction::Top, len_elem);
    }
    if !feasible(benv, &[le(&t, &s)]) {
        return len_elem(s);
    }
    Abstraction::Top
}

fn int_to_str(args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
    let Arg::Lin(n) = resolve(&args[0], Sort::Int, benv) else {
        return Abstraction::Top;
    };
    if let Some(c) = n.as_const() {
        return len_const(digits(c));
    }
    if entails_le(benv, &n, &k(-1)) {
        return len_const(0);
    }
    let mut lo = 0i64;
    let mut hi = 9i64;
    for d in 1..=4 {
        if entails_le(benv, &k(lo), &n) && entails_le(benv, &n, &k(hi)) {
            return len_const(d);
        }
        lo = hi + 1;
        hi = hi * 10 + 9;
    }
    Abstraction::Top
}

/// `(contains s t)`, `(prefixof t s)` and `(suffixof t s)` need `t` no
/// longer than `s`, and hold trivially when `t` is empty.
fn containment(outer: &Abstraction, inner: &Abstraction, benv: &mut BoundsEnv) -> Abstraction {
    let (Arg::Lin(s), Arg::Lin(t)) = (
        resolve(outer, Sort::String, benv),
        resolve(inner, Sort::String, benv),
    ) else {
        return Abstraction::Top;
    };
    if !feasible(benv, &[le(&t, &s)]) {
        return bool_elem(false);
    }
    if entails_eq(benv, &t, &k(0)) {
        return bool_elem(true);
    }
    Abstraction::Top
}

fn arith(op: Op, args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
    let sorts = op.signature().params;
    let (Arg::Lin(a), Arg::Lin(b)) = (resolve(&args[0], sorts[0], benv), resolve(&args[1], sorts[1], benv)) else {
        return Abstraction::Top;
    };
    let r = match op {
        Op::Sub => a.checked_sub(&b),
        _ => a.checked_add(&b),
    };
    r.map_or(Abstraction::Top, len_elem)
}

impl Domain for LengthDomain {
    fn id(&self) -> DomainId {
        DomainId::Length
    }

    fn leq(&self, a: &Elem, b: &Elem, benv: &BoundsEnv) -> bool {
        match (&a.payload, &b.payload) {
            (Payload::Lin(x), Payload::Lin(y)) => {
                if x == y {
                    return true;
                }
                if x.as_const().is_some() && y.as_const().is_some() {
                    return false;
                }
                feasible(benv, &[Constraint::eq(x, y)])
            }
            (x, y) => x == y,
        }
    }

    fn compatible(&self, a: &Elem, b: &Elem, benv: &BoundsEnv) -> bool {
        self.leq(a, b, benv)
    }

    fn alpha(&self, v: &Value) -> Abstraction {
        match v {
            Value::Str(s) => len_const(s.len() as i64),
            Value::Int(n) => len_const(*n),
            Value::Bool(b) => bool_elem(*b),
        }
    }

    fn member(&self, v: &Value, e: &Elem) -> bool {
        match (&e.payload, v) {
            (Payload::Lin(l), Value::Str(s)) => l.as_const().is_none_or(|n| n == s.len() as i64),
            (Payload::Lin(l), Value::Int(m)) => l.as_const().is_none_or(|n| n == *m),
            (Payload::Bool(b), Value::Bool(c)) => b == c,
            _ => false,
        }
    }

    fn transfer(&self, op: Op, args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
        match op {
            Op::Concat | Op::Add | Op::Sub => arith(op, args, benv),
            Op::Len => match &args[0] {
                Abstraction::Var(_) => match resolve(&args[0], Sort::String, benv) {
                    Arg::Lin(l) => len_elem(l),
                    _ => Abstraction::Top,
                },
                a => a.clone(),
            },
            Op::Substr => substr(args, benv),
            Op::At => at(args, benv),
            Op::Replace => replace(args, benv),
            Op::IntToStr => int_to_str(args, benv),
            Op::Contains => containment(&args[0], &args[1], benv),
            Op::PrefixOf | Op::SuffixOf => containment(&args[1], &args[0], benv),
            Op::IndexOf | Op::StrToInt => Abstraction::Top,
        }
    }

    fn finite_enum(&self, upper: &Abstraction, sort: Sort) -> Option<Vec<Elem>> {
        if sort != Sort::Bool {
            return None;
        }
        let all = [true, false].map(|b| Elem::new(DomainId::Length, Payload::Bool(b)));
        Some(match upper {
            Abstraction::Top => all.to_vec(),
            Abstraction::Elem(e) => all.into_iter().filter(|x| x == e).collect(),
            _ => Vec::new(),
        })
    }

    fn solver_backed(&self) -> bool {
        true
    }

    fn assume_leq(&self, a: &Elem, b: &Elem, benv: &mut BoundsEnv) {
        if let (Payload::Lin(x), Payload::Lin(y)) = (&a.payload, &b.payload) {
            if x != y && (x.as_const().is_none() || y.as_const().is_none()) {
                if let Some(c) = Constraint::eq(x, y) {
                    benv.solver.assert(c);
                }
            }
        }
    }
}
