//! Oracles shared by the integration tests: an exhaustive term enumerator,
//! a random term generator, a hole-aware evaluator and a brute-force
//! linear-arithmetic checker. None of them use the search engine.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use strsynth::ast::{Op, Sort, Term, Value};
use strsynth::interp::apply;
use strsynth::solver::{Constraint, LinExpr, SolverCtx, SolverVar};

/// Operators that produce a string or an integer.
pub fn value_ops() -> Vec<Op> {
    Op::ALL
        .iter()
        .copied()
        .filter(|o| o.ret() != Sort::Bool)
        .collect()
}

/// Every well-sorted term of size at most `max_size` built from `leaves`
/// and `ops`, grouped by size and sort.
pub struct Enumerator {
    pub by_size: Vec<BTreeMap<Sort, Vec<Term>>>,
}

impl Enumerator {
    pub fn new(leaves: &[(Term, Sort)], ops: &[Op], max_size: usize) -> Enumerator {
        let mut by_size: Vec<BTreeMap<Sort, Vec<Term>>> = vec![BTreeMap::new(); max_size + 1];
        for (t, s) in leaves {
            by_size[1].entry(*s).or_default().push(t.clone());
        }
        for size in 2..=max_size {
            let mut level: BTreeMap<Sort, Vec<Term>> = BTreeMap::new();
            for &op in ops {
                let params = op.signature().params;
                for split in splits(size - 1, params.len()) {
                    let pools: Vec<&[Term]> = params
                        .iter()
                        .zip(&split)
                        .map(|(s, &k)| by_size[k].get(s).map_or(&[][..], |v| v.as_slice()))
                        .collect();
                    for args in cartesian(&pools) {
                        let t = Term::app(op, args).expect("well sorted");
                        level.entry(op.ret()).or_default().push(t);
                    }
                }
            }
            by_size[size] = level;
        }
        Enumerator { by_size }
    }

    pub fn all_of(&self, sort: Sort) -> impl Iterator<Item = &Term> {
        self.by_size
            .iter()
            .flat_map(move |m| m.get(&sort).into_iter().flatten())
    }
}

/// Ordered ways to write `total` as a sum of `parts` positive integers.
fn splits(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in splits(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn cartesian(pools: &[&[Term]]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for pool in pools {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for t in pool.iter() {
                let mut p = prefix.clone();
                p.push(t.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Evaluates `t` with parameters from `env` and every hole replaced by
/// `hole`. `None` on an evaluation error.
pub fn eval_with_hole(t: &Term, env: &[(&str, Value)], hole: Option<&Value>) -> Option<Value> {
    match t {
        Term::Const(v) => Some(v.clone()),
        Term::Var(n) => env.iter().find(|(k, _)| *k == &**n).map(|(_, v)| v.clone()),
        Term::Hole(_) => hole.cloned(),
        Term::App(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval_with_hole(a, env, hole))
                .collect::<Option<Vec<_>>>()?;
            apply(*op, &vals).ok()
        }
    }
}

/// Distinct values of every term of height at most `height` whose leaves
/// are values from `leaves` (parameter values included), by sort.
pub fn reachable_values(
    leaves: &[Value],
    ops: &[Op],
    height: usize,
) -> BTreeMap<Sort, BTreeSet<Value>> {
    let mut vals: BTreeMap<Sort, BTreeSet<Value>> = BTreeMap::new();
    for v in leaves {
        vals.entry(v.sort()).or_default().insert(v.clone());
    }
    for _ in 1..height {
        let mut next = vals.clone();
        for &op in ops {
            let params = op.signature().params;
            let pools: Vec<Vec<Value>> = params
                .iter()
                .map(|s| vals.get(s).map(|x| x.iter().cloned().collect()).unwrap_or_default())
                .collect();
            let mut idx = vec![0usize; pools.len()];
            if pools.iter().any(Vec::is_empty) {
                continue;
            }
            loop {
                let args: Vec<Value> = idx.iter().zip(&pools).map(|(&i, p)| p[i].clone()).collect();
                if let Ok(v) = apply(op, &args) {
                    next.entry(op.ret()).or_default().insert(v);
                }
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < pools[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        vals = next;
    }
    vals
}

/// A random well-sorted hole-free term of `sort` with at most `budget`
/// nodes.
pub fn random_term(
    rng: &mut impl Rng,
    sort: Sort,
    budget: usize,
    params: &[(&str, Sort)],
    ops: &[Op],
) -> Term {
    let fitting: Vec<Op> = ops
        .iter()
        .copied()
        .filter(|o| o.ret() == sort && o.arity() < budget)
        .collect();
    if budget > 1 && !fitting.is_empty() && rng.gen_bool(0.7) {
        let op = fitting[rng.gen_range(0..fitting.len())];
        let params_s = op.signature().params;
        let mut left = budget - 1;
        let mut args = Vec::new();
        for (i, s) in params_s.iter().enumerate() {
            let reserve = params_s.len() - i - 1;
            let take = rng.gen_range(1..=left - reserve);
            let a = random_term(rng, *s, take, params, ops);
            left -= a.size();
            args.push(a);
        }
        return Term::app(op, args).expect("well sorted");
    }
    random_leaf(rng, sort, params)
}

fn random_leaf(rng: &mut impl Rng, sort: Sort, params: &[(&str, Sort)]) -> Term {
    let vars: Vec<&str> = params.iter().filter(|(_, s)| *s == sort).map(|(n, _)| *n).collect();
    if !vars.is_empty() && rng.gen_bool(0.5) {
        return Term::var(vars[rng.gen_range(0..vars.len())]);
    }
    match sort {
        Sort::Int => Term::int(rng.gen_range(-2..=6)),
        Sort::Bool => Term::Const(Value::Bool(rng.gen_bool(0.5))),
        Sort::String => Term::str(random_string(rng, 3)),
    }
}

pub fn random_string(rng: &mut impl Rng, max_len: usize) -> String {
    const ALPHABET: &[u8] = b"ab -.1";
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

/// A linear constraint `Σ coeffs[i]·x_i + constant (= | ≤) 0`.
#[derive(Clone, Debug)]
pub struct RawConstraint {
    pub coeffs: Vec<i64>,
    pub constant: i64,
    pub eq: bool,
}

impl RawConstraint {
    pub fn holds(&self, x: &[i64]) -> bool {
        let v: i64 = self.coeffs.iter().zip(x).map(|(c, x)| c * x).sum::<i64>() + self.constant;
        if self.eq {
            v == 0
        } else {
            v <= 0
        }
    }
}

/// Every assignment in the box `bounds` satisfying all of `cs`.
pub fn brute_force(bounds: &[(i64, i64)], cs: &[RawConstraint]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut x: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    if bounds.iter().any(|(lo, hi)| lo > hi) {
        return out;
    }
    loop {
        if cs.iter().all(|c| c.holds(&x)) {
            out.push(x.clone());
        }
        let mut k = 0;
        while k < x.len() {
            x[k] += 1;
            if x[k] <= bounds[k].1 {
                break;
            }
            x[k] = bounds[k].0;
            k += 1;
        }
        if k == x.len() {
            return out;
        }
    }
}

/// The solver encoding of `cs` over fresh variables with `bounds`.
pub fn build_system(bounds: &[(i64, i64)], cs: &[RawConstraint]) -> (SolverCtx, Vec<SolverVar>) {
    let mut ctx = SolverCtx::new();
    let vars: Vec<_> = bounds.iter().map(|&(lo, hi)| ctx.new_var(lo, hi)).collect();
    for c in cs {
        let mut e = LinExpr::constant(c.constant);
        for (&k, &v) in c.coeffs.iter().zip(&vars) {
            e = e.checked_add(&LinExpr::term(k, v)).expect("small coefficients");
        }
        let zero = LinExpr::constant(0);
        let c = if c.eq {
            Constraint::eq(&e, &zero)
        } else {
            Constraint::le(&e, &zero)
        };
        ctx.assert(c.expect("small coefficients"));
    }
    (ctx, vars)
}

/// Values of variable `i` over all `models`, ascending and distinct.
pub fn projection(models: &[Vec<i64>], i: usize) -> Vec<i64> {
    models
        .iter()
        .map(|m| m[i])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}
