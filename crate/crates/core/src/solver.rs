//! A small decision procedure for conjunctions of linear integer
//! constraints over bounded variables.
//!
//! The length domain only ever produces a handful of variables with small
//! ranges, so bound propagation followed by a depth-first search over the
//! remaining values is enough. The search is budgeted; when the budget runs
//! out the answer is [`SatResult::Unknown`].

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolverVar(pub u32);

impl fmt::Display for SolverVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// `sum(coeff * var) + constant`, with zero coefficients never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    coeffs: BTreeMap<SolverVar, i64>,
    constant: i64,
}

impl LinExpr {
    pub fn constant(k: i64) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: k,
        }
    }

    pub fn var(v: SolverVar) -> LinExpr {
        LinExpr::term(1, v)
    }

    pub fn term(c: i64, v: SolverVar) -> LinExpr {
        let mut coeffs = BTreeMap::new();
        if c != 0 {
            coeffs.insert(v, c);
        }
        LinExpr {
            coeffs,
            constant: 0,
        }
    }

    pub fn as_const(&self) -> Option<i64> {
        self.coeffs.is_empty().then_some(self.constant)
    }

    pub fn const_part(&self) -> i64 {
        self.constant
    }

    pub fn coeff(&self, v: SolverVar) -> i64 {
        self.coeffs.get(&v).copied().unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = SolverVar> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (SolverVar, i64)> + '_ {
        self.coeffs.iter().map(|(v, c)| (*v, *c))
    }

    pub fn mentions(&self, v: SolverVar) -> bool {
        self.coeffs.contains_key(&v)
    }

    /// `None` on overflow.
    pub fn checked_add(&self, other: &LinExpr) -> Option<LinExpr> {
        let mut out = self.clone();
        out.constant = out.constant.checked_add(other.constant)?;
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(*v).or_insert(0);
            *e = e.checked_add(*c)?;
            if *e == 0 {
                out.coeffs.remove(v);
            }
        }
        Some(out)
    }

    pub fn checked_scale(&self, k: i64) -> Option<LinExpr> {
        if k == 0 {
            return Some(LinExpr::constant(0));
        }
        let mut coeffs = BTreeMap::new();
        for (v, c) in &self.coeffs {
            coeffs.insert(*v, c.checked_mul(k)?);
        }
        Some(LinExpr {
            coeffs,
            constant: self.constant.checked_mul(k)?,
        })
    }

    pub fn checked_sub(&self, other: &LinExpr) -> Option<LinExpr> {
        self.checked_add(&other.checked_scale(-1)?)
    }

    pub fn checked_add_const(&self, k: i64) -> Option<LinExpr> {
        let mut out = self.clone();
        out.constant = out.constant.checked_add(k)?;
        Some(out)
    }

    /// Value under an assignment indexed by variable id. Unassigned
    /// variables are treated as zero.
    pub fn eval(&self, model: &[i64]) -> i128 {
        self.coeffs.iter().fold(self.constant as i128, |acc, (v, c)| {
            acc + (*c as i128) * (model.get(v.0 as usize).copied().unwrap_or(0) as i128)
        })
    }

    /// Rewrites `self = 0` as `v = rest` when `v` has coefficient +1 or -1.
    pub fn isolate(&self, v: SolverVar) -> Option<LinExpr> {
        let c = self.coeff(v);
        if c != 1 && c != -1 {
            return None;
        }
        let mut rest = self.clone();
        rest.coeffs.remove(&v);
        // c*v + rest = 0  =>  v = -rest / c
        rest.checked_scale(-c)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let sign = if *c < 0 { "-" } else { "+" };
            let mag = c.unsigned_abs();
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0 {
            let sign = if self.constant < 0 { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.unsigned_abs())
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Le,
}

/// `expr rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl Constraint {
    pub fn eq(a: &LinExpr, b: &LinExpr) -> Option<Constraint> {
        Some(Constraint {
            expr: a.checked_sub(b)?,
            rel: Rel::Eq,
        })
    }

    pub fn le(a: &LinExpr, b: &LinExpr) -> Option<Constraint> {
        Some(Constraint {
            expr: a.checked_sub(b)?,
            rel: Rel::Le,
        })
    }

    pub fn holds(&self, model: &[i64]) -> bool {
        let v = self.expr.eval(model);
        match self.rel {
            Rel::Eq => v == 0,
            Rel::Le => v <= 0,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.rel {
            Rel::Eq => "=",
            Rel::Le => "<=",
        };
        write!(f, "{} {r} 0", self.expr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown,
}

impl SatResult {
    /// Unknown is treated as possibly satisfiable.
    pub fn maybe_sat(self) -> bool {
        !matches!(self, SatResult::Unsat)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("pop without matching push")]
    EmptyStack,
}

/// Values of a variable consistent with the current constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solutions {
    pub values: Vec<i64>,
    /// False when the enumeration hit its limit or a check came back
    /// unknown, so `values` may be missing entries.
    pub complete: bool,
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    constraints: usize,
    vars: usize,
}

#[derive(Clone, Debug)]
pub struct SolverCtx {
    bounds: Vec<(i64, i64)>,
    constraints: Vec<Constraint>,
    frames: Vec<Frame>,
    node_limit: u64,
}

impl Default for SolverCtx {
    fn default() -> Self {
        SolverCtx::new()
    }
}

type Bounds = Vec<(i128, i128)>;

enum Search {
    Found(Vec<i64>),
    Exhausted,
    OutOfBudget,
}

impl SolverCtx {
    pub const DEFAULT_NODE_LIMIT: u64 = 20_000;

    pub fn new() -> SolverCtx {
        SolverCtx {
            bounds: Vec::new(),
            constraints: Vec::new(),
            frames: Vec::new(),
            node_limit: Self::DEFAULT_NODE_LIMIT,
        }
    }

    pub fn with_node_limit(mut self, limit: u64) -> SolverCtx {
        self.node_limit = limit;
        self
    }

    /// A fresh variable ranging over `[lo, hi]`.
    pub fn new_var(&mut self, lo: i64, hi: i64) -> SolverVar {
        let v = SolverVar(self.bounds.len() as u32);
        self.bounds.push((lo, hi));
        v
    }

    pub fn bounds(&self, v: SolverVar) -> (i64, i64) {
        self.bounds[v.0 as usize]
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Adds a constraint; asserting one already present is a no-op.
    pub fn assert(&mut self, c: Constraint) {
        if !self.constraints.contains(&c) {
            self.constraints.push(c);
        }
    }

    pub fn assert_eq(&mut self, a: &LinExpr, b: &LinExpr) -> bool {
        match Constraint::eq(a, b) {
            Some(c) => {
                self.assert(c);
                true
            }
            None => false,
        }
    }

    pub fn assert_le(&mut self, a: &LinExpr, b: &LinExpr) -> bool {
        match Constraint::le(a, b) {
            Some(c) => {
                self.assert(c);
                true
            }
            None => false,
        }
    }

    pub fn push(&mut self) {
        self.frames.push(Frame {
            constraints: self.constraints.len(),
            vars: self.bounds.len(),
        });
    }

    /// Drops every constraint and variable added since the matching push.
    pub fn pop(&mut self) -> Result<(), SolverError> {
        let f = self.frames.pop().ok_or(SolverError::EmptyStack)?;
        self.constraints.truncate(f.constraints);
        self.bounds.truncate(f.vars);
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn check_sat(&self) -> SatResult {
        self.check_with(&[])
    }

    /// Checks `self /\ extra` without modifying the context.
    pub fn check_with(&self, extra: &[Constraint]) -> SatResult {
        match self.search(extra) {
            Search::Found(_) => SatResult::Sat,
            Search::Exhausted => SatResult::Unsat,
            Search::OutOfBudget => SatResult::Unknown,
        }
    }

    /// A satisfying assignment indexed by variable id, if one is found
    /// within budget.
    pub fn model(&self) -> Option<Vec<i64>> {
        match self.search(&[]) {
            Search::Found(m) => Some(m),
            _ => None,
        }
    }

    /// Whether `a = b` holds in every model.
    pub fn entails_eq(&self, a: &LinExpr, b: &LinExpr) -> bool {
        let (Some(lt), Some(gt)) = (
            a.checked_sub(b).and_then(|d| d.checked_add_const(1)),
            b.checked_sub(a).and_then(|d| d.checked_add_const(1)),
        ) else {
            return false;
        };
        let lt = Constraint {
            expr: lt,
            rel: Rel::Le,
        };
        let gt = Constraint {
            expr: gt,
            rel: Rel::Le,
        };
        self.check_with(&[lt]) == SatResult::Unsat && self.check_with(&[gt]) == SatResult::Unsat
    }

    /// Whether `a <= b` holds in every model.
    pub fn entails_le(&self, a: &LinExpr, b: &LinExpr) -> bool {
        // negation: b + 1 <= a
        let Some(neg) = b.checked_sub(a).and_then(|d| d.checked_add_const(1)) else {
            return false;
        };
        self.check_with(&[Constraint {
            expr: neg,
            rel: Rel::Le,
        }]) == SatResult::Unsat
    }

    /// Values of `v` in ascending order, at most `limit` of them.
    pub fn solve_for(&self, v: SolverVar, limit: usize) -> Solutions {
        let mut b = self.initial_bounds();
        if !propagate(&self.constraints, &mut b) {
            return Solutions {
                values: Vec::new(),
                complete: true,
            };
        }
        let (lo, hi) = b[v.0 as usize];
        let mut values = Vec::new();
        let mut complete = true;
        let mut x = lo;
        while x <= hi {
            if values.len() >= limit {
                complete = false;
                break;
            }
            let xv = x as i64;
            let pin = Constraint {
                expr: LinExpr::var(v).checked_add_const(-xv).expect("in range"),
                rel: Rel::Eq,
            };
            match self.check_with(&[pin]) {
                SatResult::Sat => values.push(xv),
                SatResult::Unsat => {}
                SatResult::Unknown => {
                    values.push(xv);
                    complete = false;
                }
            }
            x += 1;
        }
        Solutions { values, complete }
    }

    fn initial_bounds(&self) -> Bounds {
        self.bounds
            .iter()
            .map(|&(lo, hi)| (lo as i128, hi as i128))
            .collect()
    }

    fn search(&self, extra: &[Constraint]) -> Search {
        let mut b = self.initial_bounds();
        let mut budget = self.node_limit;
        let all: Vec<&Constraint> = self.constraints.iter().chain(extra).collect();
        let mut relevant: Vec<SolverVar> = all.iter().flat_map(|c| c.expr.vars()).collect();
        relevant.sort();
        relevant.dedup();
        if b.iter().any(|(lo, hi)| lo > hi) {
            return Search::Exhausted;
        }
        match dfs(&all, &mut b, &relevant, &mut budget) {
            Some(true) => {
                let model = b.iter().map(|(lo, _)| *lo as i64).collect();
                Search::Found(model)
            }
            Some(false) => Search::Exhausted,
            None => Search::OutOfBudget,
        }
    }

}

/// Tightens bounds to a fixpoint (or a round limit). Returns false when
/// some domain becomes empty.
fn propagate<'a>(cs: impl IntoIterator<Item = &'a Constraint> + Clone, b: &mut Bounds) -> bool {
    if b.iter().any(|(lo, hi)| lo > hi) {
        return false;
    }
    for _round in 0..256 {
        let mut changed = false;
        for c in cs.clone() {
            let dirs: &[i128] = match c.rel {
                Rel::Le => &[1],
                Rel::Eq => &[1, -1],
            };
            for &d in dirs {
                match tighten(&c.expr, d, b) {
                    None => return false,
                    Some(ch) => changed |= ch,
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

/// `Some(true)` leaves `b` pinned to a model on the relevant variables.
fn dfs(cs: &[&Constraint], b: &mut Bounds, vars: &[SolverVar], budget: &mut u64) -> Option<bool> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    if !propagate(cs.iter().copied(), b) {
        return Some(false);
    }
    let Some(&v) = vars.iter().find(|v| {
        let (lo, hi) = b[v.0 as usize];
        lo < hi
    }) else {
        let model: Vec<i64> = b.iter().map(|(lo, _)| *lo as i64).collect();
        return Some(cs.iter().all(|c| c.holds(&model)));
    };
    let (lo, hi) = b[v.0 as usize];
    let mut x = lo;
    while x <= hi {
        let mut child = b.clone();
        child[v.0 as usize] = (x, x);
        match dfs(cs, &mut child, vars, budget) {
            Some(true) => {
                *b = child;
                return Some(true);
            }
            Some(false) => {}
            None => return None,
        }
        x += 1;
    }
    Some(false)
}

/// One propagation step for `d * expr <= 0`. Returns `None` on an empty
/// domain, otherwise whether any bound moved.
fn tighten(expr: &LinExpr, d: i128, b: &mut Bounds) -> Option<bool> {
    let min_of = |c: i128, (lo, hi): (i128, i128)| if c > 0 { c * lo } else { c * hi };
    let total_min: i128 = expr
        .terms()
        .map(|(v, c)| min_of(d * c as i128, b[v.0 as usize]))
        .sum::<i128>()
        + d * expr.const_part() as i128;
    if total_min > 0 {
        return None;
    }
    let mut changed = false;
    for (v, c) in expr.terms() {
        let c = d * c as i128;
        let i = v.0 as usize;
        // c*x <= -(total_min - min(c*x))
        let rhs = -(total_min - min_of(c, b[i]));
        let (lo, hi) = b[i];
        if c > 0 {
            let nh = rhs.div_euclid(c);
            if nh < hi {
                b[i].1 = nh;
                changed = true;
            }
        } else {
            let nl = -(rhs.div_euclid(-c));
            if nl > lo {
                b[i].0 = nl;
                changed = true;
            }
        }
        if b[i].0 > b[i].1 {
            return None;
        }
    }
    Some(changed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: SolverVar) -> LinExpr {
        LinExpr::var(v)
    }

    fn k(n: i64) -> LinExpr {
        LinExpr::constant(n)
    }

    #[test]
    fn linexpr_canonical_form() {
        let a = SolverVar(0);
        let e = x(a).checked_add(&x(a)).unwrap().checked_sub(&x(a)).unwrap();
        assert_eq!(e, x(a));
        let z = x(a).checked_sub(&x(a)).unwrap();
        assert_eq!(z.as_const(), Some(0));
        assert_eq!(format!("{}", LinExpr::term(-2, a).checked_add_const(3).unwrap()), "-2*v0 + 3");
        assert!(k(i64::MAX).checked_add_const(1).is_none());
    }

    #[test]
    fn simple_sat_and_unsat() {
        let mut s = SolverCtx::new();
        let a = s.new_var(0, 10);
        let b = s.new_var(0, 10);
        s.assert_eq(&x(a).checked_add(&x(b)).unwrap(), &k(7));
        s.assert_le(&x(a), &k(2));
        assert_eq!(s.check_sat(), SatResult::Sat);
        let m = s.model().unwrap();
        assert_eq!(m[0] + m[1], 7);
        assert!(m[0] <= 2);
        s.push();
        s.assert_le(&k(8), &x(b));
        assert_eq!(s.check_sat(), SatResult::Unsat);
        s.pop().unwrap();
        assert_eq!(s.check_sat(), SatResult::Sat);
    }

    #[test]
    fn pop_on_empty_stack_is_an_error() {
        let mut s = SolverCtx::new();
        assert_eq!(s.pop(), Err(SolverError::EmptyStack));
    }

    #[test]
    fn pop_discards_variables() {
        let mut s = SolverCtx::new();
        s.new_var(0, 1);
        s.push();
        s.new_var(0, 1);
        assert_eq!(s.num_vars(), 2);
        s.pop().unwrap();
        assert_eq!(s.num_vars(), 1);
    }

    #[test]
    fn parity_needs_search() {
        // 2a = 2b + 1 has no integer solution; bounds alone do not see it.
        let mut s = SolverCtx::new();
        let a = s.new_var(0, 20);
        let b = s.new_var(0, 20);
        s.assert_eq(
            &LinExpr::term(2, a),
            &LinExpr::term(2, b).checked_add_const(1).unwrap(),
        );
        assert_eq!(s.check_sat(), SatResult::Unsat);
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let mut s = SolverCtx::new().with_node_limit(5);
        let a = s.new_var(0, 1000);
        let b = s.new_var(0, 1000);
        s.assert_eq(
            &LinExpr::term(2, a),
            &LinExpr::term(2, b).checked_add_const(1).unwrap(),
        );
        assert_eq!(s.check_sat(), SatResult::Unknown);
        assert!(s.check_sat().maybe_sat());
    }

    #[test]
    fn solve_for_lists_ascending_values() {
        let mut s = SolverCtx::new();
        let a = s.new_var(0, 10);
        let b = s.new_var(3, 4);
        s.assert_eq(&x(a), &x(b).checked_add_const(2).unwrap());
        let sol = s.solve_for(a, 100);
        assert_eq!(sol.values, vec![5, 6]);
        assert!(sol.complete);
        let sol = s.solve_for(a, 1);
        assert_eq!(sol.values, vec![5]);
        assert!(!sol.complete);
    }

    #[test]
    fn entailment() {
        let mut s = SolverCtx::new();
        let a = s.new_var(0, 10);
        s.assert_eq(&x(a), &k(4));
        assert!(s.entails_eq(&x(a), &k(4)));
        assert!(s.entails_le(&x(a), &k(5)));
        assert!(!s.entails_le(&x(a), &k(3)));
        assert_eq!(s.depth(), 0);
    }

    #[test]
    fn isolate_unit_coefficient() {
        let a = SolverVar(0);
        let b = SolverVar(1);
        // a - b - 3 = 0  =>  b = a - 3
        let e = x(a).checked_sub(&x(b)).unwrap().checked_add_const(-3).unwrap();
        assert_eq!(e.isolate(b).unwrap(), x(a).checked_add_const(-3).unwrap());
        assert!(LinExpr::term(2, a).isolate(a).is_none());
    }
}
