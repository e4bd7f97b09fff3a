//! Abstract evaluation of partial programs over a product of domains.

use std::sync::Arc;

use crate::ast::Term;
use crate::lattice::{
    leq_narrow, Abstraction, AbsEnv, BoundsEnv, Domain, LatticeError, ProductAbs,
};
use crate::solver::SatResult;

#[derive(Clone, Debug)]
pub struct AbsResult {
    pub value: ProductAbs,
    pub benv: BoundsEnv,
    /// Set when the constraints collected during evaluation are
    /// unsatisfiable, so no concretization can exist.
    pub refuted: bool,
}

/// Evaluates `t` under `env`. Constants go through each domain's `alpha`,
/// variables are looked up, holes evaluate to their labels, and
/// applications apply every domain's transfer function to the matching
/// components of the argument values.
pub fn abs_eval(
    domains: &[Arc<dyn Domain>],
    env: &AbsEnv,
    mut benv: BoundsEnv,
    t: &Term,
) -> Result<AbsResult, LatticeError> {
    let before = benv.solver.constraints().len();
    let value = eval(domains, env, &mut benv, t)?;
    let refuted =
        benv.solver.constraints().len() != before && benv.solver.check_sat() == SatResult::Unsat;
    Ok(AbsResult {
        value,
        benv,
        refuted,
    })
}

fn eval(
    domains: &[Arc<dyn Domain>],
    env: &AbsEnv,
    benv: &mut BoundsEnv,
    t: &Term,
) -> Result<ProductAbs, LatticeError> {
    match t {
        Term::Const(v) => Ok(ProductAbs::new(domains.iter().map(|d| d.alpha(v)).collect())),
        Term::Var(name) => {
            let p = env.lookup(name)?;
            if p.len() != domains.len() {
                return Err(LatticeError::Arity(p.len(), domains.len()));
            }
            Ok(p.clone())
        }
        Term::Hole(h) => {
            if h.label.len() != domains.len() {
                return Err(LatticeError::Arity(h.label.len(), domains.len()));
            }
            Ok((*h.label).clone())
        }
        Term::App(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval(domains, env, benv, a))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = Vec::with_capacity(domains.len());
            let mut comp: Vec<Abstraction> = Vec::with_capacity(args.len());
            for (k, d) in domains.iter().enumerate() {
                comp.clear();
                comp.extend(vals.iter().map(|v| v.0[k].clone()));
                out.push(d.transfer(*op, &comp, benv));
            }
            Ok(ProductAbs::new(out))
        }
    }
}

/// The element every concretization of `a` lies below, if known.
pub fn upper<'a>(a: &'a Abstraction, benv: &'a BoundsEnv) -> Option<&'a Abstraction> {
    match a {
        Abstraction::Elem(_) => Some(a),
        Abstraction::Var(v) => match benv.get(*v) {
            Ok(b) if matches!(b.hi, Abstraction::Elem(_)) => Some(&b.hi),
            _ => None,
        },
        _ => None,
    }
}

/// True when `a` and `b` provably share no concrete value.
pub fn disjoint(dom: &dyn Domain, a: &Abstraction, b: &Abstraction, benv: &BoundsEnv) -> bool {
    match (upper(a, benv), upper(b, benv)) {
        (Some(Abstraction::Elem(x)), Some(Abstraction::Elem(y))) => !dom.compatible(x, y, benv),
        _ => false,
    }
}

/// Checks the abstract value of `t` against `goal`, narrowing variables
/// where the order can hold.
///
/// A component whose order check fails only refutes the term when the two
/// abstractions are provably disjoint. Holes stand for every possible
/// filling, and a value that is not below the goal (for instance `Top`)
/// may still have concretizations inside it.
pub fn satisfies_goal(
    domains: &[Arc<dyn Domain>],
    env: &AbsEnv,
    benv: BoundsEnv,
    t: &Term,
    goal: &ProductAbs,
) -> Result<(bool, BoundsEnv), LatticeError> {
    if goal.len() != domains.len() {
        return Err(LatticeError::Arity(goal.len(), domains.len()));
    }
    let res = abs_eval(domains, env, benv, t)?;
    let mut benv = res.benv;
    if res.refuted {
        return Ok((false, benv));
    }
    let before = benv.solver.constraints().len();
    for ((a, g), d) in res.value.0.iter().zip(&goal.0).zip(domains) {
        if !leq_narrow(&mut benv, a, g, d.as_ref())? && disjoint(d.as_ref(), a, g, &benv) {
            return Ok((false, benv));
        }
    }
    if benv.solver.constraints().len() != before && benv.solver.check_sat() == SatResult::Unsat {
        return Ok((false, benv));
    }
    Ok((true, benv))
}
