//! Partial programs guessed from simple predicates over the examples.

use std::sync::Arc;

use crate::absint::satisfies_goal;
use crate::ast::{Hole, HoleId, Op, Sort, Term, Value};
use crate::lattice::{Abstraction, BoundsEnv, LatticeError, ProductAbs, VarId};

use super::problem::{AbsSpec, Problem};

/// A starting point for the search and the bounds environment it was
/// checked in.
#[derive(Clone, Debug)]
pub struct Template {
    pub term: Term,
    pub benv: BoundsEnv,
}

/// Hands out abstract variables and hole ids that do not clash with the
/// ones already present in the spec.
#[derive(Clone, Debug)]
pub(crate) struct Fresh {
    next_var: u32,
    next_hole: u32,
}

impl Fresh {
    pub(crate) fn after(benv: &BoundsEnv) -> Fresh {
        let next_var = benv.iter().map(|(v, _)| v.0 + 1).max().unwrap_or(0);
        Fresh {
            next_var,
            next_hole: 0,
        }
    }

    pub(crate) fn var(&mut self) -> VarId {
        let v = VarId(self.next_var);
        self.next_var += 1;
        v
    }

    pub(crate) fn hole_id(&mut self) -> HoleId {
        let h = HoleId(self.next_hole);
        self.next_hole += 1;
        h
    }

    /// A hole labeled with a fresh variable per domain, registered in `benv`.
    /// `shared` replaces the fresh label when abstract checks are off.
    pub(crate) fn hole(
        &mut self,
        sort: Sort,
        n_domains: usize,
        benv: &mut BoundsEnv,
        shared: Option<&Arc<ProductAbs>>,
    ) -> Term {
        let id = self.hole_id();
        let label = match shared {
            Some(l) => l.clone(),
            None => {
                let comps = (0..n_domains)
                    .map(|_| {
                        let v = self.var();
                        benv.introduce(v);
                        Abstraction::Var(v)
                    })
                    .collect();
                Arc::new(ProductAbs::new(comps))
            }
        };
        Term::Hole(Hole { id, sort, label })
    }
}

fn all_examples(problem: &Problem, pred: impl Fn(&str, &str) -> bool) -> bool {
    problem.examples.iter().all(|ex| match (&ex.inputs[0], &ex.output) {
        (Value::Str(i), Value::Str(o)) => pred(i, o),
        _ => false,
    })
}

/// Templates for `problem` in the order they are tried, followed by the
/// bare root hole labeled with the goal. Only single-parameter
/// string-to-string problems get templates; every template must pass
/// `satisfies_goal` against the goal.
pub fn infer_templates(
    problem: &Problem,
    spec: &AbsSpec,
    prefix_template: bool,
) -> Result<Vec<Template>, LatticeError> {
    let mut fresh = Fresh::after(&spec.benv);
    infer_with(problem, spec, prefix_template, &mut fresh, None)
}

pub(crate) fn infer_with(
    problem: &Problem,
    spec: &AbsSpec,
    prefix_template: bool,
    fresh: &mut Fresh,
    shared: Option<&Arc<ProductAbs>>,
) -> Result<Vec<Template>, LatticeError> {
    let n = spec.domains.len();
    let env = spec.env(problem);
    let mut out = Vec::new();
    let single = problem.params.len() == 1
        && problem.params[0].1 == Sort::String
        && problem.ret == Sort::String
        && problem.leaf_params.contains(&0)
        && problem.allows(Op::Substr);
    if single {
        let input = Term::var(&problem.params[0].0);
        let mut shapes: Vec<Vec<Option<Term>>> = Vec::new();
        if all_examples(problem, |i, o| i.contains(o)) {
            shapes.push(vec![None, None]);
        }
        if problem.allows(Op::Len) && all_examples(problem, |i, o| i.ends_with(o)) {
            let len = Term::App(Op::Len, Arc::from(vec![input.clone()]));
            shapes.push(vec![None, Some(len)]);
        }
        let zero = Value::Int(0);
        if prefix_template
            && problem.constants.contains(&zero)
            && all_examples(problem, |i, o| i.starts_with(o))
        {
            shapes.push(vec![Some(Term::Const(zero)), None]);
        }
        for shape in shapes {
            let mut benv = spec.benv.clone();
            let mut args = vec![input.clone()];
            for a in shape {
                args.push(match a {
                    Some(t) => t,
                    None => fresh.hole(Sort::Int, n, &mut benv, shared),
                });
            }
            let term = Term::App(Op::Substr, Arc::from(args));
            let (ok, benv) = satisfies_goal(&spec.domains, &env, benv, &term, &spec.goal)?;
            if ok {
                out.push(Template { term, benv });
            }
        }
    }
    let label = match shared {
        Some(l) => l.clone(),
        None => Arc::new(spec.goal.clone()),
    };
    let root = Term::Hole(Hole {
        id: fresh.hole_id(),
        sort: problem.ret,
        label,
    });
    out.push(Template {
        term: root,
        benv: spec.benv.clone(),
    });
    Ok(out)
}
