//! Worklist search over partial programs.
//!
//! Candidates are popped smallest first. The leftmost hole of a popped
//! candidate is replaced by constants, parameters, cached small terms and
//! operator applications with fresh holes; every child is checked against
//! the goal abstraction before it is queued or, when hole-free, run on the
//! examples.
//!
//! The heap key is (size, phase, insertion order): templates inferred from
//! the examples are phase 0 and win ties against descendants of the bare
//! root hole. Hole-free children are tested as soon as they are generated,
//! so a cached subterm can complete a program above the current size.

mod cache;
mod problem;
mod templates;

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::hash::{BuildHasher, Hash, Hasher};
use std::sync::LazyLock;
use std::sync::Arc;
use std::time::Instant;

pub use cache::{CacheEntry, TermCache};
pub use problem::{
    default_max_len, AbsSpec, Outcome, Problem, ProblemError, Stats, SynthConfig, SynthResult,
};
pub use templates::{infer_templates, Template};

use crate::absint::{abs_eval, satisfies_goal};
use crate::ast::{top_label, Hole, Op, Sort, Term, Value};
use crate::interp::apply;
use crate::lattice::{Abstraction, AbsEnv, BoundsEnv, LatticeError, Payload, ProductAbs, VarId};
use crate::solver::{Constraint, LinExpr, SatResult};
use cache::{below, compatible};
use templates::{infer_with, Fresh};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("abstract evaluation failed: {0}")]
    Lattice(#[from] LatticeError),
}

/// Most argument combinations a single finite or solver-guided expansion
/// may produce.
const MAX_COMBINATIONS: usize = 256;
/// Largest term drawn as a concrete argument during solver-guided expansion.
const SOLVE_ARG_SIZE: usize = 3;
/// Most solutions taken from the solver for one hole.
const SOLVE_LIMIT: usize = 8;
/// Pops between clock reads.
const CLOCK_INTERVAL: u64 = 1024;

struct Candidate {
    term: Term,
    size: usize,
    phase: u8,
    seq: u64,
    benv: Arc<BoundsEnv>,
}

impl Candidate {
    fn key(&self) -> (usize, u8, u64) {
        (self.size, self.phase, self.seq)
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed so the max-heap pops the smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

/// Runs candidates on the examples without building a name map per call.
struct Tester {
    params: Vec<String>,
    examples: Vec<(Vec<Value>, Value)>,
}

impl Tester {
    fn new(problem: &Problem) -> Tester {
        Tester {
            params: problem.params.iter().map(|(n, _)| n.clone()).collect(),
            examples: problem
                .examples
                .iter()
                .map(|e| (e.inputs.clone(), e.output.clone()))
                .collect(),
        }
    }

    fn run(&self, t: &Term, inputs: &[Value]) -> Option<Value> {
        match t {
            Term::Const(v) => Some(v.clone()),
            Term::Var(n) => {
                let i = self.params.iter().position(|p| **p == **n)?;
                Some(inputs[i].clone())
            }
            Term::Hole(_) => None,
            Term::App(op, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args.iter() {
                    vals.push(self.run(a, inputs)?);
                }
                apply(*op, &vals).ok()
            }
        }
    }

    fn passes(&self, t: &Term) -> bool {
        self.examples
            .iter()
            .all(|(inputs, out)| self.run(t, inputs).as_ref() == Some(out))
    }
}

static FP_SEEDS: LazyLock<[ahash::RandomState; 2]> = LazyLock::new(|| {
    [
        ahash::RandomState::with_seeds(1, 2, 3, 4),
        ahash::RandomState::with_seeds(5, 6, 7, 8),
    ]
});

/// Structural fingerprint with abstract variables renamed in order of first
/// occurrence, so that candidates differing only in variable names collide.
/// Fixed seeds keep runs reproducible.
fn fingerprint(t: &Term, benv: Option<&BoundsEnv>) -> u128 {
    struct Fp<'a> {
        a: ahash::AHasher,
        b: ahash::AHasher,
        vars: Vec<VarId>,
        benv: Option<&'a BoundsEnv>,
    }
    impl Fp<'_> {
        fn put<T: Hash + ?Sized>(&mut self, x: &T) {
            x.hash(&mut self.a);
            x.hash(&mut self.b);
        }
        fn walk(&mut self, t: &Term) {
            match t {
                Term::Const(v) => {
                    self.put(&0u8);
                    self.put(v);
                }
                Term::Var(n) => {
                    self.put(&1u8);
                    self.put(&**n);
                }
                Term::App(op, args) => {
                    self.put(&2u8);
                    self.put(op);
                    for a in args.iter() {
                        self.walk(a);
                    }
                }
                Term::Hole(h) => {
                    self.put(&3u8);
                    self.put(&h.sort);
                    for c in &h.label.0 {
                        match c {
                            Abstraction::Var(v) => {
                                let idx = match self.vars.iter().position(|w| w == v) {
                                    Some(i) => i,
                                    None => {
                                        self.vars.push(*v);
                                        if let Some(b) = self.benv.and_then(|e| e.get(*v).ok()) {
                                            self.put(&b.lo);
                                            self.put(&b.hi);
                                        }
                                        self.vars.len() - 1
                                    }
                                };
                                self.put(&4u8);
                                self.put(&idx);
                            }
                            other => self.put(other),
                        }
                    }
                }
            }
        }
    }
    let mut fp = Fp {
        a: FP_SEEDS[0].build_hasher(),
        b: FP_SEEDS[1].build_hasher(),
        vars: Vec::new(),
        benv,
    };
    fp.walk(t);
    (u128::from(fp.a.finish()) << 64) | u128::from(fp.b.finish())
}

/// Sorts a hole can take: the return sort and, transitively, the argument
/// sorts of allowed operators producing a reachable sort.
fn reachable_sorts(problem: &Problem) -> BTreeSet<Sort> {
    let mut sorts = BTreeSet::from([problem.ret]);
    loop {
        let before = sorts.len();
        for op in &problem.ops {
            let sig = op.signature();
            if sorts.contains(&sig.ret) {
                sorts.extend(sig.params.iter().copied());
            }
        }
        if sorts.len() == before {
            return sorts;
        }
    }
}

/// Every allowed one-application term whose arguments are parameters or
/// constants, in operator then argument order.
fn seed_terms(problem: &Problem, sorts: &BTreeSet<Sort>) -> Vec<(Term, Sort)> {
    let mut leaves: HashMap<Sort, Vec<Term>> = HashMap::new();
    for &s in sorts {
        let mut ls: Vec<Term> = problem
            .leaf_params
            .iter()
            .filter(|&&i| problem.params[i].1 == s)
            .map(|&i| Term::var(&problem.params[i].0))
            .collect();
        ls.extend(problem.constants_of(s).cloned().map(Term::Const));
        leaves.insert(s, ls);
    }
    let mut out = Vec::new();
    for op in &problem.ops {
        let sig = op.signature();
        if !sorts.contains(&sig.ret) {
            continue;
        }
        let pools: Vec<&[Term]> = sig
            .params
            .iter()
            .map(|s| leaves.get(s).map(Vec::as_slice).unwrap_or(&[]))
            .collect();
        for args in product(&pools, usize::MAX) {
            out.push((Term::App(*op, Arc::from(args)), sig.ret));
        }
    }
    out
}

/// Cartesian product of `pools` in lexicographic order, truncated to `cap`
/// tuples.
fn product<T: Clone>(pools: &[&[T]], cap: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for pool in pools {
        let mut next = Vec::new();
        'outer: for prefix in &out {
            for x in pool.iter() {
                if next.len() >= cap {
                    break 'outer;
                }
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

struct Engine<'a> {
    problem: &'a Problem,
    spec: &'a AbsSpec,
    config: &'a SynthConfig,
    env: AbsEnv,
    /// The goal is all `Top`, so no candidate can be refuted and abstract
    /// checks are skipped.
    trivial: bool,
    top: Arc<ProductAbs>,
    fresh: Fresh,
    seq: u64,
    seen: HashSet<u128>,
    heap: BinaryHeap<Candidate>,
    cache: TermCache,
    leaves: HashMap<Sort, Vec<(Term, ProductAbs)>>,
    tester: Tester,
    stats: Stats,
    tested_terms: Vec<Term>,
    popped: Vec<(u8, usize)>,
}

impl<'a> Engine<'a> {
    fn new(problem: &'a Problem, spec: &'a AbsSpec, config: &'a SynthConfig) -> Result<Self, SynthError> {
        problem.validate()?;
        spec.check(problem)?;
        let env = spec.env(problem);
        let sorts = reachable_sorts(problem);
        let mut leaves: HashMap<Sort, Vec<(Term, ProductAbs)>> = HashMap::new();
        for &s in &sorts {
            let mut ls = Vec::new();
            for v in problem.constants_of(s) {
                let alpha = ProductAbs::new(spec.domains.iter().map(|d| d.alpha(v)).collect());
                ls.push((Term::Const(v.clone()), alpha));
            }
            for &i in &problem.leaf_params {
                let (name, sort) = &problem.params[i];
                if *sort == s {
                    ls.push((Term::var(name), spec.params[i].clone()));
                }
            }
            leaves.insert(s, ls);
        }
        let mut cache = TermCache::new();
        if config.use_cache {
            for (t, s) in seed_terms(problem, &sorts) {
                cache.put(&spec.domains, &env, &spec.benv, t, s)?;
            }
        }
        Ok(Engine {
            problem,
            spec,
            config,
            env,
            trivial: spec.is_trivial(),
            top: Arc::new(top_label(spec.domains.len())),
            fresh: Fresh::after(&spec.benv),
            seq: 0,
            seen: HashSet::new(),
            heap: BinaryHeap::new(),
            cache,
            leaves,
            tester: Tester::new(problem),
            stats: Stats::default(),
            tested_terms: Vec::new(),
            popped: Vec::new(),
        })
    }

    fn shared(&self) -> Option<Arc<ProductAbs>> {
        self.trivial.then(|| self.top.clone())
    }

    fn hole(&mut self, sort: Sort, benv: &mut BoundsEnv) -> Term {
        let n = self.spec.domains.len();
        let shared = self.shared();
        self.fresh.hole(sort, n, benv, shared.as_ref())
    }

    /// Registers a new candidate. Returns the term when it is hole-free and
    /// passes every example.
    fn offer(
        &mut self,
        term: Term,
        size: usize,
        phase: u8,
        benv: Arc<BoundsEnv>,
    ) -> Result<Option<Term>, SynthError> {
        if size > self.config.max_size {
            return Ok(None);
        }
        let fp = fingerprint(&term, (!self.trivial).then_some(&*benv));
        if !self.seen.insert(fp) {
            return Ok(None);
        }
        self.stats.generated += 1;
        let benv = if self.trivial {
            benv
        } else {
            let (ok, mut narrowed) = satisfies_goal(
                &self.spec.domains,
                &self.env,
                (*benv).clone(),
                &term,
                &self.spec.goal,
            )?;
            if !ok {
                self.stats.eliminated += 1;
                return Ok(None);
            }
            // Queued candidates dominate memory: share the parent's
            // environment when nothing changed, else keep only live bounds.
            if narrowed.same_as(&benv) {
                benv
            } else {
                let live = term.label_vars();
                narrowed.retain(|v| live.contains(&v));
                Arc::new(narrowed)
            }
        };
        if term.no_hole() {
            return Ok(self.test(term));
        }
        self.seq += 1;
        self.heap.push(Candidate {
            term,
            size,
            phase,
            seq: self.seq,
            benv,
        });
        Ok(None)
    }

    fn test(&mut self, term: Term) -> Option<Term> {
        self.stats.tested += 1;
        if self.config.trace {
            self.tested_terms.push(term.clone());
        }
        self.tester.passes(&term).then_some(term)
    }

    /// Offers `parent` with the hole at `path` replaced by `with`.
    fn fill(
        &mut self,
        parent: &Candidate,
        path: &[usize],
        with: Term,
        benv: Arc<BoundsEnv>,
    ) -> Result<Option<Term>, SynthError> {
        let size = parent.size - 1 + with.size();
        if size > self.config.max_size {
            return Ok(None);
        }
        let term = parent.term.replace_at(path, with);
        self.offer(term, size, parent.phase, benv)
    }


    fn expand(&mut self, parent: &Candidate) -> Result<Option<Term>, SynthError> {
        let Some((path, hole)) = parent.term.leftmost_hole() else {
            return Ok(None);
        };
        let hole: Hole = hole.clone();
        let domains = self.spec.domains.clone();
        let label = hole.label.clone();

        // Constants are abstracted exactly, so they must lie below the label.
        // Parameters are over-approximated and only need to be compatible.
        let leaves = self.leaves.get(&hole.sort).cloned().unwrap_or_default();
        for (t, abs) in leaves {
            let keep = self.trivial
                || match &t {
                    Term::Const(_) => below(&domains, &parent.benv, &abs, &label)?,
                    _ => compatible(&domains, &parent.benv, &abs, &label)?,
                };
            if keep {
                if let Some(s) = self.fill(parent, &path, t, parent.benv.clone())? {
                    return Ok(Some(s));
                }
            }
        }

        if self.config.use_cache {
            let hits: Vec<Term> = if self.trivial {
                self.cache.of_sort(hole.sort).map(|e| e.term.clone()).collect()
            } else {
                self.cache
                    .lookup_compatible(&domains, &parent.benv, hole.sort, &label)?
                    .into_iter()
                    .cloned()
                    .collect()
            };
            for t in hits {
                let before = self.stats.generated;
                let found = self.fill(parent, &path, t, parent.benv.clone())?;
                if self.stats.generated > before {
                    self.stats.cache_hits += 1;
                }
                if found.is_some() {
                    return Ok(found);
                }
            }
        }

        let ops: Vec<Op> = self
            .problem
            .ops
            .iter()
            .copied()
            .filter(|op| op.ret() == hole.sort)
            .collect();
        for op in ops {
            if let Some(found) = self.expand_op(parent, &path, &hole, op)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    fn expand_op(
        &mut self,
        parent: &Candidate,
        path: &[usize],
        hole: &Hole,
        op: Op,
    ) -> Result<Option<Term>, SynthError> {
        let sig = op.signature();
        if !self.trivial {
            if let Some(found) = self.finite(parent, path, hole, op)? {
                return Ok(found);
            }
            if let Some(found) = self.solve(parent, path, hole, op)? {
                return Ok(Some(found));
            }
        }
        // S-Enumer: one fresh hole per argument.
        if self.trivial {
            let args: Vec<Term> = sig
                .params
                .iter()
                .map(|&sort| {
                    Term::Hole(Hole {
                        id: self.fresh.hole_id(),
                        sort,
                        label: self.top.clone(),
                    })
                })
                .collect();
            return self.fill(parent, path, Term::App(op, Arc::from(args)), parent.benv.clone());
        }
        let mut benv = (*parent.benv).clone();
        let args: Vec<Term> = sig.params.iter().map(|&s| self.hole(s, &mut benv)).collect();
        self.fill(parent, path, Term::App(op, Arc::from(args)), Arc::new(benv))
    }

    /// S-Finite. `None` when some domain is not finite under the label or
    /// the combinations exceed the cap; otherwise the outcome of offering
    /// every combination of argument labels.
    fn finite(
        &mut self,
        parent: &Candidate,
        path: &[usize],
        hole: &Hole,
        op: Op,
    ) -> Result<Option<Option<Term>>, SynthError> {
        let domains = self.spec.domains.clone();
        for (d, l) in domains.iter().zip(&hole.label.0) {
            if d.finite_enum(l, hole.sort).is_none() {
                return Ok(None);
            }
        }
        let sig = op.signature();
        let mut arg_labels: Vec<Vec<ProductAbs>> = Vec::new();
        let mut total = 1usize;
        for &s in sig.params {
            let mut per_domain: Vec<Vec<Abstraction>> = Vec::new();
            for d in &domains {
                let Some(elems) = d.finite_enum(&Abstraction::Top, s) else {
                    return Ok(None);
                };
                per_domain.push(elems.into_iter().map(Abstraction::Elem).collect());
            }
            let pools: Vec<&[Abstraction]> = per_domain.iter().map(Vec::as_slice).collect();
            let labels: Vec<ProductAbs> = product(&pools, MAX_COMBINATIONS + 1)
                .into_iter()
                .map(ProductAbs::new)
                .collect();
            total = total.saturating_mul(labels.len());
            arg_labels.push(labels);
        }
        if total > MAX_COMBINATIONS {
            return Ok(None);
        }
        let pools: Vec<&[ProductAbs]> = arg_labels.iter().map(Vec::as_slice).collect();
        for combo in product(&pools, MAX_COMBINATIONS) {
            let args: Vec<Term> = combo
                .into_iter()
                .zip(sig.params)
                .map(|(label, &sort)| {
                    Term::Hole(Hole {
                        id: self.fresh.hole_id(),
                        sort,
                        label: Arc::new(label),
                    })
                })
                .collect();
            let benv = parent.benv.clone();
            if let Some(found) = self.fill(parent, path, Term::App(op, Arc::from(args)), benv)? {
                return Ok(Some(Some(found)));
            }
        }
        Ok(Some(None))
    }

    /// Solver-guided expansion: when a solver-backed component of the label is a linear
    /// expression, concretize all arguments but the last and solve for the
    /// last argument's abstraction in that domain.
    fn solve(
        &mut self,
        parent: &Candidate,
        path: &[usize],
        hole: &Hole,
        op: Op,
    ) -> Result<Option<Term>, SynthError> {
        let domains = self.spec.domains.clone();
        let Some((k, goal)) = domains.iter().enumerate().find_map(|(k, d)| {
            if !d.solver_backed() {
                return None;
            }
            match crate::domains::resolve_upper(&hole.label.0[k], &parent.benv) {
                Abstraction::Elem(e) => match e.payload {
                    Payload::Lin(l) => Some((k, l)),
                    _ => None,
                },
                _ => None,
            }
        }) else {
            return Ok(None);
        };
        let dom = domains[k].id();
        let lin = |e: LinExpr| Abstraction::elem(dom, Payload::Lin(e));
        let sig = op.signature();
        let Some((&last, init)) = sig.params.split_last() else {
            return Ok(None);
        };
        let pools: Vec<Vec<Term>> = init.iter().map(|&s| self.solve_pool(s)).collect();
        let refs: Vec<&[Term]> = pools.iter().map(Vec::as_slice).collect();
        for prefix in product(&refs, MAX_COMBINATIONS) {
            let mut benv = (*parent.benv).clone();
            let tail = self.hole(last, &mut benv);
            let Term::Hole(tail_hole) = &tail else {
                unreachable!("hole() builds a hole")
            };
            let tail_hole = tail_hole.clone();
            let mut args = prefix.clone();
            args.push(tail.clone());
            let partial = Term::App(op, Arc::from(args));
            let r = abs_eval(&domains, &self.env, benv, &partial)?;
            if r.refuted {
                continue;
            }
            let mut benv_after = r.benv;
            let w = match &tail_hole.label.0[k] {
                Abstraction::Var(v) => benv_after.symbol(*v),
                _ => None,
            };
            let labels: Vec<Option<Abstraction>> = match (&r.value.0[k], w) {
                (Abstraction::Elem(e), Some(w)) if matches!(&e.payload, Payload::Lin(l) if l.mentions(w)) => {
                    let Payload::Lin(rl) = &e.payload else { unreachable!() };
                    let Some(diff) = rl.checked_sub(&goal) else { continue };
                    if let Some(iso) = diff.isolate(w) {
                        vec![Some(lin(iso))]
                    } else {
                        let Some(c) = Constraint::eq(rl, &goal) else { continue };
                        benv_after.solver.assert(c);
                        benv_after
                            .solver
                            .solve_for(w, SOLVE_LIMIT)
                            .values
                            .into_iter()
                            .map(|n| Some(lin(LinExpr::constant(n))))
                            .collect()
                    }
                }
                (Abstraction::Elem(e), _) => {
                    if let Payload::Lin(rl) = &e.payload {
                        let infeasible = Constraint::eq(rl, &goal)
                            .is_some_and(|c| benv_after.solver.check_with(&[c]) == SatResult::Unsat);
                        if infeasible {
                            continue;
                        }
                    }
                    vec![None]
                }
                _ => vec![None],
            };
            let benv = Arc::new(benv_after);
            for comp in labels {
                let mut label = (*tail_hole.label).clone();
                if let Some(c) = comp {
                    label.0[k] = c;
                }
                let mut args = prefix.clone();
                args.push(Term::Hole(Hole {
                    id: tail_hole.id,
                    sort: last,
                    label: Arc::new(label),
                }));
                let found = self.fill(parent, path, Term::App(op, Arc::from(args)), benv.clone())?;
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
        Ok(None)
    }

    /// Concrete arguments for solver-guided expansion: leaves, then cached
    /// terms up to [`SOLVE_ARG_SIZE`] nodes.
    fn solve_pool(&self, sort: Sort) -> Vec<Term> {
        let mut pool: Vec<Term> = self
            .leaves
            .get(&sort)
            .map(|ls| ls.iter().map(|(t, _)| t.clone()).collect())
            .unwrap_or_default();
        pool.extend(
            self.cache
                .of_sort(sort)
                .filter(|e| e.term.size() <= SOLVE_ARG_SIZE)
                .map(|e| e.term.clone()),
        );
        pool
    }

    fn run(mut self) -> Result<SynthResult, SynthError> {
        let start = Instant::now();
        let shared = self.shared();
        let starts = if self.config.use_templates {
            infer_with(
                self.problem,
                self.spec,
                self.config.prefix_template,
                &mut self.fresh,
                shared.as_ref(),
            )?
        } else {
            let label = shared.unwrap_or_else(|| Arc::new(self.spec.goal.clone()));
            vec![Template {
                term: Term::Hole(Hole {
                    id: self.fresh.hole_id(),
                    sort: self.problem.ret,
                    label,
                }),
                benv: self.spec.benv.clone(),
            }]
        };
        let last = starts.len() - 1;
        let mut outcome = None;
        for (i, t) in starts.into_iter().enumerate() {
            let phase = u8::from(i == last);
            let size = t.term.size();
            if let Some(found) = self.offer(t.term, size, phase, Arc::new(t.benv))? {
                outcome = Some(found);
                break;
            }
        }
        let mut pops = 0u64;
        let outcome = match outcome {
            Some(t) => Outcome::Solved(self.problem.program(t)),
            None => loop {
                let Some(c) = self.heap.pop() else {
                    break Outcome::Exhausted;
                };
                pops += 1;
                if pops.is_multiple_of(CLOCK_INTERVAL) && start.elapsed() >= self.config.timeout {
                    break Outcome::Timeout;
                }
                if self.config.trace {
                    self.popped.push((c.phase, c.size));
                }
                if let Some(t) = self.expand(&c)? {
                    break Outcome::Solved(self.problem.program(t));
                }
            },
        };
        self.stats.elapsed = start.elapsed();
        Ok(SynthResult {
            outcome,
            stats: self.stats,
            tested_terms: self.tested_terms,
            popped: self.popped,
        })
    }
}

/// Searches for a program that satisfies every example of `problem`.
pub fn synthesize(
    problem: &Problem,
    spec: &AbsSpec,
    config: &SynthConfig,
) -> Result<SynthResult, SynthError> {
    spec.check(problem)?;
    let spec = spec.without_inert();
    Engine::new(problem, &spec, config)?.run()
}
