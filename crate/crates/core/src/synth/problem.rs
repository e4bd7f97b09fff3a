use std::time::Duration;

use serde::Serialize;

use crate::ast::{Example, Op, Program, Sort, Term, Value};
use crate::domains::default_domains;
use crate::lattice::{AbsEnv, BoundsEnv, DomainSet, ProductAbs};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("no examples given")]
    NoExamples,
    #[error("example {index} has {found} inputs, expected {expected}")]
    Arity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("example {index} has a {found} where a {expected} is expected")]
    Sort {
        index: usize,
        expected: Sort,
        found: Sort,
    },
    #[error("abstract spec covers {found} domains, expected {expected}")]
    SpecArity { expected: usize, found: usize },
}

/// A programming-by-example task: the function signature, its examples and
/// the grammar's building blocks.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub ret: Sort,
    pub examples: Vec<Example>,
    /// Constant pool in the order candidates are proposed.
    pub constants: Vec<Value>,
    /// Operators the grammar allows.
    pub ops: Vec<Op>,
    /// Parameters the grammar allows as leaves, by index into `params`.
    pub leaf_params: Vec<usize>,
}

impl Problem {
    /// A problem whose grammar allows every operator and every parameter.
    pub fn new(
        name: impl Into<String>,
        params: Vec<(String, Sort)>,
        ret: Sort,
        examples: Vec<Example>,
        constants: Vec<Value>,
    ) -> Problem {
        let leaf_params = (0..params.len()).collect();
        Problem {
            name: name.into(),
            params,
            ret,
            examples,
            constants,
            ops: Op::ALL.to_vec(),
            leaf_params,
        }
    }

    pub fn with_ops(mut self, ops: Vec<Op>) -> Problem {
        self.ops = ops;
        self
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.examples.is_empty() {
            return Err(ProblemError::NoExamples);
        }
        for (index, ex) in self.examples.iter().enumerate() {
            if ex.inputs.len() != self.params.len() {
                return Err(ProblemError::Arity {
                    index,
                    expected: self.params.len(),
                    found: ex.inputs.len(),
                });
            }
            let sorts = ex.inputs.iter().map(Value::sort).chain([ex.output.sort()]);
            let want = self.params.iter().map(|(_, s)| *s).chain([self.ret]);
            for (found, expected) in sorts.zip(want) {
                if found != expected {
                    return Err(ProblemError::Sort {
                        index,
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn program(&self, body: Term) -> Program {
        Program {
            name: self.name.clone(),
            params: self.params.clone(),
            ret: self.ret,
            body,
        }
    }

    pub fn constants_of(&self, sort: Sort) -> impl Iterator<Item = &Value> {
        self.constants.iter().filter(move |v| v.sort() == sort)
    }

    pub fn allows(&self, op: Op) -> bool {
        self.ops.contains(&op)
    }

    /// Longest string among example inputs and outputs.
    pub fn longest_string(&self) -> usize {
        self.examples
            .iter()
            .flat_map(|e| e.inputs.iter().chain([&e.output]))
            .filter_map(|v| v.as_str().map(str::len))
            .max()
            .unwrap_or(0)
    }
}

/// Abstract specification: the active domains, one product abstraction per
/// parameter, the goal for the output, and the bounds environment holding
/// any solver variables the annotations mention.
#[derive(Clone, Debug)]
pub struct AbsSpec {
    pub domains: DomainSet,
    pub params: Vec<ProductAbs>,
    pub goal: ProductAbs,
    pub benv: BoundsEnv,
}

impl AbsSpec {
    /// `Top -> Top` over `domains`.
    pub fn top(domains: DomainSet, n_params: usize, max_len: i64) -> AbsSpec {
        let n = domains.len();
        AbsSpec {
            domains,
            params: vec![ProductAbs::top(n); n_params],
            goal: ProductAbs::top(n),
            benv: BoundsEnv::new(max_len),
        }
    }

    /// `Top -> Top` over prefix, suffix and length, sized for `problem`.
    pub fn default_for(problem: &Problem) -> AbsSpec {
        AbsSpec::top(
            default_domains(),
            problem.params.len(),
            default_max_len(problem),
        )
    }

    /// Drops every domain in which the goal and all parameters are `Top`.
    /// Such a domain can never refute a candidate, so the search gives the
    /// same result without it.
    pub fn without_inert(&self) -> AbsSpec {
        let keep: Vec<usize> = (0..self.domains.len())
            .filter(|&k| {
                !self.goal.0[k].is_top() || self.params.iter().any(|p| !p.0[k].is_top())
            })
            .collect();
        let project = |p: &ProductAbs| ProductAbs::new(keep.iter().map(|&k| p.0[k].clone()).collect());
        AbsSpec {
            domains: keep.iter().map(|&k| self.domains[k].clone()).collect(),
            params: self.params.iter().map(project).collect(),
            goal: project(&self.goal),
            benv: self.benv.clone(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.goal.is_all_top()
    }

    pub fn env(&self, problem: &Problem) -> AbsEnv {
        let mut env = AbsEnv::new();
        for ((name, _), a) in problem.params.iter().zip(&self.params) {
            env.bind(name.clone(), a.clone());
        }
        env
    }

    pub fn check(&self, problem: &Problem) -> Result<(), ProblemError> {
        let expected = self.domains.len();
        for p in self.params.iter().chain([&self.goal]) {
            if p.len() != expected {
                return Err(ProblemError::SpecArity {
                    expected,
                    found: p.len(),
                });
            }
        }
        if self.params.len() != problem.params.len() {
            return Err(ProblemError::Arity {
                index: 0,
                expected: problem.params.len(),
                found: self.params.len(),
            });
        }
        Ok(())
    }
}

/// Longest example string plus slack for intermediate values.
pub fn default_max_len(problem: &Problem) -> i64 {
    problem.longest_string() as i64 + 8
}

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub max_size: usize,
    pub timeout: Duration,
    pub use_cache: bool,
    pub use_templates: bool,
    /// Also infer `(str.substr in 0 □)` when every output is a prefix of
    /// the input.
    pub prefix_template: bool,
    /// Keep every tested term and the (phase, size) of every popped
    /// candidate in the result.
    pub trace: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_size: 12,
            timeout: Duration::from_secs(60),
            use_cache: true,
            use_templates: true,
            prefix_template: false,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Hole-free candidates run on the examples.
    pub tested: u64,
    /// Partial or complete candidates refuted by abstract evaluation.
    pub eliminated: u64,
    /// Distinct candidates produced by expansion, templates included.
    pub generated: u64,
    /// Holes filled directly from the small-term cache.
    pub cache_hits: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Solved(Program),
    Timeout,
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct SynthResult {
    pub outcome: Outcome,
    pub stats: Stats,
    /// Every tested term in test order, when tracing.
    pub tested_terms: Vec<Term>,
    /// Search phase and size of every popped candidate, when tracing.
    pub popped: Vec<(u8, usize)>,
}

impl SynthResult {
    pub fn solution(&self) -> Option<&Program> {
        match &self.outcome {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}
