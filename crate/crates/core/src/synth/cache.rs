use std::sync::Arc;

use crate::absint::{abs_eval, disjoint};
use crate::ast::{Sort, Term};
use crate::lattice::{leq_narrow, AbsEnv, BoundsEnv, Domain, LatticeError, ProductAbs};

/// Small hole-free terms with at most one application, kept with their
/// abstract values so a hole can be filled in one step.
#[derive(Clone, Debug, Default)]
pub struct TermCache {
    entries: Vec<CacheEntry>,
}

#[derive(Clone, Debug)]
pub struct CacheEntry {
    pub term: Term,
    pub sort: Sort,
    pub abs: ProductAbs,
}

impl TermCache {
    pub fn new() -> TermCache {
        TermCache::default()
    }

    /// Stores `term` with its abstract value under `env`. Terms with holes
    /// or more than one application are refused. Returns whether the term
    /// was added.
    pub fn put(
        &mut self,
        domains: &[Arc<dyn Domain>],
        env: &AbsEnv,
        benv: &BoundsEnv,
        term: Term,
        sort: Sort,
    ) -> Result<bool, LatticeError> {
        if !term.no_hole() || term.app_count() > 1 || self.entries.iter().any(|e| e.term == term) {
            return Ok(false);
        }
        let abs = abs_eval(domains, env, benv.clone(), &term)?.value;
        self.entries.push(CacheEntry { term, sort, abs });
        Ok(true)
    }

    /// Cached terms of `sort` whose abstraction is below `label`.
    pub fn lookup(
        &self,
        domains: &[Arc<dyn Domain>],
        benv: &BoundsEnv,
        sort: Sort,
        label: &ProductAbs,
    ) -> Result<Vec<&Term>, LatticeError> {
        let mut out = Vec::new();
        for e in self.of_sort(sort) {
            if below(domains, benv, &e.abs, label)? {
                out.push(&e.term);
            }
        }
        Ok(out)
    }

    /// Like [`TermCache::lookup`] but also keeps terms whose abstraction is
    /// merely not disjoint from `label`. A cached term's abstraction
    /// over-approximates its values, so failing `⊑` alone proves nothing.
    pub fn lookup_compatible(
        &self,
        domains: &[Arc<dyn Domain>],
        benv: &BoundsEnv,
        sort: Sort,
        label: &ProductAbs,
    ) -> Result<Vec<&Term>, LatticeError> {
        let mut out = Vec::new();
        for e in self.of_sort(sort) {
            if compatible(domains, benv, &e.abs, label)? {
                out.push(&e.term);
            }
        }
        Ok(out)
    }

    pub fn of_sort(&self, sort: Sort) -> impl Iterator<Item = &CacheEntry> {
        self.entries.iter().filter(move |e| e.sort == sort)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `a ⊑ label` in every component, checked on a scratch copy of `benv`.
pub(crate) fn below(
    domains: &[Arc<dyn Domain>],
    benv: &BoundsEnv,
    a: &ProductAbs,
    label: &ProductAbs,
) -> Result<bool, LatticeError> {
    let mut scratch = benv.clone();
    for ((x, y), d) in a.0.iter().zip(&label.0).zip(domains) {
        if !leq_narrow(&mut scratch, x, y, d.as_ref())? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// No component of `a` is provably disjoint from `label`.
pub(crate) fn compatible(
    domains: &[Arc<dyn Domain>],
    benv: &BoundsEnv,
    a: &ProductAbs,
    label: &ProductAbs,
) -> Result<bool, LatticeError> {
    let mut scratch = benv.clone();
    for ((x, y), d) in a.0.iter().zip(&label.0).zip(domains) {
        if !leq_narrow(&mut scratch, x, y, d.as_ref())? && disjoint(d.as_ref(), x, y, &scratch) {
            return Ok(false);
        }
    }
    Ok(true)
}
