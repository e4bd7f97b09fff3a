//! The string prefix, string suffix and string length domains.

mod length;
mod prefix;
mod suffix;

use std::sync::Arc;

pub use length::{len_elem, LengthDomain};
pub use prefix::PrefixDomain;
pub use suffix::SuffixDomain;

use crate::lattice::{Abstraction, BoundsEnv, Domain, DomainId, DomainSet};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown domain `{0}` (expected prefix, suffix or length)")]
pub struct UnknownDomain(pub String);

pub fn domain_by_name(name: &str) -> Result<Arc<dyn Domain>, UnknownDomain> {
    match name.trim() {
        "prefix" => Ok(Arc::new(PrefixDomain)),
        "suffix" => Ok(Arc::new(SuffixDomain)),
        "length" | "len" => Ok(Arc::new(LengthDomain)),
        other => Err(UnknownDomain(other.to_string())),
    }
}

/// Prefix, suffix, length: cheap syntactic checks before solver calls.
pub fn default_domains() -> DomainSet {
    vec![
        Arc::new(PrefixDomain),
        Arc::new(SuffixDomain),
        Arc::new(LengthDomain),
    ]
}

/// Puts domains in product order regardless of how they were listed.
pub fn sort_domains(ds: &mut DomainSet) {
    ds.sort_by_key(|d| match d.id() {
        DomainId::Prefix => 0u32,
        DomainId::Suffix => 1,
        DomainId::Length => 3,
        DomainId::Custom(_) => 2,
    });
    ds.dedup_by_key(|d| d.id());
}

/// Replaces a variable by its upper bound when that bound is an element.
/// Sound because every value of the variable lies below its upper bound.
pub(crate) fn resolve_upper(a: &Abstraction, benv: &BoundsEnv) -> Abstraction {
    match a {
        Abstraction::Var(v) => match benv.get(*v) {
            Ok(b) => match &b.hi {
                Abstraction::Elem(_) => b.hi.clone(),
                _ => a.clone(),
            },
            Err(_) => a.clone(),
        },
        _ => a.clone(),
    }
}
