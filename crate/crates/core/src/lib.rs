//! Abstraction-guided enumerative synthesis of string programs from
//! input/output examples, with a SyGuS front end.

pub mod absint;
pub mod ast;
pub mod domains;
pub mod interp;
pub mod lattice;
pub mod solver;
pub mod synth;
pub mod sygus;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/library.md")]
    mod library {}
    #[doc = include_str!("../../../book/src/domains.md")]
    mod domains {}
    #[doc = include_str!("../../../book/src/annotations.md")]
    mod annotations {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
}
