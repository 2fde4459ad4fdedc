//! Fitting-series analysis of finite solvable groups and a compiler from
//! 3-CNF formulas and graphs to equations over such groups.
//!
//! The crate computes the upper Fitting series of a finite group, builds
//! iterated-commutator "conjunction" gadgets that live in prescribed cosets
//! of the series, and uses them to compile boolean satisfiability and graph
//! coloring into group equations. Every construction can be checked against
//! brute-force oracles.

pub mod catalog;
pub mod cli;
pub mod gadget;
pub mod group;
pub mod identities;
pub mod poly;
pub mod reduce;
pub mod search;
pub mod solve;
pub mod structure;

pub use group::{Elem, FiniteGroup, GroupError, GroupFile, PermSpec};
pub use poly::{GroupPolynomial, PolyBuilder};
pub use structure::{ElemSet, NormalSubgroup};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/fitting-series.md")]
    mod fitting_series {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/gadgets.md")]
    mod gadgets {}
    #[doc = include_str!("../../../book/src/reductions.md")]
    mod reductions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
