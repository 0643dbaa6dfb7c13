//! Sums-of-squares and Positivstellensatz proofs over the Boolean
//! hypercube: exact proof checking, degree-bounded moment relaxations,
//! degree reduction and instance generators.
//!
//! - [`poly`]: polynomials in paired variables and the Boolean ideal.
//! - [`proof`]: constraint systems, proofs, verification and measures.
//! - [`sdp`]: the moment relaxation, refutation search and rounding.
//! - [`reduce`]: the size-degree trade-off.
//! - [`instances`]: Tseitin, knapsack and CSP generators.
//! - [`experiment`]: batch studies and their reports.

pub mod experiment;
pub mod instances;
pub mod poly;
pub mod proof;
pub mod reduce;
pub mod sdp;

// the guide's snippets run as doctests
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/polynomials.md")]
    struct Polynomials;
    #[doc = include_str!("../../../book/src/proofs.md")]
    struct Proofs;
    #[doc = include_str!("../../../book/src/relaxation.md")]
    struct Relaxation;
    #[doc = include_str!("../../../book/src/reduction.md")]
    struct Reduction;
    #[doc = include_str!("../../../book/src/instances.md")]
    struct Instances;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
