//! Degree-bounded moment relaxations: refutation search, best bounds,
//! pseudo-expectations and exact certificate extraction.
//!
//! The numerical work is done by the interior-point method in [`ipm`]; every
//! certificate handed out as exact has been rounded to rationals and checked
//! with exact arithmetic.

mod basis;
mod certify;
mod driver;
pub mod ipm;
mod linalg;
mod pexp;
mod relax;

use crate::proof::ProofError;

pub use basis::{enumerate as enumerate_monomials, mask_to_monomial, monomial_to_mask, Mask};
pub use driver::{
    duality_eval, extract_pseudoexpectation, min_refutation_degree, refute, DualityReport, Refutation,
    RefutationMethod, RefuteOutcome,
};
pub use ipm::{solve_sdp, SdpSolution, SdpStatus, SolverOptions, SparseSym, StandardSdp};
pub use linalg::{rationalize, round_to_grid};
pub use pexp::{check_pseudoexpectation, PexpCheck, PseudoExpectation};
pub use relax::{build_sdp, Block, EqRow, Objective, Parametrization, Relaxation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error("{0} variable pairs exceed the supported 128")]
    TooManyVariables(u32),
    #[error("relaxation degree {0} is odd")]
    OddDegree(u32),
    #[error("moment basis of size {size} exceeds the cap {cap}")]
    BasisCap { size: u64, cap: usize },
    #[error("{count} constraint products exceed the cap {cap}")]
    FamilyCap { count: u64, cap: usize },
    #[error("objective of degree {degree} does not fit the relaxation degree {budget}")]
    ObjectiveDegree { degree: u32, budget: u32 },
    #[error("solver stopped with status {status:?} (primal {primal:.2e}, dual {dual:.2e}, gap {gap:.2e})")]
    Solver { status: SdpStatus, primal: f64, dual: f64, gap: f64 },
    #[error("pseudo-expectation over {found} variable pairs for a system over {expected}")]
    NvarsMismatch { expected: u32, found: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpOptions {
    pub solver: SolverOptions,
    /// Cap on the number of moments (multilinear monomials of degree `<= D`).
    pub basis_cap: usize,
    /// Cap on the number of inequality products `J`.
    pub family_cap: usize,
    /// Denominator cap when rounding certificates. Scalars are rounded by
    /// continued fractions under this cap; Gram roots and multipliers go to
    /// the common grid `1/cap²`.
    pub max_denominator: u64,
    /// Round certificates to exact proofs. Off, only numeric results are
    /// reported.
    pub rationalize: bool,
    /// A phase-one shift above this counts as a refutation.
    pub refute_threshold: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        let solver = SolverOptions::default();
        let refute_threshold = (100.0 * solver.tol).max(1e-6);
        SdpOptions {
            solver,
            basis_cap: 6000,
            family_cap: 4096,
            max_denominator: 1_000_000,
            rationalize: true,
            refute_threshold,
        }
    }
}

impl SdpOptions {
    pub fn with_tol(tol: f64) -> Self {
        SdpOptions {
            solver: SolverOptions { tol, ..SolverOptions::default() },
            refute_threshold: (100.0 * tol).max(1e-6),
            ..SdpOptions::default()
        }
    }
}
