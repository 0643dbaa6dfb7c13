use serde::{Deserialize, Serialize};

use crate::poly::{to_f64, Polynomial, Rational};
use crate::proof::{measures, verify, ConstraintSystem, CutoffRule, PsProof};

use super::certify::round_certificate;
use super::ipm::{solve_sdp, SdpSolution, SdpStatus, StandardSdp};
use super::pexp::PseudoExpectation;
use super::relax::{build_sdp, Objective, Parametrization, Relaxation};
use super::{SdpError, SdpOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefutationMethod {
    /// `-1` is already a combination of the equality multiples.
    Linear,
    Semidefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refutation {
    pub degree: u32,
    pub method: RefutationMethod,
    /// The phase-one shift: how far the moment conditions are from
    /// satisfiable. Infinite for linear refutations.
    pub margin: f64,
    /// Exact refutation, verified; `None` if rounding could not absorb the
    /// residual.
    pub proof: Option<PsProof>,
    /// The rounded proof before absorption.
    pub numeric: Option<PsProof>,
    /// Largest residual coefficient of `numeric`.
    pub numeric_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefuteOutcome {
    Refuted(Refutation),
    /// A pseudo-expectation exists up to the solver tolerance; `margin` is
    /// the phase-one shift (at most the threshold) and `pexp` the most
    /// interior point found.
    NotRefuted {
        margin: f64,
        pexp: PseudoExpectation,
    },
}

impl RefuteOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, RefuteOutcome::Refuted(_))
    }
}

fn acceptable(sol: &SdpSolution, tol: f64) -> bool {
    let loose = (1e3 * tol).max(1e-6);
    match sol.status {
        SdpStatus::Optimal => true,
        SdpStatus::MaxIter | SdpStatus::Stalled | SdpStatus::NumericalFailure => {
            sol.primal_residual.max(sol.dual_residual).max(sol.rel_gap) <= loose
        }
        _ => false,
    }
}

fn solve_checked(prob: &StandardSdp, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    let sol = solve_sdp(prob, &opts.solver);
    if !acceptable(&sol, opts.solver.tol) {
        return Err(SdpError::Solver {
            status: sol.status,
            primal: sol.primal_residual,
            dual: sol.dual_residual,
            gap: sol.rel_gap,
        });
    }
    Ok(sol)
}

fn finish_exact(
    q: &ConstraintSystem,
    mut proof: PsProof,
    degree: u32,
    c: &CutoffRule,
) -> Result<Option<PsProof>, SdpError> {
    let m = measures(q, &proof, c)?;
    if !m.valid || m.degree_mod_c > degree {
        return Ok(None);
    }
    proof.recompute_ideal(q)?;
    Ok(Some(proof))
}

fn linear_refutation(rel: &Relaxation, combination: &[Rational]) -> Result<Refutation, SdpError> {
    let n = rel.n();
    let mut proof = PsProof::refutation(n);
    for (row, l) in rel.rows.iter().zip(combination) {
        if num_traits::Zero::is_zero(l) {
            continue;
        }
        let shift = super::basis::masks_to_poly(n, [(row.shift, -l.clone())]);
        proof.add_multiplier(row.eq, shift);
    }
    let exact = finish_exact(&rel.system, proof.clone(), rel.degree, &rel.cutoff)?;
    Ok(Refutation {
        degree: rel.degree,
        method: RefutationMethod::Linear,
        margin: f64::INFINITY,
        numeric_residual: if exact.is_some() { 0.0 } else { f64::INFINITY },
        proof: exact,
        numeric: Some(proof),
    })
}

fn refute_relaxation(rel: &Relaxation, opts: &SdpOptions) -> Result<RefuteOutcome, SdpError> {
    if let Parametrization::Inconsistent { combination } = &rel.param {
        return Ok(RefuteOutcome::Refuted(linear_refutation(rel, combination)?));
    }
    let n = rel.n();
    let prob = rel.standard_form(&Objective::PhaseOne);
    let sol = solve_checked(&prob, opts)?;
    let margin = -sol.dual_obj;
    if margin <= opts.refute_threshold {
        let k = prob.num_constraints() - 1;
        let z = sol.y.rows(0, k).into_owned();
        let y = rel.moments_from(&z);
        return Ok(RefuteOutcome::NotRefuted {
            margin,
            pexp: PseudoExpectation::from_moments(n, rel.degree, &rel.moments, &y),
        });
    }
    if !opts.rationalize {
        return Ok(RefuteOutcome::Refuted(Refutation {
            degree: rel.degree,
            method: RefutationMethod::Semidefinite,
            margin,
            proof: None,
            numeric: None,
            numeric_residual: f64::INFINITY,
        }));
    }
    let zero = vec![Rational::from_integer(0.into()); rel.moments.len()];
    let rounded = round_certificate(rel, &sol.x, &zero, opts.max_denominator);
    let numeric = rounded.numeric_refutation_proof(n);
    let numeric_residual = match &numeric {
        Some(pf) => to_f64(&verify(&rel.system, pf)?.residual.max_abs_coeff()),
        None => f64::INFINITY,
    };
    let proof = match rounded.refutation_proof(n) {
        Some(pf) => finish_exact(&rel.system, pf, rel.degree, &rel.cutoff)?,
        None => None,
    };
    Ok(RefuteOutcome::Refuted(Refutation {
        degree: rel.degree,
        method: RefutationMethod::Semidefinite,
        margin,
        proof,
        numeric,
        numeric_residual,
    }))
}

/// Decides whether `q` has a degree-`degree` refutation with product width
/// `w` under cut-off `c`.
///
/// Equalities alone are tried first by exact elimination. Otherwise a
/// phase-one problem measures how far the moment conditions are from
/// satisfiable; past the threshold the certificate is rounded and checked
/// exactly. Below it, the phase-one point is returned as a
/// pseudo-expectation.
pub fn refute(
    q: &ConstraintSystem,
    degree: u32,
    w: u32,
    c: &CutoffRule,
    opts: &SdpOptions,
) -> Result<RefuteOutcome, SdpError> {
    let rel = build_sdp(q, degree, w, c, opts)?;
    refute_relaxation(&rel, opts)
}

/// A pseudo-expectation of degree `degree` for `q`, or `None` if the
/// relaxation refutes `q`. The returned point is the phase-one optimum, the
/// feasible moment vector whose blocks have the largest smallest eigenvalue.
pub fn extract_pseudoexpectation(
    q: &ConstraintSystem,
    degree: u32,
    w: u32,
    c: &CutoffRule,
    opts: &SdpOptions,
) -> Result<Option<PseudoExpectation>, SdpError> {
    Ok(match refute(q, degree, w, c, opts)? {
        RefuteOutcome::Refuted(_) => None,
        RefuteOutcome::NotRefuted { pexp, .. } => Some(pexp),
    })
}

/// Smallest even degree `<= max_degree` at which [`refute`] succeeds.
pub fn min_refutation_degree(
    q: &ConstraintSystem,
    w: u32,
    c: &CutoffRule,
    max_degree: u32,
    opts: &SdpOptions,
) -> Result<Option<Refutation>, SdpError> {
    for degree in (2..=max_degree).step_by(2) {
        if let RefuteOutcome::Refuted(r) = refute(q, degree, w, c, opts)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Both sides of the weak duality between proofs and pseudo-expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    /// Best lower bound `r` with a degree-`D` proof of `p - r >= 0`
    /// (numerical optimum). `+∞` when `q` is refuted.
    pub lhs: f64,
    /// Least `E(p)` over degree-`D` pseudo-expectations. `+∞` when none
    /// exists.
    pub rhs: f64,
    /// `rhs - lhs`.
    pub gap: f64,
    /// A bound proven by an exact certificate, slightly below `lhs`.
    pub certified_lhs: Option<Rational>,
    pub certificate: Option<PsProof>,
    /// The minimizing pseudo-expectation.
    pub pexp: Option<PseudoExpectation>,
    pub refutation: Option<Refutation>,
}

/// Computes the best degree-`degree` bound on `p` over `q` and the least
/// pseudo-expectation of `p`, from one primal-dual solve.
pub fn duality_eval(
    q: &ConstraintSystem,
    p: &Polynomial,
    degree: u32,
    w: u32,
    c: &CutoffRule,
    opts: &SdpOptions,
) -> Result<DualityReport, SdpError> {
    let rel = build_sdp(q, degree, w, c, opts)?;
    let a = rel.coefficient_vector(p)?;
    if let RefuteOutcome::Refuted(r) = refute_relaxation(&rel, opts)? {
        return Ok(DualityReport {
            lhs: f64::INFINITY,
            rhs: f64::INFINITY,
            gap: 0.0,
            certified_lhs: None,
            certificate: None,
            pexp: None,
            refutation: Some(r),
        });
    }
    let af: Vec<f64> = a.iter().map(to_f64).collect();
    let prob = rel.standard_form(&Objective::Minimize(af.clone()));
    let sol = solve_checked(&prob, opts)?;
    let Parametrization::Affine { y0, .. } = &rel.param else { unreachable!("consistent after phase one") };
    let a_y0: f64 = af.iter().zip(y0).map(|(x, y)| x * to_f64(y)).sum();
    let lhs = a_y0 - sol.primal_obj;
    let rhs = a_y0 - sol.dual_obj;
    let y = rel.moments_from(&sol.y);
    let pexp = PseudoExpectation::from_moments(rel.n(), degree, &rel.moments, &y);

    let (certificate, bound) = if opts.rationalize {
        let rounded = round_certificate(&rel, &sol.x, &a, opts.max_denominator);
        let (proof, bound) = rounded.bound_proof(rel.n(), p);
        (finish_exact(q, proof, degree, c)?, Some(bound))
    } else {
        (None, None)
    };
    Ok(DualityReport {
        lhs,
        rhs,
        gap: rhs - lhs,
        certified_lhs: certificate.as_ref().and(bound),
        certificate,
        pexp: Some(pexp),
        refutation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn contradictory_pair_is_refuted_linearly() {
        let q = ConstraintSystem::parse(1, &[], &["x1", "~x1"]).unwrap();
        let out = refute(&q, 2, 0, &CutoffRule::degree_sum(), &SdpOptions::default()).unwrap();
        let RefuteOutcome::Refuted(r) = out else { panic!("not refuted") };
        assert_eq!(r.method, RefutationMethod::Linear);
        let pf = r.proof.unwrap();
        assert!(verify(&q, &pf).unwrap().valid);
        assert!(pf.holds_exactly(&q).unwrap());
    }

    #[test]
    fn inequality_contradiction_needs_squares() {
        // the two inequalities add up to -1/2 >= 0; the certificate is a
        // nonnegative combination found through the inequality blocks
        let q = ConstraintSystem::parse(1, &["x1 - 3/4", "~x1 - 3/4"], &[]).unwrap();
        let out = refute(&q, 2, 1, &CutoffRule::degree_sum(), &SdpOptions::default()).unwrap();
        let RefuteOutcome::Refuted(r) = out else { panic!("not refuted: {out:?}") };
        assert_eq!(r.method, RefutationMethod::Semidefinite);
        let pf = r.proof.expect("exact certificate");
        let m = verify(&q, &pf).unwrap();
        assert!(m.valid && m.degree <= 2);
        assert!(r.numeric_residual < 1e-5);
    }

    #[test]
    fn satisfiable_system_gives_pseudoexpectation() {
        let q = ConstraintSystem::parse(2, &["x1 - x2"], &["x1 + x2 - 1"]).unwrap();
        let e = extract_pseudoexpectation(&q, 2, 1, &CutoffRule::degree_sum(), &SdpOptions::default())
            .unwrap()
            .expect("satisfiable");
        // the only point is x1 = 1, x2 = 0, but at degree 2 the moment
        // conditions allow E(x1) = a for every a in [1/2, 1], with
        // E(x2) = 1 - a and E(x1 x2) = 0
        let x1 = e.eval(&Polynomial::parse("x1", 2).unwrap());
        assert!((0.5 - 1e-6..=1.0 + 1e-6).contains(&x1), "E(x1) = {x1}");
        assert!(e.eval(&Polynomial::parse("x1*x2", 2).unwrap()).abs() < 1e-6);
        let chk = super::super::check_pseudoexpectation(&q, &e, 1, &CutoffRule::degree_sum(), 1e-6).unwrap();
        assert!(chk.ok, "{chk:?}");
    }

    #[test]
    fn bound_on_a_square() {
        // min over the cube of (x1 - x2)² - 1/2 is -1/2, and degree 2 sees it
        let q = ConstraintSystem::empty(2);
        let p = Polynomial::parse("x1 - 2x1x2 + x2 - 1/2", 2).unwrap();
        let rep = duality_eval(&q, &p, 2, 0, &CutoffRule::degree_sum(), &SdpOptions::default()).unwrap();
        assert!((rep.lhs + 0.5).abs() < 1e-6, "{}", rep.lhs);
        assert!((rep.rhs + 0.5).abs() < 1e-6, "{}", rep.rhs);
        assert!(rep.gap.abs() < 1e-6);
        let bound = rep.certified_lhs.unwrap();
        assert!(bound <= rat(-1, 2) && bound > rat(-501, 1000));
        let pf = rep.certificate.unwrap();
        assert!(verify(&q, &pf).unwrap().valid);
    }

    #[test]
    fn objective_degree_is_checked() {
        let q = ConstraintSystem::empty(3);
        let p = Polynomial::parse("x1*x2*x3", 3).unwrap();
        let err = duality_eval(&q, &p, 2, 0, &CutoffRule::degree_sum(), &SdpOptions::default()).unwrap_err();
        assert!(matches!(err, SdpError::ObjectiveDegree { degree: 3, budget: 2 }));
    }
}
