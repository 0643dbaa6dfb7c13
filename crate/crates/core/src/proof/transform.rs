use std::collections::BTreeMap;

use num_traits::Signed;

use crate::poly::{equal_mod_ideal, Polynomial, Rational, Var};

use super::verify::degree_under;
use super::{measures, ConstraintSystem, CutoffRule, ProofError, PsProof, SquareTerm};

/// `(Q[i/b], proof[i/b])`. Every root, multiplier, ideal multiplier and
/// constraint is restricted; multipliers of the axioms of pair `i` vanish
/// because those axioms restrict to zero. Zero roots and zero multipliers
/// are dropped, so neither size nor degree can grow.
pub fn restrict_proof(
    q: &ConstraintSystem,
    proof: &PsProof,
    i: u32,
    b: bool,
) -> Result<(ConstraintSystem, PsProof), ProofError> {
    let q2 = q.restrict(i, b)?;
    let mut out = PsProof::new(proof.target.restrict(i, b)?);
    for (set, terms) in &proof.squares {
        for t in terms {
            let root = t.root.restrict(i, b)?;
            if !root.is_zero() {
                out.add_square(set.clone(), SquareTerm::weighted(t.weight.clone(), root));
            }
        }
    }
    for (&j, t) in &proof.multipliers {
        out.add_multiplier(j, t.restrict(i, b)?);
    }
    for (&a, u) in &proof.ideal {
        if a.index() != i {
            let u = u.restrict(i, b)?;
            if !u.is_zero() {
                out.ideal.insert(a, u);
            }
        }
    }
    Ok((q2, out))
}

/// Collapses every power in the roots and multipliers, then recomputes
/// the ideal multipliers. Twins are kept, so the explicit monomials stay
/// distinct and the size cannot grow.
pub fn multilinearize_proof(q: &ConstraintSystem, proof: &PsProof) -> Result<PsProof, ProofError> {
    let mut out = proof.clone();
    for terms in out.squares.values_mut() {
        for t in terms.iter_mut() {
            t.root = t.root.multilinearize();
        }
    }
    out.multipliers =
        out.multipliers.into_iter().map(|(j, t)| (j, t.multilinearize())).filter(|(_, t)| !t.is_zero()).collect();
    out.recompute_ideal(q)?;
    Ok(out)
}

/// Outcome of choosing the branching variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// No explicit monomial has degree `>= d`.
    NoLargeMonomials,
    Branch {
        var: Var,
        /// 0 if `var` is basic, 1 if it is a twin; `[i/a]` kills `var`.
        a: u8,
        /// Explicit monomials of degree `>= d`, with multiplicity.
        large: usize,
        /// How many of those contain `var`.
        occurrences: usize,
    },
}

/// Picks the variable occurring in the most explicit monomials of degree
/// at least `d`. Ties go to the lowest index, basic before twin.
pub fn select_variable(proof: &PsProof, d: u32) -> Selection {
    let mut counts: BTreeMap<(u32, bool), usize> = BTreeMap::new();
    let mut large = 0;
    for m in proof.explicit_monomials().filter(|m| m.degree() >= d) {
        large += 1;
        for (v, _) in m.vars() {
            *counts.entry((v.index(), v.is_twin())).or_default() += 1;
        }
    }
    if large == 0 {
        return Selection::NoLargeMonomials;
    }
    let mut best: Option<((u32, bool), usize)> = None;
    for (&key, &c) in &counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((key, c));
        }
    }
    let ((index, twin), occurrences) = best.expect("large monomials have variables when d >= 1");
    let var = if twin { Var::twin(index) } else { Var::basic(index) };
    Selection::Branch { var, a: twin as u8, large, occurrences }
}

/// Assembles a refutation of `Q` from
///
/// * `cert_lo`: a proof of `lo - eps >= 0` of degree mod `c` at most `2d - 2`,
/// * `cert_hi`: a proof of `hi - delta >= 0` of degree mod `c` at most `2d`,
///
/// where `hi` is the complement of the literal `lo`. Multiplying the first by
/// `hi²` gives `hi·lo >= eps·hi`, scaling the second by `eps` gives
/// `eps·hi >= eps·delta`, and `-hi·lo` lies in the ideal. The sum proves
/// `0 >= eps·delta`, which is rescaled to `-1 >= 0`.
#[allow(clippy::too_many_arguments)]
pub fn compose_refutations(
    q: &ConstraintSystem,
    lo: Var,
    cert_lo: &PsProof,
    eps: &Rational,
    cert_hi: &PsProof,
    delta: &Rational,
    d: u32,
    c: &CutoffRule,
) -> Result<PsProof, ProofError> {
    if !eps.is_positive() || !delta.is_positive() {
        return Err(ProofError::NonpositiveMargin);
    }
    let n = q.n();
    let hi = lo.complement();
    let lo_p = Polynomial::var(n, lo);
    let hi_p = Polynomial::var(n, hi);
    let check = |cert: &PsProof, lit: &Polynomial, margin: &Rational, budget: u32, name: &str| {
        let m = measures(q, cert, c)?;
        if !m.valid {
            return Err(ProofError::InvalidCertificate(format!("{name} does not verify: residual {}", m.residual)));
        }
        let want = lit - &Polynomial::constant(n, margin.clone());
        if !equal_mod_ideal(&cert.target, &want)? {
            return Err(ProofError::InvalidCertificate(format!("{name} proves {} instead of {want}", cert.target)));
        }
        if m.degree_mod_c > budget {
            return Err(ProofError::DegreeBudget { degree: m.degree_mod_c, budget });
        }
        Ok(())
    };
    check(cert_lo, &lo_p, eps, (2 * d).saturating_sub(2), "lower certificate")?;
    check(cert_hi, &hi_p, delta, 2 * d, "upper certificate")?;

    let inv = (eps * delta).recip();
    let mut out = PsProof::refutation(n);
    for (set, terms) in &cert_lo.squares {
        for t in terms {
            out.add_square(set.clone(), SquareTerm::weighted(&t.weight * &inv, &t.root * &hi_p));
        }
    }
    // hi² ≡ hi, so one factor suffices for the multipliers
    for (&j, t) in &cert_lo.multipliers {
        out.add_multiplier(j, (t * &hi_p).scale(&inv));
    }
    let hi_scale = delta.recip();
    for (set, terms) in &cert_hi.squares {
        for t in terms {
            out.add_square(set.clone(), SquareTerm::weighted(&t.weight * &hi_scale, t.root.clone()));
        }
    }
    for (&j, t) in &cert_hi.multipliers {
        out.add_multiplier(j, t.scale(&hi_scale));
    }
    if !out.recompute_ideal(q)? {
        return Err(ProofError::InvalidCertificate("assembled identity does not close".into()));
    }
    let degree = degree_under(q, &out, c)?;
    if degree > 2 * d {
        return Err(ProofError::DegreeBudget { degree, budget: 2 * d });
    }
    Ok(out)
}

/// The ideal identity `-~x·x = (x² - x) - x(x + ~x - 1)` as a proof of
/// `-~x_i·x_i >= 0` with no explicit part.
pub fn pair_product_identity(n: u32, i: u32) -> Result<PsProof, ProofError> {
    use crate::poly::BooleanAxiom;
    let x = Polynomial::x(n, i);
    let mut pf = PsProof::new(-(&Polynomial::xbar(n, i) * &x));
    pf.set_ideal(BooleanAxiom::Square(i), Polynomial::one(n));
    pf.set_ideal(BooleanAxiom::Complement(i), -x);
    Ok(pf)
}

impl PsProof {
    /// Scales every square weight and multiplier by `k > 0`, and the target.
    pub fn scaled(&self, k: &Rational) -> PsProof {
        assert!(k.is_positive(), "scale must be positive");
        let mut out = PsProof::new(self.target.scale(k));
        for (set, terms) in &self.squares {
            for t in terms {
                out.add_square(set.clone(), SquareTerm::weighted(&t.weight * k, t.root.clone()));
            }
        }
        for (&j, t) in &self.multipliers {
            out.add_multiplier(j, t.scale(k));
        }
        out.ideal = self.ideal.iter().map(|(&a, u)| (a, u.scale(k))).collect();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};
    use crate::proof::verify;

    fn poly(s: &str, n: u32) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    fn ks11() -> (ConstraintSystem, PsProof) {
        let q = ConstraintSystem::parse(1, &[], &["2*x1 - 1"]).unwrap();
        let mut pf = PsProof::refutation(1);
        pf.add_multiplier(1, poly("1 - 2*x1", 1));
        pf.recompute_ideal(&q).unwrap();
        (q, pf)
    }

    #[test]
    fn restricting_knapsack_refutation() {
        let (q, pf) = ks11();
        let (q0, pf0) = restrict_proof(&q, &pf, 1, false).unwrap();
        assert_eq!(q0.eq(1).unwrap(), &poly("-1", 1));
        assert_eq!(pf0.multipliers[&1], poly("1", 1));
        let m = verify(&q0, &pf0).unwrap();
        assert!(m.valid);
        assert!(pf0.holds_exactly(&q0).unwrap());
    }

    #[test]
    fn restriction_kills_monomials() {
        let q = ConstraintSystem::parse(2, &[], &["x2"]).unwrap();
        let mut pf = PsProof::new(poly("x1*x2^2 + x2^2", 2));
        pf.add_multiplier(1, poly("x1*x2 + x2", 2));
        assert!(verify(&q, &pf).unwrap().valid);
        let (q0, pf0) = restrict_proof(&q, &pf, 1, false).unwrap();
        assert_eq!(pf0.monomial_size(), 1);
        assert!(verify(&q0, &pf0).unwrap().valid);
        assert!(restrict_proof(&q, &pf, 3, false).is_err());
    }

    #[test]
    fn multilinearize_examples() {
        let q = ConstraintSystem::parse(2, &[], &["x1"]).unwrap();
        let mut pf = PsProof::new(poly("x1^4 - 2*x1^2*x2 + x2^2 + 3*x1^4*x2", 2));
        pf.add_square(vec![], SquareTerm::new(poly("x1^2 - x2", 2)));
        pf.add_multiplier(1, poly("3*x1^3*x2", 2));
        assert!(verify(&q, &pf).unwrap().valid);
        let ml = multilinearize_proof(&q, &pf).unwrap();
        assert_eq!(ml.squares[&vec![]][0].root, poly("x1 - x2", 2));
        assert_eq!(ml.multipliers[&1], poly("3*x1*x2", 2));
        assert!(verify(&q, &ml).unwrap().valid);
        assert!(ml.holds_exactly(&q).unwrap());
        assert!(ml.monomial_size() <= pf.monomial_size());
        assert_eq!(multilinearize_proof(&q, &ml).unwrap(), ml);
    }

    #[test]
    fn selection_counts_large_monomials() {
        let mut pf = PsProof::refutation(3);
        pf.add_square(vec![], SquareTerm::new(poly("x1*x2 + x1*x3 + x2", 3)));
        assert_eq!(select_variable(&pf, 2), Selection::Branch { var: Var::basic(1), a: 0, large: 2, occurrences: 2 });
        assert_eq!(select_variable(&pf, 3), Selection::NoLargeMonomials);

        let mut pf = PsProof::refutation(3);
        pf.add_multiplier(1, poly("~x1*x2 + ~x1*x3", 3));
        assert_eq!(select_variable(&pf, 2), Selection::Branch { var: Var::twin(1), a: 1, large: 2, occurrences: 2 });
    }

    #[test]
    fn selection_tie_breaks_low_index_basic_first() {
        let mut pf = PsProof::refutation(3);
        pf.add_multiplier(1, poly("~x2*x3 + x2*~x3", 3));
        let Selection::Branch { var, .. } = select_variable(&pf, 2) else { panic!() };
        assert_eq!(var, Var::basic(2));
    }

    #[test]
    fn pair_identity_holds_exactly() {
        let pf = pair_product_identity(2, 1).unwrap();
        let q = ConstraintSystem::empty(2);
        assert!(pf.holds_exactly(&q).unwrap());
        assert_eq!(pf.ideal[&crate::poly::BooleanAxiom::Complement(1)], poly("-x1", 2));
        let m = verify(&q, &pf).unwrap();
        assert_eq!((m.monomial_size, m.degree), (0, 2));
    }

    // x1 = 1/2 has no Boolean solution; both literals are provably >= 1/2.
    fn composable_system() -> ConstraintSystem {
        ConstraintSystem::parse(2, &[], &["x1 - 1/2"]).unwrap()
    }

    #[test]
    fn composing_two_margin_certificates() {
        let q = composable_system();
        let half = rat(1, 2);
        // x1 - 1/2 = 1·(x1 - 1/2)
        let mut lo = PsProof::new(poly("x1 - 1/2", 2));
        lo.add_multiplier(1, Polynomial::one(2));
        // ~x1 - 1/2 ≡ -(x1 - 1/2)
        let mut hi = PsProof::new(poly("~x1 - 1/2", 2));
        hi.add_multiplier(1, -Polynomial::one(2));
        let c = CutoffRule::degree_sum();
        let out = compose_refutations(&q, Var::basic(1), &lo, &half, &hi, &half, 2, &c).unwrap();
        let m = verify(&q, &out).unwrap();
        assert!(m.valid && out.is_refutation());
        assert!(m.degree <= 4);
        assert!(out.holds_exactly(&q).unwrap());

        assert_eq!(
            compose_refutations(&q, Var::basic(1), &lo, &int(0), &hi, &half, 2, &c),
            Err(ProofError::NonpositiveMargin)
        );
        // wrong literal
        assert!(matches!(
            compose_refutations(&q, Var::twin(1), &lo, &half, &hi, &half, 2, &c),
            Err(ProofError::InvalidCertificate(_))
        ));
        // budget 2d - 2 = 0 is too small for the lower certificate
        assert!(matches!(
            compose_refutations(&q, Var::basic(1), &lo, &half, &hi, &half, 1, &c),
            Err(ProofError::DegreeBudget { .. })
        ));
    }
}
