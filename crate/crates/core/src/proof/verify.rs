use crate::poly::{normal_form, Polynomial};

use super::{ConstraintSystem, CutoffRule, ProofError, PsProof};

/// Result of checking a proof: validity plus its measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofMeasures {
    /// The identity holds modulo the Boolean ideal.
    pub valid: bool,
    /// Ordinary degree (cut-off = degree of the constraint product).
    pub degree: u32,
    /// Degree measured against the supplied cut-off rule.
    pub degree_mod_c: u32,
    /// Number of explicit monomials, with multiplicity.
    pub monomial_size: usize,
    pub product_width: usize,
    /// Normal form of `rhs - target`; zero iff `valid`.
    pub residual: Polynomial,
}

/// Checks `proof` against `q` with exact arithmetic. The cut-off used for
/// `degree_mod_c` is the degree-sum rule, so it equals `degree`.
pub fn verify(q: &ConstraintSystem, proof: &PsProof) -> Result<ProofMeasures, ProofError> {
    measures(q, proof, &CutoffRule::degree_sum())
}

/// Like [`verify`] but also measures the degree modulo `c`.
pub fn measures(q: &ConstraintSystem, proof: &PsProof, c: &CutoffRule) -> Result<ProofMeasures, ProofError> {
    let rhs = proof.explicit_sum(q)?;
    let residual = normal_form(&(&rhs - &proof.target));
    Ok(ProofMeasures {
        valid: residual.is_zero(),
        degree: degree_under(q, proof, &CutoffRule::degree_sum())?,
        degree_mod_c: degree_under(q, proof, c)?,
        monomial_size: proof.monomial_size(),
        product_width: proof.product_width(),
        residual,
    })
}

fn deg(p: &Polynomial) -> u32 {
    p.degree().unwrap_or(0)
}

/// Max over `deg(target)`, `deg(s_∅)`, `c(J) + deg(s_J)`, `c(j) + deg(t_j)`.
/// Parts that are empty or zero contribute nothing; the ideal multipliers
/// never contribute.
pub(crate) fn degree_under(q: &ConstraintSystem, proof: &PsProof, c: &CutoffRule) -> Result<u32, ProofError> {
    let mut d = deg(&proof.target);
    for (set, terms) in &proof.squares {
        // weights are positive, so leading forms cannot cancel
        let Some(root_deg) = terms.iter().filter_map(|t| t.root.degree()).max() else {
            continue;
        };
        d = d.max(c.at_set(q, set)? + 2 * root_deg);
    }
    for (&j, t) in &proof.multipliers {
        if let Some(td) = t.degree() {
            d = d.max(c.at_eq(q, j)? + td);
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, BooleanAxiom};
    use crate::proof::SquareTerm;

    fn poly(s: &str, n: u32) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    #[test]
    fn pair_contradiction_is_valid_at_degree_one() {
        let q = ConstraintSystem::parse(1, &[], &["x1", "~x1"]).unwrap();
        let mut pf = PsProof::refutation(1);
        pf.add_multiplier(1, poly("-1", 1)).add_multiplier(2, poly("-1", 1));
        pf.set_ideal(BooleanAxiom::Complement(1), Polynomial::one(1));
        let m = verify(&q, &pf).unwrap();
        assert!(m.valid);
        assert_eq!((m.degree, m.monomial_size), (1, 2));
        assert!(pf.holds_exactly(&q).unwrap());
    }

    #[test]
    fn knapsack_one_one_is_valid_at_degree_two() {
        let q = ConstraintSystem::parse(1, &[], &["2*x1 - 1"]).unwrap();
        let mut pf = PsProof::refutation(1);
        pf.add_multiplier(1, poly("1 - 2*x1", 1));
        pf.set_ideal(BooleanAxiom::Square(1), Polynomial::constant(1, int(4)));
        let m = verify(&q, &pf).unwrap();
        assert!(m.valid);
        assert_eq!((m.degree, m.monomial_size), (2, 2));
        assert!(pf.holds_exactly(&q).unwrap());
    }

    #[test]
    fn failing_identity_reports_residual() {
        let q = ConstraintSystem::parse(1, &[], &["x1"]).unwrap();
        let mut pf = PsProof::refutation(1);
        pf.add_multiplier(1, Polynomial::one(1));
        let m = verify(&q, &pf).unwrap();
        assert!(!m.valid);
        assert_eq!(m.residual, poly("x1 + 1", 1));
    }

    #[test]
    fn width_size_and_square_degree() {
        let q = ConstraintSystem::parse(2, &["x1", "x2"], &[]).unwrap();
        let mut pf = PsProof::new(Polynomial::zero(2));
        pf.add_square(vec![1, 2], SquareTerm::new(Polynomial::one(2)));
        assert_eq!(verify(&q, &pf).unwrap().product_width, 2);

        let mut pf = PsProof::new(Polynomial::zero(2));
        pf.add_square(vec![], SquareTerm::new(poly("x1 - x2", 2)));
        let m = verify(&q, &pf).unwrap();
        assert_eq!((m.monomial_size, m.degree), (2, 2));
    }

    #[test]
    fn constant_cutoff_charges_multipliers() {
        let q = ConstraintSystem::parse(1, &[], &["x1"]).unwrap();
        let mut pf = PsProof::refutation(1);
        pf.add_multiplier(1, poly("x1", 1));
        let m = measures(&q, &pf, &CutoffRule::Constant(3)).unwrap();
        assert!(m.degree_mod_c >= 4);
        assert_eq!(m.degree, 2);
    }

    #[test]
    fn empty_parts_have_degree_zero() {
        let q = ConstraintSystem::empty(1);
        let pf = PsProof::new(Polynomial::zero(1));
        let m = verify(&q, &pf).unwrap();
        assert!(m.valid);
        assert_eq!((m.degree, m.monomial_size, m.product_width), (0, 0, 0));
    }
}
