//! Constraint systems and explicit Positivstellensatz proofs.
//!
//! A proof of `target >= 0` from a system `Q` is the identity
//!
//! ```text
//! target = s_∅ + Σ_J s_J · Π_{j∈J} q_j + Σ_j t_j · p_j + Σ_a u_a · a
//! ```
//!
//! where each `s_J` is a sum of weighted squares `Σ w_i r_i²` with `w_i > 0`,
//! and `a` ranges over the Boolean axioms. Only the roots `r_i` and the
//! multipliers `t_j` count towards size and degree; the `u_a` are
//! bookkeeping for the reduction modulo the Boolean ideal.

mod cutoff;
mod json;
mod transform;
mod verify;

use std::collections::BTreeMap;

use num_traits::{One, Signed};

use crate::poly::{
    normal_form, reduce_with_cofactors, BooleanAxiom, Monomial, ParsePolyError, PolyError, Polynomial, Rational,
};

pub use cutoff::{CutoffRule, CutoffSite};
pub use json::{ProofJson, SystemJson};
pub use transform::{
    compose_refutations, multilinearize_proof, pair_product_identity, restrict_proof, select_variable, Selection,
};
pub use verify::{measures, verify, ProofMeasures};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Parse(#[from] ParsePolyError),
    #[error("polynomial over {found} variable pairs in a system over {expected}")]
    NvarsMismatch { expected: u32, found: u32 },
    #[error("inequality index {0} does not exist")]
    DanglingInequality(usize),
    #[error("equality index {0} does not exist")]
    DanglingEquality(usize),
    #[error("index set {0:?} is not strictly increasing")]
    MalformedIndexSet(Vec<usize>),
    #[error("square weight {0} is not positive")]
    NonpositiveWeight(String),
    #[error("cut-off gives {value} at {site}, below the required {required}")]
    CutoffViolation { site: CutoffSite, value: u32, required: u32 },
    #[error("cut-off table has no entry for {0}")]
    CutoffMissing(CutoffSite),
    #[error("nonpositive margin")]
    NonpositiveMargin,
    #[error("certificate rejected: {0}")]
    InvalidCertificate(String),
    #[error("degree {degree} exceeds the budget {budget}")]
    DegreeBudget { degree: u32, budget: u32 },
    #[error("malformed proof document: {0}")]
    Json(String),
}

/// An indexed set of constraints `q_1 >= 0, …, q_l >= 0, p_1 = 0, …, p_m = 0`
/// over `n` pairs of twin variables. Indices are 1-based in the public API.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct ConstraintSystem {
    n: u32,
    ineqs: Vec<Polynomial>,
    eqs: Vec<Polynomial>,
}

impl ConstraintSystem {
    pub fn new(n: u32, ineqs: Vec<Polynomial>, eqs: Vec<Polynomial>) -> Result<Self, ProofError> {
        for p in ineqs.iter().chain(&eqs) {
            check_poly(n, p)?;
        }
        Ok(ConstraintSystem { n, ineqs, eqs })
    }

    /// Parses every constraint in the textual syntax.
    pub fn parse(n: u32, ineqs: &[&str], eqs: &[&str]) -> Result<Self, ProofError> {
        let parse_all = |v: &[&str]| -> Result<Vec<Polynomial>, ProofError> {
            v.iter().map(|s| Polynomial::parse(s, n).map_err(ProofError::from)).collect()
        };
        Self::new(n, parse_all(ineqs)?, parse_all(eqs)?)
    }

    pub fn empty(n: u32) -> Self {
        ConstraintSystem { n, ineqs: Vec::new(), eqs: Vec::new() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ineqs(&self) -> &[Polynomial] {
        &self.ineqs
    }

    pub fn eqs(&self) -> &[Polynomial] {
        &self.eqs
    }

    /// `q_j`, 1-based.
    pub fn ineq(&self, j: usize) -> Option<&Polynomial> {
        j.checked_sub(1).and_then(|k| self.ineqs.get(k))
    }

    /// `p_j`, 1-based.
    pub fn eq(&self, j: usize) -> Option<&Polynomial> {
        j.checked_sub(1).and_then(|k| self.eqs.get(k))
    }

    /// Largest degree of any listed constraint (0 for an empty system).
    pub fn k(&self) -> u32 {
        self.ineqs.iter().chain(&self.eqs).filter_map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn with_ineq(mut self, q: Polynomial) -> Result<Self, ProofError> {
        check_poly(self.n, &q)?;
        self.ineqs.push(q);
        Ok(self)
    }

    pub fn with_eq(mut self, p: Polynomial) -> Result<Self, ProofError> {
        check_poly(self.n, &p)?;
        self.eqs.push(p);
        Ok(self)
    }

    /// `Q[i/b]`: every constraint restricted, variable count kept.
    pub fn restrict(&self, i: u32, b: bool) -> Result<Self, ProofError> {
        let r = |v: &[Polynomial]| -> Result<Vec<Polynomial>, ProofError> {
            v.iter().map(|p| p.restrict(i, b).map_err(ProofError::from)).collect()
        };
        Ok(ConstraintSystem { n: self.n, ineqs: r(&self.ineqs)?, eqs: r(&self.eqs)? })
    }

    /// `Π_{j∈J} q_j` for a 1-based index set.
    pub fn ineq_product(&self, set: &[usize]) -> Result<Polynomial, ProofError> {
        let mut acc = Polynomial::one(self.n);
        for &j in set {
            let q = self.ineq(j).ok_or(ProofError::DanglingInequality(j))?;
            acc = &acc * q;
        }
        Ok(acc)
    }

    /// True iff the Boolean point satisfies every constraint.
    pub fn satisfied_by(&self, point: &[bool]) -> bool {
        self.ineqs.iter().all(|q| !q.eval_bool(point).is_negative())
            && self.eqs.iter().all(|p| num_traits::Zero::is_zero(&p.eval_bool(point)))
    }

    /// Exhaustive search over `{0,1}^n`. Returns the first satisfying point
    /// in counting order.
    pub fn find_satisfying(&self) -> Option<Vec<bool>> {
        assert!(self.n <= 30, "exhaustive search over {} variables", self.n);
        (0u64..1 << self.n).map(|mask| bits(mask, self.n)).find(|pt| self.satisfied_by(pt))
    }
}

pub(crate) fn bits(mask: u64, n: u32) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

fn check_poly(n: u32, p: &Polynomial) -> Result<(), ProofError> {
    if p.nvars() != n {
        return Err(ProofError::NvarsMismatch { expected: n, found: p.nvars() });
    }
    Ok(())
}

/// One weighted square `weight · root²` with `weight > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareTerm {
    pub weight: Rational,
    pub root: Polynomial,
}

impl SquareTerm {
    pub fn new(root: Polynomial) -> Self {
        SquareTerm { weight: Rational::one(), root }
    }

    pub fn weighted(weight: Rational, root: Polynomial) -> Self {
        SquareTerm { weight, root }
    }

    pub fn expand(&self) -> Polynomial {
        (&self.root * &self.root).scale(&self.weight)
    }
}

/// An explicit PS proof of `target >= 0`.
///
/// `squares` maps a strictly increasing 1-based index set `J` (the empty
/// set for `s_∅`) to its square terms. `multipliers` maps an equality index
/// to `t_j`; `ideal` holds the Boolean-axiom multipliers.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "ProofJson", into = "ProofJson")]
pub struct PsProof {
    pub n: u32,
    pub target: Polynomial,
    pub squares: BTreeMap<Vec<usize>, Vec<SquareTerm>>,
    pub multipliers: BTreeMap<usize, Polynomial>,
    pub ideal: BTreeMap<BooleanAxiom, Polynomial>,
}

impl PsProof {
    pub fn new(target: Polynomial) -> Self {
        PsProof {
            n: target.nvars(),
            target,
            squares: BTreeMap::new(),
            multipliers: BTreeMap::new(),
            ideal: BTreeMap::new(),
        }
    }

    /// An empty proof with target `-1`.
    pub fn refutation(n: u32) -> Self {
        Self::new(-Polynomial::one(n))
    }

    pub fn add_square(&mut self, set: Vec<usize>, term: SquareTerm) -> &mut Self {
        self.squares.entry(set).or_default().push(term);
        self
    }

    /// Adds `t` to the multiplier of equality `j`.
    pub fn add_multiplier(&mut self, j: usize, t: Polynomial) -> &mut Self {
        let e = self.multipliers.entry(j).or_insert_with(|| Polynomial::zero(t.nvars()));
        *e = &*e + &t;
        if e.is_zero() {
            self.multipliers.remove(&j);
        }
        self
    }

    pub fn set_ideal(&mut self, axiom: BooleanAxiom, u: Polynomial) -> &mut Self {
        self.ideal.insert(axiom, u);
        self
    }

    pub fn is_refutation(&self) -> bool {
        self.target == -Polynomial::one(self.n)
    }

    /// Largest `|J|` among nonempty index sets carrying a nonzero square.
    pub fn product_width(&self) -> usize {
        self.squares
            .iter()
            .filter(|(_, terms)| terms.iter().any(|t| !t.root.is_zero()))
            .map(|(set, _)| set.len())
            .max()
            .unwrap_or(0)
    }

    /// Monomials of all roots and all `t_j`, with multiplicity.
    pub fn explicit_monomials(&self) -> impl Iterator<Item = &Monomial> + '_ {
        self.squares
            .values()
            .flatten()
            .flat_map(|t| t.root.monomials())
            .chain(self.multipliers.values().flat_map(Polynomial::monomials))
    }

    pub fn monomial_size(&self) -> usize {
        self.explicit_monomials().count()
    }

    /// Checks structural well-formedness against `q`: indices exist, index
    /// sets are strictly increasing, weights are positive, variable counts
    /// agree.
    pub fn check_against(&self, q: &ConstraintSystem) -> Result<(), ProofError> {
        let n = q.n();
        if self.n != n {
            return Err(ProofError::NvarsMismatch { expected: n, found: self.n });
        }
        check_poly(n, &self.target)?;
        for (set, terms) in &self.squares {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ProofError::MalformedIndexSet(set.clone()));
            }
            for &j in set {
                q.ineq(j).ok_or(ProofError::DanglingInequality(j))?;
            }
            for t in terms {
                if !t.weight.is_positive() {
                    return Err(ProofError::NonpositiveWeight(t.weight.to_string()));
                }
                check_poly(n, &t.root)?;
            }
        }
        for (&j, t) in &self.multipliers {
            q.eq(j).ok_or(ProofError::DanglingEquality(j))?;
            check_poly(n, t)?;
        }
        for (a, u) in &self.ideal {
            a.polynomial(n)?;
            check_poly(n, u)?;
        }
        Ok(())
    }

    /// `s_∅ + Σ s_J Π q_j + Σ t_j p_j`, without the ideal part.
    pub fn explicit_sum(&self, q: &ConstraintSystem) -> Result<Polynomial, ProofError> {
        self.check_against(q)?;
        let mut acc = Polynomial::zero(self.n);
        for (set, terms) in &self.squares {
            let mut s = Polynomial::zero(self.n);
            for t in terms {
                s = &s + &t.expand();
            }
            if !s.is_zero() {
                acc = &acc + &(&s * &q.ineq_product(set)?);
            }
        }
        for (&j, t) in &self.multipliers {
            acc = &acc + &(t * q.eq(j).expect("checked"));
        }
        Ok(acc)
    }

    /// Exact right-hand side including the ideal multipliers.
    pub fn full_sum(&self, q: &ConstraintSystem) -> Result<Polynomial, ProofError> {
        let mut acc = self.explicit_sum(q)?;
        for (a, u) in &self.ideal {
            acc = &acc + &(u * &a.polynomial(self.n)?);
        }
        Ok(acc)
    }

    /// True iff the identity holds as a polynomial identity, not just
    /// modulo the ideal.
    pub fn holds_exactly(&self, q: &ConstraintSystem) -> Result<bool, ProofError> {
        Ok(self.full_sum(q)? == self.target)
    }

    /// Replaces the ideal multipliers with ones making the identity exact.
    /// Returns `false` (leaving them untouched) if the proof is not valid
    /// modulo the ideal.
    pub fn recompute_ideal(&mut self, q: &ConstraintSystem) -> Result<bool, ProofError> {
        let diff = &self.target - &self.explicit_sum(q)?;
        if !normal_form(&diff).is_zero() {
            return Ok(false);
        }
        let (rem, cof) = reduce_with_cofactors(&diff);
        debug_assert!(rem.is_zero());
        self.ideal = cof;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn system_degree_and_lookup() {
        let q = ConstraintSystem::parse(3, &["x1 - 1/2"], &["x1*x2*x3", "~x2"]).unwrap();
        assert_eq!(q.k(), 3);
        assert_eq!(q.ineq(1).unwrap().to_string(), "x1 - 1/2");
        assert!(q.ineq(0).is_none() && q.eq(3).is_none());
        assert!(ConstraintSystem::empty(2).k() == 0);
        assert!(ConstraintSystem::new(2, vec![Polynomial::x(3, 1)], vec![]).is_err());
    }

    #[test]
    fn brute_force_satisfiability() {
        let q = ConstraintSystem::parse(2, &["x1 + x2 - 2"], &[]).unwrap();
        assert_eq!(q.find_satisfying(), Some(vec![true, true]));
        let ks = ConstraintSystem::parse(1, &[], &["2*x1 - 1"]).unwrap();
        assert_eq!(ks.find_satisfying(), None);
    }

    #[test]
    fn recompute_ideal_makes_identity_exact() {
        let q = ConstraintSystem::parse(1, &[], &["2*x1 - 1"]).unwrap();
        let mut pf = PsProof::refutation(1);
        pf.add_multiplier(1, Polynomial::parse("1 - 2*x1", 1).unwrap());
        assert!(!pf.holds_exactly(&q).unwrap());
        assert!(pf.recompute_ideal(&q).unwrap());
        assert!(pf.holds_exactly(&q).unwrap());
        assert_eq!(pf.ideal[&BooleanAxiom::Square(1)], Polynomial::constant(1, int(4)));
    }

    #[test]
    fn structural_checks() {
        let q = ConstraintSystem::parse(2, &["x1"], &["x2"]).unwrap();
        let mut pf = PsProof::refutation(2);
        pf.add_square(vec![2], SquareTerm::new(Polynomial::one(2)));
        assert_eq!(pf.check_against(&q), Err(ProofError::DanglingInequality(2)));
        let mut pf = PsProof::refutation(2);
        pf.add_multiplier(3, Polynomial::one(2));
        assert_eq!(pf.check_against(&q), Err(ProofError::DanglingEquality(3)));
        let mut pf = PsProof::refutation(2);
        pf.add_square(vec![], SquareTerm::weighted(rat(-1, 2), Polynomial::one(2)));
        assert!(matches!(pf.check_against(&q), Err(ProofError::NonpositiveWeight(_))));
    }
}
