//! Strategies, oracles and property bodies shared by the property tests and
//! the acceptance runner.

#![allow(dead_code)]

use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use sosps::poly::{equal_mod_ideal, normal_form, rat, BooleanAxiom, Monomial, Polynomial, Rational, Var};
use sosps::proof::{
    measures, multilinearize_proof, restrict_proof, verify, ConstraintSystem, CutoffRule, PsProof, SquareTerm,
};
use sosps::reduce::{size_lower_bound, tradeoff_bound};

/// Straight-line evaluation: every factor becomes 0 or 1 and is raised to
/// its power with rational arithmetic. Shares no code with `eval_bool`.
pub fn oracle_eval(p: &Polynomial, point: &[bool]) -> Rational {
    let mut acc = Rational::zero();
    for (m, c) in p.terms() {
        let mut term = c.clone();
        for (v, e) in m.vars() {
            let x = if point[v.index() as usize - 1] { Rational::one() } else { Rational::zero() };
            let value = if v.is_twin() { Rational::one() - x } else { x };
            term *= num_traits::pow(value, e as usize);
        }
        acc += term;
    }
    acc
}

pub fn point_of(mask: u32, n: u32) -> Vec<bool> {
    (0..n).map(|b| mask >> b & 1 == 1).collect()
}

pub fn all_points(n: u32) -> impl Iterator<Item = Vec<bool>> {
    (0..1u32 << n).map(move |mask| point_of(mask, n))
}

fn monomial(n: u32) -> impl Strategy<Value = Monomial> {
    prop::collection::vec((1..=n, any::<bool>(), 1u32..=3), 0..=4).prop_map(|factors| {
        Monomial::from_pairs(
            factors.into_iter().map(|(i, twin, e)| (if twin { Var::twin(i) } else { Var::basic(i) }, e)),
        )
    })
}

fn coefficient() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

/// Polynomials over `n` pairs with up to `terms` terms, twins and powers
/// included.
pub fn polynomial(n: u32, terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((monomial(n), coefficient()), 0..=terms)
        .prop_map(move |t| Polynomial::from_terms(n, t).expect("indices in range"))
}

/// Two polynomials on 1 to 10 pairs with a batch of assignments.
pub fn two_polynomials() -> impl Strategy<Value = (u32, Polynomial, Polynomial, Vec<u32>)> {
    (1u32..=10)
        .prop_flat_map(|n| (Just(n), polynomial(n, 6), polynomial(n, 6), prop::collection::vec(0..1u32 << n, 16)))
}

/// `eval_bool` agrees with the oracle on every assignment and evaluation
/// is a ring homomorphism.
pub fn evaluation_matches_oracle((n, p, q, _): (u32, Polynomial, Polynomial, Vec<u32>)) -> Result<(), TestCaseError> {
    let sum = &p + &q;
    let prod = &p * &q;
    for x in all_points(n) {
        let x = &x;
        let (ep, eq) = (oracle_eval(&p, x), oracle_eval(&q, x));
        prop_assert_eq!(p.eval_bool(x), ep.clone(), "p at {:?}", x);
        prop_assert_eq!(sum.eval_bool(x), &ep + &eq);
        prop_assert_eq!(prod.eval_bool(x), &ep * &eq);
        prop_assert_eq!(oracle_eval(&prod, x), ep * eq);
    }
    Ok(())
}

/// The normal form is idempotent, multilinear in basic variables, agrees
/// with `p` on the cube and commutes with `+` and `*`. Equality modulo the
/// ideal coincides with equality on every assignment.
pub fn normal_form_laws((n, p, q, masks): (u32, Polynomial, Polynomial, Vec<u32>)) -> Result<(), TestCaseError> {
    let (np, nq) = (normal_form(&p), normal_form(&q));
    prop_assert_eq!(&normal_form(&np), &np);
    prop_assert!(np.is_multilinear() && np.is_basic_only(), "{}", np);
    prop_assert_eq!(normal_form(&(&p + &q)), normal_form(&(&np + &nq)));
    prop_assert_eq!(normal_form(&(&p * &q)), normal_form(&(&np * &nq)));
    prop_assert!(equal_mod_ideal(&p, &np).unwrap());
    for &m in &masks {
        let x = point_of(m, n);
        prop_assert_eq!(oracle_eval(&np, &x), oracle_eval(&p, &x));
    }
    let agree = all_points(n).all(|x| oracle_eval(&p, &x) == oracle_eval(&q, &x));
    prop_assert_eq!(equal_mod_ideal(&p, &q).unwrap(), agree);
    Ok(())
}

/// Collapsing powers keeps the function and never adds monomials.
pub fn multilinearization_shrinks(
    (n, p, _, masks): (u32, Polynomial, Polynomial, Vec<u32>),
) -> Result<(), TestCaseError> {
    let ml = p.multilinearize();
    prop_assert!(ml.size() <= p.size());
    prop_assert!(ml.is_multilinear());
    prop_assert_eq!(&ml.multilinearize(), &ml);
    for &m in &masks {
        let x = point_of(m, n);
        prop_assert_eq!(oracle_eval(&ml, &x), oracle_eval(&p, &x));
    }
    Ok(())
}

/// A constraint system with a proof that is valid by construction: the
/// target is set to whatever the squares, multipliers and ideal terms sum
/// to.
#[derive(Debug, Clone)]
pub struct ValidProof {
    pub q: ConstraintSystem,
    pub proof: PsProof,
}

pub fn valid_proof() -> impl Strategy<Value = ValidProof> {
    (1u32..=4)
        .prop_flat_map(|n| {
            let ineqs = prop::collection::vec(polynomial(n, 3), 0..=2);
            let eqs = prop::collection::vec(polynomial(n, 3), 0..=2);
            (Just(n), ineqs, eqs).prop_flat_map(|(n, ineqs, eqs)| {
                let ell = ineqs.len();
                let mut sets = vec![vec![]];
                sets.extend((1..=ell).map(|j| vec![j]));
                if ell == 2 {
                    sets.push(vec![1, 2]);
                }
                let squares =
                    prop::collection::vec((prop::sample::select(sets), (1i64..=3, 1i64..=2), polynomial(n, 3)), 0..=3);
                let mults = prop::collection::vec(polynomial(n, 3), eqs.len());
                let ideal = prop::collection::vec((1..=n, 0u8..3, polynomial(n, 2)), 0..=2);
                (Just((n, ineqs, eqs)), squares, mults, ideal)
            })
        })
        .prop_map(|((n, ineqs, eqs), squares, mults, ideal)| {
            let q = ConstraintSystem::new(n, ineqs, eqs).expect("same variable count");
            let mut proof = PsProof::new(Polynomial::zero(n));
            for (set, (a, b), root) in squares {
                if !root.is_zero() {
                    proof.add_square(set, SquareTerm::weighted(rat(a, b), root));
                }
            }
            for (j, t) in mults.into_iter().enumerate() {
                proof.add_multiplier(j + 1, t);
            }
            for (i, kind, u) in ideal {
                let axiom = match kind {
                    0 => BooleanAxiom::Square(i),
                    1 => BooleanAxiom::TwinSquare(i),
                    _ => BooleanAxiom::Complement(i),
                };
                proof.set_ideal(axiom, u);
            }
            proof.target = proof.full_sum(&q).expect("proof matches system");
            ValidProof { q, proof }
        })
}

pub fn restriction_case() -> impl Strategy<Value = (ValidProof, u32, bool)> {
    valid_proof().prop_flat_map(|vp| {
        let n = vp.q.n();
        (Just(vp), 1..=n, any::<bool>())
    })
}

/// Restricting a valid proof gives a valid proof of the restricted target
/// from the restricted system, with no larger size or degree. The
/// restricted identity holds exactly, not just modulo the ideal.
pub fn restriction_preserves_validity((vp, i, b): (ValidProof, u32, bool)) -> Result<(), TestCaseError> {
    let ValidProof { q, proof } = vp;
    let before = verify(&q, &proof).unwrap();
    prop_assert!(before.valid);
    let (q2, p2) = restrict_proof(&q, &proof, i, b).unwrap();
    prop_assert_eq!(&q2, &q.restrict(i, b).unwrap());
    prop_assert_eq!(&p2.target, &proof.target.restrict(i, b).unwrap());
    let after = verify(&q2, &p2).unwrap();
    prop_assert!(after.valid, "residual {}", after.residual);
    prop_assert!(p2.holds_exactly(&q2).unwrap());
    prop_assert!(after.monomial_size <= before.monomial_size);
    prop_assert!(after.degree <= before.degree);
    Ok(())
}

/// Multilinearizing a valid proof keeps it valid and never grows it.
pub fn proof_multilinearization_shrinks(vp: ValidProof) -> Result<(), TestCaseError> {
    let ValidProof { q, proof } = vp;
    let c = CutoffRule::degree_sum();
    let before = measures(&q, &proof, &c).unwrap();
    let ml = multilinearize_proof(&q, &proof).unwrap();
    let after = measures(&q, &ml, &c).unwrap();
    prop_assert!(after.valid);
    prop_assert!(after.monomial_size <= before.monomial_size);
    prop_assert!(after.degree <= before.degree);
    Ok(())
}

/// Degree arguments `(n, d, k, w)` with `d` at least `kw + 4` and the size
/// bound finite.
pub fn degree_args() -> impl Strategy<Value = (u32, u32, u32, u32)> {
    (1u32..=64, 1u32..=4, 1u32..=3, 0u32..=40).prop_map(|(n, k, w, extra)| (n, k * w + 4 + extra, k, w))
}

/// The size forced by degree `d` is enough to guarantee degree `d` back.
pub fn bounds_are_consistent((n, d, k, w): (u32, u32, u32, u32)) -> Result<(), TestCaseError> {
    let s = size_lower_bound(n, d, k, w).unwrap();
    prop_assert!(s >= 1.0 && s.is_finite());
    prop_assert!(tradeoff_bound(n, s, k, w).unwrap() >= d);
    Ok(())
}

/// The guaranteed degree grows with each argument.
pub fn tradeoff_is_monotone((n, s, k, w): (u32, f64, u32, u32)) -> Result<(), TestCaseError> {
    let base = tradeoff_bound(n, s, k, w).unwrap();
    prop_assert!(tradeoff_bound(n + 1, s, k, w).unwrap() >= base);
    prop_assert!(tradeoff_bound(n, s * 1.5, k, w).unwrap() >= base);
    prop_assert!(tradeoff_bound(n, s, k + 1, w).unwrap() >= base);
    prop_assert!(tradeoff_bound(n, s, k, w + 1).unwrap() >= base);
    Ok(())
}

pub fn tradeoff_args() -> impl Strategy<Value = (u32, f64, u32, u32)> {
    (1u32..=200, 1.0f64..1e12, 1u32..=5, 1u32..=5)
}
