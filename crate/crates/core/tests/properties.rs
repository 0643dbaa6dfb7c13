//! Randomized laws of the polynomial layer, proof transformations and
//! degree-reduction formulas.

mod support;

use proptest::prelude::*;

use support::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evaluation_agrees_with_the_oracle(case in two_polynomials()) {
        evaluation_matches_oracle(case)?;
    }

    #[test]
    fn normal_form_is_idempotent_and_a_homomorphism(case in two_polynomials()) {
        normal_form_laws(case)?;
    }

    #[test]
    fn multilinearizing_never_grows(case in two_polynomials()) {
        multilinearization_shrinks(case)?;
    }

    #[test]
    fn restriction_keeps_proofs_valid(case in restriction_case()) {
        restriction_preserves_validity(case)?;
    }

    #[test]
    fn multilinearizing_a_proof_keeps_it_valid(case in valid_proof()) {
        proof_multilinearization_shrinks(case)?;
    }

    #[test]
    fn size_and_degree_bounds_agree(args in degree_args()) {
        bounds_are_consistent(args)?;
    }

    #[test]
    fn tradeoff_bound_is_monotone(args in tradeoff_args()) {
        tradeoff_is_monotone(args)?;
    }
}
