//! Small named instances shipped with the library, and hand-built
//! refutations for some of them. Everything here is tiny enough for
//! brute-force satisfiability checks and exhaustive SDP scans.

use crate::poly::{int, Polynomial};
use crate::proof::{ConstraintSystem, PsProof};

use super::{gen_knapsack, gen_random_csp, gen_tseitin, CspMode, Graph, Instance};

/// An instance together with a refutation of it.
#[derive(Debug, Clone, PartialEq)]
pub struct BundledRefutation {
    pub instance: Instance,
    pub proof: PsProof,
}

fn parsed(id: &str, n: u32, ineqs: &[&str], eqs: &[&str]) -> Instance {
    Instance::new(id, "custom", ConstraintSystem::parse(n, ineqs, eqs).expect("bundled system parses"))
}

fn knapsack(n: u32, k: i64) -> Instance {
    Instance::new(format!("ks-{n}-{k}"), "knapsack", gen_knapsack(n, k).expect("n >= 1")).param("n", n).param("k", k)
}

fn tseitin_cycle(len: usize, charges: &[bool], id: &str) -> Instance {
    let g = Graph::cycle(len);
    let mut inst = Instance::new(id, "tseitin", gen_tseitin(&g, charges).expect("charges match"));
    inst.graph = Some(g);
    inst.param("charges", charges.iter().map(|&c| c as u8).collect::<Vec<_>>())
}

/// A 3-XOR instance, each constraint stated as `p_C(x) - 1 = 0`.
fn xor_system(n: u32, m: usize, seed: u64) -> Instance {
    let csp = gen_random_csp(n, m, 3, CspMode::Xor, seed).expect("arity fits");
    Instance::from_csp(format!("xor3-{n}-{m}-s{seed}"), csp).param("seed", seed)
}

/// The bundled instances, in a fixed order. Satisfiable and unsatisfiable
/// ones are mixed; use `system.find_satisfying()` to tell them apart.
pub fn bundled_instances() -> Vec<Instance> {
    vec![
        parsed("pair", 1, &[], &["x1", "~x1"]),
        knapsack(1, 1),
        knapsack(1, 3),
        knapsack(2, 1),
        knapsack(2, 2),
        knapsack(3, 2),
        knapsack(3, 3),
        tseitin_cycle(3, &[true; 3], "tseitin-c3-odd"),
        tseitin_cycle(4, &[true; 4], "tseitin-c4-even"),
        tseitin_cycle(4, &[true, true, true, false], "tseitin-c4-odd"),
        parsed("halves", 1, &["x1 - 3/4", "~x1 - 3/4"], &[]),
        parsed("ordered-pair", 2, &["x1 - x2"], &["x1 + x2 - 1"]),
        parsed("branching", 6, &[], &["x1", "~x1", "x2*x3*x4*x5*x6"]),
        xor_system(6, 4, 3),
        xor_system(6, 12, 1),
    ]
}

/// Looks up a bundled instance by id.
pub fn bundled_instance(id: &str) -> Option<Instance> {
    bundled_instances().into_iter().find(|i| i.id == id)
}

/// Hand-built refutations. Ideal multipliers are filled in by
/// `recompute_ideal`, except for KS_{1,1}, whose single multiplier `4` on
/// `x1² - x1` is part of the textbook identity `-(2x1 - 1)² = -1 - 4(x1² - x1)`.
pub fn bundled_refutations() -> Vec<BundledRefutation> {
    let mut out = Vec::new();

    let pair = bundled_instance("pair").expect("bundled");
    let mut pf = PsProof::refutation(1);
    pf.add_multiplier(1, Polynomial::constant(1, int(-1)));
    pf.add_multiplier(2, Polynomial::constant(1, int(-1)));
    pf.recompute_ideal(&pair.system).expect("indices valid");
    out.push(BundledRefutation { instance: pair, proof: pf });

    let ks = bundled_instance("ks-1-1").expect("bundled");
    let mut pf = PsProof::refutation(1);
    pf.add_multiplier(1, Polynomial::parse("1 - 2x1", 1).expect("literal"));
    pf.set_ideal(crate::poly::BooleanAxiom::Square(1), Polynomial::constant(1, int(4)));
    out.push(BundledRefutation { instance: ks, proof: pf });

    // (2x1 - 3)(2x1 + 1)/3 ≡ -1
    let ks13 = bundled_instance("ks-1-3").expect("bundled");
    let mut pf = PsProof::refutation(1);
    pf.add_multiplier(1, Polynomial::parse("2/3 x1 + 1/3", 1).expect("literal"));
    pf.recompute_ideal(&ks13.system).expect("indices valid");
    out.push(BundledRefutation { instance: ks13, proof: pf });

    // (m - 1)·x1 - ~x1 - x1·m with m = x2x3x4x5x6: one explicit monomial of
    // degree 5, so the degree reduction has something to branch on
    let br = bundled_instance("branching").expect("bundled");
    let mut pf = PsProof::refutation(6);
    pf.add_multiplier(1, Polynomial::parse("x2*x3*x4*x5*x6 - 1", 6).expect("literal"));
    pf.add_multiplier(2, Polynomial::constant(6, int(-1)));
    pf.add_multiplier(3, Polynomial::parse("-x1", 6).expect("literal"));
    pf.recompute_ideal(&br.system).expect("indices valid");
    out.push(BundledRefutation { instance: br, proof: pf });

    // the inequalities sum to -1/2
    let halves = bundled_instance("halves").expect("bundled");
    let mut pf = PsProof::refutation(1);
    for j in [1, 2] {
        pf.add_square(vec![j], crate::proof::SquareTerm::weighted(int(2), Polynomial::one(1)));
    }
    pf.recompute_ideal(&halves.system).expect("indices valid");
    out.push(BundledRefutation { instance: halves, proof: pf });

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::verify;

    #[test]
    fn ids_are_unique_and_lookup_works() {
        let all = bundled_instances();
        let mut ids: Vec<&str> = all.iter().map(|i| i.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), all.len());
        assert!(bundled_instance("ks-3-3").is_some());
        assert!(bundled_instance("nope").is_none());
    }

    #[test]
    fn refutations_verify_exactly() {
        for r in bundled_refutations() {
            let m = verify(&r.instance.system, &r.proof).unwrap();
            assert!(m.valid, "{}: residual {}", r.instance.id, m.residual);
            assert!(r.proof.holds_exactly(&r.instance.system).unwrap(), "{}", r.instance.id);
            assert_eq!(r.instance.system.find_satisfying(), None, "{}", r.instance.id);
        }
    }

    #[test]
    fn satisfiability_split() {
        let sat: Vec<String> =
            bundled_instances().into_iter().filter(|i| i.system.find_satisfying().is_some()).map(|i| i.id).collect();
        for id in ["ks-2-2", "ks-3-2", "tseitin-c4-even", "ordered-pair"] {
            assert!(sat.iter().any(|s| s == id), "{id} should be satisfiable");
        }
        assert!(!sat.iter().any(|s| s == "ks-3-3" || s == "tseitin-c3-odd"));
    }
}
