//! Benchmark families: Tseitin parity systems, knapsack equations, random
//! XOR/SAT constraint satisfaction instances and their MAX-CSP encodings.

mod corpus;
mod csp;
mod graph;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::poly::{int, Monomial, Polynomial, Rational};
use crate::proof::{ConstraintSystem, ProofError};

pub use corpus::{bundled_instance, bundled_instances, bundled_refutations, BundledRefutation};
pub use csp::{gen_random_csp, opt_brute_force, CspConstraint, CspInstance, CspMode, Predicate};
pub use graph::{random_regular_graph, Graph};

/// Default cap on `n` for exhaustive enumeration.
pub const EXHAUSTIVE_LIMIT: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("edge ({u}, {v}) leaves the vertex range 0..{vertices}")]
    EdgeOutOfRange { u: usize, v: usize, vertices: usize },
    #[error("{found} charges for {expected} vertices")]
    ChargeCount { expected: usize, found: usize },
    #[error("n·d = {n}·{d} is odd; no perfect pairing exists")]
    OddPairing { n: usize, d: usize },
    #[error("arity {arity} exceeds the {n} available variables")]
    ArityTooLarge { arity: usize, n: u32 },
    #[error("knapsack needs n >= 1")]
    EmptyKnapsack,
    #[error("n = {n} exceeds the exhaustive limit {limit}")]
    OverLimit { n: u32, limit: u32 },
    #[error("gamma {0} outside [0, 1]")]
    GammaOutOfRange(String),
    #[error("malformed constraint: {0}")]
    BadConstraint(String),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// One equality per vertex, `Π_{e∋u} (1 - 2x_e) - (-1)^{charge(u)} = 0`, i.e.
/// the parity of the edges at `u` equals its charge. Edge `k` (0-based) is
/// variable `x_{k+1}`. The product is stored multilinearized, so a loop
/// contributes `(1 - 2x)² ≡ 1`.
pub fn gen_tseitin(g: &Graph, charges: &[bool]) -> Result<ConstraintSystem, InstanceError> {
    if g.vertices == 0 {
        return Err(InstanceError::EmptyGraph);
    }
    if charges.len() != g.vertices {
        return Err(InstanceError::ChargeCount { expected: g.vertices, found: charges.len() });
    }
    let n = g.edges.len() as u32;
    let mut eqs = Vec::with_capacity(g.vertices);
    for (u, &charge) in charges.iter().enumerate() {
        let mut prod = Polynomial::one(n);
        for e in g.incident(u) {
            let factor = Polynomial::one(n) - Polynomial::x(n, e as u32 + 1).scale(&int(2));
            prod = (&prod * &factor).multilinearize();
        }
        let rhs = if charge { int(-1) } else { int(1) };
        eqs.push(prod - Polynomial::constant(n, rhs));
    }
    Ok(ConstraintSystem::new(n, Vec::new(), eqs)?)
}

/// `KS_{n,k}`: the single equation `2x_1 + … + 2x_n - k = 0`.
pub fn gen_knapsack(n: u32, k: i64) -> Result<ConstraintSystem, InstanceError> {
    if n == 0 {
        return Err(InstanceError::EmptyKnapsack);
    }
    let terms =
        (1..=n).map(|i| (Monomial::basic_product([i]), int(2))).chain(std::iter::once((Monomial::one(), int(-k))));
    let p = Polynomial::from_terms(n, terms).expect("indices in range");
    Ok(ConstraintSystem::new(n, Vec::new(), vec![p])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Bound `(1/m) Σ p_j(x)` with no constraints.
    Direct,
    /// Bound `(1/m) Σ y_j` under `p_j(x) = y_j`.
    WithVars,
    /// Refute `p_j(x) = y_j` together with `(1/m) Σ y_j >= gamma`.
    Refutation,
}

/// A MAX-CSP instance as a constraint system plus the objective to bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxCspEncoding {
    pub system: ConstraintSystem,
    pub objective: Polynomial,
}

/// Encodes `inst` in one of the three formulations. With auxiliary
/// variables, `y_j` is pair `n + j`.
pub fn encode_maxcsp(
    inst: &CspInstance,
    gamma: &Rational,
    formulation: Formulation,
) -> Result<MaxCspEncoding, InstanceError> {
    if *gamma < int(0) || *gamma > int(1) {
        return Err(InstanceError::GammaOutOfRange(gamma.to_string()));
    }
    let n = inst.n;
    let m = inst.m() as u32;
    let inv_m = if m == 0 { int(0) } else { Rational::new(1.into(), (m as i64).into()) };
    if formulation == Formulation::Direct {
        let mut obj = Polynomial::zero(n);
        for p in inst.polynomials() {
            obj = obj + p;
        }
        return Ok(MaxCspEncoding { system: ConstraintSystem::empty(n), objective: obj.scale(&inv_m) });
    }
    let total = n + m;
    let mut eqs = Vec::with_capacity(m as usize);
    let mut ysum = Polynomial::zero(total);
    for (j, c) in inst.constraints.iter().enumerate() {
        let y = Polynomial::x(total, n + j as u32 + 1);
        eqs.push(c.polynomial(total) - y.clone());
        ysum = ysum + y;
    }
    let objective = ysum.scale(&inv_m);
    let ineqs = match formulation {
        Formulation::Refutation => vec![&objective - &Polynomial::constant(total, gamma.clone())],
        _ => Vec::new(),
    };
    Ok(MaxCspEncoding { system: ConstraintSystem::new(total, ineqs, eqs)?, objective })
}

/// An instance file: a constraint system with free-form generator metadata
/// and, for CSP families, the constraint list it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    pub system: ConstraintSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csp: Option<CspInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Graph>,
}

impl Instance {
    pub fn new(id: impl Into<String>, family: impl Into<String>, system: ConstraintSystem) -> Self {
        Instance { id: id.into(), family: family.into(), params: BTreeMap::new(), system, csp: None, graph: None }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// A CSP as the system `p_C(x) - 1 = 0` for every constraint `C`, which
    /// is satisfiable exactly when every constraint can hold at once.
    pub fn from_csp(id: impl Into<String>, csp: CspInstance) -> Self {
        let n = csp.n;
        let eqs = csp.polynomials().into_iter().map(|p| p - Polynomial::one(n)).collect();
        let system = ConstraintSystem::new(n, Vec::new(), eqs).expect("constraint variables are in range");
        let family = match csp.constraints.first().map(|c| &c.predicate) {
            Some(Predicate::Sat { .. }) => "sat",
            _ => "xor",
        };
        let mut inst = Instance::new(id, family, system).param("n", n).param("m", csp.m());
        inst.csp = Some(csp);
        inst
    }

    /// Reads either an instance document or a bare system document.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.get("system").is_some() {
            serde_json::from_value(v)
        } else {
            let system: ConstraintSystem = serde_json::from_value(v)?;
            Ok(Instance::new("system", "custom", system))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn triangle_tseitin_shape_and_unsat() {
        let q = gen_tseitin(&Graph::cycle(3), &[true; 3]).unwrap();
        assert_eq!(q.n(), 3);
        assert_eq!(q.eqs().len(), 3);
        assert!(q.eqs().iter().all(|p| p.degree() == Some(2)));
        // vertex 0 touches edges 0 and 2
        let e0 =
            Polynomial::parse("1 - 2x1", 3).unwrap() * Polynomial::parse("1 - 2x3", 3).unwrap() + Polynomial::one(3);
        assert_eq!(q.eqs()[0], e0);
        assert_eq!(q.find_satisfying(), None);
    }

    #[test]
    fn four_cycle_even_charge_is_satisfiable() {
        let q = gen_tseitin(&Graph::cycle(4), &[true; 4]).unwrap();
        assert!(q.find_satisfying().is_some());
        assert!(gen_tseitin(&Graph::cycle(4), &[true; 3]).is_err());
    }

    #[test]
    fn knapsack_examples() {
        let q = gen_knapsack(2, 3).unwrap();
        assert_eq!(q.eqs()[0], Polynomial::parse("2x1 + 2x2 - 3", 2).unwrap());
        assert_eq!(q.find_satisfying(), None);
        assert!(gen_knapsack(2, 2).unwrap().satisfied_by(&[true, false]));
        assert_eq!(gen_knapsack(1, 1).unwrap().eqs()[0], Polynomial::parse("2x1 - 1", 1).unwrap());
        assert!(gen_knapsack(0, 1).is_err());
    }

    #[test]
    fn maxcsp_single_clause() {
        let inst = CspInstance::new(1, vec![CspConstraint::clause(vec![1], vec![false])]).unwrap();
        let enc = encode_maxcsp(&inst, &int(1), Formulation::Refutation).unwrap();
        assert_eq!(enc.system.n(), 2);
        assert_eq!(enc.system.eqs(), &[Polynomial::parse("x1 - x2", 2).unwrap()]);
        assert_eq!(enc.system.ineqs(), &[Polynomial::parse("x2 - 1", 2).unwrap()]);
    }

    #[test]
    fn maxcsp_contradictory_pair() {
        let inst =
            CspInstance::new(1, vec![CspConstraint::xor(vec![1], true), CspConstraint::xor(vec![1], false)]).unwrap();
        let enc = encode_maxcsp(&inst, &int(1), Formulation::Refutation).unwrap();
        assert_eq!(enc.system.find_satisfying(), None);
        let direct = encode_maxcsp(&inst, &int(1), Formulation::Direct).unwrap();
        assert_eq!(direct.objective, Polynomial::constant(1, rat(1, 2)));
        let wv = encode_maxcsp(&inst, &int(1), Formulation::WithVars).unwrap();
        assert!(wv.system.ineqs().is_empty());
        assert_eq!(wv.objective, Polynomial::parse("1/2 x2 + 1/2 x3", 3).unwrap());
        assert!(encode_maxcsp(&inst, &rat(3, 2), Formulation::Direct).is_err());
    }

    #[test]
    fn instance_documents() {
        let inst = Instance::new("ks-1-1", "knapsack", gen_knapsack(1, 1).unwrap()).param("n", 1).param("k", 1);
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(Instance::from_json(&text).unwrap(), inst);
        let bare = Instance::from_json(r#"{"n":1,"eqs":["x1"]}"#).unwrap();
        assert_eq!(bare.family, "custom");
    }
}
