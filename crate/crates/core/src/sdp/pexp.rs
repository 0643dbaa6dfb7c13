use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::poly::{normal_form, to_f64, Monomial, Polynomial};
use crate::proof::{ConstraintSystem, CutoffRule};

use super::basis::{mask_to_monomial, monomial_to_mask};
use super::relax::build_sdp;
use super::{SdpError, SdpOptions};

/// A linear functional on polynomials of degree at most `degree`, given by
/// its values on multilinear basic monomials. Other polynomials are first
/// brought to normal form, so `E(p) = E(q)` whenever `p ≡ q mod I_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PexpJson", try_from = "PexpJson")]
pub struct PseudoExpectation {
    n: u32,
    degree: u32,
    values: BTreeMap<Monomial, f64>,
}

#[derive(Serialize, Deserialize)]
struct PexpJson {
    n: u32,
    degree: u32,
    values: Vec<PexpEntry>,
}

#[derive(Serialize, Deserialize)]
struct PexpEntry {
    monomial: String,
    value: f64,
}

impl From<PseudoExpectation> for PexpJson {
    fn from(e: PseudoExpectation) -> Self {
        let values = e.values.into_iter().map(|(m, value)| PexpEntry { monomial: m.to_string(), value }).collect();
        PexpJson { n: e.n, degree: e.degree, values }
    }
}

impl TryFrom<PexpJson> for PseudoExpectation {
    type Error = String;
    fn try_from(j: PexpJson) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for entry in j.values {
            let p = Polynomial::parse(&entry.monomial, j.n).map_err(|e| e.to_string())?;
            let mut terms = p.terms();
            let (m, c) = terms.next().ok_or_else(|| format!("empty monomial {:?}", entry.monomial))?;
            if terms.next().is_some() || *c != crate::poly::int(1) || monomial_to_mask(m).is_none() {
                return Err(format!("{:?} is not a multilinear basic monomial", entry.monomial));
            }
            values.insert(m.clone(), entry.value);
        }
        Ok(PseudoExpectation { n: j.n, degree: j.degree, values })
    }
}

impl PseudoExpectation {
    /// Builds a functional from monomial values; missing monomials are 0.
    pub fn new(n: u32, degree: u32, values: BTreeMap<Monomial, f64>) -> Self {
        PseudoExpectation { n, degree, values }
    }

    pub(crate) fn from_moments(n: u32, degree: u32, moments: &[super::Mask], y: &[f64]) -> Self {
        let values = moments.iter().zip(y).map(|(&m, &v)| (mask_to_monomial(m), v)).collect();
        PseudoExpectation { n, degree, values }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn values(&self) -> &BTreeMap<Monomial, f64> {
        &self.values
    }

    /// `E(m)` for a monomial in normal form.
    pub fn value(&self, m: &Monomial) -> f64 {
        self.values.get(m).copied().unwrap_or(0.0)
    }

    /// `E(p)`, through the normal form of `p`.
    pub fn eval(&self, p: &Polynomial) -> f64 {
        normal_form(p).terms().map(|(m, c)| to_f64(c) * self.value(m)).sum()
    }
}

/// Worst violation per family of conditions; each number is 0 when the
/// family holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PexpCheck {
    pub ok: bool,
    /// `|E(1) - 1|`
    pub normalization: f64,
    /// Smallest eigenvalue of the moment matrix.
    pub moment_min_eig: f64,
    /// Smallest eigenvalue over the localizing matrices, with its index set.
    pub localizing_min_eig: Option<(Vec<usize>, f64)>,
    /// Largest `|E(x^β p_j)|`.
    pub equality: f64,
    pub failures: Vec<String>,
}

/// Checks `e` against the degree-`e.degree()` conditions for `q`: `E(1) = 1`,
/// the moment and localizing matrices are PSD up to `-1e-7·(1 + trace)`,
/// and the equality moments vanish up to `tol`.
pub fn check_pseudoexpectation(
    q: &ConstraintSystem,
    e: &PseudoExpectation,
    w: u32,
    c: &CutoffRule,
    tol: f64,
) -> Result<PexpCheck, SdpError> {
    if e.n != q.n() {
        return Err(SdpError::NvarsMismatch { expected: q.n(), found: e.n });
    }
    let rel = build_sdp(q, e.degree, w, c, &SdpOptions { basis_cap: usize::MAX, ..SdpOptions::default() })?;
    let y: Vec<f64> = rel.moments.iter().map(|&m| e.value(&mask_to_monomial(m))).collect();
    let mut failures = Vec::new();

    let normalization = (y[0] - 1.0).abs();
    if normalization > tol {
        failures.push(format!("E(1) = {}", y[0]));
    }
    let mut moment_min_eig = f64::INFINITY;
    let mut localizing_min_eig: Option<(Vec<usize>, f64)> = None;
    for block in &rel.blocks {
        let m = rel.block_matrix(block, &y);
        let trace = m.trace();
        let lmin = SymmetricEigen::new(m).eigenvalues.min();
        if lmin < -1e-7 * (1.0 + trace.abs()) {
            failures.push(format!("block J={:?} has eigenvalue {lmin:.3e}", block.set));
        }
        if block.set.is_empty() {
            moment_min_eig = lmin;
        } else if localizing_min_eig.as_ref().is_none_or(|(_, v)| lmin < *v) {
            localizing_min_eig = Some((block.set.clone(), lmin));
        }
    }
    let mut equality: f64 = 0.0;
    for row in &rel.rows {
        let v: f64 = row.coeffs.iter().map(|(i, c)| to_f64(c) * y[*i]).sum();
        if v.abs() > tol && v.abs() > equality {
            failures.push(format!("E(x^β p_{}) = {v:.3e} at shift {}", row.eq, mask_to_monomial(row.shift)));
        }
        equality = equality.max(v.abs());
    }
    Ok(PexpCheck { ok: failures.is_empty(), normalization, moment_min_eig, localizing_min_eig, equality, failures })
}
