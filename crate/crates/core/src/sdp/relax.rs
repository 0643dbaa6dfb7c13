//! The degree-`D` moment relaxation of a constraint system.
//!
//! Pseudo-moments `y_γ` are indexed by multilinear monomials of degree at
//! most `D`. The equality constraints `E(x^β p_j) = 0` are solved exactly
//! over the rationals, so the remaining problem is a pure linear matrix
//! inequality in the free parameters `z` of `y = y0 + N z`:
//!
//! ```text
//! L_J(y0 + N z) ⪰ 0   for ∅ and every J in the family
//! ```
//!
//! That is an SDP in dual standard form; its primal is the search for Gram
//! matrices of the squares, with the multipliers `t_j` eliminated.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::poly::{normal_form, to_f64, Polynomial, Rational};
use crate::proof::{ConstraintSystem, CutoffRule};

use super::basis::{self, Mask};
use super::ipm::{SparseSym, StandardSdp};
use super::linalg;
use super::{SdpError, SdpOptions};

/// One PSD block: the moment matrix (empty `set`) or the localizing matrix
/// of `Π_{j∈J} q_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub set: Vec<usize>,
    /// Row/column monomials.
    pub basis: Vec<Mask>,
    /// Normal form of the constraint product.
    pub factor: Vec<(Mask, Rational)>,
    /// Upper-triangle cells `(row, col, moment, coefficient)`: entry
    /// `(row, col)` of the block is `Σ coefficient · y[moment]`.
    pub cells: Vec<(usize, usize, usize, f64)>,
}

/// The equality row `nf(x^shift · p_eq)` over the moment index.
#[derive(Debug, Clone, PartialEq)]
pub struct EqRow {
    pub eq: usize,
    pub shift: Mask,
    pub coeffs: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parametrization {
    /// `y = y0 + Σ z_k null[k]`, with `y0[∅] = 1` and `null[k][∅] = 0`.
    Affine { y0: Vec<Rational>, null: Vec<Vec<(usize, Rational)>> },
    /// The equality rows combine to the constant 1 with these weights, so
    /// no pseudo-expectation exists and `-1` is a linear combination of
    /// them.
    Inconsistent { combination: Vec<Rational> },
}

/// What the standard-form problem optimizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Zero objective: any point of the feasible region.
    Feasibility,
    /// Minimize `E(p)` for the coefficient vector of `nf(p)`.
    Minimize(Vec<f64>),
    /// Minimize the shift `τ` with `L(y) + τ I ⪰ 0`.
    PhaseOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub system: ConstraintSystem,
    pub degree: u32,
    pub w: u32,
    pub cutoff: CutoffRule,
    pub moments: Vec<Mask>,
    index: HashMap<Mask, usize>,
    pub blocks: Vec<Block>,
    pub rows: Vec<EqRow>,
    pub param: Parametrization,
}

/// Builds the degree-`degree` relaxation of `q` with product width `w` and
/// cut-off rule `c`. The degree must be even.
pub fn build_sdp(
    q: &ConstraintSystem,
    degree: u32,
    w: u32,
    c: &CutoffRule,
    opts: &SdpOptions,
) -> Result<Relaxation, SdpError> {
    let n = q.n();
    if n > basis::MAX_VARS {
        return Err(SdpError::TooManyVariables(n));
    }
    if degree % 2 == 1 {
        return Err(SdpError::OddDegree(degree));
    }
    let size = basis::basis_size(n, degree);
    if size > opts.basis_cap as u64 {
        return Err(SdpError::BasisCap { size, cap: opts.basis_cap });
    }
    let moments = basis::enumerate(n, degree);
    let index: HashMap<Mask, usize> = moments.iter().enumerate().map(|(i, &m)| (m, i)).collect();

    let l = q.ineqs().len();
    let width = (w as usize).min(l);
    let family: u64 = (1..=width).map(|k| basis::binomial(l as u64, k as u64)).fold(0, u64::saturating_add);
    if family > opts.family_cap as u64 {
        return Err(SdpError::FamilyCap { count: family, cap: opts.family_cap });
    }

    let mut blocks = vec![make_block(n, Vec::new(), vec![(0, Rational::one())], degree / 2, &index)];
    for k in 1..=width {
        for set in combinations(l, k) {
            let cj = c.at_set(q, &set)?;
            if cj > degree {
                continue;
            }
            let factor = basis::poly_to_masks(&normal_form(&q.ineq_product(&set)?));
            blocks.push(make_block(n, set, factor, (degree - cj) / 2, &index));
        }
    }

    let mut rows = Vec::new();
    for (j, p) in q.eqs().iter().enumerate() {
        let j = j + 1;
        let cj = c.at_eq(q, j)?;
        if cj > degree {
            continue;
        }
        let pm = basis::poly_to_masks(&normal_form(p));
        for shift in basis::enumerate(n, degree - cj) {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (m, coef) in &pm {
                *acc.entry(index[&(m | shift)]).or_insert_with(Rational::zero) += coef;
            }
            let coeffs: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            if !coeffs.is_empty() {
                rows.push(EqRow { eq: j, shift, coeffs });
            }
        }
    }

    let param = parametrize(&rows, moments.len());
    Ok(Relaxation { system: q.clone(), degree, w, cutoff: c.clone(), moments, index, blocks, rows, param })
}

/// Strictly increasing `k`-subsets of `1..=l` in lexicographic order.
fn combinations(l: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > l {
        return out;
    }
    let mut idx: Vec<usize> = (1..=k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < l - k + p + 1) else {
            break;
        };
        idx[pos] += 1;
        for t in pos + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
    out
}

fn make_block(n: u32, set: Vec<usize>, factor: Vec<(Mask, Rational)>, h: u32, index: &HashMap<Mask, usize>) -> Block {
    let basis = basis::enumerate(n, h);
    let mut cells = Vec::new();
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let ab = basis[a] | basis[b];
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (m, coef) in &factor {
                *acc.entry(index[&(ab | m)]).or_insert_with(Rational::zero) += coef;
            }
            for (mom, v) in acc {
                if !v.is_zero() {
                    cells.push((a, b, mom, to_f64(&v)));
                }
            }
        }
    }
    Block { set, basis, factor, cells }
}

fn parametrize(rows: &[EqRow], nmom: usize) -> Parametrization {
    if rows.is_empty() {
        let null = (1..nmom).map(|g| vec![(g, Rational::one())]).collect();
        let mut y0 = vec![Rational::zero(); nmom];
        y0[0] = Rational::one();
        return Parametrization::Affine { y0, null };
    }
    let dense: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![Rational::zero(); nmom];
            for (i, c) in &r.coeffs {
                v[*i] = c.clone();
            }
            v
        })
        .collect();
    let mut ech = dense.clone();
    let pivots = linalg::rref(&mut ech, nmom);
    let basis = linalg::nullspace(&ech, &pivots, nmom);
    let Some(f0) = basis.iter().position(|v| !v[0].is_zero()) else {
        // e_∅ lies in the row space
        let transposed: Vec<Vec<Rational>> =
            (0..nmom).map(|col| dense.iter().map(|row| row[col].clone()).collect()).collect();
        let mut rhs = vec![Rational::zero(); nmom];
        rhs[0] = Rational::one();
        let combination = linalg::solve(&transposed, &rhs, rows.len()).expect("e_∅ is in the row space");
        return Parametrization::Inconsistent { combination };
    };
    let scale = basis[f0][0].recip();
    let y0: Vec<Rational> = basis[f0].iter().map(|v| v * &scale).collect();
    let null = basis
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != f0)
        .map(|(_, v)| {
            let lead = v[0].clone();
            v.iter().zip(&y0).enumerate().map(|(i, (a, b))| (i, a - &lead * b)).filter(|(_, x)| !x.is_zero()).collect()
        })
        .collect();
    Parametrization::Affine { y0, null }
}

impl Relaxation {
    pub fn n(&self) -> u32 {
        self.system.n()
    }

    pub fn moment_index(&self, m: Mask) -> Option<usize> {
        self.index.get(&m).copied()
    }

    /// Coefficients of `nf(p)` over the moments; errors if `p` does not fit.
    pub fn coefficient_vector(&self, p: &Polynomial) -> Result<Vec<Rational>, SdpError> {
        let nf = normal_form(p);
        let deg = nf.degree().unwrap_or(0);
        if deg > self.degree {
            return Err(SdpError::ObjectiveDegree { degree: deg, budget: self.degree });
        }
        let mut out = vec![Rational::zero(); self.moments.len()];
        for (m, c) in basis::poly_to_masks(&nf) {
            out[self.index[&m]] = c;
        }
        Ok(out)
    }

    /// Entries of one block evaluated at a moment vector.
    pub fn block_matrix(&self, block: &Block, y: &[f64]) -> DMatrix<f64> {
        let s = block.basis.len();
        let mut out = DMatrix::zeros(s, s);
        for &(a, b, mom, coef) in &block.cells {
            out[(a, b)] += coef * y[mom];
            if a != b {
                out[(b, a)] += coef * y[mom];
            }
        }
        out
    }

    /// `Σ_J ⟨X_J, L_J(·)⟩` as a polynomial over the moments: the normal
    /// form of the weighted sum of squares encoded by the Gram matrices.
    pub fn gram_polynomial(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.moments.len()];
        for (block, xb) in self.blocks.iter().zip(x) {
            for &(a, b, mom, coef) in &block.cells {
                out[mom] += if a == b { coef * xb[(a, a)] } else { 2.0 * coef * xb[(a, b)] };
            }
        }
        out
    }

    /// `y0 + N z` in floating point.
    pub fn moments_from(&self, z: &DVector<f64>) -> Vec<f64> {
        let Parametrization::Affine { y0, null } = &self.param else {
            panic!("no pseudo-moments for an inconsistent system");
        };
        let mut y: Vec<f64> = y0.iter().map(to_f64).collect();
        for (col, &zk) in null.iter().zip(z.iter()) {
            for (i, v) in col {
                y[*i] += zk * to_f64(v);
            }
        }
        y
    }

    /// The standard-form SDP whose dual variables are the free parameters
    /// `z` (plus `τ` last, in phase one). Panics on an inconsistent system.
    pub fn standard_form(&self, objective: &Objective) -> StandardSdp {
        let Parametrization::Affine { y0, null } = &self.param else {
            panic!("no standard form for an inconsistent system");
        };
        let y0f: Vec<f64> = y0.iter().map(to_f64).collect();
        let block_sizes: Vec<usize> = self.blocks.iter().map(|b| b.basis.len()).collect();
        let c: Vec<DMatrix<f64>> = self.blocks.iter().map(|b| self.block_matrix(b, &y0f)).collect();

        let mut by_moment: Vec<Vec<(usize, usize, usize, f64)>> = vec![Vec::new(); self.moments.len()];
        for (k, block) in self.blocks.iter().enumerate() {
            for &(a, b, mom, coef) in &block.cells {
                by_moment[mom].push((k, a, b, coef));
            }
        }
        let mut a = Vec::with_capacity(null.len() + 1);
        let mut b = Vec::with_capacity(null.len() + 1);
        for col in null {
            let mut s = SparseSym::default();
            for (mom, v) in col {
                let v = to_f64(v);
                for &(k, r, cc, coef) in &by_moment[*mom] {
                    s.push(k, r, cc, -coef * v);
                }
            }
            s.compress();
            a.push(s);
            b.push(match objective {
                Objective::Minimize(obj) => -col.iter().map(|(mom, v)| obj[*mom] * to_f64(v)).sum::<f64>(),
                _ => 0.0,
            });
        }
        if *objective == Objective::PhaseOne {
            let mut s = SparseSym::default();
            for (k, &size) in block_sizes.iter().enumerate() {
                for i in 0..size {
                    s.push(k, i, i, -1.0);
                }
            }
            a.push(s);
            b.push(-1.0);
        }
        StandardSdp { block_sizes, c, a, b: DVector::from_vec(b) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;

    #[test]
    fn blocks_and_rows_for_a_small_system() {
        let q = ConstraintSystem::parse(2, &["x1 - x2"], &["x1 + x2 - 1"]).unwrap();
        let rel = build_sdp(&q, 2, 1, &CutoffRule::degree_sum(), &SdpOptions::default()).unwrap();
        assert_eq!(rel.moments.len(), 4);
        assert_eq!(rel.blocks.len(), 2);
        assert_eq!(rel.blocks[0].basis.len(), 3);
        // the localizing block of a degree-1 constraint at degree 2 is scalar
        assert_eq!(rel.blocks[1].basis.len(), 1);
        // rows: p, x1 p, x2 p
        assert_eq!(rel.rows.len(), 3);
        let Parametrization::Affine { y0, null } = &rel.param else { panic!() };
        assert_eq!(y0[0], int(1));
        assert!(null.iter().all(|col| col.iter().all(|(i, _)| *i != 0)));
    }

    #[test]
    fn contradictory_equalities_are_linear() {
        let q = ConstraintSystem::parse(1, &[], &["x1", "~x1"]).unwrap();
        let rel = build_sdp(&q, 2, 0, &CutoffRule::degree_sum(), &SdpOptions::default()).unwrap();
        let Parametrization::Inconsistent { combination } = &rel.param else { panic!("expected inconsistency") };
        // Σ λ_i row_i = 1
        let mut total = vec![Rational::zero(); rel.moments.len()];
        for (row, l) in rel.rows.iter().zip(combination) {
            for (i, c) in &row.coeffs {
                total[*i] += c * l;
            }
        }
        assert_eq!(total, vec![int(1), int(0)]);
    }

    #[test]
    fn caps_and_parity() {
        let q = ConstraintSystem::parse(3, &[], &[]).unwrap();
        let opts = SdpOptions { basis_cap: 4, ..SdpOptions::default() };
        assert!(matches!(build_sdp(&q, 2, 1, &CutoffRule::degree_sum(), &opts), Err(SdpError::BasisCap { .. })));
        assert!(matches!(
            build_sdp(&q, 3, 1, &CutoffRule::degree_sum(), &SdpOptions::default()),
            Err(SdpError::OddDegree(3))
        ));
        let many = ConstraintSystem::parse(2, &["x1"; 10], &[]).unwrap();
        let opts = SdpOptions { family_cap: 20, ..SdpOptions::default() };
        assert!(matches!(
            build_sdp(&many, 2, 2, &CutoffRule::degree_sum(), &opts),
            Err(SdpError::FamilyCap { count: 55, .. })
        ));
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![1, 2, 3]]);
    }
}
