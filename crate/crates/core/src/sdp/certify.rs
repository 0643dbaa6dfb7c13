//! Turning floating-point Gram matrices into exact PS proofs.
//!
//! Each Gram matrix is factored by eigendecomposition and every factor is
//! rounded to a root whose coefficients share one fixed denominator. Multipliers are
//! fitted by least squares and rounded too. What is left over is an exact
//! residual `ρ`, which is absorbed term by term using
//!
//! ```text
//!  ρ·m1m2 + |ρ| ≡ |ρ|/2 · [(m1 ± m2)² + (1 - m1)² + (1 - m2)²]   (sign of ρ)
//! ```
//!
//! for a split `x^γ = m1·m2` into halves of degree at most `D/2`. The cost,
//! `Σ|ρ_γ|`, comes out of the constant, so the proven bound drops slightly
//! and a refutation survives as long as its margin exceeds the residual.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::poly::{rat, to_f64, Polynomial, Rational};
use crate::proof::{PsProof, SquareTerm};

use super::basis::{self, Mask};
use super::linalg::round_to_grid;
use super::relax::Relaxation;

/// A rounded certificate for `a - r >= 0` before and after absorption.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Rounded {
    /// Rounded squares per index set, as `(root, weight)` over masks.
    squares: Vec<(Vec<usize>, Rational, Vec<(Mask, Rational)>)>,
    /// Rounded multipliers per equality.
    multipliers: Vec<(usize, Vec<(Mask, Rational)>)>,
    /// Constant part of the exact residual, the numerically proven bound.
    pub constant: Rational,
    /// The rest of the exact residual.
    pub residual: Vec<(Mask, Rational)>,
}

impl Rounded {
    /// `Σ_{γ≠∅} |ρ_γ|`, the price of absorbing the residual.
    pub fn absorption_cost(&self) -> Rational {
        self.residual.iter().map(|(_, c)| c.abs()).fold(Rational::zero(), |a, b| a + b)
    }

    /// Proof of `target_poly - bound >= 0` scaled by `scale`, with or
    /// without the absorption squares. `bound` is `constant` without and
    /// `constant - cost` with absorption.
    fn proof(&self, n: u32, target: Polynomial, scale: &Rational, absorb: bool) -> PsProof {
        let mut pf = PsProof::new(target);
        for (set, weight, root) in &self.squares {
            pf.add_square(set.clone(), SquareTerm::weighted(weight * scale, basis::masks_to_poly(n, root.clone())));
        }
        if absorb {
            for (gamma, rho) in &self.residual {
                let bits: Vec<u32> = (0..basis::MAX_VARS).filter(|b| gamma >> b & 1 == 1).collect();
                let half = bits.len().div_ceil(2);
                let m1: Mask = bits[..half].iter().fold(0, |m, &b| m | 1 << b);
                let m2: Mask = bits[half..].iter().fold(0, |m, &b| m | 1 << b);
                let sign = if rho.is_positive() { Rational::one() } else { -Rational::one() };
                let weight = rho.abs() * rat(1, 2) * scale;
                let mono = |m: Mask| basis::masks_to_poly(n, [(m, Rational::one())]);
                let one = Polynomial::one(n);
                let roots = [&mono(m1) + &mono(m2).scale(&sign), &one - &mono(m1), &one - &mono(m2)];
                for root in roots {
                    if !root.is_zero() {
                        pf.add_square(Vec::new(), SquareTerm::weighted(weight.clone(), root));
                    }
                }
            }
        }
        for (j, t) in &self.multipliers {
            pf.add_multiplier(*j, basis::masks_to_poly(n, t.clone()).scale(scale));
        }
        pf
    }

    /// Exact proof of `p - (constant - cost) >= 0`.
    pub fn bound_proof(&self, n: u32, p: &Polynomial) -> (PsProof, Rational) {
        let bound = &self.constant - self.absorption_cost();
        let target = p - &Polynomial::constant(n, bound.clone());
        (self.proof(n, target, &Rational::one(), true), bound)
    }

    /// For a rounding of `0 - r >= 0` with `r > cost`, the exact refutation
    /// `-1 >= 0`.
    pub fn refutation_proof(&self, n: u32) -> Option<PsProof> {
        let margin = &self.constant - self.absorption_cost();
        if !margin.is_positive() {
            return None;
        }
        Some(self.proof(n, -Polynomial::one(n), &margin.recip(), true))
    }

    /// The rounded refutation before absorption; `None` if the constant is
    /// not positive.
    pub fn numeric_refutation_proof(&self, n: u32) -> Option<PsProof> {
        if !self.constant.is_positive() {
            return None;
        }
        Some(self.proof(n, -Polynomial::one(n), &self.constant.recip(), false))
    }
}

/// Rounds Gram matrices `x` (one per block) into a certificate of
/// `a ≡ σ + Σ t_j p_j + r + ρ`, where `a` is given over the moments.
pub(crate) fn round_certificate(rel: &Relaxation, x: &[DMatrix<f64>], a: &[Rational], max_den: u64) -> Rounded {
    let nmom = rel.moments.len();
    let grid = BigInt::from(max_den) * BigInt::from(max_den);
    let mut squares = Vec::new();
    // σ̃, exactly
    let mut sigma = vec![Rational::zero(); nmom];
    for (block, xb) in rel.blocks.iter().zip(x) {
        let sym = (xb + xb.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if !(lambda > 0.0) {
                continue;
            }
            let s = lambda.sqrt();
            let root: Vec<(Mask, Rational)> = block
                .basis
                .iter()
                .enumerate()
                .map(|(i, &m)| (m, round_to_grid(s * eig.eigenvectors[(i, k)], &grid)))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if root.is_empty() {
                continue;
            }
            for (ma, ca) in &root {
                for (mb, cb) in &root {
                    let cab = ca * cb;
                    for (mf, cf) in &block.factor {
                        let idx = rel.moment_index(ma | mb | mf).expect("within the moment range");
                        sigma[idx] += &cab * cf;
                    }
                }
            }
            squares.push((block.set.clone(), Rational::one(), root));
        }
    }

    // g = a - σ̃, then fit g ≈ r·1 + Σ λ_i row_i
    let g: Vec<Rational> = a.iter().zip(&sigma).map(|(x, y)| x - y).collect();
    let nrows = rel.rows.len();
    let mut lambda = vec![Rational::zero(); nrows];
    if nrows > 0 {
        let mut mat = DMatrix::zeros(nmom, nrows + 1);
        mat[(0, 0)] = 1.0;
        for (i, row) in rel.rows.iter().enumerate() {
            for (mom, c) in &row.coeffs {
                mat[(*mom, i + 1)] = to_f64(c);
            }
        }
        let rhs = DVector::from_iterator(nmom, g.iter().map(to_f64));
        let svd = mat.svd(true, true);
        let scale = svd.singular_values.max().max(1.0);
        if let Ok(sol) = svd.solve(&rhs, 1e-12 * scale) {
            for i in 0..nrows {
                lambda[i] = round_to_grid(sol[i + 1], &grid);
            }
        }
    }
    let mut rho = g;
    let mut multipliers: Vec<(usize, Vec<(Mask, Rational)>)> = Vec::new();
    for (row, l) in rel.rows.iter().zip(&lambda) {
        if l.is_zero() {
            continue;
        }
        for (mom, c) in &row.coeffs {
            rho[*mom] -= c * l;
        }
        match multipliers.last_mut() {
            Some((j, t)) if *j == row.eq => t.push((row.shift, l.clone())),
            _ => multipliers.push((row.eq, vec![(row.shift, l.clone())])),
        }
    }
    let constant = rho[0].clone();
    let residual = rel.moments.iter().zip(rho).skip(1).filter(|(_, c)| !c.is_zero()).map(|(&m, c)| (m, c)).collect();
    Rounded { squares, multipliers, constant, residual }
}
