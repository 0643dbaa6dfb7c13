//! Exact rational elimination and float-to-rational rounding.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::poly::Rational;

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions. Non-finite input maps to zero.
pub fn rationalize(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    // convergents h/k
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let cap = max_den.max(1) as i128;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e30 {
            break;
        }
        let ai = a as i128;
        let h2 = ai.saturating_mul(h1).saturating_add(h0);
        let k2 = ai.saturating_mul(k1).saturating_add(k0);
        if k2 > cap {
            // best semiconvergent within the cap
            let t = (cap - k0) / k1.max(1);
            if t > 0 && 2 * t >= ai {
                let (hs, ks) = (t * h1 + h0, t * k1 + k0);
                let cand = Rational::new(BigInt::from(hs), BigInt::from(ks));
                let prev = Rational::new(BigInt::from(h1), BigInt::from(k1));
                let target = exact(x.abs());
                let better = if (&cand - &target).abs() < (&prev - &target).abs() { cand } else { prev };
                return if neg { -better } else { better };
            }
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a;
        if frac < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return Rational::zero();
    }
    let r = Rational::new(BigInt::from(h1), BigInt::from(k1));
    if neg {
        -r
    } else {
        r
    }
}

/// `x` rounded to the nearest multiple of `1/den`. Rounding many numbers to
/// one grid keeps sums of their products on a fixed denominator, where
/// continued fractions would multiply unrelated denominators together.
pub fn round_to_grid(x: f64, den: &BigInt) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let scaled = exact(x) * Rational::from_integer(den.clone());
    Rational::new(scaled.round().to_integer(), den.clone())
}

/// The exact value of a finite double.
fn exact(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Reduced row echelon form in place. Returns the pivot column of each
/// nonzero row; rows past `pivots.len()` are zero afterwards.
pub fn rref(rows: &mut Vec<Vec<Rational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        if !inv.is_one() {
            for v in rows[r].iter_mut().skip(col) {
                *v *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(col) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(pivots.len().max(0));
    pivots
}

/// A basis of `{y : A y = 0}` from the echelon form of `A`: one vector per
/// free column.
pub fn nullspace(rows: &[Vec<Rational>], pivots: &[usize], ncols: usize) -> Vec<Vec<Rational>> {
    let mut is_pivot = vec![false; ncols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in rows.iter().zip(pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `A x = b`, or `None` if the system is inconsistent.
/// `a` is given by rows.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    let mut aug: Vec<Vec<Rational>> =
        a.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain(std::iter::once(bi.clone())).collect()).collect();
    let pivots = rref(&mut aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &p) in aug.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}
