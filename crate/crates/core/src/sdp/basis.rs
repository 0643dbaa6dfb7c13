//! Multilinear monomials in the basic variables, packed as bit masks: bit
//! `i - 1` stands for `x_i`.

use crate::poly::{Monomial, Polynomial, Rational};

pub type Mask = u128;

/// Largest variable count a mask can carry.
pub const MAX_VARS: u32 = 128;

pub fn mask_to_monomial(mask: Mask) -> Monomial {
    Monomial::basic_product((0..MAX_VARS).filter(|b| mask >> b & 1 == 1).map(|b| b + 1))
}

/// The mask of a multilinear basic monomial, or `None` for anything else.
pub fn monomial_to_mask(m: &Monomial) -> Option<Mask> {
    let mut mask = 0;
    for (v, e) in m.vars() {
        if v.is_twin() || e != 1 || v.index() > MAX_VARS {
            return None;
        }
        mask |= 1 << (v.index() - 1);
    }
    Some(mask)
}

/// Terms of a normal-form polynomial as `(mask, coefficient)`.
pub fn poly_to_masks(p: &Polynomial) -> Vec<(Mask, Rational)> {
    p.terms().map(|(m, c)| (monomial_to_mask(m).expect("normal form is multilinear and basic"), c.clone())).collect()
}

pub fn masks_to_poly(n: u32, terms: impl IntoIterator<Item = (Mask, Rational)>) -> Polynomial {
    Polynomial::from_terms(n, terms.into_iter().map(|(m, c)| (mask_to_monomial(m), c))).expect("masks within range")
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of multilinear monomials of degree at most `d` in `n` variables.
pub fn basis_size(n: u32, d: u32) -> u64 {
    (0..=d.min(n)).map(|k| binomial(n as u64, k as u64)).fold(0, u64::saturating_add)
}

/// All multilinear monomials of degree at most `d` in `n` variables, in the
/// graded lexicographic order used by [`Monomial`].
pub fn enumerate(n: u32, d: u32) -> Vec<Mask> {
    let mut out = Vec::with_capacity(basis_size(n, d) as usize);
    for k in 0..=d.min(n) {
        // index combinations in lexicographic order
        let mut idx: Vec<u32> = (0..k).collect();
        loop {
            out.push(idx.iter().fold(0, |m, &i| m | 1 << i));
            let Some(pos) = (0..k as usize).rev().find(|&p| idx[p] < n - k + p as u32) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..k as usize {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}
