//! Exact sparse polynomials over pairs of twin Boolean variables.
//!
//! Every variable pair `i` consists of a basic variable `x_i` and its twin
//! `~x_i`, which is meant to take the value `1 - x_i`. Coefficients are exact
//! rationals. Reduction modulo the Boolean ideal lives in [`ideal`], the
//! textual syntax in [`parse`].

mod ideal;
mod monomial;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use ideal::{equal_mod_ideal, normal_form, reduce_with_cofactors, BooleanAxiom};
pub use monomial::{Monomial, Var};
pub(crate) use parse::fmt_rational;
pub use parse::ParsePolyError;

/// Exact coefficient type used throughout the verification paths.
pub type Rational = BigRational;

/// Builds the rational `num/den`. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `v` as a rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("polynomials live over different variable counts ({0} vs {1})")]
    NvarsMismatch(u32, u32),
    #[error("variable index {index} out of range 1..={nvars}")]
    IndexOutOfRange { index: u32, nvars: u32 },
}

/// A polynomial with exact rational coefficients over `nvars` pairs of twin
/// variables.
///
/// Terms are kept in a map keyed by [`Monomial`], whose ordering is graded
/// lexicographic with basic variables before twins. Zero coefficients are
/// never stored, so the empty map is the zero polynomial.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: u32,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: u32) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: u32, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one(nvars: u32) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The single variable `v`. Panics if `v.index()` exceeds `nvars`.
    pub fn var(nvars: u32, v: Var) -> Self {
        assert!(v.index() <= nvars, "variable {v} out of range for nvars {nvars}");
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::from_var(v), Rational::one());
        p
    }

    /// The basic variable `x_i`.
    pub fn x(nvars: u32, i: u32) -> Self {
        Self::var(nvars, Var::basic(i))
    }

    /// The twin variable `~x_i`.
    pub fn xbar(nvars: u32, i: u32) -> Self {
        Self::var(nvars, Var::twin(i))
    }

    /// Builds a polynomial from `(monomial, coefficient)` pairs, merging
    /// repeated monomials.
    pub fn from_terms<I>(nvars: u32, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            if let Some(v) = m.max_index() {
                if v > nvars {
                    return Err(PolyError::IndexOutOfRange { index: v, nvars });
                }
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    /// Same polynomial viewed over a larger variable count.
    pub fn with_nvars(&self, nvars: u32) -> Result<Self, PolyError> {
        if let Some(v) = self.max_index() {
            if v > nvars {
                return Err(PolyError::IndexOutOfRange { index: v, nvars });
            }
        }
        Ok(Polynomial { nvars, terms: self.terms.clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms (the monomial size).
    pub fn size(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> + '_ {
        self.terms.keys()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    /// Largest variable index occurring in the polynomial.
    pub fn max_index(&self) -> Option<u32> {
        self.terms.keys().filter_map(Monomial::max_index).max()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    /// True if no twin variable occurs.
    pub fn is_basic_only(&self) -> bool {
        self.terms.keys().all(|m| m.vars().all(|(v, _)| !v.is_twin()))
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_nvars(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            Err(PolyError::NvarsMismatch(self.nvars, other.nvars))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_nvars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_nvars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_nvars(other)?;
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one(self.nvars);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Multiply every term by the monomial `m`.
    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect() }
    }

    /// Evaluates at a consistent Boolean point: `x_i = point[i-1]` and
    /// `~x_i = 1 - x_i`.
    pub fn eval_bool(&self, point: &[bool]) -> Rational {
        assert!(point.len() >= self.nvars as usize, "assignment too short");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            if m.vars().all(|(v, _)| point[v.index() as usize - 1] != v.is_twin()) {
                acc += c;
            }
        }
        acc
    }

    /// Evaluates at a real point `x`, with twins taken as `1 - x_i`.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = to_f64(c);
            for (v, e) in m.vars() {
                let x = point[v.index() as usize - 1];
                let val = if v.is_twin() { 1.0 - x } else { x };
                t *= val.powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    /// Replaces every power `v^e` with `e >= 2` by `v`; twins are kept.
    pub fn multilinearize(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.multilinear_part(), c.clone());
        }
        out
    }

    /// Assigns `x_i := b` and `~x_i := 1 - b`. The variable count is kept; the
    /// result simply no longer mentions pair `i`.
    pub fn restrict(&self, i: u32, b: bool) -> Result<Polynomial, PolyError> {
        if i == 0 || i > self.nvars {
            return Err(PolyError::IndexOutOfRange { index: i, nvars: self.nvars });
        }
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            if let Some(rest) = m.restrict(i, b) {
                out.add_term(rest, c.clone());
            }
        }
        Ok(out)
    }

    /// Applies `f` to every coefficient, dropping those that become zero.
    pub fn map_coeffs<F: FnMut(&Rational) -> Rational>(&self, mut f: F) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Largest absolute coefficient (zero for the zero polynomial).
    pub fn max_abs_coeff(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            /// Panics on a variable-count mismatch; use the `checked_*`
            /// methods to get an error instead.
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial arithmetic")
            }
        }
        impl std::ops::$trait<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$checked(&rhs).expect("polynomial arithmetic")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl std::ops::Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[n={}]({})", self.nvars, self)
    }
}
