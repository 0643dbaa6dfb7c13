//! The Boolean ideal `I_n` generated by `x_i^2 - x_i`, `~x_i^2 - ~x_i` and
//! `x_i + ~x_i - 1`.
//!
//! These generators form a Gröbner basis, so reducing twins away and then
//! collapsing powers gives a canonical representative: a multilinear
//! polynomial in the basic variables only.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{Monomial, PolyError, Polynomial, Rational, Var};

/// One generator of the Boolean ideal for pair `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BooleanAxiom {
    /// `x_i^2 - x_i`
    Square(u32),
    /// `~x_i^2 - ~x_i`
    TwinSquare(u32),
    /// `x_i + ~x_i - 1`
    Complement(u32),
}

impl BooleanAxiom {
    pub fn index(self) -> u32 {
        match self {
            BooleanAxiom::Square(i) | BooleanAxiom::TwinSquare(i) | BooleanAxiom::Complement(i) => i,
        }
    }

    /// All `3n` generators, pair by pair.
    pub fn all(nvars: u32) -> Vec<BooleanAxiom> {
        (1..=nvars)
            .flat_map(|i| [BooleanAxiom::Square(i), BooleanAxiom::TwinSquare(i), BooleanAxiom::Complement(i)])
            .collect()
    }

    pub fn polynomial(self, nvars: u32) -> Result<Polynomial, PolyError> {
        let i = self.index();
        if i == 0 || i > nvars {
            return Err(PolyError::IndexOutOfRange { index: i, nvars });
        }
        let one = Rational::one();
        let terms = match self {
            BooleanAxiom::Square(i) => vec![
                (Monomial::from_pairs([(Var::basic(i), 2)]), one.clone()),
                (Monomial::from_var(Var::basic(i)), -one),
            ],
            BooleanAxiom::TwinSquare(i) => {
                vec![(Monomial::from_pairs([(Var::twin(i), 2)]), one.clone()), (Monomial::from_var(Var::twin(i)), -one)]
            }
            BooleanAxiom::Complement(i) => vec![
                (Monomial::from_var(Var::basic(i)), one.clone()),
                (Monomial::from_var(Var::twin(i)), one.clone()),
                (Monomial::one(), -one),
            ],
        };
        Polynomial::from_terms(nvars, terms)
    }

    /// Recognises a polynomial as one of the generators.
    pub fn from_polynomial(p: &Polynomial) -> Option<BooleanAxiom> {
        let i = p.max_index()?;
        [BooleanAxiom::Square(i), BooleanAxiom::TwinSquare(i), BooleanAxiom::Complement(i)]
            .into_iter()
            .find(|a| a.polynomial(p.nvars()).as_ref() == Ok(p))
    }
}

impl fmt::Display for BooleanAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BooleanAxiom::Square(i) => write!(f, "x{i}^2 - x{i}"),
            BooleanAxiom::TwinSquare(i) => write!(f, "~x{i}^2 - ~x{i}"),
            BooleanAxiom::Complement(i) => write!(f, "x{i} + ~x{i} - 1"),
        }
    }
}

/// Canonical representative of `p` modulo `I_n`: twins are replaced by
/// `1 - x_i`, powers collapse, and `x_i * ~x_i` vanishes.
pub fn normal_form(p: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero(p.nvars());
    for (m, c) in p.terms() {
        let mut basic: Vec<u32> = Vec::new();
        let mut twins: Vec<u32> = Vec::new();
        for (v, _) in m.vars() {
            if v.is_twin() {
                twins.push(v.index());
            } else {
                basic.push(v.index());
            }
        }
        if twins.iter().any(|t| basic.contains(t)) {
            continue;
        }
        // x^A * prod_{t in T} (1 - x_t) = sum_{S subset T} (-1)^{|S|} x^{A u S}
        for mask in 0u64..(1u64 << twins.len()) {
            let mut idx = basic.clone();
            let mut neg = false;
            for (k, &t) in twins.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    idx.push(t);
                    neg = !neg;
                }
            }
            let coeff = if neg { -c.clone() } else { c.clone() };
            out.add_term(Monomial::basic_product(idx), coeff);
        }
    }
    out
}

/// `p ≡ q mod I_n`, decided by comparing normal forms.
pub fn equal_mod_ideal(p: &Polynomial, q: &Polynomial) -> Result<bool, PolyError> {
    let diff = p.checked_sub(q)?;
    Ok(normal_form(&diff).is_zero())
}

/// Division by the Boolean generators: returns `(normal_form(p), u)` with
/// `p = normal_form(p) + Σ u[a] * a` holding as an exact polynomial identity.
pub fn reduce_with_cofactors(p: &Polynomial) -> (Polynomial, BTreeMap<BooleanAxiom, Polynomial>) {
    let n = p.nvars();
    let mut work: BTreeMap<Monomial, Rational> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    let mut remainder = Polynomial::zero(n);
    let mut cof: BTreeMap<BooleanAxiom, Polynomial> = BTreeMap::new();

    fn push(work: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
        let e = work.entry(m).or_insert_with(Rational::zero);
        *e += c;
    }
    let mut add_cof = |a: BooleanAxiom, m: Monomial, c: Rational| {
        cof.entry(a).or_insert_with(|| Polynomial::zero(n)).add_term(m, c);
    };

    // Always rewrite the largest monomial; every rewrite only produces
    // strictly smaller monomials, so each monomial is handled once.
    while let Some((m, c)) = work.pop_last() {
        if c.is_zero() {
            continue;
        }
        let twin = m.vars().find(|(v, _)| v.is_twin());
        let power = m.vars().find(|&(_, e)| e >= 2);
        if let Some((v, e)) = twin {
            let i = v.index();
            let rest = m.without(v);
            if e >= 2 {
                // ~x^e = ~x^{e-2} (~x^2 - ~x) + ~x^{e-1}
                let lower = |k: u32| rest.mul(&Monomial::from_pairs([(v, k)]));
                add_cof(BooleanAxiom::TwinSquare(i), lower(e - 2), c.clone());
                push(&mut work, lower(e - 1), c);
            } else {
                // m' ~x = m' (x + ~x - 1) + m' - m' x
                add_cof(BooleanAxiom::Complement(i), rest.clone(), c.clone());
                push(&mut work, rest.mul(&Monomial::from_var(Var::basic(i))), -c.clone());
                push(&mut work, rest, c);
            }
        } else if let Some((v, e)) = power {
            let i = v.index();
            let rest = m.without(v);
            let lower = |k: u32| rest.mul(&Monomial::from_pairs([(v, k)]));
            add_cof(BooleanAxiom::Square(i), lower(e - 2), c.clone());
            push(&mut work, lower(e - 1), c);
        } else {
            remainder.add_term(m, c);
        }
    }
    cof.retain(|_, u| !u.is_zero());
    (remainder, cof)
}
