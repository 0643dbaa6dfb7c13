//! Textual polynomial syntax.
//!
//! Terms are joined by `+` / `-`; a coefficient is an integer, a fraction
//! `a/b` or a decimal; variables are `x3` (basic) and `~x3` (twin); powers use
//! `^`; factors may be juxtaposed or separated by `*`. Whitespace is ignored.
//! Printing emits terms from the highest monomial down, e.g.
//! `-3/2*x1*~x2 + x3 - 1`, and parsing that output gives back the same
//! polynomial.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Monomial, Polynomial, Rational, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParsePolyError {
    #[error("unexpected {found} at byte {pos} in polynomial")]
    Unexpected { pos: usize, found: String },
    #[error("empty polynomial text")]
    Empty,
    #[error("zero denominator at byte {0}")]
    ZeroDenominator(usize),
    #[error("variable index {index} exceeds nvars {nvars}")]
    IndexOutOfRange { index: u32, nvars: u32 },
    #[error("variable index 0 at byte {0}; indices start at 1")]
    ZeroIndex(usize),
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        let chars = src
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (i, if c == '−' { '-' } else { c }))
            .collect();
        Parser { chars, pos: 0, _src: src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self._src.len(), |&(i, _)| i)
    }

    fn unexpected(&self) -> ParsePolyError {
        let found = match self.peek() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        };
        ParsePolyError::Unexpected { pos: self.offset(), found }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
        }
    }

    fn coefficient(&mut self) -> Result<Option<Rational>, ParsePolyError> {
        let Some(whole) = self.digits() else {
            return Ok(None);
        };
        let num: BigInt = whole.parse().expect("digits");
        if self.eat('/') {
            let at = self.offset();
            let den: BigInt = self.digits().ok_or_else(|| self.unexpected())?.parse().expect("digits");
            if den.is_zero() {
                return Err(ParsePolyError::ZeroDenominator(at));
            }
            return Ok(Some(Rational::new(num, den)));
        }
        if self.eat('.') {
            let frac = self.digits().unwrap_or_default();
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let frac_num: BigInt = if frac.is_empty() { BigInt::zero() } else { frac.parse().expect("digits") };
            return Ok(Some(Rational::new(num * &scale + frac_num, scale)));
        }
        Ok(Some(Rational::from_integer(num)))
    }

    fn factor(&mut self) -> Result<Option<(Var, u32)>, ParsePolyError> {
        let twin = self.eat('~');
        if !self.eat('x') {
            if twin {
                return Err(self.unexpected());
            }
            return Ok(None);
        }
        let at = self.offset();
        let idx: u32 = self
            .digits()
            .ok_or_else(|| self.unexpected())?
            .parse()
            .map_err(|_| ParsePolyError::Unexpected { pos: at, found: "oversized index".into() })?;
        if idx == 0 {
            return Err(ParsePolyError::ZeroIndex(at));
        }
        let mut exp = 1;
        if self.eat('^') {
            let at = self.offset();
            exp = self
                .digits()
                .ok_or_else(|| self.unexpected())?
                .parse()
                .map_err(|_| ParsePolyError::Unexpected { pos: at, found: "oversized exponent".into() })?;
        }
        let v = if twin { Var::twin(idx) } else { Var::basic(idx) };
        Ok(Some((v, exp)))
    }

    fn term(&mut self) -> Result<(Monomial, Rational), ParsePolyError> {
        let mut coeff = self.coefficient()?.unwrap_or_else(Rational::one);
        let mut factors = Vec::new();
        let mut any = false;
        loop {
            let starred = self.eat('*');
            if starred {
                if let Some(c) = self.coefficient()? {
                    coeff *= c;
                    any = true;
                    continue;
                }
            }
            match self.factor()? {
                Some(f) => {
                    factors.push(f);
                    any = true;
                }
                None if starred => return Err(self.unexpected()),
                None => break,
            }
        }
        if !any && self.pos > 0 && !matches!(self.chars.get(self.pos - 1), Some((_, c)) if c.is_ascii_digit()) {
            return Err(self.unexpected());
        }
        Ok((Monomial::from_pairs(factors), coeff))
    }

    fn polynomial(&mut self) -> Result<Vec<(Monomial, Rational)>, ParsePolyError> {
        if self.chars.is_empty() {
            return Err(ParsePolyError::Empty);
        }
        let mut out = Vec::new();
        let mut neg = false;
        loop {
            // tolerate stacked signs such as `+ -3x1`
            loop {
                if self.eat('-') {
                    neg = !neg;
                } else if !self.eat('+') {
                    break;
                }
            }
            let start = self.pos;
            let (m, c) = self.term()?;
            if self.pos == start {
                return Err(self.unexpected());
            }
            out.push((m, if neg { -c } else { c }));
            if self.eat('+') {
                neg = false;
            } else if self.eat('-') {
                neg = true;
            } else if self.peek().is_none() {
                return Ok(out);
            } else {
                return Err(self.unexpected());
            }
        }
    }
}

impl Polynomial {
    /// Parses the textual syntax over `nvars` pairs; indices above `nvars`
    /// are rejected.
    pub fn parse(s: &str, nvars: u32) -> Result<Polynomial, ParsePolyError> {
        let terms = Parser::new(s).polynomial()?;
        let mut p = Polynomial::zero(nvars);
        for (m, c) in terms {
            if let Some(i) = m.max_index() {
                if i > nvars {
                    return Err(ParsePolyError::IndexOutOfRange { index: i, nvars });
                }
            }
            p.add_term(m, c);
        }
        Ok(p)
    }
}

impl FromStr for Polynomial {
    type Err = ParsePolyError;

    /// Parses with `nvars` set to the largest index mentioned.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let terms = Parser::new(s).polynomial()?;
        let n = terms.iter().filter_map(|(m, _)| m.max_index()).max().unwrap_or(0);
        let mut p = Polynomial::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        Ok(p)
    }
}

pub(crate) fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().rev().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            if m.is_one() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn parses_juxtaposition_and_stars() {
        let a = Polynomial::parse("3x1x2 - ~x3^2", 3).unwrap();
        let b = Polynomial::parse("3 * x1 * x2 + -1*~x3^2", 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "-~x3^2 + 3*x1*x2");
    }

    #[test]
    fn rationals_and_decimals() {
        let a = Polynomial::parse("1/2 x1 + 0.25", 1).unwrap();
        assert_eq!(a.coeff(&Monomial::from_var(Var::basic(1))), rat(1, 2));
        assert_eq!(a.constant_term(), rat(1, 4));
        assert_eq!(a.to_string(), "1/2*x1 + 1/4");
    }

    #[test]
    fn unicode_minus_and_whitespace() {
        let a = Polynomial::parse(" x1 − 1 ", 1).unwrap();
        assert_eq!(a.to_string(), "x1 - 1");
    }

    #[test]
    fn rejects_garbage() {
        assert!(Polynomial::parse("", 1).is_err());
        assert!(Polynomial::parse("x", 1).is_err());
        assert!(Polynomial::parse("x1 +", 1).is_err());
        assert!(Polynomial::parse("x0", 1).is_err());
        assert!(Polynomial::parse("1/0", 1).is_err());
        assert!(Polynomial::parse("x1 y", 1).is_err());
        assert!(Polynomial::parse("x1*", 1).is_err());
        assert_eq!(Polynomial::parse("x4", 3), Err(ParsePolyError::IndexOutOfRange { index: 4, nvars: 3 }));
    }

    #[test]
    fn from_str_infers_nvars() {
        let p: Polynomial = "x2*~x5 + 1".parse().unwrap();
        assert_eq!(p.nvars(), 5);
        let c: Polynomial = "-7/3".parse().unwrap();
        assert_eq!(c.nvars(), 0);
        assert_eq!(c.to_string(), "-7/3");
    }
}
