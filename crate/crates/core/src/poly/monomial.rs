use std::cmp::Ordering;
use std::fmt;

/// One of the `2n` variables: `x_i` (basic) or `~x_i` (twin), `i >= 1`.
///
/// Variables order basic before twin, then by ascending index.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    index: u32,
    twin: bool,
}

impl Var {
    pub fn basic(index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        Var { index, twin: false }
    }

    pub fn twin(index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        Var { index, twin: true }
    }

    pub fn index(self) -> u32 {
        self.index
    }

    pub fn is_twin(self) -> bool {
        self.twin
    }

    /// The other member of the pair.
    pub fn complement(self) -> Self {
        Var { index: self.index, twin: !self.twin }
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.twin, self.index).cmp(&(other.twin, other.index))
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twin {
            write!(f, "~x{}", self.index)
        } else {
            write!(f, "x{}", self.index)
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A product of variables with positive exponents. The empty product is `1`.
///
/// Stored as `(var, exponent)` pairs sorted by [`Var`] order. Monomials are
/// ordered graded-lexicographically: first by total degree, then by comparing
/// the sorted sequences of variable occurrences.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from arbitrary `(var, exponent)` pairs; zero
    /// exponents are dropped and repeats are merged.
    pub fn from_pairs<I: IntoIterator<Item = (Var, u32)>>(pairs: I) -> Self {
        let mut v: Vec<(Var, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort_by_key(|&(var, _)| var);
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(v.len());
        for (var, e) in v {
            match out.last_mut() {
                Some((last, le)) if *last == var => *le += e,
                _ => out.push((var, e)),
            }
        }
        Monomial(out)
    }

    /// Product of the basic variables with the given indices (each once).
    pub fn basic_product<I: IntoIterator<Item = u32>>(indices: I) -> Self {
        Self::from_pairs(indices.into_iter().map(|i| (Var::basic(i), 1)))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn vars(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.exponent(v) > 0
    }

    pub fn max_index(&self) -> Option<u32> {
        self.0.iter().map(|(v, _)| v.index()).max()
    }

    pub fn is_multilinear(&self) -> bool {
        self.0.iter().all(|&(_, e)| e == 1)
    }

    pub fn multilinear_part(&self) -> Self {
        Monomial(self.0.iter().map(|&(v, _)| (v, 1)).collect())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Removes one factor `v^e` entirely, returning the cofactor.
    pub fn without(&self, v: Var) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&(w, _)| w != v).collect())
    }

    /// Substitutes `x_i := b`, `~x_i := 1 - b`. Returns `None` if the
    /// monomial vanishes.
    pub fn restrict(&self, i: u32, b: bool) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for &(v, e) in &self.0 {
            if v.index() == i {
                // value of this variable under the assignment
                let val = b != v.is_twin();
                if !val {
                    return None;
                }
            } else {
                out.push((v, e));
            }
        }
        Some(Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (&(va, ea), &(vb, eb)) in self.0.iter().zip(other.0.iter()) {
            if va != vb {
                return va.cmp(&vb);
            }
            if ea != eb {
                // The longer run of the same variable sorts first.
                return eb.cmp(&ea);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(i: u32) -> Var {
        Var::basic(i)
    }

    #[test]
    fn graded_lex_order() {
        let one = Monomial::one();
        let x1 = Monomial::from_var(b(1));
        let x2 = Monomial::from_var(b(2));
        let t1 = Monomial::from_var(Var::twin(1));
        let x1x2 = Monomial::basic_product([1, 2]);
        let x1sq = Monomial::from_pairs([(b(1), 2)]);
        let x1x3 = Monomial::basic_product([1, 3]);
        let mut v = vec![x1x3.clone(), t1.clone(), x1x2.clone(), x2.clone(), one.clone(), x1sq.clone(), x1.clone()];
        v.sort();
        assert_eq!(v, vec![one, x1, x2, t1, x1sq, x1x2, x1x3]);
    }

    #[test]
    fn multiplication_merges_exponents() {
        let m = Monomial::basic_product([1, 2]).mul(&Monomial::from_pairs([(b(1), 1), (Var::twin(3), 2)]));
        assert_eq!(m.to_string(), "x1^2*x2*~x3^2");
        assert_eq!(m.degree(), 5);
        assert!(!m.is_multilinear());
        assert_eq!(m.multilinear_part().to_string(), "x1*x2*~x3");
    }

    #[test]
    fn restriction_kills_or_drops() {
        let m = Monomial::from_pairs([(b(1), 1), (Var::twin(2), 1)]);
        assert_eq!(m.restrict(1, false), None);
        assert_eq!(m.restrict(1, true), Some(Monomial::from_var(Var::twin(2))));
        assert_eq!(m.restrict(2, true), None);
        assert_eq!(m.restrict(2, false), Some(Monomial::from_var(b(1))));
    }
}
