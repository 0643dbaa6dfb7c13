use std::collections::BTreeMap;
use std::fmt;

use super::{ConstraintSystem, ProofError};

/// Where a cut-off value is evaluated: an inequality index set `J` or an
/// equality index `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutoffSite {
    Set(Vec<usize>),
    Eq(usize),
}

impl fmt::Display for CutoffSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffSite::Set(s) => {
                let parts: Vec<String> = s.iter().map(usize::to_string).collect();
                write!(f, "J={{{}}}", parts.join(","))
            }
            CutoffSite::Eq(j) => write!(f, "j={j}"),
        }
    }
}

/// Per-index degree budget charged to constraint products.
///
/// The lower bounds `c(J) >= Σ_{j∈J} deg q_j` and `c(j) >= deg p_j` are not
/// checked up front; each evaluation checks the site it is asked about.
/// The empty set always costs 0, since `s_∅` is bounded by the degree alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutoffRule {
    /// The same value everywhere, e.g. `kw`.
    Constant(u32),
    /// The degree of the constraint product plus a fixed offset. Offset 0
    /// gives the ordinary proof degree.
    DegreeSumPlus(u32),
    /// Values listed per site; a missing site is an error.
    Explicit { sets: BTreeMap<Vec<usize>, u32>, eqs: BTreeMap<usize, u32> },
}

impl CutoffRule {
    pub fn degree_sum() -> Self {
        CutoffRule::DegreeSumPlus(0)
    }

    /// The constant rule `k·w`.
    pub fn kw(q: &ConstraintSystem, w: u32) -> Self {
        CutoffRule::Constant(q.k() * w)
    }

    pub fn at_set(&self, q: &ConstraintSystem, set: &[usize]) -> Result<u32, ProofError> {
        if set.is_empty() {
            return Ok(0);
        }
        let mut required = 0;
        for &j in set {
            required += q.ineq(j).ok_or(ProofError::DanglingInequality(j))?.degree().unwrap_or(0);
        }
        let value = match self {
            CutoffRule::Constant(v) => *v,
            CutoffRule::DegreeSumPlus(off) => required + off,
            CutoffRule::Explicit { sets, .. } => {
                *sets.get(set).ok_or_else(|| ProofError::CutoffMissing(CutoffSite::Set(set.to_vec())))?
            }
        };
        if value < required {
            return Err(ProofError::CutoffViolation { site: CutoffSite::Set(set.to_vec()), value, required });
        }
        Ok(value)
    }

    pub fn at_eq(&self, q: &ConstraintSystem, j: usize) -> Result<u32, ProofError> {
        let required = q.eq(j).ok_or(ProofError::DanglingEquality(j))?.degree().unwrap_or(0);
        let value = match self {
            CutoffRule::Constant(v) => *v,
            CutoffRule::DegreeSumPlus(off) => required + off,
            CutoffRule::Explicit { eqs, .. } => *eqs.get(&j).ok_or(ProofError::CutoffMissing(CutoffSite::Eq(j)))?,
        };
        if value < required {
            return Err(ProofError::CutoffViolation { site: CutoffSite::Eq(j), value, required });
        }
        Ok(value)
    }
}

impl fmt::Display for CutoffRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffRule::Constant(v) => write!(f, "constant({v})"),
            CutoffRule::DegreeSumPlus(0) => write!(f, "degsum"),
            CutoffRule::DegreeSumPlus(o) => write!(f, "degsum+{o}"),
            CutoffRule::Explicit { .. } => write!(f, "explicit"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lazy_lower_bound_checks() {
        let q = ConstraintSystem::parse(3, &["x1*x2", "x3 - 1"], &["x1*x2*x3"]).unwrap();
        let c = CutoffRule::Constant(2);
        assert_eq!(c.at_set(&q, &[1]).unwrap(), 2);
        // the pair needs 3, the equality needs 3
        assert!(matches!(c.at_set(&q, &[1, 2]), Err(ProofError::CutoffViolation { required: 3, .. })));
        assert!(c.at_eq(&q, 1).is_err());
        assert_eq!(c.at_set(&q, &[]).unwrap(), 0);
        let d = CutoffRule::degree_sum();
        assert_eq!(d.at_set(&q, &[1, 2]).unwrap(), 3);
        assert_eq!(d.at_eq(&q, 1).unwrap(), 3);
        assert_eq!(CutoffRule::kw(&q, 2), CutoffRule::Constant(6));
    }

    #[test]
    fn explicit_table() {
        let q = ConstraintSystem::parse(2, &["x1"], &["x2"]).unwrap();
        let c = CutoffRule::Explicit { sets: [(vec![1], 1)].into(), eqs: BTreeMap::new() };
        assert_eq!(c.at_set(&q, &[1]).unwrap(), 1);
        assert_eq!(c.at_eq(&q, 1), Err(ProofError::CutoffMissing(CutoffSite::Eq(1))));
        assert_eq!(CutoffSite::Set(vec![1, 3]).to_string(), "J={1,3}");
    }
}
