use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::poly::{int, Monomial, Polynomial, Rational};

use super::InstanceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CspMode {
    Xor,
    Sat,
}

/// The predicate of one constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Predicate {
    /// `x_{v1} ⊕ … ⊕ x_{vk} = parity`
    Xor { parity: bool },
    /// A clause; `negated[t]` marks the literal on `vars[t]` as negative.
    Sat { negated: Vec<bool> },
}

/// One constraint on distinct 1-based variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspConstraint {
    pub vars: Vec<u32>,
    #[serde(flatten)]
    pub predicate: Predicate,
}

impl CspConstraint {
    pub fn xor(vars: Vec<u32>, parity: bool) -> Self {
        CspConstraint { vars, predicate: Predicate::Xor { parity } }
    }

    pub fn clause(vars: Vec<u32>, negated: Vec<bool>) -> Self {
        assert_eq!(vars.len(), negated.len());
        CspConstraint { vars, predicate: Predicate::Sat { negated } }
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Truth value on the local assignment: bit `t` of `local` is the value
    /// of `vars[t]`.
    pub fn holds_local(&self, local: u32) -> bool {
        match &self.predicate {
            Predicate::Xor { parity } => (local.count_ones() % 2 == 1) == *parity,
            Predicate::Sat { negated } => negated.iter().enumerate().any(|(t, &neg)| (local >> t & 1 == 1) != neg),
        }
    }

    pub fn holds(&self, point: &[bool]) -> bool {
        let local = self.vars.iter().enumerate().fold(0u32, |acc, (t, &v)| acc | (point[v as usize - 1] as u32) << t);
        self.holds_local(local)
    }

    /// The unique multilinear polynomial in the constraint's own variables
    /// that is 1 on satisfying and 0 on falsifying points, by Möbius
    /// inversion of the truth table.
    pub fn polynomial(&self, n: u32) -> Polynomial {
        let k = self.arity();
        let table: Vec<i64> = (0..1u32 << k).map(|s| self.holds_local(s) as i64).collect();
        // a_S = Σ_{T⊆S} (-1)^{|S\T|} f(T), computed in place
        let mut coef = table;
        for bit in 0..k {
            for s in 0..coef.len() {
                if s >> bit & 1 == 1 {
                    coef[s] -= coef[s ^ (1 << bit)];
                }
            }
        }
        let terms = coef.iter().enumerate().filter(|(_, &c)| c != 0).map(|(s, &c)| {
            let idx = (0..k).filter(|t| s >> t & 1 == 1).map(|t| self.vars[t]);
            (Monomial::basic_product(idx), int(c))
        });
        Polynomial::from_terms(n, terms).expect("constraint variables within range")
    }
}

/// A sequence of constraints on `n` Boolean variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspInstance {
    pub n: u32,
    pub constraints: Vec<CspConstraint>,
}

impl CspInstance {
    pub fn new(n: u32, constraints: Vec<CspConstraint>) -> Result<Self, InstanceError> {
        for c in &constraints {
            let mut vs = c.vars.clone();
            vs.sort_unstable();
            vs.dedup();
            if vs.len() != c.vars.len() || vs.first() == Some(&0) || vs.last().is_some_and(|&v| v > n) {
                return Err(InstanceError::BadConstraint(format!("{:?} over {n} variables", c.vars)));
            }
            if let Predicate::Sat { negated } = &c.predicate {
                if negated.len() != c.vars.len() {
                    return Err(InstanceError::BadConstraint("literal signs do not match variables".into()));
                }
            }
        }
        Ok(CspInstance { n, constraints })
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// `p_C` for every constraint, in order.
    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.constraints.iter().map(|c| c.polynomial(self.n)).collect()
    }

    /// Number of constraints satisfied by the point.
    pub fn satisfied_count(&self, point: &[bool]) -> usize {
        self.constraints.iter().filter(|c| c.holds(point)).count()
    }
}

/// `m` constraints of the given arity, each on a uniformly random set of
/// distinct variables (listed in increasing order), with a uniform parity
/// bit (XOR) or uniform literal signs (SAT). Uses ChaCha8 seeded from
/// `seed`, so instances are identical across platforms.
pub fn gen_random_csp(n: u32, m: usize, arity: usize, mode: CspMode, seed: u64) -> Result<CspInstance, InstanceError> {
    if arity > n as usize {
        return Err(InstanceError::ArityTooLarge { arity, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let mut vars: Vec<u32> = sample(&mut rng, n as usize, arity).into_iter().map(|v| v as u32 + 1).collect();
        vars.sort_unstable();
        let c = match mode {
            CspMode::Xor => CspConstraint::xor(vars, rng.random()),
            CspMode::Sat => {
                let negated = (0..arity).map(|_| rng.random()).collect();
                CspConstraint::clause(vars, negated)
            }
        };
        constraints.push(c);
    }
    CspInstance::new(n, constraints)
}

/// `opt = max_x (1/m) Σ_j p_j(x)` by enumerating `{0,1}^n`. Errors when `n`
/// exceeds `limit`. An instance with no constraints has value 1.
pub fn opt_brute_force(inst: &CspInstance, limit: u32) -> Result<Rational, InstanceError> {
    if inst.n > limit {
        return Err(InstanceError::OverLimit { n: inst.n, limit });
    }
    let m = inst.m();
    if m == 0 {
        return Ok(int(1));
    }
    // per constraint: variable bit positions and a packed truth table
    let compiled: Vec<(Vec<u32>, u64)> = inst
        .constraints
        .iter()
        .map(|c| {
            let table = (0..1u32 << c.arity()).fold(0u64, |acc, s| acc | (c.holds_local(s) as u64) << s);
            (c.vars.iter().map(|v| v - 1).collect(), table)
        })
        .collect();
    let mut best = 0usize;
    for x in 0u64..1 << inst.n {
        let mut count = 0;
        for (vars, table) in &compiled {
            let local = vars.iter().enumerate().fold(0u32, |acc, (t, &v)| acc | ((x >> v & 1) as u32) << t);
            count += (table >> local & 1) as usize;
        }
        if count > best {
            best = count;
            if best == m {
                break;
            }
        }
    }
    Ok(Rational::new(best.into(), m.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn xor_polynomial_by_interpolation() {
        let c = CspConstraint::xor(vec![1, 2, 3], true);
        let want = Polynomial::parse("x1 + x2 + x3 - 2x1x2 - 2x1x3 - 2x2x3 + 4x1x2x3", 3).unwrap();
        assert_eq!(c.polynomial(3), want);
    }

    #[test]
    fn clause_polynomial_is_one_minus_product() {
        let c = CspConstraint::clause(vec![1, 2, 3], vec![false; 3]);
        let prod = Polynomial::parse("1 - x1", 3).unwrap()
            * Polynomial::parse("1 - x2", 3).unwrap()
            * Polynomial::parse("1 - x3", 3).unwrap();
        assert_eq!(c.polynomial(3), Polynomial::one(3) - prod);
        // x1 ∨ ¬x2 : 1 - (1 - x1) x2
        let c = CspConstraint::clause(vec![1, 2], vec![false, true]);
        assert_eq!(c.polynomial(2), Polynomial::parse("1 - x2 + x1x2", 2).unwrap());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = gen_random_csp(10, 40, 3, CspMode::Xor, 7).unwrap();
        assert_eq!(a, gen_random_csp(10, 40, 3, CspMode::Xor, 7).unwrap());
        assert_ne!(a, gen_random_csp(10, 40, 3, CspMode::Xor, 8).unwrap());
        assert!(a.constraints.iter().all(|c| c.arity() == 3 && c.vars.windows(2).all(|w| w[0] < w[1])));
        assert!(gen_random_csp(2, 1, 3, CspMode::Sat, 0).is_err());
    }

    #[test]
    fn small_optima() {
        let single = CspInstance::new(1, vec![CspConstraint::clause(vec![1], vec![false])]).unwrap();
        assert_eq!(opt_brute_force(&single, 24).unwrap(), int(1));
        let pair =
            CspInstance::new(1, vec![CspConstraint::xor(vec![1], true), CspConstraint::xor(vec![1], false)]).unwrap();
        assert_eq!(opt_brute_force(&pair, 24).unwrap(), rat(1, 2));
        assert!(opt_brute_force(&gen_random_csp(30, 1, 3, CspMode::Xor, 0).unwrap(), 24).is_err());
    }

    #[test]
    fn json_shape() {
        let c = CspConstraint::clause(vec![1, 4], vec![true, false]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"vars":[1,4],"kind":"sat","negated":[true,false]}"#);
        assert_eq!(serde_json::from_str::<CspConstraint>(&s).unwrap(), c);
    }
}
