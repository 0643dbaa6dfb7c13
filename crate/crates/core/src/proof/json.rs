//! JSON exchange documents for systems and proofs. Polynomials travel as
//! strings in the textual syntax; rationals as `"p/q"`.

use serde::{Deserialize, Serialize};

use crate::poly::{fmt_rational, BooleanAxiom, Polynomial, Rational};

use super::{ConstraintSystem, ProofError, PsProof, SquareTerm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub n: u32,
    #[serde(default)]
    pub ineqs: Vec<String>,
    #[serde(default)]
    pub eqs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareJson {
    #[serde(rename = "J")]
    pub set: Vec<usize>,
    pub roots: Vec<String>,
    /// Positive square weights; omitted when all are 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierJson {
    pub j: usize,
    pub t: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealJson {
    pub axiom: String,
    pub u: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofJson {
    pub n: u32,
    pub target: String,
    #[serde(default)]
    pub squares: Vec<SquareJson>,
    #[serde(default)]
    pub multipliers: Vec<MultiplierJson>,
    #[serde(default)]
    pub ideal: Vec<IdealJson>,
}

impl From<ConstraintSystem> for SystemJson {
    fn from(q: ConstraintSystem) -> Self {
        SystemJson {
            n: q.n(),
            ineqs: q.ineqs().iter().map(Polynomial::to_string).collect(),
            eqs: q.eqs().iter().map(Polynomial::to_string).collect(),
        }
    }
}

impl TryFrom<SystemJson> for ConstraintSystem {
    type Error = ProofError;

    fn try_from(j: SystemJson) -> Result<Self, ProofError> {
        let ineqs: Vec<&str> = j.ineqs.iter().map(String::as_str).collect();
        let eqs: Vec<&str> = j.eqs.iter().map(String::as_str).collect();
        ConstraintSystem::parse(j.n, &ineqs, &eqs)
    }
}

impl From<PsProof> for ProofJson {
    fn from(p: PsProof) -> Self {
        let squares = p
            .squares
            .iter()
            .map(|(set, terms)| {
                let unit = terms.iter().all(|t| num_traits::One::is_one(&t.weight));
                SquareJson {
                    set: set.clone(),
                    roots: terms.iter().map(|t| t.root.to_string()).collect(),
                    weights: (!unit).then(|| terms.iter().map(|t| fmt_rational(&t.weight)).collect()),
                }
            })
            .collect();
        ProofJson {
            n: p.n,
            target: p.target.to_string(),
            squares,
            multipliers: p.multipliers.iter().map(|(&j, t)| MultiplierJson { j, t: t.to_string() }).collect(),
            ideal: p.ideal.iter().map(|(a, u)| IdealJson { axiom: a.to_string(), u: u.to_string() }).collect(),
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational, ProofError> {
    let p = Polynomial::parse(s, 0)?;
    if p.degree().unwrap_or(0) > 0 {
        return Err(ProofError::Json(format!("weight {s:?} is not a number")));
    }
    Ok(p.constant_term())
}

impl TryFrom<ProofJson> for PsProof {
    type Error = ProofError;

    fn try_from(j: ProofJson) -> Result<Self, ProofError> {
        let n = j.n;
        let mut p = PsProof::new(Polynomial::parse(&j.target, n)?);
        for sq in j.squares {
            if let Some(w) = &sq.weights {
                if w.len() != sq.roots.len() {
                    return Err(ProofError::Json(format!(
                        "{} weights for {} roots at J={:?}",
                        w.len(),
                        sq.roots.len(),
                        sq.set
                    )));
                }
            }
            // an entry with no roots still declares its index set
            p.squares.entry(sq.set.clone()).or_default();
            for (k, r) in sq.roots.iter().enumerate() {
                let weight = match &sq.weights {
                    Some(w) => parse_rational(&w[k])?,
                    None => num_traits::One::one(),
                };
                p.add_square(sq.set.clone(), SquareTerm::weighted(weight, Polynomial::parse(r, n)?));
            }
        }
        for m in j.multipliers {
            p.add_multiplier(m.j, Polynomial::parse(&m.t, n)?);
        }
        for id in j.ideal {
            let ap = Polynomial::parse(&id.axiom, n)?;
            let axiom = BooleanAxiom::from_polynomial(&ap)
                .ok_or_else(|| ProofError::Json(format!("{:?} is not a Boolean axiom", id.axiom)))?;
            p.ideal.insert(axiom, Polynomial::parse(&id.u, n)?);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use crate::proof::verify;

    #[test]
    fn proof_round_trip() {
        let text = r#"{"n":1,"target":"-1","multipliers":[{"j":1,"t":"-2*x1 + 1"}],
                       "ideal":[{"axiom":"x1^2 - x1","u":"4"}]}"#;
        let pf: PsProof = serde_json::from_str(text).unwrap();
        let q: ConstraintSystem = serde_json::from_str(r#"{"n":1,"eqs":["2x1 - 1"]}"#).unwrap();
        assert!(verify(&q, &pf).unwrap().valid);
        assert!(pf.holds_exactly(&q).unwrap());
        let back: PsProof = serde_json::from_str(&serde_json::to_string(&pf).unwrap()).unwrap();
        assert_eq!(back, pf);
    }

    #[test]
    fn weights_are_optional_and_exact() {
        let mut pf = PsProof::new(Polynomial::parse("1/3", 2).unwrap());
        pf.add_square(vec![], SquareTerm::weighted(rat(1, 3), Polynomial::one(2)));
        let s = serde_json::to_string(&pf).unwrap();
        assert!(s.contains(r#""weights":["1/3"]"#), "{s}");
        assert_eq!(serde_json::from_str::<PsProof>(&s).unwrap(), pf);

        let unit = PsProof::new(Polynomial::zero(1));
        assert!(!serde_json::to_string(&unit).unwrap().contains("weights"));
    }

    #[test]
    fn rejects_bad_documents() {
        let bad_axiom = r#"{"n":1,"target":"-1","ideal":[{"axiom":"x1","u":"1"}]}"#;
        assert!(serde_json::from_str::<PsProof>(bad_axiom).is_err());
        let bad_weights = r#"{"n":1,"target":"0","squares":[{"J":[],"roots":["x1"],"weights":[]}]}"#;
        assert!(serde_json::from_str::<PsProof>(bad_weights).is_err());
        assert!(serde_json::from_str::<ConstraintSystem>(r#"{"n":1,"eqs":["x2"]}"#).is_err());
    }
}
