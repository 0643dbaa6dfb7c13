//! Batch studies over generated instances: MAX-CSP integrality gaps and
//! minimum refutation degree sweeps, with deterministic CSV/JSON reports.
//!
//! A study is described by one JSON document ([`ExperimentConfig`]). All
//! parameters are validated before anything runs. Instances are solved
//! independently, in parallel if asked, and records are ordered by instance
//! id afterwards, so reports do not depend on scheduling. Wall-clock
//! timings go to a separate sidecar file to keep the reports byte-stable.

mod report;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instances::{
    bundled_instances, encode_maxcsp, gen_knapsack, gen_random_csp, gen_tseitin, opt_brute_force, CspMode, Formulation,
    Graph, Instance, EXHAUSTIVE_LIMIT,
};
use crate::poly::{to_f64, Polynomial, Rational};
use crate::proof::{ConstraintSystem, CutoffRule};
use crate::sdp::{duality_eval, min_refutation_degree, SdpOptions};

pub use report::{emit_report, fmt_float, fmt_rational, ReportPaths, Table};

/// How the cut-off is chosen for each instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffSpec {
    /// The degree of each constraint product: the ordinary proof degree.
    DegreeSum,
    /// The constant `k·w` of the instance.
    #[default]
    Kw,
    /// Degree of the product plus a fixed offset.
    Plus(u32),
    Constant(u32),
}

impl CutoffSpec {
    pub fn rule(self, q: &ConstraintSystem, w: u32) -> CutoffRule {
        match self {
            CutoffSpec::DegreeSum => CutoffRule::degree_sum(),
            CutoffSpec::Kw => CutoffRule::kw(q, w),
            CutoffSpec::Plus(k) => CutoffRule::DegreeSumPlus(k),
            CutoffSpec::Constant(v) => CutoffRule::Constant(v),
        }
    }
}

impl std::str::FromStr for CutoffSpec {
    type Err = String;

    /// `kw`, `degsum`, `degsum+N` or a bare constant `N`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad cut-off {s:?}"));
        match s {
            "kw" => Ok(CutoffSpec::Kw),
            "degsum" => Ok(CutoffSpec::DegreeSum),
            _ => match s.strip_prefix("degsum+") {
                Some(off) => num(off).map(CutoffSpec::Plus),
                None => num(s).map(CutoffSpec::Constant),
            },
        }
    }
}

/// The instance family and its generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Study {
    /// Random MAX-CSP instances, one per seed; `sos` is the degree-`D` upper
    /// bound on the optimum in the chosen formulation.
    Maxcsp {
        n: u32,
        m: usize,
        #[serde(default = "default_arity")]
        arity: usize,
        #[serde(default = "default_mode")]
        mode: CspMode,
        #[serde(default = "default_formulation")]
        formulation: Formulation,
    },
    /// `KS_{n,k}` for every listed pair; records the least refuting degree.
    Knapsack { n: Vec<u32>, k: Vec<i64> },
    /// Tseitin systems on cycles with every charge 1.
    TseitinCycles { lengths: Vec<usize> },
    /// Tseitin systems on random `d`-regular graphs, one per seed.
    TseitinRandom { vertices: usize, d: usize, odd: bool },
    /// The bundled instances, optionally filtered by id.
    Bundled {
        #[serde(default)]
        ids: Vec<String>,
    },
}

fn default_arity() -> usize {
    3
}
fn default_mode() -> CspMode {
    CspMode::Xor
}
fn default_formulation() -> Formulation {
    Formulation::WithVars
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub study: Study,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Relaxation degrees for gap studies; the scan limit is their maximum.
    #[serde(default = "default_degrees")]
    pub degrees: Vec<u32>,
    #[serde(default = "default_widths")]
    pub widths: Vec<u32>,
    #[serde(default)]
    pub cutoff: CutoffSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads; 0 means the rayon default.
    #[serde(default)]
    pub jobs: usize,
}

fn default_degrees() -> Vec<u32> {
    vec![2]
}
fn default_widths() -> Vec<u32> {
    vec![1]
}
fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub timings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("soundness violated on {id} at degree {degree}: opt {opt} > sos {sos}")]
    Soundness { id: String, degree: u32, opt: String, sos: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Invalid(e.to_string()))
    }

    /// Checks every parameter before any work starts.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Invalid(m));
        if self.degrees.is_empty() {
            return bad("no degrees given".into());
        }
        if let Some(d) = self.degrees.iter().find(|&&d| d == 0 || d % 2 == 1) {
            return bad(format!("degree {d} is not a positive even number"));
        }
        if self.widths.is_empty() || self.widths.contains(&0) {
            return bad("widths must be nonempty and at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tolerance {} outside (0, 1)", self.tol));
        }
        match &self.study {
            Study::Maxcsp { n, m, arity, formulation, .. } => {
                if *n > EXHAUSTIVE_LIMIT {
                    return bad(format!("n = {n} exceeds the brute-force limit {EXHAUSTIVE_LIMIT}"));
                }
                if *arity == 0 || *arity > *n as usize {
                    return bad(format!("arity {arity} does not fit {n} variables"));
                }
                if *m == 0 {
                    return bad("m must be at least 1".into());
                }
                if *formulation == Formulation::Refutation {
                    return bad("gap studies use the direct or with_vars formulation".into());
                }
            }
            Study::Knapsack { n, k } => {
                if n.contains(&0) {
                    return bad("knapsack needs n >= 1".into());
                }
                if n.is_empty() != k.is_empty() {
                    return bad("knapsack grid needs both n and k".into());
                }
            }
            Study::TseitinCycles { lengths } => {
                if lengths.contains(&0) {
                    return bad("cycle length must be at least 1".into());
                }
            }
            Study::TseitinRandom { vertices, d, .. } => {
                if *vertices == 0 || (vertices * d) % 2 == 1 {
                    return bad(format!("no {d}-regular pairing on {vertices} vertices"));
                }
            }
            Study::Bundled { ids } => {
                let known: BTreeSet<String> = bundled_instances().into_iter().map(|i| i.id).collect();
                if let Some(id) = ids.iter().find(|id| !known.contains(*id)) {
                    return bad(format!("unknown bundled instance {id:?}"));
                }
            }
        }
        Ok(())
    }

    fn sdp_options(&self) -> SdpOptions {
        SdpOptions::with_tol(self.tol)
    }
}

/// One MAX-CSP instance at one degree and width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub id: String,
    pub seed: u64,
    pub n: u32,
    pub m: usize,
    pub degree: u32,
    pub width: u32,
    /// Exact optimum, by enumeration.
    #[serde(with = "rational_text")]
    pub opt: Rational,
    /// Degree-`D` upper bound on the optimum; `None` if the solve failed.
    pub sos: Option<f64>,
    /// Upper bound backed by an exact certificate.
    #[serde(with = "rational_text::option")]
    pub sos_certified: Option<Rational>,
    /// `opt / sos`.
    pub alpha: Option<f64>,
    pub error: Option<String>,
    pub seconds: f64,
}

/// Least refuting degree of one instance at one width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub id: String,
    pub family: String,
    pub n: u32,
    pub k: u32,
    pub width: u32,
    pub satisfiable: Option<bool>,
    /// `None` when no degree up to `max_degree` refutes.
    pub min_degree: Option<u32>,
    pub max_degree: u32,
    pub method: Option<String>,
    pub exact: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "records", rename_all = "snake_case")]
pub enum Records {
    Gap(Vec<GapRecord>),
    Degree(Vec<DegreeRecord>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Gap(r) => r.len(),
            Records::Degree(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records whose solve failed.
    pub fn failures(&self) -> usize {
        match self {
            Records::Gap(r) => r.iter().filter(|x| x.error.is_some()).count(),
            Records::Degree(r) => r.iter().filter(|x| x.error.is_some()).count(),
        }
    }
}

/// Rationals as `p/q` strings.
mod rational_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::poly::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(|_| serde::de::Error::custom(format!("not a rational: {text:?}")))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => super::serialize(r, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            let text: Option<String> = Option::deserialize(d)?;
            text.map(|t| t.parse().map_err(|_| serde::de::Error::custom(format!("not a rational: {t:?}")))).transpose()
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| ExperimentError::Io(e.to_string()))
}

/// Runs the study and returns its records, sorted by instance id, then
/// degree and width. Solver failures are recorded per instance; a record
/// with `opt > sos + 10·tol` aborts the run with
/// [`ExperimentError::Soundness`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Records, ExperimentError> {
    cfg.validate()?;
    let pool = pool(cfg.jobs)?;
    let records = pool.install(|| match &cfg.study {
        Study::Maxcsp { n, m, arity, mode, formulation } => {
            let jobs: Vec<(u64, u32, u32)> = cfg
                .seeds
                .iter()
                .flat_map(|&s| cfg.degrees.iter().flat_map(move |&d| cfg.widths.iter().map(move |&w| (s, d, w))))
                .collect();
            let mut recs: Vec<GapRecord> = jobs
                .par_iter()
                .map(|&(seed, d, w)| gap_record(cfg, *n, *m, *arity, *mode, *formulation, seed, d, w))
                .collect();
            recs.sort_by(|a, b| (&a.id, a.degree, a.width).cmp(&(&b.id, b.degree, b.width)));
            Records::Gap(recs)
        }
        _ => {
            let instances = degree_instances(cfg);
            let jobs: Vec<(&Instance, u32)> =
                instances.iter().flat_map(|i| cfg.widths.iter().map(move |&w| (i, w))).collect();
            let mut recs: Vec<DegreeRecord> = jobs.par_iter().map(|&(inst, w)| degree_record(cfg, inst, w)).collect();
            recs.sort_by(|a, b| (&a.id, a.width).cmp(&(&b.id, b.width)));
            Records::Degree(recs)
        }
    });
    if let Records::Gap(recs) = &records {
        for r in recs {
            if let Some(sos) = r.sos {
                if to_f64(&r.opt) > sos + 10.0 * cfg.tol {
                    return Err(ExperimentError::Soundness {
                        id: r.id.clone(),
                        degree: r.degree,
                        opt: fmt_rational(&r.opt),
                        sos,
                    });
                }
            }
        }
    }
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn gap_record(
    cfg: &ExperimentConfig,
    n: u32,
    m: usize,
    arity: usize,
    mode: CspMode,
    formulation: Formulation,
    seed: u64,
    degree: u32,
    width: u32,
) -> GapRecord {
    let start = Instant::now();
    let mode_name = match mode {
        CspMode::Xor => "xor",
        CspMode::Sat => "sat",
    };
    let id = format!("{mode_name}{arity}-n{n}-m{m}-s{seed:04}");
    let mut rec = GapRecord {
        id,
        seed,
        n,
        m,
        degree,
        width,
        opt: Rational::from_integer(0.into()),
        sos: None,
        sos_certified: None,
        alpha: None,
        error: None,
        seconds: 0.0,
    };
    let outcome = (|| -> Result<(), String> {
        let inst = gen_random_csp(n, m, arity, mode, seed).map_err(|e| e.to_string())?;
        rec.opt = opt_brute_force(&inst, EXHAUSTIVE_LIMIT).map_err(|e| e.to_string())?;
        let enc = encode_maxcsp(&inst, &Rational::from_integer(1.into()), formulation).map_err(|e| e.to_string())?;
        let c = cfg.cutoff.rule(&enc.system, width);
        // maximizing the objective: sos = -(best lower bound on -objective)
        let neg: Polynomial = -&enc.objective;
        let rep = duality_eval(&enc.system, &neg, degree, width, &c, &cfg.sdp_options()).map_err(|e| e.to_string())?;
        if rep.refutation.is_some() {
            return Err("the encoding was refuted; it is satisfiable by construction".into());
        }
        let sos = -rep.lhs;
        rec.sos = Some(sos);
        rec.sos_certified = rep.certified_lhs.map(|b| -b);
        rec.alpha = Some(to_f64(&rec.opt) / sos);
        Ok(())
    })();
    rec.error = outcome.err();
    rec.seconds = start.elapsed().as_secs_f64();
    rec
}

fn degree_instances(cfg: &ExperimentConfig) -> Vec<Instance> {
    match &cfg.study {
        Study::Knapsack { n, k } => n
            .iter()
            .flat_map(|&n| {
                k.iter().map(move |&k| {
                    Instance::new(format!("ks-{n:02}-{k:02}"), "knapsack", gen_knapsack(n, k).expect("validated"))
                        .param("n", n)
                        .param("k", k)
                })
            })
            .collect(),
        Study::TseitinCycles { lengths } => lengths
            .iter()
            .map(|&len| {
                let g = Graph::cycle(len);
                let q = gen_tseitin(&g, &vec![true; len]).expect("charges match");
                Instance::new(format!("tseitin-c{len:02}"), "tseitin", q).param("length", len)
            })
            .collect(),
        Study::TseitinRandom { vertices, d, odd } => cfg
            .seeds
            .iter()
            .filter_map(|&seed| {
                let g = crate::instances::random_regular_graph(*vertices, *d, seed).ok()?;
                let mut charges = vec![false; *vertices];
                charges[0] = *odd;
                let q = gen_tseitin(&g, &charges).ok()?;
                Some(Instance::new(format!("tseitin-r{vertices}-d{d}-s{seed:04}"), "tseitin", q).param("seed", seed))
            })
            .collect(),
        Study::Bundled { ids } => {
            bundled_instances().into_iter().filter(|i| ids.is_empty() || ids.contains(&i.id)).collect()
        }
        Study::Maxcsp { .. } => Vec::new(),
    }
}

fn degree_record(cfg: &ExperimentConfig, inst: &Instance, width: u32) -> DegreeRecord {
    let start = Instant::now();
    let q = &inst.system;
    let max_degree = *cfg.degrees.iter().max().expect("validated nonempty");
    let satisfiable = (q.n() <= EXHAUSTIVE_LIMIT).then(|| q.find_satisfying().is_some());
    let c = cfg.cutoff.rule(q, width);
    let mut rec = DegreeRecord {
        id: inst.id.clone(),
        family: inst.family.clone(),
        n: q.n(),
        k: q.k(),
        width,
        satisfiable,
        min_degree: None,
        max_degree,
        method: None,
        exact: false,
        error: None,
        seconds: 0.0,
    };
    match min_refutation_degree(q, width, &c, max_degree, &cfg.sdp_options()) {
        Ok(Some(r)) => {
            rec.min_degree = Some(r.degree);
            rec.method = Some(format!("{:?}", r.method).to_lowercase());
            rec.exact = r.proof.is_some();
        }
        Ok(None) => {}
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec.seconds = start.elapsed().as_secs_f64();
    rec
}
