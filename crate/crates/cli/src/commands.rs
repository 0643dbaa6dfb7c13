use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sosps::experiment::{
    emit_report, fmt_float, fmt_rational, run_experiment, ExperimentConfig, ExperimentError, ReportPaths, Table,
};
use sosps::instances::{gen_knapsack, gen_random_csp, gen_tseitin, random_regular_graph, CspMode, Graph, Instance};
use sosps::poly::Polynomial;
use sosps::proof::{measures, verify, ConstraintSystem, PsProof};
use sosps::reduce::{reduce_degree, tradeoff_bound, ReduceError, ReduceMode, ReduceOptions};
use sosps::sdp::{
    check_pseudoexpectation, duality_eval, extract_pseudoexpectation, min_refutation_degree, PseudoExpectation,
    SdpError,
};

use crate::args::*;

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: flags, files or documents. Exit code 2.
    Invalid(String),
    /// The solver gave up. Exit code 3.
    Solver(String),
    /// A check the toolkit guarantees did not hold. Exit code 4.
    Guarantee(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Guarantee(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Solver(m) | Failure::Guarantee(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn invalid(e: impl ToString) -> Failure {
    Failure::Invalid(e.to_string())
}

fn sdp_failure(e: SdpError) -> Failure {
    match e {
        SdpError::Solver { .. } => Failure::Solver(e.to_string()),
        other => Failure::Invalid(other.to_string()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Instance::from_json(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn load_proof(path: &Path) -> Result<PsProof, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Invalid(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

/// Pretty JSON to `out`, or to stdout.
fn emit(out: &Option<PathBuf>, value: &Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("values serialize") + "\n";
    match out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn proof_json(proof: &PsProof) -> Value {
    serde_json::to_value(proof).expect("proofs serialize")
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Degree(a) => degree(a),
        Command::Bound(a) => bound(a),
        Command::Pexp(a) => pexp(a),
        Command::Reduce(a) => reduce(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn gen(a: GenArgs) -> Outcome {
    let inst = match a.family {
        Family::Tseitin => {
            let (graph, id) = match a.d {
                Some(d) => (
                    random_regular_graph(a.n as usize, d, a.seed).map_err(invalid)?,
                    format!("tseitin-r{}-d{d}-s{}", a.n, a.seed),
                ),
                None => (Graph::cycle(a.n as usize), format!("tseitin-c{}", a.n)),
            };
            let charges: Vec<bool> = if a.charges.is_empty() {
                vec![true; a.n as usize]
            } else {
                if let Some(c) = a.charges.iter().find(|&&c| c > 1) {
                    return Err(Failure::Invalid(format!("charge {c} is not 0 or 1")));
                }
                a.charges.iter().map(|&c| c == 1).collect()
            };
            let system = gen_tseitin(&graph, &charges).map_err(invalid)?;
            let mut inst = Instance::new(id, "tseitin", system)
                .param("vertices", a.n)
                .param("charges", charges.iter().map(|&c| c as u8).collect::<Vec<_>>());
            if let Some(d) = a.d {
                inst = inst.param("d", d).param("seed", a.seed);
            }
            inst.graph = Some(graph);
            inst
        }
        Family::Knapsack => {
            let k = a.k.ok_or_else(|| invalid("knapsack needs --k"))?;
            Instance::new(format!("ks-{}-{k}", a.n), "knapsack", gen_knapsack(a.n, k).map_err(invalid)?)
                .param("n", a.n)
                .param("k", k)
        }
        Family::Xor | Family::Sat => {
            let m = a.m.ok_or_else(|| invalid("CSP families need --m"))?;
            let arity = a.k.unwrap_or(3);
            if arity < 1 {
                return Err(invalid("arity must be at least 1"));
            }
            let (mode, name) = if a.family == Family::Xor { (CspMode::Xor, "xor") } else { (CspMode::Sat, "sat") };
            let csp = gen_random_csp(a.n, m, arity as usize, mode, a.seed).map_err(invalid)?;
            Instance::from_csp(format!("{name}{arity}-n{}-m{m}-s{:04}", a.n, a.seed), csp)
                .param("arity", arity)
                .param("seed", a.seed)
        }
    };
    emit(&a.out, &serde_json::to_value(&inst).expect("instances serialize"))
}

fn verify_cmd(a: VerifyArgs) -> Outcome {
    let q = load_instance(&a.system)?.system;
    let proof = load_proof(&a.proof)?;
    let plain = verify(&q, &proof).map_err(invalid)?;
    let w = (plain.product_width as u32).max(1);
    let c = a.cutoff.rule(&q, w);
    let m = measures(&q, &proof, &c).map_err(invalid)?;
    let report = json!({
        "valid": m.valid,
        "refutation": proof.is_refutation(),
        "degree": m.degree,
        "degree_mod_c": m.degree_mod_c,
        "cutoff": c.to_string(),
        "monomial_size": m.monomial_size,
        "product_width": m.product_width,
        "residual": m.residual.to_string(),
    });
    emit(&a.out, &report)?;
    if m.valid {
        Ok(())
    } else {
        Err(Failure::Guarantee(format!("the proof does not verify; residual {}", m.residual)))
    }
}

fn degree(a: DegreeArgs) -> Outcome {
    if a.dmax < 2 {
        return Err(invalid("--dmax must be at least 2"));
    }
    let inst = load_instance(&a.instance)?;
    let q = &inst.system;
    let c = a.solve.cutoff.rule(q, a.solve.w);
    let found = min_refutation_degree(q, a.solve.w, &c, a.dmax, &a.solve.options()).map_err(sdp_failure)?;
    let report = match &found {
        Some(r) => json!({
            "id": inst.id,
            "dmax": a.dmax,
            "w": a.solve.w,
            "cutoff": c.to_string(),
            "degree": r.degree,
            "method": r.method,
            "margin": fmt_float(r.margin),
            "exact": r.proof.is_some(),
            "numeric_residual": fmt_float(r.numeric_residual),
        }),
        None => json!({
            "id": inst.id,
            "dmax": a.dmax,
            "w": a.solve.w,
            "cutoff": c.to_string(),
            "degree": Value::Null,
        }),
    };
    if let (Some(path), Some(pf)) = (&a.proof_out, found.as_ref().and_then(|r| r.proof.as_ref())) {
        emit(&Some(path.clone()), &proof_json(pf))?;
    }
    emit(&a.out, &report)
}

fn bound(a: BoundArgs) -> Outcome {
    let inst = load_instance(&a.instance)?;
    let q = &inst.system;
    let p = Polynomial::parse(&a.objective, q.n()).map_err(invalid)?;
    let target = if a.maximize { -&p } else { p };
    let c = a.solve.cutoff.rule(q, a.solve.w);
    let rep = duality_eval(q, &target, a.d, a.solve.w, &c, &a.solve.options()).map_err(sdp_failure)?;
    // lower bounds on -p are upper bounds on p
    let sign = if a.maximize { -1.0 } else { 1.0 };
    let report = if rep.refutation.is_some() {
        json!({ "id": inst.id, "degree": a.d, "refuted": true })
    } else {
        json!({
            "id": inst.id,
            "degree": a.d,
            "refuted": false,
            "sense": if a.maximize { "max" } else { "min" },
            "bound": fmt_float(sign * rep.lhs),
            "pexp_value": fmt_float(sign * rep.rhs),
            "gap": fmt_float(rep.gap),
            "certified_bound": rep.certified_lhs.as_ref().map(|b| fmt_rational(&if a.maximize { -b } else { b.clone() })),
            "pexp": rep.pexp,
        })
    };
    if let (Some(path), Some(pf)) = (&a.proof_out, &rep.certificate) {
        emit(&Some(path.clone()), &proof_json(pf))?;
    }
    emit(&a.out, &report)
}

fn pexp(a: PexpArgs) -> Outcome {
    let inst = load_instance(&a.instance)?;
    let q = &inst.system;
    let c = a.solve.cutoff.rule(q, a.solve.w);
    match &a.check {
        Some(path) => {
            let e: PseudoExpectation =
                serde_json::from_str(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            let check = check_pseudoexpectation(q, &e, a.solve.w, &c, a.check_tol).map_err(sdp_failure)?;
            emit(&a.out, &serde_json::to_value(&check).expect("reports serialize"))?;
            if check.ok {
                Ok(())
            } else {
                Err(Failure::Guarantee(format!("not a pseudo-expectation: {}", check.failures.join("; "))))
            }
        }
        None => {
            let found = extract_pseudoexpectation(q, a.d, a.solve.w, &c, &a.solve.options()).map_err(sdp_failure)?;
            let report = match found {
                Some(e) => {
                    let check = check_pseudoexpectation(q, &e, a.solve.w, &c, a.check_tol).map_err(sdp_failure)?;
                    json!({ "id": inst.id, "degree": a.d, "refuted": false, "pexp": e, "check": check })
                }
                None => json!({ "id": inst.id, "degree": a.d, "refuted": true }),
            };
            emit(&a.out, &report)
        }
    }
}

fn reduce(a: ReduceArgs) -> Outcome {
    let q: ConstraintSystem = load_instance(&a.instance)?.system;
    let proof = load_proof(&a.proof)?;
    let w = (verify(&q, &proof).map_err(invalid)?.product_width as u32).max(1);
    let c = a.cutoff.rule(&q, w);
    let mut opts = match a.mode {
        Mode::BoundOnly => ReduceOptions { sdp: sosps::sdp::SdpOptions::with_tol(a.tol), ..ReduceOptions::default() },
        Mode::Constructive => ReduceOptions::constructive(a.tol),
    };
    opts.max_pairs = a.max_pairs;
    let red = reduce_degree(&q, &proof, &c, &opts).map_err(|e| match e {
        ReduceError::Sdp(SdpError::Solver { .. }) => Failure::Solver(e.to_string()),
        ReduceError::GuaranteeViolated(_) | ReduceError::MarginBelowTolerance { .. } => {
            Failure::Guarantee(e.to_string())
        }
        other => Failure::Invalid(other.to_string()),
    })?;
    let bound = tradeoff_bound(q.n(), red.trace.s.max(1) as f64, q.k(), w).map_err(invalid)?;
    let report = json!({
        "mode": if opts.mode == ReduceMode::Constructive { "constructive" } else { "bound_only" },
        "degree": red.degree,
        "recursion_bound": red.recursion_bound,
        "tradeoff_bound": bound,
        "trace": red.trace,
        "proof": red.proof.as_ref().map(proof_json),
    });
    if let (Some(path), Some(pf)) = (&a.proof_out, &red.proof) {
        emit(&Some(path.clone()), &proof_json(pf))?;
    }
    emit(&a.out, &report)?;
    if red.degree > bound {
        return Err(Failure::Guarantee(format!("degree {} exceeds the trade-off bound {bound}", red.degree)));
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Outcome {
    let mut cfg = ExperimentConfig::from_json(&read(&a.config)?).map_err(invalid)?;
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(d) = a.degrees {
        cfg.degrees = d;
    }
    if let Some(w) = a.widths {
        cfg.widths = w;
    }
    if let Some(c) = a.cutoff {
        cfg.cutoff = c;
    }
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if a.csv.is_some() {
        cfg.output.csv = a.csv;
    }
    if a.json.is_some() {
        cfg.output.json = a.json;
    }
    if a.timings.is_some() {
        cfg.output.timings = a.timings;
    }
    match a.jobs {
        Some(j) => cfg.jobs = j,
        None if cfg.jobs == 0 => {
            if let Ok(v) = std::env::var("SOSPS_JOBS") {
                cfg.jobs =
                    v.trim().parse().map_err(|_| Failure::Invalid(format!("SOSPS_JOBS={v:?} is not a count")))?;
            }
        }
        None => {}
    }
    let records = run_experiment(&cfg).map_err(|e| match e {
        ExperimentError::Soundness { .. } => Failure::Guarantee(e.to_string()),
        other => Failure::Invalid(other.to_string()),
    })?;
    let paths =
        ReportPaths { csv: cfg.output.csv.clone(), json: cfg.output.json.clone(), timings: cfg.output.timings.clone() };
    if paths.csv.is_none() && paths.json.is_none() {
        print!("{}", Table::from_records(&records).to_csv().map_err(invalid)?);
    } else {
        emit_report(&records, &paths).map_err(invalid)?;
    }
    let failed = records.failures();
    eprintln!("{} records, {failed} failed", records.len());
    if failed > 0 {
        return Err(Failure::Solver(format!("{failed} of {} instances failed", records.len())));
    }
    Ok(())
}
