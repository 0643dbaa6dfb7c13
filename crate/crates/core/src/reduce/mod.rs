//! The size-to-degree trade-off: closed-form bounds and the recursive
//! degree reduction that turns a small refutation into a low-degree one.
//!
//! The recursion follows the induction on the number of variable pairs.
//! At each level the variable occurring most often in large monomials is
//! restricted both ways. The branch that kills the variable loses a
//! `d/2n` fraction of its large monomials, and so closes two degrees lower
//! than the other. In constructive mode every branching level is realized
//! by two SDP certificates, for the killed literal and its complement,
//! composed into a refutation of the level's system.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::poly::{Polynomial, Rational, Var};
use crate::proof::{
    compose_refutations, measures, multilinearize_proof, restrict_proof, select_variable, ConstraintSystem, CutoffRule,
    ProofError, PsProof, Selection, SquareTerm,
};
use crate::sdp::{duality_eval, rationalize, SdpError, SdpOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("criterion not applicable: d = {d} is below kw + 4 = {min}")]
    NotApplicable { d: u32, min: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("the input is not a valid refutation: {0}")]
    NotARefutation(String),
    #[error("{pairs} variable pairs exceed the constructive cap {cap}")]
    TooLarge { pairs: u32, cap: u32 },
    #[error("margin below tolerance: best bound {bound:.3e} on {literal} at degree {degree}")]
    MarginBelowTolerance { literal: String, degree: u32, bound: f64 },
    #[error("guarantee violated: {0}")]
    GuaranteeViolated(String),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

/// `ceil(x)`, except that values within rounding noise of an integer
/// snap to it, so `4·sqrt(2·25·ln e²) + 5` is 45 and not 46.
fn snapped_ceil(x: f64) -> u32 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u32
    } else {
        x.ceil() as u32
    }
}

/// Degree guaranteed for a refutation of monomial size `s` and product
/// width `w` over `n` pairs with constraints of degree at most `k`:
/// `ceil(4·sqrt(2(n+1)·ln s) + kw + 4)`.
pub fn tradeoff_bound(n: u32, s: f64, k: u32, w: u32) -> Result<u32, ReduceError> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(ReduceError::InvalidArgument(format!("size {s} must be a finite real >= 1")));
    }
    if w == 0 {
        return Err(ReduceError::InvalidArgument("product width must be at least 1".into()));
    }
    let root = (2.0 * (n as f64 + 1.0) * s.ln()).sqrt();
    Ok(snapped_ceil(4.0 * root + (k * w) as f64 + 4.0))
}

/// The size forced by degree `d`: `exp((d - kw - 4)² / (32(n+1)))`.
pub fn size_lower_bound(n: u32, d: u32, k: u32, w: u32) -> Result<f64, ReduceError> {
    let min = k * w + 4;
    if d < min {
        return Err(ReduceError::NotApplicable { d, min });
    }
    let gap = (d - min) as f64;
    Ok((gap * gap / (32.0 * (n as f64 + 1.0))).exp())
}

/// The starting threshold `floor(sqrt(2(n+1)·ln s)) + 1`.
pub fn initial_threshold(n: u32, s: f64) -> u32 {
    (2.0 * (n as f64 + 1.0) * s.max(1.0).ln()).sqrt().floor() as u32 + 1
}

/// `d + floor(2(n+1)·ln s / d)`, the inductive degree for `n` pairs.
pub fn level_degree(n: u32, s: f64, d: u32) -> u32 {
    d + (2.0 * (n as f64 + 1.0) * s.max(1.0).ln() / d as f64).floor() as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceMode {
    /// Degree arithmetic and trace only.
    #[default]
    BoundOnly,
    /// Also build the refutation, with two SDP solves per branching level.
    Constructive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceOptions {
    pub mode: ReduceMode,
    pub sdp: SdpOptions,
    /// Largest number of pairs accepted in constructive mode.
    pub max_pairs: u32,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { mode: ReduceMode::BoundOnly, sdp: SdpOptions::default(), max_pairs: 8 }
    }
}

impl ReduceOptions {
    pub fn constructive(tol: f64) -> Self {
        ReduceOptions { mode: ReduceMode::Constructive, sdp: SdpOptions::with_tol(tol), ..Self::default() }
    }
}

/// One branching level of the recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    /// Branch letters from the root: `k` for the branch that kills the
    /// chosen literal, `o` for the other one.
    pub path: String,
    pub depth: u32,
    /// Pairs not yet restricted at this level.
    pub pairs: u32,
    /// The chosen literal, e.g. `x3` or `~x3`.
    pub var: String,
    pub index: u32,
    /// 0 if the chosen literal is basic, 1 if it is a twin.
    pub a: u8,
    /// Explicit monomials of degree at least `d`, with multiplicity.
    pub large: usize,
    /// How many of them contain the chosen literal.
    pub occurrences: usize,
    /// The size budget handed to this level.
    pub s: f64,
    pub d: u32,
    /// `t(1 - d/2n)`, the budget of the killing branch.
    pub s_next: f64,
    /// The level's own inductive degree `d'`.
    pub d_prime: u32,
    /// Inductive degree of the killing branch (`d - 1` when it closes at once).
    pub d_a: u32,
    /// Inductive degree of the other branch.
    pub d_other: u32,
    /// Degrees the two branches actually close at, `(killing, other)`.
    pub branch_degrees: (u32, u32),
    /// Degree of the composed refutation at this level.
    pub degree: u32,
    /// Composition margins `(ε, δ)` in constructive mode, as `p/q`.
    pub margins: Option<(String, String)>,
}

/// The recursion in preorder, killing branch first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub n: u32,
    /// Monomial size of the multilinearized input.
    pub s: usize,
    pub d0: u32,
    /// `max(1, ceil(max c / 2))`.
    pub d_extra: u32,
    pub levels: Vec<LevelRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Degree the recursion closes at; an even number.
    pub degree: u32,
    /// `2d' + 2d''` at the root, the recursion's own guarantee for this input.
    pub recursion_bound: u32,
    pub trace: ReductionTrace,
    /// The refutation built in constructive mode.
    pub proof: Option<PsProof>,
}

/// Largest cut-off value over the sites of `q` with width at most `w`.
fn max_cutoff(q: &ConstraintSystem, w: u32, c: &CutoffRule) -> Result<u32, ProofError> {
    let mut best = 0;
    for j in 1..=q.eqs().len() {
        best = best.max(c.at_eq(q, j)?);
    }
    let ell = q.ineqs().len();
    let mut stack: Vec<Vec<usize>> = (1..=ell).map(|j| vec![j]).collect();
    while let Some(set) = stack.pop() {
        best = best.max(c.at_set(q, &set)?);
        if set.len() < w as usize {
            let last = *set.last().expect("nonempty");
            for j in last + 1..=ell {
                let mut next = set.clone();
                next.push(j);
                stack.push(next);
            }
        }
    }
    Ok(best)
}

struct Ctx<'a> {
    c: &'a CutoffRule,
    w: u32,
    d: u32,
    d_extra: u32,
    opts: &'a ReduceOptions,
    levels: Vec<LevelRecord>,
}

/// Degree-reduces a refutation. The proof is multilinearized first; `s` is
/// its monomial size and the threshold starts at `floor(sqrt(2(n+1) ln s)) + 1`.
///
/// The returned degree never exceeds the recursion's own `2d' + 2d''`, which for the
/// constant cut-off `kw` is at most [`tradeoff_bound`]. Any breach of the
/// trace inequalities is reported as [`ReduceError::GuaranteeViolated`].
pub fn reduce_degree(
    q: &ConstraintSystem,
    proof: &PsProof,
    c: &CutoffRule,
    opts: &ReduceOptions,
) -> Result<Reduction, ReduceError> {
    proof.check_against(q)?;
    if !proof.is_refutation() {
        return Err(ReduceError::NotARefutation(format!("target is {}", proof.target)));
    }
    let m = measures(q, proof, c)?;
    if !m.valid {
        return Err(ReduceError::NotARefutation(format!("residual {}", m.residual)));
    }
    let n = q.n();
    if opts.mode == ReduceMode::Constructive && n > opts.max_pairs {
        return Err(ReduceError::TooLarge { pairs: n, cap: opts.max_pairs });
    }
    let ml = multilinearize_proof(q, proof)?;
    let size = ml.monomial_size();
    let s = size.max(1) as f64;
    let w = (ml.product_width() as u32).max(1);
    let d0 = initial_threshold(n, s);
    let d_extra = max_cutoff(q, w, c)?.div_ceil(2).max(1);
    let recursion_bound = 2 * level_degree(n, s, d0) + 2 * d_extra;

    let mut ctx = Ctx { c, w, d: d0, d_extra, opts, levels: Vec::new() };
    let (degree, proof) = ctx.node(q, &ml, n, s, 0, String::new())?;
    if degree > recursion_bound {
        return Err(ReduceError::GuaranteeViolated(format!("closed at {degree} above the bound {recursion_bound}")));
    }
    let trace = ReductionTrace { n, s: size, d0, d_extra, levels: ctx.levels };
    Ok(Reduction { degree, recursion_bound, trace, proof })
}

impl Ctx<'_> {
    fn constructive(&self) -> bool {
        self.opts.mode == ReduceMode::Constructive
    }

    /// A leaf: the restricted proof itself already has the claimed degree.
    fn leaf(&self, q: &ConstraintSystem, proof: &PsProof, degree: u32) -> Result<(u32, Option<PsProof>), ReduceError> {
        if !self.constructive() {
            return Ok((degree, None));
        }
        let m = measures(q, proof, self.c)?;
        if !m.valid || m.degree_mod_c > degree {
            return Err(ReduceError::GuaranteeViolated(format!(
                "restricted proof has degree {} (valid: {}) at a leaf closing at {degree}",
                m.degree_mod_c, m.valid
            )));
        }
        Ok((degree, Some(proof.clone())))
    }

    fn node(
        &mut self,
        q: &ConstraintSystem,
        proof: &PsProof,
        pairs: u32,
        s: f64,
        depth: u32,
        path: String,
    ) -> Result<(u32, Option<PsProof>), ReduceError> {
        let d = self.d;
        let close = 2 * (d - 1) + 2 * self.d_extra;
        if pairs == 0 {
            return self.leaf(q, proof, 2 * self.d_extra);
        }
        let Selection::Branch { var, a, large, occurrences } = select_variable(proof, d) else {
            return self.leaf(q, proof, close);
        };
        // some literal sits in at least a d/2n share of the large monomials
        let t = large as f64;
        if (occurrences as f64) < d as f64 * t / (2.0 * pairs as f64) - 1e-9 {
            return Err(ReduceError::GuaranteeViolated(format!("{var} occurs {occurrences} times among {large}")));
        }
        let s_next = t * (1.0 - d as f64 / (2.0 * pairs as f64));
        let d_prime = level_degree(pairs, s, d);
        let d_a = if s_next >= 1.0 { level_degree(pairs - 1, s_next, d) } else { d - 1 };
        let d_other = level_degree(pairs - 1, s, d);
        if s_next >= t || d_a + 1 > d_prime || d_other > d_prime {
            return Err(ReduceError::GuaranteeViolated(format!(
                "level {path:?}: s' = {s_next}, t = {large}, d_a = {d_a}, d_other = {d_other}, d' = {d_prime}"
            )));
        }
        let slot = self.levels.len();
        self.levels.push(LevelRecord {
            path: path.clone(),
            depth,
            pairs,
            var: var.to_string(),
            index: var.index(),
            a,
            large,
            occurrences,
            s,
            d,
            s_next,
            d_prime,
            d_a,
            d_other,
            branch_degrees: (0, 0),
            degree: 0,
            margins: None,
        });

        // [i/a] sets the chosen literal to 0
        let i = var.index();
        let (q_kill, p_kill) = restrict_proof(q, proof, i, a == 1)?;
        let (deg_kill, _) = if s_next >= 1.0 {
            self.node(&q_kill, &p_kill, pairs - 1, s_next, depth + 1, format!("{path}k"))?
        } else {
            self.leaf(&q_kill, &p_kill, close)?
        };
        let (q_other, p_other) = restrict_proof(q, proof, i, a == 0)?;
        let (deg_other, _) = self.node(&q_other, &p_other, pairs - 1, s, depth + 1, format!("{path}o"))?;

        let half = (deg_kill.div_ceil(2) + 1).max(deg_other.div_ceil(2));
        let degree = 2 * half;
        if deg_kill > 2 * d_a + 2 * self.d_extra
            || deg_other > 2 * d_other + 2 * self.d_extra
            || degree > 2 * d_prime + 2 * self.d_extra
        {
            return Err(ReduceError::GuaranteeViolated(format!(
                "level {path:?}: branches close at ({deg_kill}, {deg_other}), level at {degree}"
            )));
        }
        let rec = &mut self.levels[slot];
        rec.branch_degrees = (deg_kill, deg_other);
        rec.degree = degree;

        if !self.constructive() {
            return Ok((degree, None));
        }
        let (cert_lo, eps) = literal_certificate(q, var, 2 * half - 2, self.w, self.c, &self.opts.sdp)?;
        let (cert_hi, delta) = literal_certificate(q, var.complement(), 2 * half, self.w, self.c, &self.opts.sdp)?;
        self.levels[slot].margins = Some((eps.to_string(), delta.to_string()));
        let composed = compose_refutations(q, var, &cert_lo, &eps, &cert_hi, &delta, half, self.c)?;
        Ok((degree, Some(composed)))
    }
}

/// An exact proof of `lit - ε >= 0` at the given degree. With no
/// pseudo-expectation the system is refuted outright and `ε = 1`;
/// otherwise `ε` is half the best bound `γ`.
pub fn literal_certificate(
    q: &ConstraintSystem,
    lit: Var,
    degree: u32,
    w: u32,
    c: &CutoffRule,
    opts: &SdpOptions,
) -> Result<(PsProof, Rational), ReduceError> {
    let n = q.n();
    let lit_p = Polynomial::var(n, lit);
    let violated = |why: String| ReduceError::GuaranteeViolated(format!("{lit} at degree {degree}: {why}"));
    let rep = duality_eval(q, &lit_p, degree, w, c, opts)?;
    if let Some(r) = rep.refutation {
        let mut pf = r.proof.ok_or_else(|| violated("refutation could not be made exact".into()))?;
        // lit - 1 = lit² + (-1), and lit² ≡ lit
        pf.target = &lit_p - &Polynomial::one(n);
        pf.add_square(Vec::new(), SquareTerm::new(lit_p.clone()));
        if !pf.recompute_ideal(q)? {
            return Err(violated("lifted refutation does not close".into()));
        }
        return Ok((pf, Rational::from_integer(1.into())));
    }
    let gamma = rep.lhs;
    if !(gamma > opts.solver.tol) {
        return Err(ReduceError::MarginBelowTolerance { literal: lit.to_string(), degree, bound: gamma });
    }
    let (Some(mut pf), Some(certified)) = (rep.certificate, rep.certified_lhs) else {
        return Err(violated("bound certificate could not be made exact".into()));
    };
    let mut eps = rationalize(gamma / 2.0, opts.max_denominator);
    if !eps.is_positive() || eps >= certified {
        eps = &certified / Rational::from_integer(2.into());
    }
    if !eps.is_positive() {
        return Err(violated(format!("certified bound {certified} is not positive")));
    }
    // lit - ε = (lit - certified) + (certified - ε)·1²
    pf.add_square(Vec::new(), SquareTerm::weighted(&certified - &eps, Polynomial::one(n)));
    pf.target = &lit_p - &Polynomial::constant(n, eps.clone());
    if !pf.recompute_ideal(q)? {
        return Err(violated("shifted certificate does not close".into()));
    }
    Ok((pf, eps))
}
