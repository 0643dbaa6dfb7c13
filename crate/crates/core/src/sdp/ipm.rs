//! Dense primal-dual interior-point method for block-diagonal SDPs in
//! standard form:
//!
//! ```text
//! primal:  min C•X   s.t.  A_i•X = b_i,  X ⪰ 0
//! dual:    max bᵀy   s.t.  Σ y_i A_i + Z = C,  Z ⪰ 0
//! ```
//!
//! Infeasible-start HKM search direction with Mehrotra's predictor-corrector.
//! The Schur complement `M_ij = tr(A_i Z⁻¹ A_j X)` is assembled from sparse
//! constraint matrices and factored densely.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

/// A symmetric constraint matrix spread over the blocks, stored as its
/// upper-triangle entries `(block, row, col, value)` with `row <= col`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, usize, f64)>,
}

impl SparseSym {
    /// Adds `v` at `(i, j)` and, implicitly, `(j, i)`.
    pub fn push(&mut self, block: usize, i: usize, j: usize, v: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((block, r, c, v));
    }

    /// Merges duplicate positions and drops zeros.
    pub fn compress(&mut self) {
        self.entries.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut out: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(b, i, j, v) in &self.entries {
            match out.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (b, i, j) => last.3 += v,
                _ => out.push((b, i, j, v)),
            }
        }
        out.retain(|e| e.3 != 0.0);
        self.entries = out;
    }

    /// `tr(A X)`, also for nonsymmetric `X`.
    fn dot(&self, x: &[DMatrix<f64>]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, i, j, v)| if i == j { v * x[b][(i, i)] } else { v * (x[b][(i, j)] + x[b][(j, i)]) })
            .sum()
    }

    fn add_scaled_to(&self, s: f64, out: &mut [DMatrix<f64>]) {
        for &(b, i, j, v) in &self.entries {
            out[b][(i, j)] += s * v;
            if i != j {
                out[b][(j, i)] += s * v;
            }
        }
    }

    fn frobenius(&self) -> f64 {
        self.entries.iter().map(|&(_, i, j, v)| if i == j { v * v } else { 2.0 * v * v }).sum::<f64>().sqrt()
    }
}

/// Standard-form block SDP.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardSdp {
    pub block_sizes: Vec<usize>,
    pub c: Vec<DMatrix<f64>>,
    pub a: Vec<SparseSym>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    /// The primal is infeasible; `y` holds a dual improving ray.
    Infeasible,
    /// The dual is infeasible; `x` holds a primal improving ray.
    Unbounded,
    MaxIter,
    /// No progress over many iterations; the best iterate is returned.
    Stalled,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    pub y: DVector<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `‖b − 𝒜(X)‖ / (1 + ‖b‖)`
    pub primal_residual: f64,
    /// `‖C − Z − 𝒜*(y)‖ / (1 + ‖C‖)`
    pub dual_residual: f64,
    pub rel_gap: f64,
    pub iterations: usize,
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &[DMatrix<f64>]) -> f64 {
    inner(a, a).sqrt()
}

impl StandardSdp {
    pub fn num_constraints(&self) -> usize {
        self.a.len()
    }

    fn op(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|a| a.dot(x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out = self.zeros();
        for (a, &yi) in self.a.iter().zip(y.iter()) {
            if yi != 0.0 {
                a.add_scaled_to(yi, &mut out);
            }
        }
        out
    }

    fn zeros(&self) -> Vec<DMatrix<f64>> {
        self.block_sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect()
    }

    fn total_dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Gram matrix `G_ij = tr(A_i A_j)` of the constraints.
    fn gram(&self) -> DMatrix<f64> {
        let m = self.a.len();
        let mut at: std::collections::HashMap<(usize, usize, usize), Vec<(usize, f64)>> = Default::default();
        for (k, a) in self.a.iter().enumerate() {
            for &(b, i, j, v) in &a.entries {
                at.entry((b, i, j)).or_default().push((k, if i == j { v } else { v * std::f64::consts::SQRT_2 }));
            }
        }
        let mut g = DMatrix::zeros(m, m);
        for list in at.values() {
            for &(k, u) in list {
                for &(l, v) in list {
                    g[(k, l)] += u * v;
                }
            }
        }
        g
    }

    /// Schur complement `M_ij = tr(A_i W A_j V)` with `W = Z⁻¹`, `V = X`.
    fn schur(&self, w: &[DMatrix<f64>], v: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.a.len();
        let mut out = DMatrix::zeros(m, m);
        // entries of each constraint grouped by block
        let nb = self.block_sizes.len();
        let grouped: Vec<Vec<Vec<(usize, usize, f64)>>> = self
            .a
            .iter()
            .map(|a| {
                let mut g = vec![Vec::new(); nb];
                for &(b, i, j, val) in &a.entries {
                    g[b].push((i, j, val));
                }
                g
            })
            .collect();
        for jdx in 0..m {
            for (blk, ents) in grouped[jdx].iter().enumerate() {
                if ents.is_empty() {
                    continue;
                }
                let n = self.block_sizes[blk];
                let (wb, vb) = (&w[blk], &v[blk]);
                // T = W A_j V
                let t = if ents.len() <= n {
                    let mut t = DMatrix::zeros(n, n);
                    for &(r, s, val) in ents {
                        t.ger(val, &wb.column(r), &vb.row(s).transpose(), 1.0);
                        if r != s {
                            t.ger(val, &wb.column(s), &vb.row(r).transpose(), 1.0);
                        }
                    }
                    t
                } else {
                    let mut a = DMatrix::zeros(n, n);
                    for &(r, s, val) in ents {
                        a[(r, s)] += val;
                        if r != s {
                            a[(s, r)] += val;
                        }
                    }
                    wb * a * vb
                };
                for idx in jdx..m {
                    let mut acc = 0.0;
                    for &(p, q, val) in &grouped[idx][blk] {
                        acc += if p == q { val * t[(p, p)] } else { val * (t[(q, p)] + t[(p, q)]) };
                    }
                    out[(idx, jdx)] += acc;
                }
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                out[(i, j)] = out[(j, i)];
            }
        }
        out
    }
}

/// Largest step `alpha <= 1/frac` keeping `X + alpha·D ⪰ 0`, times `frac`.
fn step_length(x: &[DMatrix<f64>], d: &[DMatrix<f64>], frac: f64) -> Option<f64> {
    let mut alpha_max = f64::INFINITY;
    for (xb, db) in x.iter().zip(d) {
        if xb.nrows() == 0 {
            continue;
        }
        let l = Cholesky::new(xb.clone())?.l();
        let li = l.clone().try_inverse()?;
        let mut s = &li * db * li.transpose();
        s = (&s + s.transpose()) * 0.5;
        let lmin = SymmetricEigen::new(s).eigenvalues.min();
        if lmin < 0.0 {
            alpha_max = alpha_max.min(-1.0 / lmin);
        }
    }
    Some((frac * alpha_max).min(1.0))
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Some(Cholesky::new(m.clone())?.inverse())
}

/// Solves the SDP. Never panics on bad data; failures surface as a status.
pub fn solve_sdp(prob: &StandardSdp, opts: &SolverOptions) -> SdpSolution {
    let m = prob.num_constraints();
    if m == 0 {
        return solve_unconstrained(prob, opts);
    }
    let ntot = prob.total_dim().max(1) as f64;
    let norm_b = prob.b.norm();
    let norm_c = fro(&prob.c);

    // starting point in the style of CSDP
    let max_a = prob.a.iter().map(SparseSym::frobenius).fold(0.0, f64::max);
    let mut alpha: f64 = 1.0;
    for (a, &bi) in prob.a.iter().zip(prob.b.iter()) {
        alpha = alpha.max(ntot * (1.0 + bi.abs()) / (1.0 + a.frobenius()));
    }
    let beta = (1.0 + max_a.max(norm_c)) / ntot.sqrt();
    let eye = |s: f64| -> Vec<DMatrix<f64>> { prob.block_sizes.iter().map(|&n| DMatrix::identity(n, n) * s).collect() };
    let mut x = eye(alpha);
    let mut z = eye(beta);
    let mut y = DVector::zeros(m);

    // directions are projected back onto A(dX) = Rp: forming dX from Z⁻¹
    // loses digits to cancellation once Z is ill conditioned
    let projector = Cholesky::new(prob.gram());

    let mut status = SdpStatus::MaxIter;
    let mut best: Option<SdpSolution> = None;
    let mut since_best = 0;

    for it in 0..=opts.max_iter {
        let rp = &prob.b - prob.op(&x);
        let aty = prob.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = prob.c.iter().zip(&z).zip(&aty).map(|((c, zb), ab)| c - zb - ab).collect();
        let pobj = inner(&prob.c, &x);
        let dobj = prob.b.dot(&y);
        let relp = rp.norm() / (1.0 + norm_b);
        let reld = fro(&rd) / (1.0 + norm_c);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let score = relp.max(reld).max(gap);
        if best.as_ref().is_none_or(|b| score < b.primal_residual.max(b.dual_residual).max(b.rel_gap)) {
            best = Some(SdpSolution {
                status,
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
                primal_obj: pobj,
                dual_obj: dobj,
                primal_residual: relp,
                dual_residual: reld,
                rel_gap: gap,
                iterations: it,
            });
            since_best = 0;
        } else {
            since_best += 1;
        }
        if score <= opts.tol {
            status = SdpStatus::Optimal;
            break;
        }
        // improving rays: the dual objective grows without bound while the
        // dual slack stays bounded, or symmetrically for the primal
        let slack = fro(&aty.iter().zip(&z).map(|(a, zb)| a + zb).collect::<Vec<_>>());
        if dobj > 1e6 && slack / dobj < opts.tol {
            status = SdpStatus::Infeasible;
            break;
        }
        if pobj < -1e6 && (&prob.b - &rp).norm() / -pobj < opts.tol {
            status = SdpStatus::Unbounded;
            break;
        }
        if it == opts.max_iter {
            break;
        }
        if since_best >= 20 {
            status = SdpStatus::Stalled;
            break;
        }

        let mu = inner(&x, &z) / ntot;
        let Some(zinv) = z.iter().map(inverse_spd).collect::<Option<Vec<_>>>() else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let mut schur = prob.schur(&zinv, &x);
        let diag_max = (0..m).map(|i| schur[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let chol = match Cholesky::new(schur.clone()) {
            Some(c) => c,
            None => {
                for i in 0..m {
                    schur[(i, i)] += 1e-12 * diag_max;
                }
                match Cholesky::new(schur.clone()) {
                    Some(c) => c,
                    None => {
                        status = SdpStatus::NumericalFailure;
                        break;
                    }
                }
            }
        };
        // Z⁻¹ Rd X, shared by both solves
        let zrx: Vec<DMatrix<f64>> = zinv.iter().zip(&rd).zip(&x).map(|((w, r), xb)| w * r * xb).collect();

        let direction = |g: Vec<DMatrix<f64>>| {
            let rhs = &rp - prob.op(&g);
            let mut dy = chol.solve(&rhs);
            // the Schur matrix degrades near the optimum; refine
            for _ in 0..2 {
                let r = &rhs - &schur * &dy;
                dy += chol.solve(&r);
            }
            let ady = prob.adjoint(&dy);
            let dz: Vec<DMatrix<f64>> = rd.iter().zip(&ady).map(|(r, a)| r - a).collect();
            let mut dx: Vec<DMatrix<f64>> =
                g.into_iter().zip(&zinv).zip(&ady).zip(&x).map(|(((gb, w), a), xb)| sym(gb + w * a * xb)).collect();
            if let Some(p) = &projector {
                let fix = prob.adjoint(&p.solve(&(&rp - prob.op(&dx))));
                for (d, f) in dx.iter_mut().zip(&fix) {
                    *d += f;
                }
            }
            (dx, dy, dz)
        };

        // predictor
        let g_aff: Vec<DMatrix<f64>> = x.iter().zip(&zrx).map(|(xb, t)| -xb - t).collect();
        let (dx_a, _, dz_a) = direction(g_aff);
        let (Some(ap), Some(ad)) = (step_length(&x, &dx_a, 1.0), step_length(&z, &dz_a, 1.0)) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let x_a: Vec<DMatrix<f64>> = x.iter().zip(&dx_a).map(|(a, d)| a + d * ap).collect();
        let z_a: Vec<DMatrix<f64>> = z.iter().zip(&dz_a).map(|(a, d)| a + d * ad).collect();
        let mu_aff = inner(&x_a, &z_a) / ntot;
        // keep centering while the affine step is blocked
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3).max((1.0 - ap.min(ad)).powi(2));

        // corrector
        let g: Vec<DMatrix<f64>> = zinv
            .iter()
            .zip(&x)
            .zip(&zrx)
            .zip(dz_a.iter().zip(&dx_a))
            .map(|(((w, xb), t), (dza, dxa))| w * (sigma * mu) - xb - t - w * dza * dxa)
            .collect();
        let (dx, dy, dz) = direction(g);
        let frac = 0.9 + 0.09 * ap.min(ad);
        let (Some(ap), Some(ad)) = (step_length(&x, &dx, frac), step_length(&z, &dz, frac)) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        for (xb, d) in x.iter_mut().zip(&dx) {
            *xb += d * ap;
        }
        for (zb, d) in z.iter_mut().zip(&dz) {
            *zb += d * ad;
        }
        y += dy * ad;
    }

    let mut out = best.expect("at least one iterate is scored");
    out.status = status;
    if matches!(status, SdpStatus::Infeasible | SdpStatus::Unbounded) {
        // the ray lives in the last iterate, not the best-scored one
        out.x = x;
        out.y = y;
        out.z = z;
    }
    out
}

/// With no constraints the dual is the single point `Z = C`: optimal (at
/// value 0) when `C ⪰ 0`, and otherwise the primal is unbounded along an
/// eigenvector of a negative eigenvalue.
fn solve_unconstrained(prob: &StandardSdp, opts: &SolverOptions) -> SdpSolution {
    let mut x: Vec<DMatrix<f64>> = prob.zeros();
    let mut status = SdpStatus::Optimal;
    for (k, c) in prob.c.iter().enumerate() {
        if c.nrows() == 0 {
            continue;
        }
        let eig = SymmetricEigen::new(c.clone());
        let (i, &lmin) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        if lmin < -opts.tol * (1.0 + c.norm()) {
            let v = eig.eigenvectors.column(i);
            x[k] = &v * v.transpose();
            status = SdpStatus::Unbounded;
        }
    }
    let pobj = inner(&prob.c, &x);
    SdpSolution {
        status,
        x,
        y: DVector::zeros(0),
        z: prob.c.clone(),
        primal_obj: pobj,
        dual_obj: 0.0,
        primal_residual: 0.0,
        dual_residual: 0.0,
        rel_gap: pobj.abs(),
        iterations: 0,
    }
}
