//! First-order operator-splitting solver for [`SdpProblem`].
//!
//! The matrix unknown is vectorized over its upper triangle with the usual
//! `√2` scaling of off-diagonal entries, so the Frobenius inner product is the
//! Euclidean one. The problem is written as
//!
//! ```text
//! minimize cᵀx  subject to  A x ∈ [l, u],  x ∈ S₊
//! ```
//!
//! and solved by ADMM on the stacked constraint matrix `[A; I]`: one cached
//! Cholesky solve, a box clip for the linear rows and an eigenvalue clip for
//! the PSD copy per iteration. Linear rows are normalized to unit length and
//! the penalty is adapted from the primal/dual residual balance.
//!
//! Under [`TrianglePolicy::Lazy`] the solve is repeated with every triangle
//! inequality found violated by a full scan added to the working set.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use thiserror::Error;

use crate::sdp::{
    check_feasibility, min_eigenvalue, Constraint, ConstraintFamily, GramSolution, SdpProblem,
    TrianglePolicy,
};

/// Largest dimension accepted with eager triangles.
pub const MAX_EAGER_N: usize = 64;
/// Largest dimension accepted with lazy triangles.
pub const MAX_LAZY_N: usize = 128;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("bad problem: {0}")]
    BadProblem(String),
    #[error("not converged after {} iterations (primal {:.3e}, dual {:.3e})", stats.iterations, stats.primal_residual, stats.dual_residual)]
    NotConverged { solution: Box<GramSolution>, stats: SolveStats },
}

#[derive(Debug, Error, PartialEq)]
pub enum FactorError {
    #[error("matrix is not PSD: smallest eigenvalue {0:e}")]
    NotPsd(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Largest admissible constraint residual, in the constraints' own units.
    pub tol_feas: f64,
    /// Relative objective change over a check window that counts as a stall.
    pub tol_obj: f64,
    /// Dual residual threshold, relative to `max(1, ‖c‖∞)`.
    pub tol_dual: f64,
    pub max_iters: usize,
    pub lazy_rounds: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Proximal regularization of the linear system.
    pub sigma: f64,
    /// Over-relaxation factor in (0, 2).
    pub relaxation: f64,
    /// Iterations between residual checks.
    pub check_every: usize,
    /// Iterations spanned by the objective-stall window.
    pub stall_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_feas: 1e-6,
            tol_obj: 1e-7,
            tol_dual: 1e-6,
            max_iters: 200_000,
            lazy_rounds: 20,
            rho: 0.1,
            sigma: 1e-6,
            relaxation: 1.6,
            check_every: 10,
            stall_window: 2000,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolveError> {
        let positive = [self.tol_feas, self.tol_obj, self.tol_dual, self.rho, self.sigma];
        if positive.iter().any(|t| !(*t > 0.0)) {
            return Err(SolveError::BadProblem("tolerances and penalties must be positive".into()));
        }
        if self.max_iters == 0 || self.check_every == 0 {
            return Err(SolveError::BadProblem("max_iters and check_every must be >= 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(SolveError::BadProblem("relaxation must lie in (0, 2)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Worst materialized-constraint residual of the returned matrix.
    pub primal_residual: f64,
    /// Final ADMM dual residual.
    pub dual_residual: f64,
    pub lazy_constraints_added: usize,
    /// Violated triangle count found by each lazy scan.
    pub lazy_violation_history: Vec<usize>,
    pub penalty_updates: usize,
    pub converged: bool,
    pub wall_time_secs: f64,
}

/// Solves the relaxation. On [`SolveError::NotConverged`] the best iterate is
/// still returned inside the error.
pub fn solve(prob: &SdpProblem, cfg: &SolverConfig) -> Result<(GramSolution, SolveStats), SolveError> {
    cfg.validate()?;
    let n = prob.n();
    let limit = match prob.triangle_policy() {
        TrianglePolicy::Eager => MAX_EAGER_N,
        TrianglePolicy::Lazy => MAX_LAZY_N,
    };
    if n == 0 || n > limit {
        return Err(SolveError::BadProblem(format!("n = {n} outside 1..={limit} for this policy")));
    }
    let start = Instant::now();
    let mut working: Vec<Constraint> = prob
        .equalities()
        .iter()
        .chain(prob.inequalities())
        .filter(|c| !c.form.is_zero())
        .cloned()
        .collect();
    let n_eq = prob.equalities().iter().filter(|c| !c.form.is_zero()).count();

    let mut stats = SolveStats::default();
    let mut warm: Option<WarmStart> = None;
    let rounds = match prob.triangle_policy() {
        TrianglePolicy::Eager => 0,
        TrianglePolicy::Lazy => cfg.lazy_rounds,
    };
    let mut budget = cfg.max_iters;
    let mut round = 0;
    loop {
        let mut admm = Admm::new(prob, &working, n_eq, cfg, warm.take());
        let outcome = admm.run(budget);
        stats.iterations += outcome.iterations;
        stats.penalty_updates += admm.penalty_updates;
        budget = budget.saturating_sub(outcome.iterations);
        let m = admm.repaired_from(&admm.z_psd);
        let mat_resid = materialized_residual(&working, &m);
        stats.primal_residual = mat_resid;
        stats.dual_residual = outcome.dual_residual;

        let mut done = outcome.converged;
        if done && prob.triangle_policy() == TrianglePolicy::Lazy {
            let violated = prob.triangle_violations(&m, cfg.tol_feas);
            stats.lazy_violation_history.push(violated.len());
            if !violated.is_empty() {
                done = false;
                if round < rounds && budget > 0 {
                    stats.lazy_constraints_added += violated.len();
                    warm = Some(admm.warm_start());
                    working.extend(violated.into_iter().map(|(t, _)| t.constraint()));
                    round += 1;
                    continue;
                }
            }
        }
        stats.converged = done;
        stats.wall_time_secs = start.elapsed().as_secs_f64();
        let mut sol = GramSolution { objective_value: prob.objective_value(&m), m, max_violation: 0.0 };
        sol.max_violation = check_feasibility(prob, &sol, cfg.tol_feas)
            .map_err(|e| SolveError::BadProblem(e.to_string()))?
            .max_residual();
        return if done {
            Ok((sol, stats))
        } else {
            Err(SolveError::NotConverged { solution: Box::new(sol), stats })
        };
    }
}

fn materialized_residual(rows: &[Constraint], m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for c in rows {
        let val = c.form.eval(m);
        let r = if is_equality(c) { (val - c.rhs).abs() } else { (c.rhs - val).max(0.0) };
        worst = worst.max(r);
    }
    worst
}

fn is_equality(c: &Constraint) -> bool {
    matches!(c.family, ConstraintFamily::Mass | ConstraintFamily::Spreading | ConstraintFamily::UnitNorm)
}

/// Upper-triangle index with `√2`-scaled off-diagonals.
struct SvecLayout {
    n: usize,
    index: Vec<usize>,
}

impl SvecLayout {
    fn new(n: usize) -> Self {
        let mut index = vec![0; n * n];
        let mut next = 0;
        for i in 0..n {
            for j in i..n {
                index[i * n + j] = next;
                index[j * n + i] = next;
                next += 1;
            }
        }
        Self { n, index }
    }

    fn dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        self.index[i * self.n + j]
    }

    fn to_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            let v = x[self.idx(i, j)];
            if i == j {
                v
            } else {
                v / SQRT2
            }
        })
    }

    fn to_svec(&self, m: &DMatrix<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for i in 0..self.n {
            for j in i..self.n {
                let s = if i == j { 1.0 } else { SQRT2 };
                x[self.idx(i, j)] = s * 0.5 * (m[(i, j)] + m[(j, i)]);
            }
        }
        x
    }

    fn coefficient(i: usize, j: usize, c: f64) -> f64 {
        if i == j {
            c
        } else {
            c / SQRT2
        }
    }
}

/// Eigenvalue-clipping projection onto the PSD cone.
pub(crate) fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let mut out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    out.fill_lower_triangle_with_upper_triangle();
    out
}

struct SparseRow {
    entries: Vec<(usize, f64)>,
}

struct WarmStart {
    x: DVector<f64>,
    z_psd: DVector<f64>,
    y_psd: DVector<f64>,
    z_lin: Vec<f64>,
    y_lin: Vec<f64>,
    rho: f64,
}

struct Outcome {
    iterations: usize,
    converged: bool,
    dual_residual: f64,
}

struct Admm<'a> {
    layout: SvecLayout,
    rows: Vec<SparseRow>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    is_eq: Vec<bool>,
    constraints: &'a [Constraint],
    c: DVector<f64>,
    x: DVector<f64>,
    z_psd: DVector<f64>,
    y_psd: DVector<f64>,
    z_lin: Vec<f64>,
    y_lin: Vec<f64>,
    rho: f64,
    cfg: &'a SolverConfig,
    chol: Option<Cholesky<f64, Dyn>>,
    penalty_updates: usize,
}

impl<'a> Admm<'a> {
    fn new(
        prob: &SdpProblem,
        constraints: &'a [Constraint],
        n_eq: usize,
        cfg: &'a SolverConfig,
        warm: Option<WarmStart>,
    ) -> Self {
        let layout = SvecLayout::new(prob.n());
        let p = layout.dim();
        let mut c = DVector::zeros(p);
        for &(i, j, coef) in prob.objective().terms() {
            c[layout.idx(i, j)] += SvecLayout::coefficient(i, j, coef);
        }
        let mut rows = Vec::with_capacity(constraints.len());
        let mut lower = Vec::with_capacity(constraints.len());
        let mut upper = Vec::with_capacity(constraints.len());
        let mut is_eq = Vec::with_capacity(constraints.len());
        for (r, con) in constraints.iter().enumerate() {
            let mut entries: Vec<(usize, f64)> = con
                .form
                .terms()
                .iter()
                .map(|&(i, j, coef)| (layout.idx(i, j), SvecLayout::coefficient(i, j, coef)))
                .collect();
            let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            for e in &mut entries {
                e.1 /= norm;
            }
            let b = con.rhs / norm;
            let eq = r < n_eq;
            rows.push(SparseRow { entries });
            lower.push(b);
            upper.push(if eq { b } else { f64::INFINITY });
            is_eq.push(eq);
        }
        let m = rows.len();
        let (x, z_psd, y_psd, mut z_lin, mut y_lin, rho) = match warm {
            Some(w) => (w.x, w.z_psd, w.y_psd, w.z_lin, w.y_lin, w.rho),
            None => (DVector::zeros(p), DVector::zeros(p), DVector::zeros(p), Vec::new(), Vec::new(), cfg.rho),
        };
        // rows appended by a lazy round start from the current iterate
        for r in z_lin.len()..m {
            let ax: f64 = rows[r].entries.iter().map(|&(j, a)| a * x[j]).sum();
            z_lin.push(ax.clamp(lower[r], upper[r]));
            y_lin.push(0.0);
        }
        let mut admm = Self {
            layout,
            rows,
            lower,
            upper,
            is_eq,
            constraints,
            c,
            x,
            z_psd,
            y_psd,
            z_lin,
            y_lin,
            rho,
            cfg,
            chol: None,
            penalty_updates: 0,
        };
        admm.factor();
        admm
    }

    fn row_rho(&self, r: usize) -> f64 {
        if self.is_eq[r] {
            1e3 * self.rho
        } else {
            self.rho
        }
    }

    fn factor(&mut self) {
        let p = self.layout.dim();
        let mut k = DMatrix::<f64>::identity(p, p) * (self.cfg.sigma + self.rho);
        for (r, row) in self.rows.iter().enumerate() {
            let rr = self.row_rho(r);
            for &(i, a) in &row.entries {
                for &(j, b) in &row.entries {
                    k[(i, j)] += rr * a * b;
                }
            }
        }
        self.chol = Some(Cholesky::new(k).expect("ADMM system matrix is positive definite"));
    }

    fn a_times(&self, x: &DVector<f64>) -> Vec<f64> {
        self.rows.iter().map(|row| row.entries.iter().map(|&(j, a)| a * x[j]).sum()).collect()
    }

    fn at_times(&self, y: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.layout.dim());
        for (row, &yr) in self.rows.iter().zip(y) {
            if yr != 0.0 {
                for &(j, a) in &row.entries {
                    out[j] += a * yr;
                }
            }
        }
        out
    }

    fn run(&mut self, budget: usize) -> Outcome {
        let alpha = self.cfg.relaxation;
        let sigma = self.cfg.sigma;
        let c_scale = self.c.amax().max(1.0);
        let mut last_obj: Option<(usize, f64)> = None;
        let mut dual_residual = f64::INFINITY;
        let mut iter = 0;
        let mut adapt_gap = self.cfg.check_every * 5;
        let mut next_adapt = adapt_gap;
        while iter < budget {
            iter += 1;
            let weighted: Vec<f64> = (0..self.rows.len())
                .map(|r| self.row_rho(r) * self.z_lin[r] - self.y_lin[r])
                .collect();
            let mut rhs = &self.x * sigma - &self.c + self.at_times(&weighted);
            rhs += &self.z_psd * self.rho - &self.y_psd;
            let x_tilde = self.chol.as_ref().expect("factored").solve(&rhs);
            let ax_tilde = self.a_times(&x_tilde);

            self.x = &x_tilde * alpha + &self.x * (1.0 - alpha);
            for r in 0..self.rows.len() {
                let hat = alpha * ax_tilde[r] + (1.0 - alpha) * self.z_lin[r];
                let rr = self.row_rho(r);
                let z = (hat + self.y_lin[r] / rr).clamp(self.lower[r], self.upper[r]);
                self.y_lin[r] += rr * (hat - z);
                self.z_lin[r] = z;
            }
            let hat_psd = &x_tilde * alpha + &self.z_psd * (1.0 - alpha);
            let shifted = &hat_psd + &self.y_psd / self.rho;
            self.z_psd = self.layout.to_svec(&project_psd(&self.layout.to_matrix(&shifted)));
            self.y_psd += (&hat_psd - &self.z_psd) * self.rho;

            if iter % self.cfg.check_every != 0 && iter != budget {
                continue;
            }
            let ax = self.a_times(&self.x);
            let prim_lin = ax.iter().zip(&self.z_lin).map(|(a, z)| (a - z).abs()).fold(0.0, f64::max);
            let prim_psd = (&self.x - &self.z_psd).amax();
            let prim = prim_lin.max(prim_psd);
            let dual_vec = &self.c + self.at_times(&self.y_lin) + &self.y_psd;
            dual_residual = dual_vec.amax() / c_scale;

            let m = self.repaired_from(&self.z_psd);
            let feas = materialized_residual(self.constraints, &m);
            let obj = self.c.dot(&self.z_psd);
            let stalled = match last_obj {
                Some((at, prev)) if iter - at >= self.cfg.stall_window => {
                    let rel = (obj - prev).abs() / obj.abs().max(1.0);
                    last_obj = Some((iter, obj));
                    rel <= self.cfg.tol_obj
                }
                Some(_) => false,
                None => {
                    last_obj = Some((iter, obj));
                    false
                }
            };
            if feas <= self.cfg.tol_feas && (dual_residual <= self.cfg.tol_dual || stalled) {
                return Outcome { iterations: iter, converged: true, dual_residual };
            }
            if iter >= next_adapt {
                if self.adapt_rho(&ax, prim, dual_residual * c_scale) {
                    adapt_gap *= 2;
                }
                next_adapt = iter + adapt_gap;
            }
        }
        Outcome { iterations: iter, converged: false, dual_residual }
    }

    /// Rebalances the penalty; returns whether it changed.
    fn adapt_rho(&mut self, ax: &[f64], prim: f64, dual: f64) -> bool {
        let ax_norm = ax.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(self.x.amax());
        let z_norm = self.z_lin.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(self.z_psd.amax());
        let prim_scale = ax_norm.max(z_norm).max(1e-12);
        let aty = self.at_times(&self.y_lin) + &self.y_psd;
        let dual_scale = self.c.amax().max(aty.amax()).max(1e-12);
        let ratio = ((prim / prim_scale) / (dual / dual_scale).max(1e-300)).sqrt();
        if !ratio.is_finite() {
            return false;
        }
        let new_rho = (self.rho * ratio).clamp(1e-6, 1e6);
        if new_rho > 5.0 * self.rho || new_rho < 0.2 * self.rho {
            self.rho = new_rho;
            self.factor();
            self.penalty_updates += 1;
            return true;
        }
        false
    }

    /// PSD iterate rescaled so that the mass constraint holds exactly.
    fn repaired_from(&self, z_psd: &DVector<f64>) -> DMatrix<f64> {
        let m = self.layout.to_matrix(z_psd);
        match self.constraints.iter().find(|c| c.family == ConstraintFamily::Mass) {
            Some(mass) => {
                let val = mass.form.eval(&m);
                if val > 0.0 {
                    m * (mass.rhs / val)
                } else {
                    m
                }
            }
            None => m,
        }
    }

    fn warm_start(self) -> WarmStart {
        WarmStart {
            x: self.x,
            z_psd: self.z_psd,
            y_psd: self.y_psd,
            z_lin: self.z_lin,
            y_lin: self.y_lin,
            rho: self.rho,
        }
    }
}

/// Explicit vectors (one row per vertex) whose Gram matrix reproduces `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramVectors {
    pub rows: DMatrix<f64>,
    /// Magnitude of the most negative eigenvalue that was clipped to zero.
    pub clipped: f64,
}

impl GramVectors {
    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        &self.rows * self.rows.transpose()
    }
}

/// Factor a PSD Gram matrix. Eigenvalues below `rank_tol` are dropped.
pub fn gram_factor(sol: &GramSolution, rank_tol: f64) -> Result<GramVectors, FactorError> {
    let lmin = min_eigenvalue(&sol.m);
    if lmin < -1e-6 {
        return Err(FactorError::NotPsd(lmin));
    }
    Ok(factor_clipped(&sol.m, rank_tol))
}

pub(crate) fn factor_clipped(m: &DMatrix<f64>, rank_tol: f64) -> GramVectors {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let kept: Vec<usize> = order.iter().copied().filter(|&j| eig.eigenvalues[j] > rank_tol).collect();
    let clipped = eig.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(-l));
    let mut rows = DMatrix::zeros(n, kept.len());
    for (col, &j) in kept.iter().enumerate() {
        let s = eig.eigenvalues[j].sqrt();
        for u in 0..n {
            rows[(u, col)] = s * eig.eigenvectors[(u, j)];
        }
    }
    // deterministic sign: first significant entry of each column positive
    for col in 0..rows.ncols() {
        if let Some(u) = (0..n).find(|&u| rows[(u, col)].abs() > 1e-12) {
            if rows[(u, col)] < 0.0 {
                for u in 0..n {
                    rows[(u, col)] = -rows[(u, col)];
                }
            }
        }
    }
    GramVectors { rows, clipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use crate::graph::{Partition, VertexSet};
    use crate::sdp::{build_sdp, embed_partition};

    fn solve_ok(prob: &SdpProblem) -> (GramSolution, SolveStats) {
        solve(prob, &SolverConfig::default()).expect("converges")
    }

    #[test]
    fn two_triangles_objective_zero() {
        let g = clique_union(&[3, 3]).unwrap();
        let prob = build_sdp(&g, 2, false, TrianglePolicy::Eager).unwrap();
        let (sol, stats) = solve_ok(&prob);
        assert!(sol.objective_value.abs() <= 1e-5, "{}", sol.objective_value);
        assert!(stats.converged);
        assert!(check_feasibility(&prob, &sol, 1e-6).unwrap().passes());
        assert!(sol.min_eigenvalue() >= -1e-8);
    }

    #[test]
    fn p4_objective_below_integral_value() {
        let g = path(4).unwrap();
        let prob = build_sdp(&g, 2, false, TrianglePolicy::Eager).unwrap();
        let (sol, _) = solve_ok(&prob);
        assert!(sol.objective_value <= 1.0 / 3.0 + 1e-4, "{}", sol.objective_value);
        assert!(check_feasibility(&prob, &sol, 1e-6).unwrap().passes());
    }

    #[test]
    fn lazy_matches_eager_and_scan_is_clean() {
        let g = barbell(3, 1).unwrap();
        let eager = build_sdp(&g, 2, false, TrianglePolicy::Eager).unwrap();
        let lazy = build_sdp(&g, 2, false, TrianglePolicy::Lazy).unwrap();
        let (a, _) = solve_ok(&eager);
        let (b, stats) = solve_ok(&lazy);
        assert!(lazy.triangle_violations(&b.m, 1e-6).is_empty());
        assert!((a.objective_value - b.objective_value).abs() < 1e-4);
        let hist = &stats.lazy_violation_history;
        assert_eq!(*hist.last().unwrap(), 0);
        assert!(hist.windows(2).all(|w| w[1] <= w[0]), "{hist:?}");
    }

    #[test]
    fn determinism_bitwise() {
        let g = cycle(5).unwrap();
        let prob = build_sdp(&g, 2, false, TrianglePolicy::Eager).unwrap();
        let (a, _) = solve_ok(&prob);
        let (b, _) = solve_ok(&prob);
        assert_eq!(a.m.as_slice(), b.m.as_slice());
    }

    #[test]
    fn bad_problem_rejected() {
        let g = path(4).unwrap();
        let prob = build_sdp(&g, 2, false, TrianglePolicy::Eager).unwrap();
        let cfg = SolverConfig { max_iters: 0, ..SolverConfig::default() };
        assert!(matches!(solve(&prob, &cfg), Err(SolveError::BadProblem(_))));
    }

    #[test]
    fn iteration_cap_returns_flagged_iterate() {
        let g = path(5).unwrap();
        let prob = build_sdp(&g, 2, false, TrianglePolicy::Eager).unwrap();
        let cfg = SolverConfig { max_iters: 3, ..SolverConfig::default() };
        match solve(&prob, &cfg) {
            Err(SolveError::NotConverged { solution, stats }) => {
                assert_eq!(stats.iterations, 3);
                assert!(!stats.converged);
                assert_eq!(solution.n(), 5);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn factor_identity() {
        let sol = GramSolution { m: DMatrix::identity(3, 3), objective_value: 0.0, max_violation: 0.0 };
        let v = gram_factor(&sol, 1e-9).unwrap();
        assert_eq!(v.dim(), 3);
        assert!((v.gram() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn factor_constant_block() {
        let sol = GramSolution { m: DMatrix::from_element(4, 4, 0.3), objective_value: 0.0, max_violation: 0.0 };
        let v = gram_factor(&sol, 1e-9).unwrap();
        assert_eq!(v.dim(), 1);
        for u in 0..4 {
            assert!((v.rows[(u, 0)] - 0.3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn factor_two_triangle_embedding() {
        let g = clique_union(&[3, 3]).unwrap();
        let a = VertexSet::from_indices(6, [0, 1, 2]);
        let sol = embed_partition(&g, &Partition::new(vec![a.clone(), a.complement()]), false).unwrap();
        let v = gram_factor(&sol, 1e-9).unwrap();
        assert_eq!(v.dim(), 2);
        assert!((v.gram() - &sol.m).amax() < 1e-6);
        let dot = |u: usize, w: usize| (v.rows.row(u) * v.rows.row(w).transpose())[(0, 0)];
        assert!(dot(0, 3).abs() < 1e-12);
        assert!((dot(0, 1) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn factor_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let sol = GramSolution { m, objective_value: 0.0, max_violation: 0.0 };
        assert!(matches!(gram_factor(&sol, 1e-9), Err(FactorError::NotPsd(_))));
    }

    #[test]
    fn psd_projection_is_psd() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 1.0, 0.5, 0.0, 0.5, -1.0]);
        let p = project_psd(&m);
        assert!(min_eigenvalue(&p) > -1e-12);
    }
}
