//! Gram-matrix form of the sparsest k-partition relaxation.
//!
//! The unknown is a symmetric PSD matrix `M` with `M_uv = ⟨ū, v̄⟩`. Every
//! constraint is a linear functional of the upper triangle of `M`:
//!
//! ```text
//! minimize   (1/k) Σ_{uv ∈ E} w_uv (M_uu + M_vv − 2 M_uv)
//! subject to Σ_u w_u M_uu          = k
//!            Σ_v w_v M_uv          = 1           for every u
//!            M_xx − M_ux − M_xv + M_uv ≥ 0       for every x and pair {u, v}
//!            M_uu − M_uv           ≥ 0           for every ordered u ≠ v
//!            M_uv                  ≥ 0           for every pair {u, v}
//!            M_uu                  = 1           (balanced variant only)
//! ```

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::graph::{set_weight, Graph, GraphError, Partition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("k = {k} must satisfy 2 <= k <= n = {n}")]
    BadK { k: usize, n: usize },
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Linear functional `Σ coef · M_ij` over upper-triangle entries (`i <= j`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearForm {
    terms: Vec<(usize, usize, f64)>,
}

impl LinearForm {
    /// Merges repeated entries and drops zero coefficients.
    pub fn new(raw: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut terms: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, c) in raw {
            let (i, j) = (i.min(j), i.max(j));
            match terms.iter_mut().find(|t| t.0 == i && t.1 == j) {
                Some(t) => t.2 += c,
                None => terms.push((i, j, c)),
            }
        }
        terms.retain(|t| t.2 != 0.0);
        Self { terms }
    }

    pub fn terms(&self) -> &[(usize, usize, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, m: &DMatrix<f64>) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * m[(i, j)]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintFamily {
    Mass,
    Spreading,
    UnitNorm,
    Triangle,
    BoxUpper,
    BoxLower,
}

impl ConstraintFamily {
    pub const ALL: [ConstraintFamily; 6] = [
        ConstraintFamily::Mass,
        ConstraintFamily::Spreading,
        ConstraintFamily::UnitNorm,
        ConstraintFamily::Triangle,
        ConstraintFamily::BoxUpper,
        ConstraintFamily::BoxLower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintFamily::Mass => "mass",
            ConstraintFamily::Spreading => "spreading",
            ConstraintFamily::UnitNorm => "unit_norm",
            ConstraintFamily::Triangle => "triangle",
            ConstraintFamily::BoxUpper => "box_upper",
            ConstraintFamily::BoxLower => "box_lower",
        }
    }
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `⟨A, M⟩ = rhs` for equalities, `⟨A, M⟩ >= rhs` for inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub family: ConstraintFamily,
    pub form: LinearForm,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrianglePolicy {
    /// Every triangle inequality is materialized up front.
    Eager,
    /// Triangle inequalities are generated by scanning for violations.
    Lazy,
}

/// Triangle inequality `M_xx − M_ux − M_xv + M_uv >= 0` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub x: usize,
    pub u: usize,
    pub v: usize,
}

impl Triangle {
    pub fn form(self) -> LinearForm {
        let Triangle { x, u, v } = self;
        LinearForm::new([(x, x, 1.0), (u, x, -1.0), (x, v, -1.0), (u, v, 1.0)])
    }

    pub fn eval(self, m: &DMatrix<f64>) -> f64 {
        let Triangle { x, u, v } = self;
        m[(x, x)] - m[(u, x)] - m[(x, v)] + m[(u, v)]
    }

    pub fn constraint(self) -> Constraint {
        Constraint { family: ConstraintFamily::Triangle, form: self.form(), rhs: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    n: usize,
    k: usize,
    objective: LinearForm,
    equalities: Vec<Constraint>,
    inequalities: Vec<Constraint>,
    triangle_policy: TrianglePolicy,
    balanced: bool,
    weights: Vec<f64>,
    weight_scale: f64,
}

impl SdpProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn equalities(&self) -> &[Constraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Constraint] {
        &self.inequalities
    }

    pub fn triangle_policy(&self) -> TrianglePolicy {
        self.triangle_policy
    }

    pub fn balanced(&self) -> bool {
        self.balanced
    }

    /// Vertex weights as used in the constraints (rescaled in balanced mode).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Factor applied to the graph's vertex weights (1 unless balanced).
    pub fn weight_scale(&self) -> f64 {
        self.weight_scale
    }

    pub fn count(&self, family: ConstraintFamily) -> usize {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .filter(|c| c.family == family)
            .count()
    }

    /// All triangle inequalities violated by more than `tol`, worst first.
    pub fn triangle_violations(&self, m: &DMatrix<f64>, tol: f64) -> Vec<(Triangle, f64)> {
        let mut out = Vec::new();
        for t in all_triangles(self.n) {
            let val = t.eval(m);
            if val < -tol {
                out.push((t, -val));
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }

    pub fn objective_value(&self, m: &DMatrix<f64>) -> f64 {
        self.objective.eval(m)
    }
}

/// Index set `(x, {u, v})` with `u < v`, including the degenerate `x ∈ {u, v}`.
pub fn all_triangles(n: usize) -> impl Iterator<Item = Triangle> {
    (0..n).flat_map(move |x| {
        (0..n).flat_map(move |u| (u + 1..n).map(move |v| Triangle { x, u, v }))
    })
}

pub fn build_sdp(
    g: &Graph,
    k: usize,
    balanced: bool,
    triangle_policy: TrianglePolicy,
) -> Result<SdpProblem, SdpError> {
    let n = g.n();
    if k < 2 || k > n {
        return Err(SdpError::BadK { k, n });
    }
    let weight_scale = if balanced { k as f64 / g.total_weight() } else { 1.0 };
    let weights: Vec<f64> = g.vertex_weights().iter().map(|w| w * weight_scale).collect();

    let inv_k = 1.0 / k as f64;
    let objective = LinearForm::new(g.edges().iter().flat_map(|e| {
        let c = e.weight * inv_k;
        [(e.u, e.u, c), (e.v, e.v, c), (e.u, e.v, -2.0 * c)]
    }));

    let mut equalities = Vec::with_capacity(1 + 2 * n);
    equalities.push(Constraint {
        family: ConstraintFamily::Mass,
        form: LinearForm::new((0..n).map(|u| (u, u, weights[u]))),
        rhs: k as f64,
    });
    for u in 0..n {
        equalities.push(Constraint {
            family: ConstraintFamily::Spreading,
            form: LinearForm::new((0..n).map(|v| (u, v, weights[v]))),
            rhs: 1.0,
        });
    }
    if balanced {
        for u in 0..n {
            equalities.push(Constraint {
                family: ConstraintFamily::UnitNorm,
                form: LinearForm::new([(u, u, 1.0)]),
                rhs: 1.0,
            });
        }
    }

    let mut inequalities = Vec::new();
    if triangle_policy == TrianglePolicy::Eager {
        inequalities.extend(all_triangles(n).map(Triangle::constraint));
    }
    for u in 0..n {
        for v in 0..n {
            if u != v {
                inequalities.push(Constraint {
                    family: ConstraintFamily::BoxUpper,
                    form: LinearForm::new([(u, u, 1.0), (u, v, -1.0)]),
                    rhs: 0.0,
                });
            }
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            inequalities.push(Constraint {
                family: ConstraintFamily::BoxLower,
                form: LinearForm::new([(u, v, 1.0)]),
                rhs: 0.0,
            });
        }
    }

    Ok(SdpProblem {
        n,
        k,
        objective,
        equalities,
        inequalities,
        triangle_policy,
        balanced,
        weights,
        weight_scale,
    })
}

/// Gram matrix of the SDP vectors together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSolution {
    pub m: DMatrix<f64>,
    pub objective_value: f64,
    /// Worst constraint residual of this matrix against its problem.
    pub max_violation: f64,
}

impl GramSolution {
    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn norm_sq(&self, u: usize) -> f64 {
        self.m[(u, u)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.m)
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Integral solution `M_uv = 1 / w(P_i)` when `u, v ∈ P_i`, zero across blocks.
pub fn embed_partition(g: &Graph, p: &Partition, balanced: bool) -> Result<GramSolution, SdpError> {
    let n = g.n();
    if !p.is_full_partition(n) {
        return Err(SdpError::NotAPartition("blocks must be non-empty, disjoint and cover V".into()));
    }
    let k = p.len();
    if k < 1 {
        return Err(SdpError::NotAPartition("no blocks".into()));
    }
    let scale = if balanced { k as f64 / g.total_weight() } else { 1.0 };
    let mut m = DMatrix::zeros(n, n);
    for block in &p.blocks {
        let w = set_weight(g, block) * scale;
        if !(w > 0.0) {
            return Err(SdpError::NotAPartition("block with zero weight".into()));
        }
        let members = block.to_vec();
        for &u in &members {
            for &v in &members {
                m[(u, v)] = 1.0 / w;
            }
        }
    }
    let objective_value = g
        .edges()
        .iter()
        .map(|e| e.weight * (m[(e.u, e.u)] + m[(e.v, e.v)] - 2.0 * m[(e.u, e.v)]))
        .sum::<f64>()
        / k as f64;
    let mut sol = GramSolution { m, objective_value, max_violation: 0.0 };
    if k >= 2 {
        let prob = build_sdp(g, k, balanced, TrianglePolicy::Lazy)?;
        sol.max_violation = check_feasibility(&prob, &sol, 0.0)?.max_residual();
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Worst residual per constraint family present in the problem.
    pub residuals: Vec<(ConstraintFamily, f64)>,
    /// `max(0, −λ_min(M))`.
    pub psd_residual: f64,
    pub tol: f64,
}

impl FeasibilityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(self.psd_residual, f64::max)
    }

    pub fn residual(&self, family: ConstraintFamily) -> Option<f64> {
        self.residuals.iter().find(|r| r.0 == family).map(|r| r.1)
    }

    pub fn passes(&self) -> bool {
        self.max_residual() <= self.tol
    }
}

/// Residuals of `sol` against every constraint family. Triangle inequalities
/// are always scanned in full, whatever the problem's materialization policy.
pub fn check_feasibility(
    prob: &SdpProblem,
    sol: &GramSolution,
    tol: f64,
) -> Result<FeasibilityReport, SdpError> {
    if sol.n() != prob.n || !sol.m.is_square() {
        return Err(SdpError::DimensionMismatch { expected: prob.n, got: sol.n() });
    }
    let m = &sol.m;
    let mut worst: Vec<(ConstraintFamily, f64)> = Vec::new();
    let mut bump = |family: ConstraintFamily, r: f64| match worst.iter_mut().find(|w| w.0 == family) {
        Some(w) => w.1 = w.1.max(r),
        None => worst.push((family, r)),
    };
    for c in &prob.equalities {
        bump(c.family, (c.form.eval(m) - c.rhs).abs());
    }
    for c in prob.inequalities.iter().filter(|c| c.family != ConstraintFamily::Triangle) {
        bump(c.family, (c.rhs - c.form.eval(m)).max(0.0));
    }
    let tri = all_triangles(prob.n).map(|t| (-t.eval(m)).max(0.0)).fold(0.0, f64::max);
    bump(ConstraintFamily::Triangle, tri);
    worst.sort_by_key(|w| w.0);
    Ok(FeasibilityReport {
        residuals: worst,
        psd_residual: (-min_eigenvalue(m)).max(0.0),
        tol,
    })
}
