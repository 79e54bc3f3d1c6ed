//! Exact baselines for small graphs: exhaustive sparsest k-partition and
//! sparsest cut, the normalized Laplacian spectrum, and the two-clique
//! instance on which the assignment relaxation has value zero.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use thiserror::Error;

use crate::graph::{families, Graph, GraphError, Partition, VertexSet};

pub const MAX_PARTITION_N: usize = 12;
pub const MAX_CUT_N: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("n = {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("k = {k} must lie in 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("no feasible partition: every candidate has a zero-weight block")]
    NoFeasiblePartition,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Calls `visit` with the label vector of every partition of `0..n` into
/// exactly `k` non-empty blocks, as restricted growth strings.
pub fn for_each_k_partition(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(i: usize, used: usize, n: usize, k: usize, labels: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        if i == n {
            if used == k {
                visit(labels);
            }
            return;
        }
        // Leave room for the blocks that still have to open.
        if n - i < k - used {
            return;
        }
        for label in 0..used {
            labels[i] = label;
            rec(i + 1, used, n, k, labels, visit);
        }
        if used < k {
            labels[i] = used;
            rec(i + 1, used + 1, n, k, labels, visit);
        }
    }
    if k == 0 || k > n {
        return;
    }
    let mut labels = vec![0; n];
    rec(0, 0, n, k, &mut labels, &mut visit);
}

/// Stirling number of the second kind by `S(n,k) = k·S(n−1,k) + S(n−1,k−1)`.
pub fn stirling2(n: usize, k: usize) -> u128 {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = j as u128 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

fn block_max_expansion(g: &Graph, labels: &[usize], k: usize, cut: &mut [f64], weight: &mut [f64]) -> f64 {
    cut.iter_mut().for_each(|x| *x = 0.0);
    weight.iter_mut().for_each(|x| *x = 0.0);
    for (u, &l) in labels.iter().enumerate() {
        weight[l] += g.weight(u);
    }
    for e in g.edges() {
        let (a, b) = (labels[e.u], labels[e.v]);
        if a != b {
            cut[a] += e.weight;
            cut[b] += e.weight;
        }
    }
    (0..k).map(|i| if weight[i] > 0.0 { cut[i] / weight[i] } else { f64::INFINITY }).fold(0.0, f64::max)
}

/// Exact `φᵏ_G = min over k-partitions of max block expansion`.
pub fn brute_force_opt(g: &Graph, k: usize) -> Result<(Partition, f64), OracleError> {
    let n = g.n();
    if n > MAX_PARTITION_N {
        return Err(OracleError::TooLarge { n, limit: MAX_PARTITION_N });
    }
    if k == 0 || k > n {
        return Err(OracleError::BadK { k, n });
    }
    let (mut cut, mut weight) = (vec![0.0; k], vec![0.0; k]);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_k_partition(n, k, |labels| {
        let value = block_max_expansion(g, labels, k, &mut cut, &mut weight);
        if value.is_finite() && best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((labels.to_vec(), value));
        }
    });
    let (labels, value) = best.ok_or(OracleError::NoFeasiblePartition)?;
    Ok((Partition::from_labels(&labels), value))
}

/// Exact `min cut(S)/w(S)` over non-empty `S` with `w(S) ≤ w(V)/2`.
pub fn brute_force_sparsest_cut(g: &Graph) -> Result<(VertexSet, f64), OracleError> {
    let n = g.n();
    if n > MAX_CUT_N {
        return Err(OracleError::TooLarge { n, limit: MAX_CUT_N });
    }
    let half = g.total_weight() / 2.0 * (1.0 + 1e-12);
    let mut best: Option<(u32, f64)> = None;
    for mask in 1u32..(1u32 << n) {
        let w: f64 = (0..n).filter(|&u| mask >> u & 1 == 1).map(|u| g.weight(u)).sum();
        if !(w > 0.0) || w > half {
            continue;
        }
        let cut = g.edges().iter().filter(|e| (mask >> e.u & 1) != (mask >> e.v & 1)).fold(0.0, |acc, e| acc + e.weight);
        let value = cut / w;
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((mask, value));
        }
    }
    let (mask, value) = best.ok_or(OracleError::NoFeasiblePartition)?;
    Ok((VertexSet::from_indices(n, (0..n).filter(|&u| mask >> u & 1 == 1)), value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Eigenvalues of `I − D^{-1/2} A D^{-1/2}` in ascending order.
    pub eigenvalues: Vec<f64>,
}

impl SpectrumReport {
    /// `λ_k` with 1-based `k`.
    pub fn lambda(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.eigenvalues.get(i)).copied()
    }
}

pub fn spectrum(g: &Graph) -> Result<SpectrumReport, OracleError> {
    let n = g.n();
    if let Some(u) = (0..n).find(|&u| !(g.degree(u) > 0.0)) {
        return Err(OracleError::IsolatedVertex(u));
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|u| 1.0 / g.degree(u).sqrt()).collect();
    let mut lap = DMatrix::<f64>::identity(n, n);
    for e in g.edges() {
        let x = e.weight * inv_sqrt[e.u] * inv_sqrt[e.v];
        lap[(e.u, e.v)] -= x;
        lap[(e.v, e.u)] -= x;
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(lap).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumReport { eigenvalues })
}

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq)]
pub struct GapCheck {
    pub name: String,
    pub holds: bool,
}

/// The two-clique instance with its closed-form assignment vectors.
///
/// Every vector is `s·e_j` for a basis index `j` (or zero) with `s² = 2/k`,
/// so all inner products are exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct GapInstance {
    pub n: usize,
    pub k: usize,
    pub graph: Graph,
    /// Vertices of the first clique.
    pub first_clique: usize,
    /// `assignment[u][i]` is the basis index of `ū_i`, if nonzero.
    pub assignment: Vec<Vec<Option<usize>>>,
    /// Basis indices of `I`.
    pub identity_support: Vec<usize>,
    pub scale_sq: Rational,
    /// Smallest `α` satisfying every edge constraint.
    pub alpha: Rational,
    pub checks: Vec<GapCheck>,
    pub transcript: Vec<String>,
    pub brute_force_value: f64,
    pub brute_force_partition: Partition,
}

impl GapInstance {
    pub fn feasible(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

pub fn assignment_gap_demo(n: usize, k: usize) -> Result<GapInstance, OracleError> {
    if n < 4 || k <= 2 || k % 2 != 0 {
        return Err(OracleError::BadParams(format!("need n ≥ 4 and even k > 2, got n = {n}, k = {k}")));
    }
    if k > n {
        return Err(OracleError::BadParams(format!("k = {k} exceeds n = {n}")));
    }
    let first = n / 2;
    let graph = families::clique_union(&[first, n - first])?;
    let half = k / 2;
    let assignment: Vec<Vec<Option<usize>>> = (0..n)
        .map(|u| {
            (0..k)
                .map(|i| match (u < first, i < half) {
                    (true, true) => Some(i),
                    (false, false) => Some(i - half),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let identity_support: Vec<usize> = (0..half).collect();
    let s2 = Rational::new(2, k as i64);

    let dot = |a: Option<usize>, b: Option<usize>| match (a, b) {
        (Some(x), Some(y)) if x == y => s2,
        _ => Rational::from_integer(0),
    };
    let dot_identity = |a: Option<usize>| match a {
        Some(x) if identity_support.contains(&x) => s2,
        _ => Rational::from_integer(0),
    };
    let dist_sq = |a: Option<usize>, b: Option<usize>| dot(a, a) + dot(b, b) - dot(a, b) * 2;

    let one = Rational::from_integer(1);
    let zero = Rational::from_integer(0);
    let mut checks = Vec::new();
    let mut transcript = vec![format!("G_{n}: cliques of sizes {first} and {}, k = {k}, s² = {s2}", n - first)];

    let norm_ok = (0..n).all(|u| assignment[u].iter().map(|&a| dot(a, a)).sum::<Rational>() == one);
    transcript.push(format!("Σ_i ‖u_i‖² = 1 for every vertex: {norm_ok}"));
    checks.push(GapCheck { name: "unit total norm".into(), holds: norm_ok });

    let orth_ok = (0..n).all(|u| (0..k).all(|i| (0..k).all(|j| i == j || dot(assignment[u][i], assignment[u][j]) == zero)));
    transcript.push(format!("⟨u_i, u_j⟩ = 0 for i ≠ j: {orth_ok}"));
    checks.push(GapCheck { name: "orthogonal assignments".into(), holds: orth_ok });

    let id_ok = (0..n).all(|u| assignment[u].iter().map(|&a| dot_identity(a)).sum::<Rational>() == one);
    transcript.push(format!("⟨Σ_i u_i, I⟩ = 1 for every vertex: {id_ok}"));
    checks.push(GapCheck { name: "identity inner product".into(), holds: id_ok });

    let id_norm = s2 * identity_support.len() as i64;
    transcript.push(format!("‖I‖² = {id_norm}"));
    checks.push(GapCheck { name: "identity norm".into(), holds: id_norm == one });

    let mut alpha = zero;
    let mut weights_integral = true;
    for i in 0..k {
        let lhs: Rational = graph
            .edges()
            .iter()
            .map(|e| dist_sq(assignment[e.u][i], assignment[e.v][i]) * (e.weight as i64))
            .sum();
        let rhs: Rational = (0..n)
            .map(|u| {
                let w = graph.weight(u);
                weights_integral &= w.fract() == 0.0;
                dot(assignment[u][i], assignment[u][i]) * (w as i64)
            })
            .sum();
        if rhs > zero {
            alpha = alpha.max(lhs / rhs);
        } else if lhs > zero {
            weights_integral = false;
        }
        transcript.push(format!("block {i}: Σ_E ‖u_i − v_i‖² = {lhs}, Σ_V w_u ‖u_i‖² = {rhs}"));
    }
    checks.push(GapCheck { name: "integral weights".into(), holds: weights_integral });
    transcript.push(format!("smallest feasible α = {alpha}"));
    checks.push(GapCheck { name: "alpha zero".into(), holds: alpha == zero });

    let (partition, value) = brute_force_opt(&graph, k)?;
    transcript.push(format!("exact sparsest {k}-partition value = {value}"));
    Ok(GapInstance {
        n,
        k,
        graph,
        first_clique: first,
        assignment,
        identity_support,
        scale_sq: s2,
        alpha,
        checks,
        transcript,
        brute_force_value: value,
        brute_force_partition: partition,
    })
}
