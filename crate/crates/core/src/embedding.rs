//! Normalization of SDP vectors to the unit sphere and the vertex measure.
//!
//! The normalized points are defined only through their inner products
//! `⟨ψ(ū), ψ(v̄)⟩ = ⟨ū, v̄⟩ / max(‖ū‖², ‖v̄‖²)`; they are realized by factoring
//! that Gram matrix.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::VertexSet;
use crate::solver::{factor_clipped, GramVectors};

/// Squared norms below this are treated as zero vectors.
pub const ZERO_NORM_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("vertex {vertex} has squared norm {norm_sq:e}")]
    ZeroVector { vertex: usize, norm_sq: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoints {
    /// Unit vectors, one row per vertex.
    pub psi: DMatrix<f64>,
    /// Original squared norms `‖ū‖²`.
    pub norms_sq: Vec<f64>,
    /// Vertex weights the measure was built from.
    pub weights: Vec<f64>,
    /// Per-vertex measure `w_u ‖ū‖²`.
    pub mu: Vec<f64>,
    /// Largest entrywise gap between the target normalized Gram matrix and
    /// the Gram matrix of `psi` (nonzero only when clipping was needed).
    pub perturbation: f64,
}

impl EmbeddedPoints {
    pub fn n(&self) -> usize {
        self.psi.nrows()
    }

    pub fn dim(&self) -> usize {
        self.psi.ncols()
    }

    pub fn inner(&self, u: usize, v: usize) -> f64 {
        self.psi.row(u).dot(&self.psi.row(v))
    }

    pub fn total_measure(&self) -> f64 {
        self.mu.iter().sum()
    }
}

pub fn psi_normalize(vectors: &GramVectors, weights: &[f64]) -> Result<EmbeddedPoints, EmbedError> {
    let n = vectors.n();
    if weights.len() != n {
        return Err(EmbedError::DimensionMismatch { expected: n, got: weights.len() });
    }
    let gram = vectors.gram();
    let norms_sq: Vec<f64> = (0..n).map(|u| gram[(u, u)]).collect();
    if let Some((vertex, &norm_sq)) = norms_sq.iter().enumerate().find(|(_, &s)| !(s >= ZERO_NORM_FLOOR)) {
        return Err(EmbedError::ZeroVector { vertex, norm_sq });
    }
    let target = normalized_gram(&gram);
    let mut psi = factor_clipped(&target, 1e-12).rows;
    for u in 0..n {
        let norm = psi.row(u).norm();
        if norm > 0.0 {
            psi.row_mut(u).unscale_mut(norm);
        }
    }
    let realized = &psi * psi.transpose();
    let perturbation = (&realized - &target).amax();
    let mu = weights.iter().zip(&norms_sq).map(|(w, s)| w * s).collect();
    Ok(EmbeddedPoints { psi, norms_sq, weights: weights.to_vec(), mu, perturbation })
}

/// `G'_uv = G_uv / max(G_uu, G_vv)`.
pub fn normalized_gram(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let n = gram.nrows();
    DMatrix::from_fn(n, n, |u, v| {
        if u == v {
            1.0
        } else {
            gram[(u, v)] / gram[(u, u)].max(gram[(v, v)])
        }
    })
}

/// `μ(S) = Σ_{u ∈ S} w_u ‖ū‖²`.
pub fn measure(points: &EmbeddedPoints, s: &VertexSet) -> f64 {
    s.iter().fold(0.0, |acc, u| acc + points.mu[u])
}
