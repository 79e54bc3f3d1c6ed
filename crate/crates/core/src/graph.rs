//! Weighted undirected graphs and the combinatorial quantities defined on them.
//!
//! Vertices are dense indices `0..n`. Every vertex carries a nonnegative mass
//! `w_u` and every edge a positive weight that acts as a real multiplicity in
//! all cut sums.

use std::collections::HashSet;

use thiserror::Error;

use crate::sdp::GramSolution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge ({0}, {1}) has non-positive weight {2}")]
    NonPositiveEdgeWeight(usize, usize, f64),
    #[error("vertex {0} has negative weight {1}")]
    NegativeVertexWeight(usize, f64),
    #[error("expected {expected} vertex weights, got {got}")]
    WeightCountMismatch { expected: usize, got: usize },
    #[error("total vertex weight must be positive")]
    ZeroTotalWeight,
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("set is empty")]
    EmptySet,
    #[error("set has zero weight")]
    ZeroWeight,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Vertex- and edge-weighted undirected graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    vertex_weights: Vec<f64>,
    edges: Vec<Edge>,
    degrees: Vec<f64>,
    degree_mode: bool,
}

impl Graph {
    /// Graph whose vertex weights are the weighted degrees.
    pub fn with_degree_weights(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self, GraphError> {
        let edges = validate_edges(n, edges)?;
        let degrees = weighted_degrees(n, &edges);
        Self::finish(n, degrees.clone(), edges, degrees, true)
    }

    /// Graph with explicit vertex weights.
    pub fn with_vertex_weights(
        n: usize,
        edges: Vec<(usize, usize, f64)>,
        vertex_weights: Vec<f64>,
    ) -> Result<Self, GraphError> {
        if vertex_weights.len() != n {
            return Err(GraphError::WeightCountMismatch { expected: n, got: vertex_weights.len() });
        }
        for (u, &w) in vertex_weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(GraphError::NegativeVertexWeight(u, w));
            }
        }
        let edges = validate_edges(n, edges)?;
        let degrees = weighted_degrees(n, &edges);
        Self::finish(n, vertex_weights, edges, degrees, false)
    }

    fn finish(
        n: usize,
        vertex_weights: Vec<f64>,
        edges: Vec<Edge>,
        degrees: Vec<f64>,
        degree_mode: bool,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let total: f64 = vertex_weights.iter().sum();
        if !(total > 0.0) {
            return Err(GraphError::ZeroTotalWeight);
        }
        Ok(Self { n, vertex_weights, edges, degrees, degree_mode })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn weight(&self, u: usize) -> f64 {
        self.vertex_weights[u]
    }

    /// Sum of incident edge weights.
    pub fn degree(&self, u: usize) -> f64 {
        self.degrees[u]
    }

    pub fn degree_mode(&self) -> bool {
        self.degree_mode
    }

    pub fn total_weight(&self) -> f64 {
        self.vertex_weights.iter().sum()
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Same edges, every vertex weight multiplied by `factor`.
    pub fn scaled_vertex_weights(&self, factor: f64) -> Self {
        Self {
            vertex_weights: self.vertex_weights.iter().map(|w| w * factor).collect(),
            degree_mode: false,
            ..self.clone()
        }
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    fn check_set(&self, s: &VertexSet) -> Result<(), GraphError> {
        if s.universe() != self.n {
            return Err(GraphError::DimensionMismatch { expected: self.n, got: s.universe() });
        }
        Ok(())
    }
}

fn validate_edges(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Vec<Edge>, GraphError> {
    let mut seen = HashSet::with_capacity(edges.len());
    let mut out = Vec::with_capacity(edges.len());
    for (u, v, weight) in edges {
        for x in [u, v] {
            if x >= n {
                return Err(GraphError::VertexOutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(GraphError::NonPositiveEdgeWeight(u, v, weight));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        out.push(Edge { u, v, weight });
    }
    Ok(out)
}

fn weighted_degrees(n: usize, edges: &[Edge]) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for e in edges {
        d[e.u] += e.weight;
        d[e.v] += e.weight;
    }
    d
}

/// Subset of `0..universe`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    mask: Vec<bool>,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        Self { mask: vec![false; universe] }
    }

    pub fn full(universe: usize) -> Self {
        Self { mask: vec![true; universe] }
    }

    /// Panics if an index is outside the universe.
    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.mask.get(u).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, u: usize) {
        self.mask[u] = true;
    }

    pub fn remove(&mut self, u: usize) {
        self.mask[u] = false;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn complement(&self) -> Self {
        Self { mask: self.mask.iter().map(|b| !b).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect() }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect() }
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && !*b).collect() }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        !self.mask.iter().zip(&other.mask).any(|(a, b)| *a && *b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }

    pub fn union_with(&mut self, other: &Self) {
        for (a, b) in self.mask.iter_mut().zip(&other.mask) {
            *a |= *b;
        }
    }
}

/// A list of vertex sets; [`Partition::validate_full`] checks it covers the universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub blocks: Vec<VertexSet>,
}

impl Partition {
    pub fn new(blocks: Vec<VertexSet>) -> Self {
        Self { blocks }
    }

    /// Builds blocks from a label vector; labels must be `0..k` with every label used.
    pub fn from_labels(labels: &[usize]) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let n = labels.len();
        let mut blocks = vec![VertexSet::empty(n); k];
        for (u, &l) in labels.iter().enumerate() {
            blocks[l].insert(u);
        }
        Self { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks are non-empty and pairwise disjoint.
    pub fn is_disjoint_family(&self) -> bool {
        if self.blocks.iter().any(VertexSet::is_empty) {
            return false;
        }
        for (i, a) in self.blocks.iter().enumerate() {
            for b in &self.blocks[i + 1..] {
                if !a.is_disjoint(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Disjoint, non-empty and covering all of `0..n`.
    pub fn is_full_partition(&self, n: usize) -> bool {
        if !self.is_disjoint_family() || self.blocks.iter().any(|b| b.universe() != n) {
            return false;
        }
        let covered: usize = self.blocks.iter().map(VertexSet::len).sum();
        covered == n
    }

    /// Label of each vertex, or `None` where uncovered.
    pub fn labels(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (i, b) in self.blocks.iter().enumerate() {
            for u in b.iter() {
                out[u] = Some(i);
            }
        }
        out
    }
}

/// Total weight of edges with exactly one endpoint in `s`.
pub fn cut_weight(g: &Graph, s: &VertexSet) -> f64 {
    g.edges
        .iter()
        .filter(|e| s.contains(e.u) != s.contains(e.v))
        .fold(0.0, |acc, e| acc + e.weight)
}

/// Total weight of edges with both endpoints in `s`.
pub fn internal_weight(g: &Graph, s: &VertexSet) -> f64 {
    g.edges
        .iter()
        .filter(|e| s.contains(e.u) && s.contains(e.v))
        .fold(0.0, |acc, e| acc + e.weight)
}

pub fn set_weight(g: &Graph, s: &VertexSet) -> f64 {
    s.iter().fold(0.0, |acc, u| acc + g.vertex_weights[u])
}

/// Expansion `cut(S) / w(S)` of a single set.
pub fn expansion(g: &Graph, s: &VertexSet) -> Result<f64, GraphError> {
    g.check_set(s)?;
    if s.is_empty() {
        return Err(GraphError::EmptySet);
    }
    let w = set_weight(g, s);
    if !(w > 0.0) {
        return Err(GraphError::ZeroWeight);
    }
    Ok(cut_weight(g, s) / w)
}

/// Largest block expansion of a family of sets.
pub fn max_expansion(g: &Graph, p: &Partition) -> Result<f64, GraphError> {
    let mut best = 0.0f64;
    for b in &p.blocks {
        best = best.max(expansion(g, b)?);
    }
    Ok(best)
}

/// Rounding functional: boundary edges weighted by the inside endpoint's
/// squared norm plus internal edges weighted by the norm difference.
pub fn nu(g: &Graph, s: &VertexSet, sdp: &GramSolution) -> Result<f64, GraphError> {
    g.check_set(s)?;
    if sdp.n() != g.n {
        return Err(GraphError::DimensionMismatch { expected: g.n, got: sdp.n() });
    }
    let norms: Vec<f64> = (0..g.n).map(|u| sdp.norm_sq(u)).collect();
    Ok(nu_from_norms(g, s, &norms))
}

pub(crate) fn nu_from_norms(g: &Graph, s: &VertexSet, norms_sq: &[f64]) -> f64 {
    let mut total = 0.0;
    for e in &g.edges {
        match (s.contains(e.u), s.contains(e.v)) {
            (true, true) => total += e.weight * (norms_sq[e.u] - norms_sq[e.v]).abs(),
            (true, false) => total += e.weight * norms_sq[e.u],
            (false, true) => total += e.weight * norms_sq[e.v],
            (false, false) => {}
        }
    }
    total
}

/// Small named graphs used throughout tests and examples.
pub mod families {
    use super::{Graph, GraphError};

    pub fn path(n: usize) -> Result<Graph, GraphError> {
        Graph::with_degree_weights(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect())
    }

    pub fn cycle(n: usize) -> Result<Graph, GraphError> {
        Graph::with_degree_weights(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect())
    }

    pub fn clique(n: usize) -> Result<Graph, GraphError> {
        Graph::with_degree_weights(n, clique_edges(0, n))
    }

    /// Disjoint union of cliques with the given sizes.
    pub fn clique_union(sizes: &[usize]) -> Result<Graph, GraphError> {
        let mut edges = Vec::new();
        let mut offset = 0;
        for &s in sizes {
            edges.extend(clique_edges(offset, s));
            offset += s;
        }
        Graph::with_degree_weights(offset, edges)
    }

    /// Two cliques of size `m` joined by a path with `bridge` internal vertices
    /// (`bridge = 0` joins them by a single edge).
    pub fn barbell(m: usize, bridge: usize) -> Result<Graph, GraphError> {
        let mut edges = clique_edges(0, m);
        edges.extend(clique_edges(m + bridge, m));
        let mut prev = m - 1;
        for b in 0..bridge {
            edges.push((prev, m + b, 1.0));
            prev = m + b;
        }
        edges.push((prev, m + bridge, 1.0));
        Graph::with_degree_weights(2 * m + bridge, edges)
    }

    fn clique_edges(offset: usize, size: usize) -> Vec<(usize, usize, f64)> {
        let mut edges = Vec::new();
        for i in 0..size {
            for j in i + 1..size {
                edges.push((offset + i, offset + j, 1.0));
            }
        }
        edges
    }
}
