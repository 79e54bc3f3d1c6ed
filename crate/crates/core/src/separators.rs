//! Gaussian threshold orthogonal separators over unit vectors.
//!
//! A separator is a random subset of the vertices, drawn from a distribution
//! parameterized by a distortion ratio `m` and an orthogonality parameter
//! `β`. Two samplers are provided: the raw threshold rule `⟨ψ_u, γ⟩ ≥ t` and
//! the rescaled variant that conditions on a uniformly chosen index and
//! achieves inclusion probability exactly `1/n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::erf::{erfc, erfc_inv};
use thiserror::Error;

use crate::embedding::EmbeddedPoints;
use crate::graph::VertexSet;

const UNIT_TOL: f64 = 1e-6;
pub const MIN_AUDIT_SAMPLES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeparatorError {
    #[error("distortion ratio m = {0} must be at least 2")]
    BadRatio(f64),
    #[error("orthogonality parameter β = {0} must lie in (0, 1)")]
    BadBeta(f64),
    #[error("rescaled mode needs at least one point")]
    NoPoints,
    #[error("threshold probability {0:e} underflows")]
    Underflow(f64),
    #[error("vector {vertex} has norm {norm}, expected 1")]
    NotUnitNorm { vertex: usize, norm: f64 },
    #[error("audit needs at least {MIN_AUDIT_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
}

/// `Φ̄(t) = P[N(0,1) ≥ t]`.
pub fn gaussian_tail(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

pub fn gaussian_density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Φ̄⁻¹(p)` for `p ∈ (0, 1)`, polished with Newton steps on `ln Φ̄` so the
/// result stays accurate in relative terms for very small `p`.
pub fn inverse_gaussian_tail(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "tail probability {p} outside (0, 1)");
    let mut t = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let target = p.ln();
    for _ in 0..4 {
        let tail = gaussian_tail(t);
        if !(tail > 0.0) {
            break;
        }
        let step = (tail.ln() - target) * tail / gaussian_density(t);
        if !step.is_finite() {
            break;
        }
        t += step;
        if step.abs() <= 1e-15 * t.abs().max(1.0) {
            break;
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparatorMode {
    Raw,
    #[default]
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatorParams {
    pub m: f64,
    pub beta: f64,
    pub mode: SeparatorMode,
    /// Number of points the separator is applied to.
    pub n: usize,
    /// `m' = m^((1+β)/(1-β))`, kept as a logarithm since it overflows easily.
    pub ln_m_prime: f64,
    /// `t = Φ̄⁻¹(1/m')`.
    pub threshold: f64,
    /// `Φ̄(t)`, the per-vertex inclusion probability of the raw sampler.
    pub tail_mass: f64,
    /// Declared probability scale: `1/m'` for the raw sampler, `1/n` for the
    /// rescaled one.
    pub alpha: f64,
}

impl SeparatorParams {
    pub fn new(m: f64, beta: f64, mode: SeparatorMode, n: usize) -> Result<Self, SeparatorError> {
        if !(m >= 2.0) || !m.is_finite() {
            return Err(SeparatorError::BadRatio(m));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(SeparatorError::BadBeta(beta));
        }
        if mode == SeparatorMode::Rescaled && n == 0 {
            return Err(SeparatorError::NoPoints);
        }
        let ln_m_prime = (1.0 + beta) / (1.0 - beta) * m.ln();
        let tail_mass = (-ln_m_prime).exp();
        if !(tail_mass > 1e-300) {
            return Err(SeparatorError::Underflow(tail_mass));
        }
        let threshold = inverse_gaussian_tail(tail_mass);
        let alpha = match mode {
            SeparatorMode::Raw => tail_mass,
            SeparatorMode::Rescaled => 1.0 / n as f64,
        };
        Ok(SeparatorParams { m, beta, mode, n, ln_m_prime, threshold, tail_mass, alpha })
    }

    pub fn m_prime(&self) -> f64 {
        self.ln_m_prime.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorSample {
    pub members: VertexSet,
    /// The direction the threshold was applied to.
    pub gamma: Vec<f64>,
    /// Conditioning index of the rescaled sampler.
    pub index: Option<usize>,
}

/// A distribution over vertex subsets with declared probability scale
/// `alpha`, distortion `m` and orthogonality `β`.
pub trait OrthogonalSeparator: Sync {
    fn params(&self) -> &SeparatorParams;

    fn sample(&self, points: &EmbeddedPoints, rng: &mut ChaCha8Rng) -> SeparatorSample;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSeparator {
    pub params: SeparatorParams,
}

impl OrthogonalSeparator for GaussianSeparator {
    fn params(&self) -> &SeparatorParams {
        &self.params
    }

    fn sample(&self, points: &EmbeddedPoints, rng: &mut ChaCha8Rng) -> SeparatorSample {
        match self.params.mode {
            SeparatorMode::Raw => raw_sample(points, &self.params, rng),
            SeparatorMode::Rescaled => rescaled_sample(points, &self.params, rng),
        }
    }
}

/// Independent generator for sample `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn check_unit_norms(points: &EmbeddedPoints) -> Result<(), SeparatorError> {
    for u in 0..points.n() {
        let norm = points.psi.row(u).norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(SeparatorError::NotUnitNorm { vertex: u, norm });
        }
    }
    Ok(())
}

pub fn sample_separator(
    points: &EmbeddedPoints,
    params: &SeparatorParams,
    rng: &mut ChaCha8Rng,
) -> Result<SeparatorSample, SeparatorError> {
    check_unit_norms(points)?;
    Ok(GaussianSeparator { params: *params }.sample(points, rng))
}

fn gaussian_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// `{u : ⟨ψ_u, γ⟩ ≥ t}`.
pub fn threshold_set(points: &EmbeddedPoints, gamma: &[f64], t: f64) -> VertexSet {
    let mask = (0..points.n())
        .map(|u| {
            let dot: f64 = points.psi.row(u).iter().zip(gamma).map(|(a, b)| a * b).sum();
            dot >= t
        })
        .collect();
    VertexSet::from_mask(mask)
}

fn raw_sample(points: &EmbeddedPoints, params: &SeparatorParams, rng: &mut ChaCha8Rng) -> SeparatorSample {
    let gamma = gaussian_vector(points.dim(), rng);
    let members = threshold_set(points, &gamma, params.threshold);
    SeparatorSample { members, gamma, index: None }
}

fn rescaled_sample(points: &EmbeddedPoints, params: &SeparatorParams, rng: &mut ChaCha8Rng) -> SeparatorSample {
    let n = points.n();
    let iota = rng.random_range(0..n);
    let mut gamma = gaussian_vector(points.dim(), rng);
    // Along ψ_ι the component is a standard normal conditioned on being ≥ t.
    let u: f64 = 1.0 - rng.random::<f64>();
    let c = inverse_gaussian_tail(u * params.tail_mass).max(params.threshold);
    let axis = points.psi.row(iota);
    let along: f64 = axis.iter().zip(&gamma).map(|(a, b)| a * b).sum();
    for (g, a) in gamma.iter_mut().zip(axis.iter()) {
        *g += (c - along) * a;
    }
    let mut members = threshold_set(points, &gamma, params.threshold);
    if members.iter().next().is_some_and(|first| first < iota) {
        members = VertexSet::empty(n);
    }
    SeparatorSample { members, gamma, index: Some(iota) }
}

/// Empirical frequency with the expected value and a binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCheck {
    pub empirical: f64,
    pub expected: f64,
    pub sigma: f64,
}

impl RateCheck {
    fn new(hits: usize, samples: usize, expected: f64) -> Self {
        let s = samples as f64;
        RateCheck { empirical: hits as f64 / s, expected, sigma: (expected * (1.0 - expected) / s).sqrt() }
    }

    pub fn z_score(&self) -> f64 {
        if self.sigma > 0.0 {
            (self.empirical - self.expected) / self.sigma
        } else if self.empirical == self.expected {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// `|empirical - expected| ≤ 4σ`.
    pub fn within_four_sigma(&self) -> bool {
        self.z_score().abs() <= 4.0
    }

    /// `empirical ≤ expected + 4σ`.
    pub fn below_four_sigma(&self) -> bool {
        self.z_score() <= 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCheck {
    pub u: usize,
    pub v: usize,
    pub inner: f64,
    pub distance: f64,
    pub rate: RateCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub params: SeparatorParams,
    pub samples: usize,
    pub empty_samples: usize,
    pub inclusion: Vec<RateCheck>,
    /// Pairs with `⟨ψ_u, ψ_v⟩ ≤ β`; the expected value is the bound `α/m`.
    pub joint: Vec<PairCheck>,
    /// Pairs with positive distance; the expected value is `α‖ψ_u − ψ_v‖`.
    pub separation: Vec<PairCheck>,
    /// `max P[separated] / (α √ln m ‖ψ_u − ψ_v‖)` over pairs at positive distance.
    pub distortion_constant: f64,
}

impl AuditReport {
    pub fn inclusion_ok(&self) -> bool {
        self.inclusion.iter().all(RateCheck::within_four_sigma)
    }

    pub fn joint_ok(&self) -> bool {
        self.joint.iter().all(|p| p.rate.below_four_sigma())
    }
}

pub fn separator_property_audit(
    points: &EmbeddedPoints,
    params: &SeparatorParams,
    num_samples: usize,
    seed: u64,
) -> Result<AuditReport, SeparatorError> {
    audit_with(points, &GaussianSeparator { params: *params }, num_samples, seed)
}

pub fn audit_with<S: OrthogonalSeparator>(
    points: &EmbeddedPoints,
    separator: &S,
    num_samples: usize,
    seed: u64,
) -> Result<AuditReport, SeparatorError> {
    if num_samples < MIN_AUDIT_SAMPLES {
        return Err(SeparatorError::TooFewSamples(num_samples));
    }
    check_unit_norms(points)?;
    let n = points.n();
    let pair_index = |u: usize, v: usize| u * n + v;

    #[derive(Clone)]
    struct Counts {
        single: Vec<usize>,
        both: Vec<usize>,
        split: Vec<usize>,
        empty: usize,
    }
    let zero = || Counts { single: vec![0; n], both: vec![0; n * n], split: vec![0; n * n], empty: 0 };
    let counts = (0..num_samples)
        .into_par_iter()
        .fold(zero, |mut acc, i| {
            let s = separator.sample(points, &mut stream_rng(seed, i as u64));
            if s.members.is_empty() {
                acc.empty += 1;
                return acc;
            }
            for u in 0..n {
                let a = s.members.contains(u);
                acc.single[u] += a as usize;
                for v in u + 1..n {
                    let b = s.members.contains(v);
                    acc.both[pair_index(u, v)] += (a && b) as usize;
                    acc.split[pair_index(u, v)] += (a != b) as usize;
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            a.empty += b.empty;
            a.single.iter_mut().zip(&b.single).for_each(|(x, y)| *x += y);
            a.both.iter_mut().zip(&b.both).for_each(|(x, y)| *x += y);
            a.split.iter_mut().zip(&b.split).for_each(|(x, y)| *x += y);
            a
        });

    let p = separator.params();
    let alpha = p.alpha;
    let inclusion = counts.single.iter().map(|&h| RateCheck::new(h, num_samples, alpha)).collect();
    let mut joint = Vec::new();
    let mut separation = Vec::new();
    let mut distortion_constant: f64 = 0.0;
    for u in 0..n {
        for v in u + 1..n {
            let inner = points.inner(u, v);
            let distance = (2.0 - 2.0 * inner).max(0.0).sqrt();
            if inner <= p.beta {
                let rate = RateCheck::new(counts.both[pair_index(u, v)], num_samples, alpha / p.m);
                joint.push(PairCheck { u, v, inner, distance, rate });
            }
            if distance > 1e-9 {
                let expected = (alpha * distance).min(1.0);
                let rate = RateCheck::new(counts.split[pair_index(u, v)], num_samples, expected);
                distortion_constant = distortion_constant.max(rate.empirical / (alpha * p.m.ln().sqrt() * distance));
                separation.push(PairCheck { u, v, inner, distance, rate });
            }
        }
    }
    Ok(AuditReport {
        params: *p,
        samples: num_samples,
        empty_samples: counts.empty,
        inclusion,
        joint,
        separation,
        distortion_constant,
    })
}
