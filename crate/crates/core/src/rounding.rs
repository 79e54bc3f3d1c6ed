//! Rounding SDP embeddings into disjoint low-expansion sets, full partitions
//! and balanced families.
//!
//! One run samples orthogonal separators, trims heavy samples, peels them into
//! disjoint sets, threshold-rounds each set by the squared norms, and keeps the
//! sets with the smallest expansion.

use rayon::prelude::*;
use thiserror::Error;

use crate::embedding::{measure, EmbeddedPoints};
use crate::graph::{cut_weight, expansion, nu_from_norms, set_weight, Graph, VertexSet};
use crate::separators::{
    check_unit_norms, stream_rng, GaussianSeparator, OrthogonalSeparator, SeparatorError, SeparatorMode,
    SeparatorParams,
};

/// Hard cap on separator samples per run.
pub const MAX_SAMPLES: usize = 2_000_000;
/// Cap on the default number of repetitions.
pub const MAX_DEFAULT_REPETITIONS: usize = 32;
const BATCH: usize = 256;
const COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoundingError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("only {found} non-empty sets, {needed} needed")]
    Shortfall { found: usize, needed: usize, report: Box<PartitionReport> },
    #[error("candidate set is empty")]
    EmptyCandidate,
    #[error("no merged set reaches weight 1/2 (input mass {mass})")]
    InsufficientMass { mass: f64 },
    #[error("embedding has {got} points, graph has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Separator(#[from] SeparatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RoundingMode {
    #[default]
    Plain,
    Balanced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingConfig {
    pub k: usize,
    pub epsilon: f64,
    /// Maximum separators per run; `None` means `min(2n/α, MAX_SAMPLES)`.
    pub t_cap: Option<usize>,
    /// Independent runs for the partition path; `None` means `min(n, 32)`.
    pub repetitions: Option<usize>,
    pub mode: RoundingMode,
    pub separator: SeparatorMode,
    pub seed: u64,
}

impl RoundingConfig {
    pub fn new(k: usize, epsilon: f64, seed: u64) -> Result<Self, RoundingError> {
        let cfg = RoundingConfig {
            k,
            epsilon,
            t_cap: None,
            repetitions: None,
            mode: RoundingMode::Plain,
            separator: SeparatorMode::Rescaled,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RoundingError> {
        if self.k < 2 {
            return Err(RoundingError::BadConfig(format!("k = {} must be at least 2", self.k)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(RoundingError::BadConfig(format!("ε = {} must lie in (0, 1)", self.epsilon)));
        }
        if self.t_cap == Some(0) || self.repetitions == Some(0) {
            return Err(RoundingError::BadConfig("sample cap and repetitions must be positive".into()));
        }
        Ok(())
    }

    /// Separator with orthogonality `m = 12k/ε` and threshold `β = 1 − ε/4`.
    pub fn separator_params(&self, n: usize) -> Result<SeparatorParams, SeparatorError> {
        let m = 12.0 * self.k as f64 / self.epsilon;
        SeparatorParams::new(m, 1.0 - self.epsilon / 4.0, self.separator, n)
    }

    pub fn sample_cap(&self, n: usize, alpha: f64) -> usize {
        self.t_cap.unwrap_or_else(|| {
            let t = 2.0 * n as f64 / alpha;
            if t >= MAX_SAMPLES as f64 {
                MAX_SAMPLES
            } else {
                t.ceil() as usize
            }
        })
    }

    pub fn repetitions_for(&self, n: usize) -> usize {
        self.repetitions.unwrap_or(n.clamp(1, MAX_DEFAULT_REPETITIONS))
    }

    /// `⌈(1−ε)k⌉` sets required from one run.
    pub fn needed(&self) -> usize {
        ceil_slack((1.0 - self.epsilon) * self.k as f64)
    }
}

/// `⌈x⌉`, treating values within rounding error of an integer as that integer.
pub fn ceil_slack(x: f64) -> usize {
    (x - COUNT_SLACK).ceil().max(0.0) as usize
}

/// `⌊x⌋`, treating values within rounding error of an integer as that integer.
pub fn floor_slack(x: f64) -> usize {
    (x + COUNT_SLACK).floor().max(0.0) as usize
}

/// Seed of repetition `rep` derived from a master seed.
pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    let mut z = seed ^ (rep as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Sampled,
    Trimmed,
    Peeled,
    Rounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub stage: Stage,
    pub members: VertexSet,
    pub sample_index: usize,
    pub mu_value: f64,
    pub nu_value: Option<f64>,
    /// `μ(S″)/k`.
    pub lambda: Option<f64>,
    pub threshold: Option<f64>,
    pub expansion: Option<f64>,
    /// Smallest `cut(L_r)/w(L_r)` over all candidate thresholds.
    pub best_level_expansion: Option<f64>,
}

impl CandidateSet {
    pub fn sampled(points: &EmbeddedPoints, members: VertexSet, sample_index: usize) -> Self {
        CandidateSet {
            stage: Stage::Sampled,
            mu_value: measure(points, &members),
            members,
            sample_index,
            nu_value: None,
            lambda: None,
            threshold: None,
            expansion: None,
            best_level_expansion: None,
        }
    }

    fn expansion_key(&self) -> f64 {
        self.expansion.unwrap_or(f64::INFINITY)
    }
}

/// Keeps the sample only if `μ(S) ≤ 1 + ε/2`.
pub fn trim_by_measure(sample: &CandidateSet, points: &EmbeddedPoints, epsilon: f64) -> CandidateSet {
    let mu = measure(points, &sample.members);
    let members =
        if mu <= 1.0 + epsilon / 2.0 { sample.members.clone() } else { VertexSet::empty(sample.members.universe()) };
    CandidateSet { stage: Stage::Trimmed, mu_value: measure(points, &members), members, ..sample.clone() }
}

/// Removes from each set the vertices covered by earlier sets.
pub fn peel(points: &EmbeddedPoints, sets: &[CandidateSet]) -> Vec<CandidateSet> {
    let Some(first) = sets.first() else { return Vec::new() };
    let mut covered = VertexSet::empty(first.members.universe());
    sets.iter()
        .map(|s| {
            let members = s.members.difference(&covered);
            covered.union_with(&s.members);
            CandidateSet { stage: Stage::Peeled, mu_value: measure(points, &members), members, ..s.clone() }
        })
        .collect()
}

fn expansion_or_inf(g: &Graph, s: &VertexSet) -> f64 {
    expansion(g, s).unwrap_or(f64::INFINITY)
}

/// Picks the sublevel set `{u ∈ S″ : ‖ū‖² ≥ r}` of smallest expansion.
pub fn threshold_round(
    g: &Graph,
    points: &EmbeddedPoints,
    s: &CandidateSet,
    mode: RoundingMode,
    epsilon: f64,
) -> Result<CandidateSet, RoundingError> {
    if s.members.is_empty() {
        return Err(RoundingError::EmptyCandidate);
    }
    let mut levels: Vec<f64> = s.members.iter().map(|u| points.norms_sq[u]).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let floor = (1.0 - epsilon / 2.0) * s.mu_value - 1e-12;

    let mut best: Option<(f64, f64, f64, VertexSet)> = None;
    let mut best_any = f64::INFINITY;
    for &r in &levels {
        let level = VertexSet::from_mask(
            (0..s.members.universe()).map(|u| s.members.contains(u) && points.norms_sq[u] >= r).collect(),
        );
        let w = set_weight(g, &level);
        let phi = if w > 0.0 { cut_weight(g, &level) / w } else { f64::INFINITY };
        best_any = best_any.min(phi);
        if mode == RoundingMode::Balanced && measure(points, &level) < floor {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bphi, bw, br, _)) => phi < *bphi || (phi == *bphi && (w > *bw || (w == *bw && r < *br))),
        };
        if better {
            best = Some((phi, w, r, level));
        }
    }
    let (_, _, r, members) = best.expect("the lowest level contains all of S″");
    let expansion = expansion(g, &members).ok();
    Ok(CandidateSet {
        stage: Stage::Rounded,
        mu_value: measure(points, &members),
        members,
        threshold: Some(r),
        expansion,
        best_level_expansion: Some(best_any),
        ..s.clone()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub sets: Vec<CandidateSet>,
    pub needed: usize,
    pub shortfall: bool,
}

/// Keeps up to `⌈(1−ε)k⌉` non-empty sets of smallest expansion.
pub fn select_sets(candidates: &[CandidateSet], k: usize, epsilon: f64) -> Selection {
    let needed = ceil_slack((1.0 - epsilon) * k as f64);
    let mut sets: Vec<CandidateSet> = candidates.iter().filter(|c| !c.members.is_empty()).cloned().collect();
    sets.sort_by(|a, b| a.expansion_key().total_cmp(&b.expansion_key()));
    sets.truncate(needed);
    Selection { shortfall: sets.len() < needed, needed, sets }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Disjoint,
    Partition,
    Balanced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportedSet {
    pub members: Vec<usize>,
    pub weight: f64,
    pub expansion: f64,
    pub mu: f64,
    pub nu: Option<f64>,
    pub threshold: Option<f64>,
}

impl ReportedSet {
    fn new(g: &Graph, points: &EmbeddedPoints, members: &VertexSet) -> Self {
        ReportedSet {
            members: members.to_vec(),
            weight: set_weight(g, members),
            expansion: expansion_or_inf(g, members),
            mu: measure(points, members),
            nu: None,
            threshold: None,
        }
    }

    fn from_candidate(g: &Graph, points: &EmbeddedPoints, c: &CandidateSet) -> Self {
        ReportedSet { nu: c.nu_value, threshold: c.threshold, ..ReportedSet::new(g, points, &c.members) }
    }

    pub fn vertex_set(&self, n: usize) -> VertexSet {
        VertexSet::from_indices(n, self.members.iter().copied())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub seed: u64,
    pub repetition: Option<usize>,
    pub repetitions: usize,
    pub successful_repetitions: usize,
    pub sample_cap: usize,
    pub samples_drawn: usize,
    pub trimmed_away: usize,
    pub separator_alpha: f64,
    pub separator_m: f64,
    pub separator_beta: f64,
    pub separator_threshold: f64,
    /// Non-empty peeled sets.
    pub peeled_sets: usize,
    /// `μ` of the union of the peeled sets.
    pub covered_mass: f64,
    pub uncovered: Vec<usize>,
    /// `Z = (1/k) Σ ν(S″)`.
    pub z_value: f64,
    /// Sets with `ν(S″)/μ(S″) ≤ 3Z/ε`.
    pub certificate_count: usize,
    /// Plain-mode sets whose best threshold level exceeds `ν(S″)/μ(S″)`.
    pub certificate_failures: usize,
    pub needed: usize,
    pub shortfall: bool,
    /// Weight of the selected sets in the units of the embedding weights.
    pub selected_mass: f64,
    pub embedding_perturbation: f64,
    pub complement_weight_fraction: Option<f64>,
    pub complement_expansion: Option<f64>,
    pub uncovered_in_complement: Option<usize>,
    pub merge_input_mass: Option<f64>,
    pub merge_count_bound: Option<usize>,
    pub max_expansion_before_merge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub kind: ReportKind,
    pub k: usize,
    pub epsilon: f64,
    pub sets: Vec<ReportedSet>,
    pub max_expansion: f64,
    /// Disjoint sets produced by the rounding run.
    pub k_prime: usize,
    /// Sets kept before the complement when completing to a partition.
    pub k_double_prime: Option<usize>,
    /// Whether the reported sets (partition) or the peeled sets (disjoint) cover V.
    pub covers: bool,
    pub sdp_objective: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl PartitionReport {
    pub fn vertex_sets(&self, n: usize) -> Vec<VertexSet> {
        self.sets.iter().map(|s| s.vertex_set(n)).collect()
    }

    pub fn is_disjoint(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.sets.iter().flat_map(|s| &s.members).all(|&u| !std::mem::replace(&mut seen[u], true))
    }

    pub fn is_full_partition(&self, n: usize) -> bool {
        self.is_disjoint(n) && self.sets.iter().map(|s| s.members.len()).sum::<usize>() == n
    }
}

fn max_of(sets: &[ReportedSet]) -> f64 {
    sets.iter().map(|s| s.expansion).fold(0.0, f64::max)
}

fn check_dims(g: &Graph, points: &EmbeddedPoints) -> Result<(), RoundingError> {
    if points.n() != g.n() {
        return Err(RoundingError::DimensionMismatch { expected: g.n(), got: points.n() });
    }
    Ok(())
}

/// One run of the disjoint-set generator with the configured seed.
pub fn round_disjoint(g: &Graph, points: &EmbeddedPoints, cfg: &RoundingConfig) -> Result<PartitionReport, RoundingError> {
    cfg.validate()?;
    check_dims(g, points)?;
    check_unit_norms(points)?;
    let separator = GaussianSeparator { params: cfg.separator_params(g.n())? };
    round_disjoint_with(g, points, cfg, &separator)
}

pub fn round_disjoint_with<S: OrthogonalSeparator>(
    g: &Graph,
    points: &EmbeddedPoints,
    cfg: &RoundingConfig,
    separator: &S,
) -> Result<PartitionReport, RoundingError> {
    let n = g.n();
    let params = *separator.params();
    let cap = cfg.sample_cap(n, params.alpha);

    let mut covered = VertexSet::empty(n);
    let mut peeled = Vec::new();
    let mut drawn = 0;
    let mut trimmed_away = 0;
    'sampling: while drawn < cap && covered.len() < n {
        let end = (drawn + BATCH).min(cap);
        let batch: Vec<(bool, CandidateSet)> = (drawn..end)
            .into_par_iter()
            .map(|i| {
                let s = separator.sample(points, &mut stream_rng(cfg.seed, i as u64));
                let sampled = CandidateSet::sampled(points, s.members, i);
                (sampled.members.is_empty(), trim_by_measure(&sampled, points, cfg.epsilon))
            })
            .collect();
        for (was_empty, c) in batch {
            drawn += 1;
            if c.members.is_empty() {
                trimmed_away += usize::from(!was_empty);
                continue;
            }
            let fresh = c.members.difference(&covered);
            covered.union_with(&c.members);
            if fresh.is_empty() {
                continue;
            }
            peeled.push(CandidateSet { stage: Stage::Peeled, mu_value: measure(points, &fresh), members: fresh, ..c });
            if covered.len() == n {
                break 'sampling;
            }
        }
    }

    let k = cfg.k as f64;
    for c in &mut peeled {
        c.nu_value = Some(nu_from_norms(g, &c.members, &points.norms_sq));
        c.lambda = Some(c.mu_value / k);
    }
    let z_value = peeled.iter().map(|c| c.nu_value.unwrap_or(0.0)).sum::<f64>() / k;
    let certificate_bound = 3.0 * z_value / cfg.epsilon;
    let in_certificate =
        |c: &CandidateSet| c.nu_value.unwrap_or(0.0) <= certificate_bound * c.mu_value * (1.0 + 1e-12);
    let certificate_count = peeled.iter().filter(|c| in_certificate(c)).count();

    let rounded: Vec<CandidateSet> = peeled
        .iter()
        .map(|c| threshold_round(g, points, c, cfg.mode, cfg.epsilon))
        .collect::<Result<_, _>>()?;
    let certificate_failures = match cfg.mode {
        RoundingMode::Plain => rounded
            .iter()
            .zip(&peeled)
            .filter(|(r, p)| {
                let ratio = p.nu_value.unwrap_or(0.0) / p.mu_value;
                r.best_level_expansion.unwrap_or(f64::INFINITY) > ratio * (1.0 + 1e-9) + 1e-12
            })
            .count(),
        RoundingMode::Balanced => 0,
    };

    let (selection, needed, shortfall) = match cfg.mode {
        RoundingMode::Plain => {
            let sel = select_sets(&rounded, cfg.k, cfg.epsilon);
            (sel.sets, sel.needed, sel.shortfall)
        }
        RoundingMode::Balanced => {
            let mut sets: Vec<CandidateSet> = rounded
                .iter()
                .zip(&peeled)
                .filter(|(_, p)| in_certificate(p))
                .map(|(r, _)| r.clone())
                .collect();
            sets.sort_by(|a, b| a.expansion_key().total_cmp(&b.expansion_key()));
            let mass: f64 = sets.iter().map(|s| s.members.iter().map(|u| points.weights[u]).sum::<f64>()).sum();
            let needed = cfg.needed();
            let short = sets.is_empty() || mass < (1.0 - cfg.epsilon) * k - 1e-9;
            (sets, needed, short)
        }
    };

    let sets: Vec<ReportedSet> = selection.iter().map(|c| ReportedSet::from_candidate(g, points, c)).collect();
    let selected_mass = selection.iter().flat_map(|c| c.members.iter()).map(|u| points.weights[u]).sum();
    let diagnostics = Diagnostics {
        seed: cfg.seed,
        repetitions: 1,
        successful_repetitions: usize::from(!shortfall),
        sample_cap: cap,
        samples_drawn: drawn,
        trimmed_away,
        separator_alpha: params.alpha,
        separator_m: params.m,
        separator_beta: params.beta,
        separator_threshold: params.threshold,
        peeled_sets: peeled.len(),
        covered_mass: measure(points, &covered),
        uncovered: covered.complement().to_vec(),
        z_value,
        certificate_count,
        certificate_failures,
        needed,
        shortfall,
        selected_mass,
        embedding_perturbation: points.perturbation,
        ..Default::default()
    };
    let report = PartitionReport {
        kind: ReportKind::Disjoint,
        k: cfg.k,
        epsilon: cfg.epsilon,
        max_expansion: max_of(&sets),
        k_prime: sets.len(),
        k_double_prime: None,
        covers: covered.len() == n,
        sdp_objective: None,
        sets,
        diagnostics,
    };
    let empty_plain = cfg.mode == RoundingMode::Plain && shortfall;
    if empty_plain || report.sets.is_empty() {
        return Err(RoundingError::Shortfall { found: report.sets.len(), needed, report: Box::new(report) });
    }
    Ok(report)
}

/// Keeps the `⌊(1−ε)k′⌋` lightest disjoint sets and adds their complement.
pub fn complete_partition(
    g: &Graph,
    points: &EmbeddedPoints,
    disjoint: &PartitionReport,
    epsilon: f64,
) -> PartitionReport {
    let n = g.n();
    let mut order: Vec<&ReportedSet> = disjoint.sets.iter().collect();
    order.sort_by(|a, b| a.weight.total_cmp(&b.weight).then_with(|| a.members.cmp(&b.members)));
    let keep = floor_slack((1.0 - epsilon) * disjoint.k_prime as f64).min(order.len());

    let mut sets: Vec<ReportedSet> = Vec::with_capacity(keep + 1);
    let mut union = VertexSet::empty(n);
    for s in &order[..keep] {
        let members = s.vertex_set(n);
        union.union_with(&members);
        sets.push(ReportedSet { nu: s.nu, threshold: s.threshold, ..ReportedSet::new(g, points, &members) });
    }
    let complement = union.complement();
    let uncovered = disjoint.diagnostics.uncovered.iter().filter(|&&u| complement.contains(u)).count();
    let comp = ReportedSet::new(g, points, &complement);
    let diagnostics = Diagnostics {
        complement_weight_fraction: Some(comp.weight / g.total_weight()),
        complement_expansion: Some(comp.expansion),
        uncovered_in_complement: Some(uncovered),
        ..disjoint.diagnostics.clone()
    };
    if !complement.is_empty() {
        sets.push(comp);
    }
    PartitionReport {
        kind: ReportKind::Partition,
        k: disjoint.k,
        epsilon,
        max_expansion: max_of(&sets),
        k_prime: disjoint.k_prime,
        k_double_prime: Some(keep),
        covers: true,
        sdp_objective: disjoint.sdp_objective,
        sets,
        diagnostics,
    }
}

/// Merges light sets pairwise and keeps every merged set of weight at least
/// 1/2, measured with the embedding weights (which sum to k).
pub fn balanced_merge(
    g: &Graph,
    points: &EmbeddedPoints,
    disjoint: &PartitionReport,
    epsilon: f64,
) -> Result<PartitionReport, RoundingError> {
    let n = g.n();
    let rescaled = |s: &VertexSet| s.iter().map(|u| points.weights[u]).sum::<f64>();
    let mut blocks: Vec<(f64, VertexSet)> = disjoint
        .sets
        .iter()
        .map(|s| {
            let v = s.vertex_set(n);
            (rescaled(&v), v)
        })
        .collect();
    let input_mass: f64 = blocks.iter().map(|b| b.0).sum();
    let by_weight = |a: &(f64, VertexSet), b: &(f64, VertexSet)| a.0.total_cmp(&b.0).then_with(|| a.1.to_vec().cmp(&b.1.to_vec()));
    loop {
        blocks.sort_by(by_weight);
        if blocks.len() < 2 || blocks[1].0 > 0.5 {
            break;
        }
        let (wa, a) = blocks.remove(0);
        let (wb, b) = blocks.remove(0);
        blocks.push((wa + wb, a.union(&b)));
    }
    let sets: Vec<ReportedSet> =
        blocks.iter().filter(|b| b.0 >= 0.5).map(|b| ReportedSet::new(g, points, &b.1)).collect();
    if sets.is_empty() {
        return Err(RoundingError::InsufficientMass { mass: input_mass });
    }
    let diagnostics = Diagnostics {
        merge_input_mass: Some(input_mass),
        merge_count_bound: Some(ceil_slack((1.0 - 4.0 * epsilon) * disjoint.k as f64)),
        max_expansion_before_merge: Some(disjoint.max_expansion),
        ..disjoint.diagnostics.clone()
    };
    Ok(PartitionReport {
        kind: ReportKind::Balanced,
        k: disjoint.k,
        epsilon,
        max_expansion: max_of(&sets),
        k_prime: disjoint.k_prime,
        k_double_prime: None,
        covers: sets.iter().map(|s| s.members.len()).sum::<usize>() == n,
        sdp_objective: disjoint.sdp_objective,
        sets,
        diagnostics,
    })
}

fn run_repetitions<F>(g: &Graph, cfg: &RoundingConfig, run: F) -> Result<PartitionReport, RoundingError>
where
    F: Fn(&RoundingConfig) -> Result<(PartitionReport, PartitionReport), RoundingError> + Sync,
{
    cfg.validate()?;
    let reps = cfg.repetitions_for(g.n());
    let outcomes: Vec<Result<(PartitionReport, PartitionReport), RoundingError>> = (0..reps)
        .into_par_iter()
        .map(|rep| run(&RoundingConfig { seed: repetition_seed(cfg.seed, rep), ..cfg.clone() }))
        .collect();
    let successes = outcomes.iter().filter(|o| o.is_ok()).count();
    let mut best: Option<(usize, PartitionReport, PartitionReport)> = None;
    let mut first_error = None;
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((disjoint, output)) => {
                let better = best.as_ref().is_none_or(|(_, bd, bo)| {
                    (output.max_expansion, disjoint.max_expansion) < (bo.max_expansion, bd.max_expansion)
                });
                if better {
                    best = Some((rep, disjoint, output));
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    match best {
        Some((rep, _, mut output)) => {
            output.diagnostics.repetition = Some(rep);
            output.diagnostics.repetitions = reps;
            output.diagnostics.successful_repetitions = successes;
            Ok(output)
        }
        None => Err(first_error.expect("at least one repetition ran")),
    }
}

/// Repeated disjoint rounding completed to a full partition; keeps the run
/// whose partition has the smallest max expansion.
pub fn round_partition(g: &Graph, points: &EmbeddedPoints, cfg: &RoundingConfig) -> Result<PartitionReport, RoundingError> {
    let cfg = RoundingConfig { mode: RoundingMode::Plain, ..cfg.clone() };
    run_repetitions(g, &cfg, |c| {
        let disjoint = round_disjoint(g, points, c)?;
        let full = complete_partition(g, points, &disjoint, c.epsilon);
        Ok((disjoint, full))
    })
}

/// Repeated balanced rounding followed by the merge; `points` must come from
/// the balanced relaxation.
pub fn round_balanced(g: &Graph, points: &EmbeddedPoints, cfg: &RoundingConfig) -> Result<PartitionReport, RoundingError> {
    let cfg = RoundingConfig { mode: RoundingMode::Balanced, ..cfg.clone() };
    run_repetitions(g, &cfg, |c| {
        let disjoint = round_disjoint(g, points, c)?;
        let merged = balanced_merge(g, points, &disjoint, c.epsilon)?;
        Ok((disjoint, merged))
    })
}
