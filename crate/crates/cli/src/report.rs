//! JSON rendering of run results. Every real number is written as a decimal
//! string in shortest round-trip form so reports compare byte for byte.

use kpart_core::graph::Graph;
use kpart_core::oracle::{GapInstance, SpectrumReport};
use kpart_core::rounding::{Diagnostics, PartitionReport, ReportKind, ReportedSet};
use kpart_core::sdp::{ConstraintFamily, FeasibilityReport, GramSolution, SdpProblem};
use kpart_core::separators::{AuditReport, PairCheck, RateCheck};
use kpart_core::solver::SolveStats;
use serde_json::{json, Map, Value};

pub fn dec(x: f64) -> Value {
    let x = if x == 0.0 { 0.0 } else { x };
    Value::String(if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    })
}

pub fn opt_dec(x: Option<f64>) -> Value {
    x.map_or(Value::Null, dec)
}

pub fn decs(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| dec(x)).collect())
}

pub fn graph_json(g: &Graph) -> Value {
    json!({
        "n": g.n(),
        "m": g.edges().len(),
        "degree_weights": g.degree_mode(),
        "total_vertex_weight": dec(g.total_weight()),
        "total_edge_weight": dec(g.total_edge_weight()),
    })
}

pub fn stats_json(stats: &SolveStats, timing: bool) -> Value {
    let mut v = json!({
        "iterations": stats.iterations,
        "primal_residual": dec(stats.primal_residual),
        "dual_residual": dec(stats.dual_residual),
        "lazy_constraints_added": stats.lazy_constraints_added,
        "lazy_violation_history": stats.lazy_violation_history,
        "penalty_updates": stats.penalty_updates,
        "converged": stats.converged,
    });
    if timing {
        v["wall_time_secs"] = dec(stats.wall_time_secs);
    }
    v
}

pub fn feasibility_json(report: &FeasibilityReport) -> Value {
    let mut residuals = Map::new();
    for family in ConstraintFamily::ALL {
        if let Some(r) = report.residual(family) {
            residuals.insert(family.name().into(), dec(r));
        }
    }
    json!({
        "tolerance": dec(report.tol),
        "residuals": residuals,
        "psd_residual": dec(report.psd_residual),
        "passes": report.passes(),
    })
}

pub fn sdp_json(
    prob: &SdpProblem,
    sol: &GramSolution,
    stats: &SolveStats,
    feas: &FeasibilityReport,
    timing: bool,
) -> Value {
    json!({
        "objective": dec(sol.objective_value),
        "balanced": prob.balanced(),
        "weight_scale": dec(prob.weight_scale()),
        "max_violation": dec(sol.max_violation),
        "min_eigenvalue": dec(sol.min_eigenvalue()),
        "constraints": {
            "equalities": prob.equalities().len(),
            "materialized_inequalities": prob.inequalities().len(),
        },
        "feasibility": feasibility_json(feas),
        "stats": stats_json(stats, timing),
    })
}

fn set_json(s: &ReportedSet) -> Value {
    json!({
        "members": s.members,
        "weight": dec(s.weight),
        "expansion": dec(s.expansion),
        "mu": dec(s.mu),
        "nu": opt_dec(s.nu),
        "threshold": opt_dec(s.threshold),
    })
}

fn diagnostics_json(d: &Diagnostics) -> Value {
    json!({
        "seed": d.seed.to_string(),
        "repetition": d.repetition,
        "repetitions": d.repetitions,
        "successful_repetitions": d.successful_repetitions,
        "sample_cap": d.sample_cap,
        "samples_drawn": d.samples_drawn,
        "trimmed_away": d.trimmed_away,
        "separator": {
            "alpha": dec(d.separator_alpha),
            "m": dec(d.separator_m),
            "beta": dec(d.separator_beta),
            "threshold": dec(d.separator_threshold),
        },
        "peeled_sets": d.peeled_sets,
        "covered_mass": dec(d.covered_mass),
        "uncovered": d.uncovered,
        "z": dec(d.z_value),
        "certificate_count": d.certificate_count,
        "certificate_failures": d.certificate_failures,
        "needed": d.needed,
        "shortfall": d.shortfall,
        "selected_mass": dec(d.selected_mass),
        "embedding_perturbation": dec(d.embedding_perturbation),
        "complement_weight_fraction": opt_dec(d.complement_weight_fraction),
        "complement_expansion": opt_dec(d.complement_expansion),
        "uncovered_in_complement": d.uncovered_in_complement,
        "merge_input_mass": opt_dec(d.merge_input_mass),
        "merge_count_bound": d.merge_count_bound,
        "max_expansion_before_merge": opt_dec(d.max_expansion_before_merge),
    })
}

pub fn partition_json(r: &PartitionReport) -> Value {
    let kind = match r.kind {
        ReportKind::Disjoint => "disjoint",
        ReportKind::Partition => "partition",
        ReportKind::Balanced => "balanced",
    };
    json!({
        "kind": kind,
        "k": r.k,
        "epsilon": dec(r.epsilon),
        "sets": r.sets.iter().map(set_json).collect::<Vec<_>>(),
        "max_expansion": dec(r.max_expansion),
        "sdp_objective": opt_dec(r.sdp_objective),
        "k_prime": r.k_prime,
        "k_double_prime": r.k_double_prime,
        "covers": r.covers,
        "diagnostics": diagnostics_json(&r.diagnostics),
    })
}

pub fn spectrum_json(s: &SpectrumReport, k: Option<usize>) -> Value {
    json!({
        "eigenvalues": decs(&s.eigenvalues),
        "k": k,
        "lambda_k": opt_dec(k.and_then(|k| s.lambda(k))),
    })
}

pub fn gap_json(d: &GapInstance) -> Value {
    json!({
        "n": d.n,
        "k": d.k,
        "clique_sizes": [d.first_clique, d.n - d.first_clique],
        "scale_sq": d.scale_sq.to_string(),
        "alpha": d.alpha.to_string(),
        "feasible": d.feasible(),
        "checks": d.checks.iter().map(|c| json!({"name": c.name, "holds": c.holds})).collect::<Vec<_>>(),
        "assignment": d.assignment,
        "identity_support": d.identity_support,
        "brute_force_value": dec(d.brute_force_value),
        "brute_force_partition": d.brute_force_partition.blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>(),
        "transcript": d.transcript,
    })
}

fn rate_json(r: &RateCheck) -> Value {
    json!({
        "empirical": dec(r.empirical),
        "expected": dec(r.expected),
        "sigma": dec(r.sigma),
    })
}

fn pair_json(p: &PairCheck) -> Value {
    json!({
        "u": p.u,
        "v": p.v,
        "inner": dec(p.inner),
        "distance": dec(p.distance),
        "rate": rate_json(&p.rate),
    })
}

pub fn audit_json(a: &AuditReport) -> Value {
    json!({
        "samples": a.samples,
        "empty_samples": a.empty_samples,
        "alpha": dec(a.params.alpha),
        "m": dec(a.params.m),
        "beta": dec(a.params.beta),
        "threshold": dec(a.params.threshold),
        "inclusion": a.inclusion.iter().map(rate_json).collect::<Vec<_>>(),
        "inclusion_within_4_sigma": a.inclusion_ok(),
        "joint": a.joint.iter().map(pair_json).collect::<Vec<_>>(),
        "joint_below_bound": a.joint_ok(),
        "separation": a.separation.iter().map(pair_json).collect::<Vec<_>>(),
        "distortion_constant": dec(a.distortion_constant),
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values are always serializable");
    s.push('\n');
    s
}
