//! Subcommand implementations. Each produces a JSON report and an exit code.

use std::time::Instant;

use kpart_core::embedding::{psi_normalize, EmbedError, EmbeddedPoints};
use kpart_core::graph::{max_expansion, Graph};
use kpart_core::oracle::{
    assignment_gap_demo, brute_force_opt, brute_force_sparsest_cut, spectrum, OracleError, MAX_CUT_N,
    MAX_PARTITION_N,
};
use kpart_core::rounding::{
    round_balanced, round_disjoint, round_partition, RoundingConfig, RoundingError, RoundingMode,
};
use kpart_core::sdp::{build_sdp, check_feasibility, GramSolution, SdpError, SdpProblem, TrianglePolicy};
use kpart_core::separators::{separator_property_audit, SeparatorError, SeparatorMode, SeparatorParams};
use kpart_core::solver::{gram_factor, solve, FactorError, SolveError, SolveStats, SolverConfig};
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{AuditArgs, Command, GapArgs, GraphArgs, Mode, SeparatorKind};
use crate::format::{parse_graph, FormatError};
use crate::report::{self, dec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Residual tolerance used for the feasibility section of reports.
const REPORT_FEAS_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("balanced relaxation is infeasible: vertex {vertex} has rescaled weight {weight} > 1")]
    BalancedInfeasible { vertex: usize, weight: f64 },
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Separator(#[from] SeparatorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Format(_) | PipelineError::Usage(_) => EXIT_PARSE,
            PipelineError::Sdp(SdpError::BadK { .. }) => EXIT_PARSE,
            PipelineError::Rounding(RoundingError::BadConfig(_)) => EXIT_PARSE,
            PipelineError::Separator(SeparatorError::BadRatio(_) | SeparatorError::BadBeta(_)) => EXIT_PARSE,
            PipelineError::BalancedInfeasible { .. } => EXIT_INCOMPLETE,
            _ => EXIT_INTERNAL,
        }
    }
}

/// Report and exit status of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

pub fn run_command(command: &Command) -> Result<Outcome, PipelineError> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Round(a) => cmd_round(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Balanced(a) => cmd_balanced(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::GapDemo(a) => cmd_gap(a),
        Command::AuditSeparators(a) => cmd_audit(a),
    }
}

pub fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Solve(_) => "solve",
        Command::Round(_) => "round",
        Command::Partition(_) => "partition",
        Command::Balanced(_) => "balanced",
        Command::Oracle(_) => "oracle",
        Command::Spectrum(_) => "spectrum",
        Command::GapDemo(_) => "gap-demo",
        Command::AuditSeparators(_) => "audit-separators",
    }
}

/// Configuration resolved from flags, with the seed fixed.
struct Resolved {
    seed: u64,
    seed_generated: bool,
    policy: TrianglePolicy,
    started: Instant,
}

fn resolve(a: &GraphArgs) -> Resolved {
    let (seed, seed_generated) = match a.seed {
        Some(s) => (s, false),
        None => (rand::random(), true),
    };
    let policy = if a.eager { TrianglePolicy::Eager } else { TrianglePolicy::Lazy };
    Resolved { seed, seed_generated, policy, started: Instant::now() }
}

fn manifest(sub: &str, a: &GraphArgs, r: &Resolved, extra: Value) -> Value {
    let mut m = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": sub,
        "input": a.input.display().to_string(),
        "k": a.k,
        "epsilon": dec(a.epsilon),
        "mode": match a.mode { Mode::Plain => "plain", Mode::Balanced => "balanced" },
        "seed": r.seed.to_string(),
        "seed_generated": r.seed_generated,
        "triangles": match r.policy { TrianglePolicy::Eager => "eager", TrianglePolicy::Lazy => "lazy" },
        "tol_feas": dec(a.tol_feas),
        "max_iters": a.max_iters,
        "t_cap": a.t_cap,
        "repetitions": a.reps,
        "separator": separator_name(a.separator),
        "compare_oracle": a.compare_oracle,
    });
    if let Value::Object(extra) = extra {
        m.as_object_mut().expect("manifest is an object").extend(extra);
    }
    m
}

fn separator_name(s: SeparatorKind) -> &'static str {
    match s {
        SeparatorKind::Raw => "raw",
        SeparatorKind::Rescaled => "rescaled",
    }
}

fn finish(mut report: Value, a_timing: bool, r: &Resolved, exit_code: i32) -> Outcome {
    if a_timing {
        report["manifest"]["timing"] = json!({ "total_secs": dec(r.started.elapsed().as_secs_f64()) });
    }
    Outcome { report, exit_code }
}

fn require_k(a: &GraphArgs) -> Result<usize, PipelineError> {
    a.k.ok_or_else(|| PipelineError::Usage("--k is required".into()))
}

struct Solved {
    problem: SdpProblem,
    solution: GramSolution,
    stats: SolveStats,
}

impl Solved {
    fn converged(&self) -> bool {
        self.stats.converged
    }

    fn json(&self, timing: bool) -> Value {
        let feas = check_feasibility(&self.problem, &self.solution, REPORT_FEAS_TOL)
            .expect("solution has the problem's dimension");
        report::sdp_json(&self.problem, &self.solution, &self.stats, &feas, timing)
    }
}

/// Vertex whose rescaled weight exceeds 1, which makes `M_uu = 1` together
/// with the spreading constraint unsatisfiable.
pub fn balanced_obstruction(g: &Graph, k: usize) -> Option<(usize, f64)> {
    let scale = k as f64 / g.total_weight();
    (0..g.n()).map(|u| (u, g.weight(u) * scale)).find(|&(_, w)| w > 1.0 + 1e-12)
}

fn solve_relaxation(g: &Graph, k: usize, balanced: bool, a: &GraphArgs, r: &Resolved) -> Result<Solved, PipelineError> {
    if balanced {
        if let Some((vertex, weight)) = balanced_obstruction(g, k) {
            return Err(PipelineError::BalancedInfeasible { vertex, weight });
        }
    }
    let problem = build_sdp(g, k, balanced, r.policy)?;
    let cfg = SolverConfig { tol_feas: a.tol_feas, max_iters: a.max_iters, ..SolverConfig::default() };
    match solve(&problem, &cfg) {
        Ok((solution, stats)) => Ok(Solved { problem, solution, stats }),
        Err(SolveError::NotConverged { solution, stats }) => Ok(Solved { problem, solution: *solution, stats }),
        Err(e) => Err(e.into()),
    }
}

fn embed(solved: &Solved) -> Result<EmbeddedPoints, PipelineError> {
    let vectors = gram_factor(&solved.solution, 1e-9)?;
    Ok(psi_normalize(&vectors, solved.problem.weights())?)
}

fn rounding_config(a: &GraphArgs, k: usize, seed: u64, mode: RoundingMode) -> Result<RoundingConfig, PipelineError> {
    let cfg = RoundingConfig {
        t_cap: a.t_cap,
        repetitions: a.reps,
        mode,
        separator: match a.separator {
            SeparatorKind::Raw => SeparatorMode::Raw,
            SeparatorKind::Rescaled => SeparatorMode::Rescaled,
        },
        ..RoundingConfig::new(k, a.epsilon, seed)?
    };
    cfg.validate()?;
    Ok(cfg)
}

fn oracle_json(g: &Graph, k: usize, achieved: Option<f64>) -> Value {
    if g.n() > MAX_PARTITION_N || k > g.n() {
        return json!({ "available": false });
    }
    match brute_force_opt(g, k) {
        Ok((p, value)) => {
            let ratio = achieved.map(|x| if value > 0.0 { dec(x / value) } else { Value::Null });
            json!({
                "available": true,
                "value": dec(value),
                "partition": p.blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>(),
                "ratio": ratio,
            })
        }
        Err(e) => json!({ "available": false, "error": e.to_string() }),
    }
}

fn base_report(sub: &str, a: &GraphArgs, r: &Resolved, g: &Graph, extra: Value) -> Value {
    json!({
        "manifest": manifest(sub, a, r, extra),
        "graph": report::graph_json(g),
    })
}

fn cmd_solve(a: &GraphArgs) -> Result<Outcome, PipelineError> {
    let r = resolve(a);
    let g = parse_graph(&a.input)?;
    let k = require_k(a)?;
    let solved = solve_relaxation(&g, k, a.mode == Mode::Balanced, a, &r)?;
    let mut rep = base_report("solve", a, &r, &g, json!({}));
    rep["sdp"] = solved.json(a.output.timing);
    if a.compare_oracle {
        rep["oracle"] = oracle_json(&g, k, None);
    }
    let (status, code) = if solved.converged() { ("ok", EXIT_OK) } else { ("not_converged", EXIT_INCOMPLETE) };
    rep["status"] = status.into();
    Ok(finish(rep, a.output.timing, &r, code))
}

enum RoundKind {
    Disjoint,
    Partition,
    Balanced,
}

fn cmd_rounding(a: &GraphArgs, sub: &str, kind: RoundKind) -> Result<Outcome, PipelineError> {
    let r = resolve(a);
    let g = parse_graph(&a.input)?;
    let k = require_k(a)?;
    let balanced = match kind {
        RoundKind::Disjoint => a.mode == Mode::Balanced,
        RoundKind::Partition => {
            if a.mode == Mode::Balanced {
                return Err(PipelineError::Usage("`partition` supports only --mode plain; use `balanced`".into()));
            }
            false
        }
        RoundKind::Balanced => true,
    };
    let mode = if balanced { RoundingMode::Balanced } else { RoundingMode::Plain };
    let cfg = rounding_config(a, k, r.seed, mode)?;
    let extra = json!({
        "repetitions_effective": match kind { RoundKind::Disjoint => 1, _ => cfg.repetitions_for(g.n()) },
    });
    let mut rep = base_report(sub, a, &r, &g, extra);

    let solved = match solve_relaxation(&g, k, balanced, a, &r) {
        Err(PipelineError::BalancedInfeasible { vertex, weight }) => {
            rep["status"] = "infeasible".into();
            rep["error"] = format!("vertex {vertex} has rescaled weight {weight} > 1").into();
            return Ok(finish(rep, a.output.timing, &r, EXIT_INCOMPLETE));
        }
        other => other?,
    };
    rep["sdp"] = solved.json(a.output.timing);
    if !solved.converged() {
        rep["status"] = "not_converged".into();
        return Ok(finish(rep, a.output.timing, &r, EXIT_INCOMPLETE));
    }
    let points = embed(&solved)?;
    let outcome = match kind {
        RoundKind::Disjoint => round_disjoint(&g, &points, &cfg),
        RoundKind::Partition => round_partition(&g, &points, &cfg),
        RoundKind::Balanced => round_balanced(&g, &points, &cfg),
    };
    let (result, status, code) = match outcome {
        Ok(mut res) => {
            res.sdp_objective = Some(solved.solution.objective_value);
            (res, "ok", EXIT_OK)
        }
        Err(RoundingError::Shortfall { report, .. }) => (*report, "shortfall", EXIT_INCOMPLETE),
        Err(RoundingError::InsufficientMass { mass }) => {
            rep["status"] = "insufficient_mass".into();
            rep["error"] = format!("merged sets do not reach weight 1/2 (input mass {mass})").into();
            return Ok(finish(rep, a.output.timing, &r, EXIT_INCOMPLETE));
        }
        Err(e) => return Err(e.into()),
    };
    let achieved = result.max_expansion;
    rep["result"] = report::partition_json(&result);
    if a.compare_oracle {
        rep["oracle"] = oracle_json(&g, k, Some(achieved));
    }
    rep["status"] = status.into();
    Ok(finish(rep, a.output.timing, &r, code))
}

fn cmd_round(a: &GraphArgs) -> Result<Outcome, PipelineError> {
    cmd_rounding(a, "round", RoundKind::Disjoint)
}

fn cmd_partition(a: &GraphArgs) -> Result<Outcome, PipelineError> {
    cmd_rounding(a, "partition", RoundKind::Partition)
}

fn cmd_balanced(a: &GraphArgs) -> Result<Outcome, PipelineError> {
    cmd_rounding(a, "balanced", RoundKind::Balanced)
}

fn cmd_oracle(a: &GraphArgs) -> Result<Outcome, PipelineError> {
    let r = resolve(a);
    let g = parse_graph(&a.input)?;
    let k = require_k(a)?;
    let (p, value) = brute_force_opt(&g, k)?;
    let mut rep = base_report("oracle", a, &r, &g, json!({}));
    let check = max_expansion(&g, &p).map_err(|e| PipelineError::Usage(e.to_string()))?;
    rep["oracle"] = json!({
        "value": dec(value),
        "partition": p.blocks.iter().map(|b| b.to_vec()).collect::<Vec<_>>(),
        "recomputed": dec(check),
    });
    if g.n() <= MAX_CUT_N {
        let (s, cut) = brute_force_sparsest_cut(&g)?;
        rep["sparsest_cut"] = json!({ "value": dec(cut), "set": s.to_vec() });
    }
    rep["status"] = "ok".into();
    Ok(finish(rep, a.output.timing, &r, EXIT_OK))
}

fn cmd_spectrum(a: &GraphArgs) -> Result<Outcome, PipelineError> {
    let r = resolve(a);
    let g = parse_graph(&a.input)?;
    let s = spectrum(&g)?;
    let mut rep = base_report("spectrum", a, &r, &g, json!({}));
    rep["spectrum"] = report::spectrum_json(&s, a.k);
    if let (true, Some(k)) = (a.compare_oracle, a.k) {
        let mut o = oracle_json(&g, k, None);
        if let (Some(lambda), Some(Value::String(v))) = (s.lambda(k), o.get("value").cloned()) {
            let value: f64 = v.parse().expect("oracle values are rendered as decimals");
            o["lambda_k_le_opt"] = (lambda <= value + 1e-8).into();
            o["lambda_k_le_twice_opt"] = (lambda <= 2.0 * value + 1e-8).into();
        }
        rep["oracle"] = o;
    }
    rep["status"] = "ok".into();
    Ok(finish(rep, a.output.timing, &r, EXIT_OK))
}

fn cmd_gap(a: &GapArgs) -> Result<Outcome, PipelineError> {
    let started = Instant::now();
    let demo = assignment_gap_demo(a.n, a.k).map_err(|e| match e {
        OracleError::BadParams(m) => PipelineError::Usage(m),
        other => other.into(),
    })?;
    let mut rep = json!({
        "manifest": {
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": "gap-demo",
            "n": a.n,
            "k": a.k,
        },
        "gap": report::gap_json(&demo),
        "status": if demo.feasible() { "ok" } else { "infeasible" },
    });
    if a.output.timing {
        rep["manifest"]["timing"] = json!({ "total_secs": dec(started.elapsed().as_secs_f64()) });
    }
    Ok(Outcome { report: rep, exit_code: if demo.feasible() { EXIT_OK } else { EXIT_INTERNAL } })
}

fn cmd_audit(a: &AuditArgs) -> Result<Outcome, PipelineError> {
    let ga = &a.graph;
    let r = resolve(ga);
    let g = parse_graph(&ga.input)?;
    let k = require_k(ga)?;
    let m = a.m.unwrap_or(12.0 * k as f64 / ga.epsilon);
    let beta = a.beta.unwrap_or(1.0 - ga.epsilon / 4.0);
    let mode = match ga.separator {
        SeparatorKind::Raw => SeparatorMode::Raw,
        SeparatorKind::Rescaled => SeparatorMode::Rescaled,
    };
    let params = SeparatorParams::new(m, beta, mode, g.n())?;
    let extra = json!({ "samples": a.samples, "m": dec(m), "beta": dec(beta) });
    let mut rep = base_report("audit-separators", ga, &r, &g, extra);
    let solved = solve_relaxation(&g, k, ga.mode == Mode::Balanced, ga, &r)?;
    rep["sdp"] = solved.json(ga.output.timing);
    if !solved.converged() {
        rep["status"] = "not_converged".into();
        return Ok(finish(rep, ga.output.timing, &r, EXIT_INCOMPLETE));
    }
    let points = embed(&solved)?;
    let audit = separator_property_audit(&points, &params, a.samples, r.seed).map_err(|e| match e {
        SeparatorError::TooFewSamples(_) => PipelineError::Usage(e.to_string()),
        other => other.into(),
    })?;
    rep["audit"] = report::audit_json(&audit);
    rep["status"] = "ok".into();
    Ok(finish(rep, ga.output.timing, &r, EXIT_OK))
}
