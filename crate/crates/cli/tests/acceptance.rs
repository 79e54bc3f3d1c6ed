//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero when a criterion fails that is not listed in `KNOWN_RED`.
//! Set `KPART_ACCEPTANCE_STRICT=1` to fail on those as well.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::{corpus, write_graph, Named};
use kpart_cli::run_from;
use kpart_core::embedding::{psi_normalize, EmbeddedPoints};
use kpart_core::graph::{expansion, families, max_expansion, Graph, Partition};
use kpart_core::oracle::{assignment_gap_demo, brute_force_opt, for_each_k_partition, spectrum, Rational};
use kpart_core::rounding::{
    floor_slack, ceil_slack, round_balanced, round_disjoint, round_partition, PartitionReport, RoundingConfig,
    RoundingError,
};
use kpart_core::sdp::{build_sdp, check_feasibility, embed_partition, GramSolution, SdpProblem, TrianglePolicy};
use kpart_core::separators::{
    gaussian_tail, sample_separator, separator_property_audit, stream_rng, SeparatorMode, SeparatorParams,
};
use kpart_core::solver::{gram_factor, solve, SolveError, SolverConfig};
use nalgebra::DMatrix;

/// The statement checked by criterion 7 is false in general (the path on four
/// vertices already has λ₂ = 1/2 > φ² = 1/3); the check is kept verbatim.
const KNOWN_RED: &[usize] = &[7];

const KS: [usize; 3] = [2, 3, 4];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

struct Relaxation {
    problem: SdpProblem,
    solution: GramSolution,
    converged: bool,
}

impl Relaxation {
    fn points(&self) -> EmbeddedPoints {
        let vectors = gram_factor(&self.solution, 1e-9).unwrap();
        psi_normalize(&vectors, self.problem.weights()).unwrap()
    }
}

fn relax(g: &Graph, k: usize, balanced: bool) -> Relaxation {
    let problem = build_sdp(g, k, balanced, TrianglePolicy::Lazy).unwrap();
    let (solution, converged) = match solve(&problem, &SolverConfig::default()) {
        Ok((s, _)) => (s, true),
        Err(SolveError::NotConverged { solution, .. }) => (*solution, false),
        Err(e) => panic!("solver error: {e}"),
    };
    Relaxation { problem, solution, converged }
}

struct Ctx {
    corpus: Vec<Named>,
    opt: HashMap<(usize, usize), f64>,
    plain: HashMap<(usize, usize), Relaxation>,
}

impl Ctx {
    fn cases(&self) -> impl Iterator<Item = (usize, &Named, usize)> {
        self.corpus
            .iter()
            .enumerate()
            .flat_map(|(i, g)| KS.into_iter().filter(move |&k| k <= g.graph.n()).map(move |k| (i, g, k)))
    }
}

fn criterion_1(ctx: &mut Ctx) -> Verdict {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let cases: Vec<(usize, usize)> = ctx.cases().map(|(i, _, k)| (i, k)).collect();
    for (i, k) in cases {
        let g = &ctx.corpus[i];
        let (_, opt) = brute_force_opt(&g.graph, k).unwrap();
        let r = relax(&g.graph, k, false);
        let gap = r.solution.objective_value - opt;
        worst = worst.max(gap);
        if !r.converged || gap > 1e-4 {
            failures.push(format!("{} k={k}: sdp {} opt {opt} converged {}", g.name, r.solution.objective_value, r.converged));
        }
        ctx.opt.insert((i, k), opt);
        ctx.plain.insert((i, k), r);
    }
    let elapsed = start.elapsed();
    let in_time = elapsed < Duration::from_secs(600);
    verdict(
        failures.is_empty() && in_time && ctx.corpus.len() >= 30,
        format!(
            "{} graphs, {} instances, max(sdp - opt) = {worst:.3e}, {:.1}s{}",
            ctx.corpus.len(),
            ctx.plain.len(),
            elapsed.as_secs_f64(),
            list(&failures)
        ),
    )
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", items.join(", "))
    }
}

fn criterion_2() -> Verdict {
    let instances: &[(&[usize], &[usize])] = &[
        (&[3, 3], &[2]),
        (&[2, 2, 2], &[2, 3]),
        (&[3, 3, 3], &[2, 3]),
        (&[4, 4], &[2]),
        (&[2, 3, 4], &[2, 3]),
        (&[5, 5], &[2]),
        (&[2, 2, 2, 2], &[2, 3, 4]),
        (&[2, 2, 3, 3], &[3, 4]),
    ];
    let mut worst = 10;
    let mut failures = Vec::new();
    let mut count = 0;
    for (sizes, ks) in instances {
        let g = families::clique_union(sizes).unwrap();
        for &k in *ks {
            count += 1;
            let r = relax(&g, k, false);
            let points = r.points();
            let hits = (0..10u64)
                .filter(|&seed| {
                    let cfg = RoundingConfig::new(k, 0.4, seed).unwrap();
                    matches!(round_partition(&g, &points, &cfg),
                        Ok(rep) if rep.is_full_partition(g.n()) && rep.max_expansion == 0.0)
                })
                .count();
            worst = worst.min(hits);
            if hits < 9 {
                failures.push(format!("{sizes:?} k={k}: {hits}/10"));
            }
        }
    }
    verdict(failures.is_empty(), format!("{count} instances, worst {worst}/10 seeds exact{}", list(&failures)))
}

fn criterion_3(ctx: &Ctx) -> Verdict {
    let mut checked = 0usize;
    let mut worst_feas = 0.0f64;
    let mut worst_obj = 0.0f64;
    let mut failures = Vec::new();
    for (_, g, k) in ctx.cases() {
        let prob = build_sdp(&g.graph, k, false, TrianglePolicy::Lazy).unwrap();
        let n = g.graph.n();
        let mut bad = 0usize;
        for_each_k_partition(n, k, |labels| {
            let p = Partition::from_labels(labels);
            let sol = embed_partition(&g.graph, &p, false).unwrap();
            let feas = check_feasibility(&prob, &sol, 1e-9).unwrap();
            let direct: f64 = p.blocks.iter().map(|b| expansion(&g.graph, b).unwrap()).sum::<f64>() / k as f64;
            let obj_err = (sol.objective_value - direct).abs();
            worst_feas = worst_feas.max(feas.max_residual());
            worst_obj = worst_obj.max(obj_err);
            if !feas.passes() || obj_err > 1e-12 {
                bad += 1;
            }
            checked += 1;
        });
        if bad > 0 {
            failures.push(format!("{} k={k}: {bad}", g.name));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{checked} partitions, worst residual {worst_feas:.2e}, worst objective error {worst_obj:.2e}{}",
            list(&failures)
        ),
    )
}

/// Twelve unit vectors in R⁶: the standard basis, its negatives on three
/// axes, and three diagonal directions.
fn synthetic_points() -> EmbeddedPoints {
    let d = 6;
    let mut rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for i in 0..3 {
        rows.push((0..d).map(|j| if j == i { -1.0 } else { 0.0 }).collect());
    }
    for (a, b) in [(0, 1), (2, 3), (4, 5)] {
        let s = 0.5f64.sqrt();
        rows.push((0..d).map(|j| if j == a || j == b { s } else { 0.0 }).collect());
    }
    let n = rows.len();
    EmbeddedPoints {
        psi: DMatrix::from_fn(n, d, |i, j| rows[i][j]),
        norms_sq: vec![1.0; n],
        weights: vec![1.0; n],
        mu: vec![1.0; n],
        perturbation: 0.0,
    }
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let points = synthetic_points();
    let n = points.n();
    let samples = 100_000usize;
    let (m, beta) = (4.0, 0.5);
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for (mode, name, seed) in [(SeparatorMode::Raw, "raw", 41u64), (SeparatorMode::Rescaled, "rescaled", 42)] {
        let params = SeparatorParams::new(m, beta, mode, n).unwrap();
        let expected = match mode {
            SeparatorMode::Raw => 1.0 / params.m_prime(),
            SeparatorMode::Rescaled => 1.0 / n as f64,
        };
        let mut hits = vec![0usize; n];
        let mut joint = vec![vec![0usize; n]; n];
        for i in 0..samples {
            let s = sample_separator(&points, &params, &mut stream_rng(seed, i as u64)).unwrap();
            let members = s.members.to_vec();
            for &u in &members {
                hits[u] += 1;
                for &v in &members {
                    joint[u][v] += 1;
                }
            }
        }
        let sigma = (expected * (1.0 - expected) / samples as f64).sqrt();
        let worst_z = hits
            .iter()
            .map(|&h| ((h as f64 / samples as f64) - expected).abs() / sigma)
            .fold(0.0, f64::max);
        if worst_z > 4.0 {
            failures.push(format!("{name} inclusion z = {worst_z:.2}"));
        }
        let bound = params.alpha / m;
        let jsigma = (bound * (1.0 - bound) / samples as f64).sqrt();
        let mut pairs = 0;
        let mut worst_joint = 0.0f64;
        for u in 0..n {
            for v in u + 1..n {
                if points.inner(u, v).abs() < 1e-12 {
                    pairs += 1;
                    let rate = joint[u][v] as f64 / samples as f64;
                    worst_joint = worst_joint.max(rate);
                    if rate > bound + 4.0 * jsigma {
                        failures.push(format!("{name} joint ({u},{v}) = {rate}"));
                    }
                }
            }
        }
        let audit = separator_property_audit(&points, &params, samples, seed).unwrap();
        if !audit.inclusion_ok() || !audit.joint_ok() {
            failures.push(format!("{name} library audit disagrees"));
        }
        summary.push(format!(
            "{name}: alpha {expected:.4e}, max |z| {worst_z:.2}, {pairs} orthogonal pairs, max joint {worst_joint:.2e} vs bound {bound:.2e}"
        ));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(120) {
        failures.push(format!("took {:.1}s", elapsed.as_secs_f64()));
    }
    verdict(failures.is_empty(), format!("{}; {:.1}s{}", summary.join("; "), elapsed.as_secs_f64(), list(&failures)))
}

fn criterion_5() -> Verdict {
    let mut violations = Vec::new();
    let mut tightest = f64::INFINITY;
    let mut points = 0;
    for ti in 1..=8 {
        let t = 0.5 * ti as f64;
        for bi in 1..=9 {
            let b = 0.1 * bi as f64;
            let lhs = gaussian_tail(b * t);
            let rhs = gaussian_tail(t).powf(b * b);
            tightest = tightest.min(rhs - lhs);
            points += 1;
            if lhs > rhs {
                violations.push(format!("t={t} beta={b}"));
            }
        }
    }
    let example = (gaussian_tail(1.0), gaussian_tail(2.0).powf(0.25));
    let example_ok = (example.0 - 0.158655).abs() < 1e-6 && (example.1 - 0.38838).abs() < 1e-5;
    verdict(
        violations.is_empty() && example_ok,
        format!(
            "{points} grid points, {} violations, smallest margin {tightest:.3e}, t=2 beta=0.5: {:.6} <= {:.5}{}",
            violations.len(),
            example.0,
            example.1,
            list(&violations)
        ),
    )
}

fn check_partition(g: &Graph, rep: &PartitionReport, eps: f64) -> Option<String> {
    let n = g.n();
    if !rep.is_disjoint(n) {
        return Some("not disjoint".into());
    }
    if !rep.is_full_partition(n) {
        return Some("does not cover V".into());
    }
    let blocks = floor_slack((1.0 - eps) * rep.k_prime as f64) + 1;
    if rep.sets.len() != blocks {
        return Some(format!("{} blocks, expected {blocks} from k' = {}", rep.sets.len(), rep.k_prime));
    }
    None
}

fn check_balanced(g: &Graph, rep: &PartitionReport, k: usize, eps: f64) -> Option<String> {
    let n = g.n();
    if !rep.is_disjoint(n) {
        return Some("not disjoint".into());
    }
    let total = g.total_weight();
    let (lo, hi) = (total / (2.0 * k as f64), (1.0 + eps) * total / k as f64);
    let slack = 1e-9 * total;
    for s in &rep.sets {
        let w: f64 = s.members.iter().map(|&u| g.weight(u)).sum();
        if w < lo - slack || w > hi + slack {
            return Some(format!("weight {w} outside [{lo}, {hi}]"));
        }
    }
    let mass = rep.diagnostics.merge_input_mass.unwrap_or(0.0);
    let bound = ceil_slack((1.0 - 4.0 * eps) * k as f64);
    if mass >= (1.0 - eps) * k as f64 && rep.sets.len() < bound {
        return Some(format!("{} sets below bound {bound} at mass {mass}", rep.sets.len()));
    }
    None
}

fn criterion_6(ctx: &Ctx) -> Verdict {
    let eps = 0.4;
    let beps = 0.2;
    let mut runs = 0;
    let mut skipped = Vec::new();
    let mut failures = Vec::new();
    let mut no_output = Vec::new();
    for (i, g, k) in ctx.cases() {
        let graph = &g.graph;
        let points = ctx.plain[&(i, k)].points();
        for seed in 0..3u64 {
            let cfg = RoundingConfig::new(k, eps, seed).unwrap();
            match round_disjoint(graph, &points, &cfg) {
                Ok(rep) => {
                    runs += 1;
                    if !rep.is_disjoint(graph.n()) {
                        failures.push(format!("{} k={k} round: not disjoint", g.name));
                    }
                }
                Err(RoundingError::Shortfall { .. }) => no_output.push(format!("{} k={k} round", g.name)),
                Err(e) => failures.push(format!("{} k={k} round: {e}", g.name)),
            }
            match round_partition(graph, &points, &cfg) {
                Ok(rep) => {
                    runs += 1;
                    if let Some(why) = check_partition(graph, &rep, eps) {
                        failures.push(format!("{} k={k} partition: {why}", g.name));
                    }
                }
                Err(RoundingError::Shortfall { .. }) => no_output.push(format!("{} k={k} partition", g.name)),
                Err(e) => failures.push(format!("{} k={k} partition: {e}", g.name)),
            }
        }
        let scale = k as f64 / graph.total_weight();
        if (0..graph.n()).any(|u| graph.weight(u) * scale > 1.0 + 1e-12) {
            skipped.push(format!("{} k={k}", g.name));
            continue;
        }
        let r = relax(graph, k, true);
        if !r.converged {
            failures.push(format!("{} k={k} balanced: relaxation did not converge", g.name));
            continue;
        }
        let points = r.points();
        let cfg = RoundingConfig::new(k, beps, 0).unwrap();
        match round_balanced(graph, &points, &cfg) {
            Ok(rep) => {
                runs += 1;
                if let Some(why) = check_balanced(graph, &rep, k, beps) {
                    failures.push(format!("{} k={k} balanced: {why}", g.name));
                }
            }
            Err(RoundingError::InsufficientMass { .. } | RoundingError::Shortfall { .. }) => {
                no_output.push(format!("{} k={k} balanced", g.name))
            }
            Err(e) => failures.push(format!("{} k={k} balanced: {e}", g.name)),
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{runs} runs checked, {} balanced instances skipped as infeasible, {} runs without output{}",
            skipped.len(),
            no_output.len(),
            list(&failures)
        ),
    )
}

fn criterion_7(ctx: &Ctx) -> Verdict {
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut twice = 0;
    for (i, g, k) in ctx.cases() {
        let s = spectrum(&g.graph).unwrap();
        let lambda = s.lambda(k).unwrap();
        let opt = ctx.opt[&(i, k)];
        checked += 1;
        if lambda > opt + 1e-8 {
            violations.push(format!("{} k={k}: {lambda:.4} > {opt:.4}", g.name));
        }
        if lambda > 2.0 * opt + 1e-8 {
            twice += 1;
        }
    }
    let shown: Vec<String> = violations.iter().take(3).cloned().collect();
    verdict(
        violations.is_empty(),
        format!(
            "{} of {checked} instances have lambda_k > opt_k (e.g. {}); lambda_k <= 2 opt_k fails on {twice}",
            violations.len(),
            if shown.is_empty() { "none".into() } else { shown.join(", ") }
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut failures = Vec::new();
    let mut values = Vec::new();
    for n in [8, 10, 12] {
        let d = assignment_gap_demo(n, 4).unwrap();
        let zero = d.alpha == Rational::from_integer(0);
        let (p, opt) = brute_force_opt(&d.graph, 4).unwrap();
        let recheck = max_expansion(&d.graph, &p).unwrap();
        values.push(format!("n={n}: opt {opt:.4}"));
        if !d.feasible() || !zero {
            failures.push(format!("n={n}: closed form infeasible or alpha = {}", d.alpha));
        }
        if opt < 0.2 || (recheck - opt).abs() > 1e-12 || (d.brute_force_value - opt).abs() > 1e-12 {
            failures.push(format!("n={n}: opt {opt}"));
        }
    }
    verdict(failures.is_empty(), format!("alpha = 0 exactly; {}{}", values.join(", "), list(&failures)))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn criterion_9(ctx: &Ctx) -> Verdict {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    let mut failures = Vec::new();
    for (i, g, k) in ctx.cases().filter(|c| c.2 <= 3) {
        let opt = ctx.opt[&(i, k)];
        if opt <= 0.0 {
            continue;
        }
        let points = ctx.plain[&(i, k)].points();
        let values: Vec<f64> = (0..20u64)
            .map(|seed| {
                let cfg = RoundingConfig::new(k, 0.4, 1000 + seed).unwrap();
                round_partition(&g.graph, &points, &cfg).map_or(f64::INFINITY, |r| r.max_expansion)
            })
            .collect();
        let ratio = median(values) / opt;
        checked += 1;
        if ratio > worst {
            worst = ratio;
            worst_name = format!("{} k={k}", g.name);
        }
        if ratio > 5.0 {
            failures.push(format!("{} k={k}: {ratio:.3}", g.name));
        }
    }
    verdict(
        failures.is_empty(),
        format!("{checked} instances with opt > 0, worst median ratio {worst:.3} ({worst_name}){}", list(&failures)),
    )
}

fn criterion_10(ctx: &Ctx) -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut compared = 0;
    for name in ["barbell4_0", "gnp8_2", "cliques2+3+4", "weighted9_1"] {
        let g = ctx.corpus.iter().find(|g| g.name == name).unwrap();
        let path = write_graph(dir.path(), name, &g.graph);
        let path = path.to_str().unwrap().to_string();
        for args in [
            vec!["partition", &path, "--k", "3", "--seed", "17", "--compare-oracle"],
            vec!["round", &path, "--k", "2", "--seed", "5", "--separator", "raw"],
            vec!["balanced", &path, "--k", "2", "--epsilon", "0.2", "--seed", "8"],
            vec!["audit-separators", &path, "--k", "2", "--seed", "3", "--samples", "10000"],
        ] {
            let argv = || std::iter::once("kpart").chain(args.iter().copied());
            let pool = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let a = pool(1).install(|| run_from(argv()));
            let b = pool(4).install(|| run_from(argv()));
            compared += 1;
            if a != b || a.stdout.is_empty() {
                failures.push(format!("{name} {}", args[0]));
            }
        }
    }
    verdict(failures.is_empty(), format!("{compared} report pairs compared byte for byte{}", list(&failures)))
}

fn main() {
    let strict = std::env::var("KPART_ACCEPTANCE_STRICT").is_ok_and(|v| v != "0");
    let mut ctx = Ctx { corpus: corpus(), opt: HashMap::new(), plain: HashMap::new() };
    let names = [
        "relaxation soundness",
        "exact-zero instances",
        "feasibility of embeddings",
        "separator statistics",
        "Gaussian tail grid",
        "structural guarantees",
        "spectral lower bound",
        "assignment relaxation gap",
        "approximation quality",
        "determinism",
    ];
    let mut unexpected = Vec::new();
    for (idx, name) in names.iter().enumerate() {
        let id = idx + 1;
        let start = Instant::now();
        let v = match id {
            1 => criterion_1(&mut ctx),
            2 => criterion_2(),
            3 => criterion_3(&ctx),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&ctx),
            7 => criterion_7(&ctx),
            8 => criterion_8(),
            9 => criterion_9(&ctx),
            _ => criterion_10(&ctx),
        };
        let tag = if v.pass { "PASS" } else if KNOWN_RED.contains(&id) { "FAIL (known)" } else { "FAIL" };
        println!("criterion {id:>2} {name}: {tag}: {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
        if !v.pass && (strict || !KNOWN_RED.contains(&id)) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("acceptance: failing criteria {unexpected:?}");
        std::process::exit(1);
    }
    println!("acceptance: ok");
}
