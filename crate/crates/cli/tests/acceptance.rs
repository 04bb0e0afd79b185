//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. `ACCEPTANCE_ONLY=1,3` restricts the run.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dyadnet::gof::posterior_predictive_gof;
use dyadnet::graph::{
    betweenness_raw, betweenness_scores, closeness_scores, degree_scores, louvain_communities,
    modularity, strength_scores, DirectedCountNetwork, Direction,
};
use dyadnet::mcmc::{fit_srm, McmcConfig};
use dyadnet::rng::{derive_seed, stream};
use dyadnet::srm::{assemble_design, implied_moments, DyadCovarianceParams};
use dyadnet::synth::{
    node_ids, recovery_experiment, simulate_stage1, stage2_recovery_experiment, SyntheticTruth,
};
use dyadnet::two_stage::{dc_threshold_robustness, effect_size, effect_size_note};
use dyadnet::Result;
use dyadnet_cli::Manifest;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::json;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn random_digraph(seed: u64, index: u64) -> Vec<Vec<u64>> {
    let mut rng = stream(seed, "acceptance-digraph", index);
    let n = rng.random_range(1..=8);
    let density: f64 = rng.random_range(0.1..0.7);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i != j && rng.random_bool(density) {
                        rng.random_range(1..6)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

fn network(m: &[Vec<u64>]) -> DirectedCountNetwork {
    DirectedCountNetwork::from_matrix(&node_ids(m.len()), m).expect("valid matrix")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c1_centrality() -> Result<Outcome> {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let m = random_digraph(1, k);
        let net = network(&m);
        let (od, id) = oracle::degrees(&m);
        let (os, is) = oracle::strengths(&m);
        let (oc, ic) = oracle::closeness(&m);
        let raw = oracle::betweenness(&m);
        let out_deg = degree_scores::<f64>(&net, Direction::Out);
        let in_deg = degree_scores::<f64>(&net, Direction::In);
        let exact = out_deg.scores == od
            && in_deg.scores == id
            && strength_scores(&net, Direction::Out) == os
            && strength_scores(&net, Direction::In) == is;
        let errs = [
            (out_deg.centralization - oracle::centralization(&od)).abs(),
            (in_deg.centralization - oracle::centralization(&id)).abs(),
            max_abs_diff(&closeness_scores(&net, Direction::Out), &oc),
            max_abs_diff(&closeness_scores(&net, Direction::In), &ic),
            max_abs_diff(&betweenness_raw(&net), &raw),
            max_abs_diff(&betweenness_scores(&net), &oracle::unit_scale(&raw)),
        ];
        let e = errs.into_iter().fold(0.0, f64::max);
        worst = worst.max(e);
        if !exact || e > 1e-12 {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 10.0,
        format!("100 digraphs, {mismatches} mismatches, max real error {worst:.1e}, {secs:.2} s"),
    )
}

fn planted_graph(index: u64) -> Vec<Vec<u64>> {
    let mut rng = stream(2, "acceptance-planted", index);
    let n = rng.random_range(6..=10);
    let groups = rng.random_range(2..=3);
    let label: Vec<usize> = (0..n).map(|i| i * groups / n).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let p = if label[i] == label[j] { 0.7 } else { 0.1 };
                    if i != j && rng.random_bool(p) {
                        rng.random_range(1..4)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

fn c2_communities() -> Result<Outcome> {
    let start = Instant::now();
    let tri = [
        ("A", "B"),
        ("B", "C"),
        ("C", "A"),
        ("D", "E"),
        ("E", "F"),
        ("F", "D"),
        ("C", "D"),
    ];
    let edges: Vec<(&str, &str, i64)> = tri.iter().map(|&(s, d)| (s, d, 1)).collect();
    let net = DirectedCountNetwork::build(&["A", "B", "C", "D", "E", "F"], &edges)?;
    let q_two = louvain_communities::<f64>(&net, 3)?.modularity;
    let two_ok = (q_two - 5.0 / 14.0).abs() < 1e-9;

    let mut worst_ratio = f64::INFINITY;
    for k in 0..20 {
        let m = planted_graph(k);
        let net = network(&m);
        let part = louvain_communities::<f64>(&net, derive_seed(4, "louvain", k))?;
        let check = modularity::<f64>(&net, &part.assignment)?;
        let own = oracle::modularity(&m, &part.assignment);
        if (check - own).abs() > 1e-12 || (part.modularity - own).abs() > 1e-9 {
            return outcome(false, format!("graph {k}: reported Q disagrees with the oracle"));
        }
        worst_ratio = worst_ratio.min(own / oracle::best_modularity(&m));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        two_ok && worst_ratio >= 0.95 && secs < 30.0,
        format!(
            "two triangles Q = {q_two:.12} (5/14 = {:.12}); 20 planted graphs, worst Q/Q* = {worst_ratio:.4}; {secs:.2} s",
            5.0 / 14.0
        ),
    )
}

/// Lower Cholesky factor of a 2x2 covariance, written out by hand.
fn chol(a: f64, c: f64, b: f64) -> [f64; 3] {
    let l11 = a.sqrt();
    let l21 = if l11 > 0.0 { c / l11 } else { 0.0 };
    [l11, l21, (b - l21 * l21).max(0.0).sqrt()]
}

fn c3_moments() -> Result<Outcome> {
    let start = Instant::now();
    let p = DyadCovarianceParams {
        sigma_a2: 1.0,
        sigma_b2: 2.0,
        sigma_ab: 0.25,
        sigma_nu2: 2.0,
        rho: 0.5,
    };
    let m = implied_moments(&p);
    let ab = chol(p.sigma_a2, p.sigma_ab, p.sigma_b2);
    let nu = chol(p.sigma_nu2, p.rho * p.sigma_nu2, p.sigma_nu2);
    let units = 200_000;
    let mut rng = stream(3, "acceptance-moments", 0);
    let mut z = || -> f64 { rng.sample(StandardNormal) };
    let mut draw = |l: &[f64; 3]| {
        let (u, v) = (z(), z());
        (l[0] * u, l[1] * u + l[2] * v)
    };
    // Each unit draws four nodes i, j, k, l and every residual it needs.
    let mut sums = [[0.0f64; 2]; 6];
    for _ in 0..units {
        let [(ai, bi), (aj, bj), (ak, bk), (_, bl)] = [draw(&ab), draw(&ab), draw(&ab), draw(&ab)];
        let (nu_ij, nu_ji) = draw(&nu);
        let nu_ik = draw(&nu).0;
        let nu_kj = draw(&nu).0;
        let nu_kl = draw(&nu).0;
        let nu_ki = draw(&nu).0;
        let e_ij = ai + bj + nu_ij;
        let products = [
            e_ij * e_ij,
            e_ij * (ai + bk + nu_ik),
            e_ij * (aj + bi + nu_ji),
            e_ij * (ak + bj + nu_kj),
            e_ij * (ak + bl + nu_kl),
            e_ij * (ak + bi + nu_ki),
        ];
        for (s, x) in sums.iter_mut().zip(products) {
            s[0] += x;
            s[1] += x * x;
        }
    }
    let targets = [
        ("variance", m.variance),
        ("same_sender", m.same_sender),
        ("reciprocal", m.reciprocal),
        ("same_receiver", m.same_receiver),
        ("disjoint", m.disjoint),
        ("sender_receiver", m.sender_receiver),
    ];
    let n = units as f64;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for ((name, target), s) in targets.iter().zip(&sums) {
        let mean = s[0] / n;
        let se = ((s[1] / n - mean * mean) / n).sqrt();
        let zscore = (mean - target) / se;
        worst = worst.max(zscore.abs());
        parts.push(format!("{name} {mean:.4}/{target}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 3.0 && secs < 10.0,
        format!("2e5 units, max |z| = {worst:.2} ({}); {secs:.2} s", parts.join(", ")),
    )
}

fn c4_recovery() -> Result<Outcome> {
    let start = Instant::now();
    let truth = SyntheticTruth::benchmark(145, 41);
    let config = McmcConfig::default().with_seed(42);
    let report = recovery_experiment(&truth, 20, &config)?;
    let per_rep = start.elapsed().as_secs_f64() / 20.0;
    let worst = report.rows.iter().map(|r| r.covered).min().unwrap_or(0);
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{} {}/20", r.parameter, r.covered))
        .collect();
    outcome(
        worst >= 16 && per_rep < 900.0,
        format!("N=145, 1000+10000/25; {}; {per_rep:.1} s per replicate", rows.join(", ")),
    )
}

fn c5_gof() -> Result<Outcome> {
    let config = McmcConfig::default();
    let run = |corrupt: bool, r: u64| -> Result<(bool, f64)> {
        let mut truth = SyntheticTruth::benchmark(50, derive_seed(51, "c5-truth", r));
        if corrupt {
            truth.covariance.rho = 0.0;
            truth.covariance.sigma_ab = 0.0;
        }
        let sim = simulate_stage1(&truth)?;
        let net = if corrupt {
            let mut m = sim.network.to_matrix();
            for i in 0..m.len() {
                for j in 0..i {
                    m[i][j] = m[j][i];
                }
            }
            DirectedCountNetwork::from_matrix(sim.network.nodes(), &m)?
        } else {
            sim.network.clone()
        };
        let design = assemble_design(&sim.nodes, &sim.dyads, &net, &truth.spec)?;
        let fit_seed = derive_seed(52, if corrupt { "c5-corrupt" } else { "c5-clean" }, r);
        let samples = fit_srm(&design, &config.clone().with_seed(fit_seed))?;
        let report = posterior_predictive_gof(&samples, &design, &net, derive_seed(fit_seed, "gof", 0))?;
        let q = report.quantiles.dyad_correlation.unwrap_or(f64::NAN);
        Ok((report.quantiles.all_inside(0.05), q))
    };
    let clean = (0..20u64).into_par_iter().map(|r| run(false, r)).collect::<Result<Vec<_>>>()?;
    let corrupt = (0..20u64).into_par_iter().map(|r| run(true, r)).collect::<Result<Vec<_>>>()?;
    let inside = clean.iter().filter(|c| c.0).count();
    let flagged = corrupt.iter().filter(|c| c.1 > 0.975).count();
    outcome(
        inside >= 18 && flagged >= 18,
        format!("N=50: well-specified inside 95% on all three in {inside}/20; mirrored reciprocity flagged in {flagged}/20"),
    )
}

fn c6_stage2() -> Result<Outcome> {
    let truth = SyntheticTruth::full_table(100, 61);
    let report = stage2_recovery_experiment(&truth, 20, &McmcConfig::default().with_seed(62))?;
    let row = report.row("That").expect("That row");
    let pct = effect_size(-0.012_f64);
    let closed = (1.0 - (-0.012_f64).exp()) * 100.0;
    let note = effect_size_note(-0.012);
    let effect_ok = pct == closed && format!("{pct:.3}") == "1.193" && note.contains("not 1.9%");
    outcome(
        row.covered >= 16 && row.sign_agree == 20 && effect_ok,
        format!(
            "N=100 full table, xi=-0.012: covered {}/20, sign {}/20, mean bias {:.5}; effect size {pct:.3}% (note: \"{note}\")",
            row.covered, row.sign_agree, row.bias
        ),
    )
}

fn dyadnet(dir: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_dyadnet"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .status()
        .expect("binary runs")
        .code()
        .expect("exit code")
}

fn write_json(path: &Path, value: serde_json::Value) {
    std::fs::write(path, serde_json::to_vec_pretty(&value).unwrap()).unwrap();
}

fn c7_refusal() -> Result<Outcome> {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_json(&dir.join("sim.json"), json!({"seed": 71, "out": "data", "truth": {"nodes": 30}}));
    if dyadnet(dir, &["simulate", "--config", "sim.json"]) != 0 {
        return outcome(false, "simulate failed");
    }
    write_json(
        &dir.join("leak.json"),
        json!({
            "seed": 72, "out": "leak",
            "nodes": "data/nodes.csv", "dyads": "data/dyads.csv", "edges": "data/edges.csv",
            "srm": {"sender": ["HD", "AM", "AR"], "receiver": ["HD", "AM", "AR"], "dyad": ["D", "CM"],
                    "include_quality": true},
            "mcmc": {"burn_in": 100, "iterations": 200, "thin": 5},
        }),
    );
    let fit = dyadnet(dir, &["fit-stage1", "--config", "leak.json"]);
    let code = dyadnet(dir, &["fit-stage2", "--config", "leak.json"]);
    let manifest: Manifest =
        serde_json::from_slice(&std::fs::read(dir.join("leak/manifest.json")).unwrap()).unwrap();
    let no_output = !dir.join("leak/stage2_summary.csv").exists();
    outcome(
        fit == 0 && code == 3 && manifest.exit_code == 3 && no_output,
        format!("stage-1 fit with AM/AR exit {fit}; fit-stage2 exit {code}, manifest exit {}", manifest.exit_code),
    )
}

fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn c8_determinism() -> Result<Outcome> {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_json(&dir.join("sim.json"), json!({"seed": 81, "out": "data"}));
    if dyadnet(dir, &["simulate", "--config", "sim.json"]) != 0 {
        return outcome(false, "simulate failed");
    }
    let config = |out: &str| {
        json!({
            "seed": 82, "out": out,
            "nodes": "data/nodes.csv", "dyads": "data/dyads.csv", "edges": "data/edges.csv",
            "travel_times": "data/travel_times.csv", "geo_threshold": 30,
            "srm": {"sender": ["HD", "DC"], "receiver": ["HD", "DC"], "dyad": ["D", "CM"]},
            "robustness_thresholds": [20, 30, 40],
        })
    };
    write_json(&dir.join("a.json"), config("a"));
    write_json(&dir.join("b.json"), config("b"));
    let ca = dyadnet(dir, &["pipeline", "--config", "a.json"]);
    let cb = dyadnet(dir, &["pipeline", "--config", "b.json"]);
    let (a, b) = (snapshot(&dir.join("a")), snapshot(&dir.join("b")));
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    outcome(
        ca == 0 && cb == 0 && a.len() > 10 && a.len() == b.len() && differing.is_empty(),
        format!(
            "N=145 benchmark, full protocol: exits {ca}/{cb}, {} files compared, {} differ",
            a.len(),
            differing.len()
        ),
    )
}

fn c9_robustness() -> Result<Outcome> {
    let truth = SyntheticTruth::full_table(145, 91);
    let sim = simulate_stage1(&truth)?;
    let thresholds = [20.0, 30.0, 40.0];
    let report = dc_threshold_robustness(
        &sim.nodes,
        &sim.dyads,
        &sim.network,
        &thresholds,
        &truth.spec,
        &McmcConfig::default().with_seed(92),
    )?;
    let c = &report.correlations;
    let min = report.min_off_diagonal().unwrap_or(f64::NAN);
    outcome(
        min > 0.9,
        format!(
            "N=145 full table: corr(20,30) = {:.4}, corr(20,40) = {:.4}, corr(30,40) = {:.4}",
            c[0][1], c[0][2], c[1][2]
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Result<Outcome>); 9] = [
        (1, "centrality oracle", c1_centrality),
        (2, "community detection", c2_communities),
        (3, "covariance identities", c3_moments),
        (4, "stage-1 recovery", c4_recovery),
        (5, "GOF calibration", c5_gof),
        (6, "stage-2 recovery", c6_stage2),
        (7, "provenance refusal", c7_refusal),
        (8, "determinism", c8_determinism),
        (9, "threshold robustness", c9_robustness),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (k, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&k)) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {k} {name}: {} - {detail} [{secs:.1} s]",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
