use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Subcommand;
use dyadnet::gof::posterior_predictive_gof;
use dyadnet::graph::{
    betweenness_scores, closeness_scores, degree_scores, geo_threshold_network, graph_summary,
    louvain_communities, strength_scores, DirectedCountNetwork, Direction,
};
use dyadnet::io::{self, fmt_opt, read_json, write_csv, write_json};
use dyadnet::mcmc::{fit_srm, summarize_draws, summarize_posterior, ParameterSummary, PosteriorSamples};
use dyadnet::rng::derive_seed;
use dyadnet::srm::{assemble_design, DyadTable, NodeCovariate, NodeTable, SrmSpec};
use dyadnet::synth::{recovery_experiment, simulate_stage1, stage2_recovery_experiment, RecoveryReport};
use dyadnet::two_stage::{
    assemble_quality_design, dc_threshold_robustness, effect_size, effect_size_note,
    fit_quality_model, heatmap_export, predict_transfers, quality_from_nodes, OwnershipFilter,
    PredictedTransfers, THAT_COLUMN,
};
use dyadnet::{Design, Error, Result};
use log::info;

use crate::config::PipelineConfig;
use crate::manifest::{config_hash, write_manifest, Manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Centrality scores and graph summaries, overall and by ownership.
    Netstats,
    /// Modularity communities of the transfer network.
    Communities,
    /// Fit the flow model.
    FitStage1,
    /// Posterior-predictive checks of the stage-one fit.
    Gof,
    /// Fixed-effect predicted transfers from the stage-one fit.
    Predict,
    /// Fit the pairwise quality model on predicted transfers.
    FitStage2,
    /// Write a synthetic data set drawn from the configured truth.
    Simulate,
    /// Parameter-recovery experiment on repeated synthetic data.
    Recovery,
    /// netstats, communities, fit-stage1, gof, predict, fit-stage2 and the
    /// threshold-robustness check in sequence.
    Pipeline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Netstats => "netstats",
            Self::Communities => "communities",
            Self::FitStage1 => "fit-stage1",
            Self::Gof => "gof",
            Self::Predict => "predict",
            Self::FitStage2 => "fit-stage2",
            Self::Simulate => "simulate",
            Self::Recovery => "recovery",
            Self::Pipeline => "pipeline",
        }
    }
}

pub const STAGE1_FIT: &str = "stage1_fit.json";
pub const PREDICTED_JSON: &str = "predicted_transfers.json";

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

struct Ctx {
    cfg: PipelineConfig,
    out: PathBuf,
    outputs: Vec<String>,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn csv<I, R, S>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        write_csv(&self.path(name), header, rows)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn json<T: serde::Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.path(name), value)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        io::atomic_write(&self.path(name), body.as_bytes())?;
        self.outputs.push(name.to_string());
        Ok(())
    }
}

struct Inputs {
    nodes: Option<NodeTable>,
    dyads: Option<DyadTable>,
    net: DirectedCountNetwork,
}

impl Inputs {
    fn nodes(&self) -> Result<&NodeTable> {
        self.nodes.as_ref().ok_or_else(|| Error::config("config is missing 'nodes'"))
    }

    fn dyads(&self) -> Result<&DyadTable> {
        self.dyads.as_ref().ok_or_else(|| Error::config("config is missing 'dyads'"))
    }
}

fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs> {
    let edges = io::read_edges(cfg.require(&cfg.edges, "edges")?)?;
    let mut nodes = cfg.nodes.as_deref().map(io::read_node_table).transpose()?;
    let ids: Vec<String> = match &nodes {
        Some(t) => t.ids().to_vec(),
        None => {
            let mut ids: Vec<String> = edges
                .iter()
                .flat_map(|(s, d, _)| [s.clone(), d.clone()])
                .collect();
            ids.sort();
            ids.dedup();
            ids
        }
    };
    let net = DirectedCountNetwork::build(&ids, &edges)?;
    let dyads = cfg
        .dyads
        .as_deref()
        .map(|p| io::read_dyad_table(p, &ids))
        .transpose()?;
    if let (Some(threshold), Some(table)) = (cfg.geo_threshold, nodes.as_mut()) {
        let (tids, travel) = match (&cfg.travel_times, &dyads) {
            (Some(p), _) => io::read_travel_matrix(p)?,
            (None, Some(d)) => (d.ids().to_vec(), d.distance_matrix().to_vec()),
            (None, None) => {
                return Err(Error::config(
                    "geo_threshold needs 'travel_times' or 'dyads' for travel times",
                ))
            }
        };
        let geo = geo_threshold_network(&tids, &travel, threshold)?;
        let degree = geo.degrees();
        let between = geo.betweenness::<f64>();
        let mut dc = vec![None; table.len()];
        let mut bw = vec![None; table.len()];
        for (k, id) in tids.iter().enumerate() {
            if let Some(slot) = table.index_of(id) {
                dc[slot] = Some(degree[k] as f64);
                bw[slot] = Some(between[k]);
            }
        }
        table.set_column(NodeCovariate::GeoDegree.column(), dc)?;
        table.set_column(NodeCovariate::GeoBetweenness.column(), bw)?;
    }
    Ok(Inputs { nodes, dyads, net })
}

fn stage1_design(inputs: &Inputs, spec: &SrmSpec) -> Result<Design> {
    assemble_design(inputs.nodes()?, inputs.dyads()?, &inputs.net, spec)
}

fn summary_rows(rows: &[ParameterSummary]) -> Vec<[String; 5]> {
    rows.iter()
        .map(|s| {
            [
                s.parameter.clone(),
                s.mean.to_string(),
                s.sd.to_string(),
                s.pseudo_p.to_string(),
                s.stars.clone(),
            ]
        })
        .collect()
}

const SUMMARY_HEADER: [&str; 5] = ["parameter", "mean", "sd", "pseudo_p", "stars"];

fn netstats(ctx: &mut Ctx, inputs: &Inputs) -> Result<()> {
    let net = &inputs.net;
    let mut groups: Vec<(&str, Vec<usize>)> = vec![("all", (0..net.len()).collect())];
    if let Some(col) = inputs.nodes.as_ref().and_then(|t| t.column("Public").map(|c| (t, c))) {
        let (table, values) = col;
        let public = |id: &str| values[table.index_of(id).unwrap()] == Some(1.0);
        let ids = net.nodes();
        groups.push(("public", (0..net.len()).filter(|&k| public(&ids[k])).collect()));
        groups.push(("private", (0..net.len()).filter(|&k| !public(&ids[k])).collect()));
    }
    let mut node_rows = Vec::new();
    let mut graph_rows = Vec::new();
    for (name, keep) in &groups {
        if keep.is_empty() {
            continue;
        }
        let sub = net.induced(keep);
        let ind = degree_scores::<f64>(&sub, Direction::In);
        let outd = degree_scores::<f64>(&sub, Direction::Out);
        let ins = strength_scores(&sub, Direction::In);
        let outs = strength_scores(&sub, Direction::Out);
        let inc = closeness_scores::<f64>(&sub, Direction::In);
        let outc = closeness_scores::<f64>(&sub, Direction::Out);
        let bw = betweenness_scores::<f64>(&sub);
        for k in 0..sub.len() {
            node_rows.push(vec![
                name.to_string(),
                sub.nodes()[k].clone(),
                ind.scores[k].to_string(),
                outd.scores[k].to_string(),
                ins[k].to_string(),
                outs[k].to_string(),
                inc[k].to_string(),
                outc[k].to_string(),
                bw[k].to_string(),
            ]);
        }
        let g = graph_summary(&sub);
        graph_rows.push(vec![
            name.to_string(),
            g.nodes.to_string(),
            g.arcs.to_string(),
            g.total_transfers.to_string(),
            g.in_centralization.to_string(),
            g.out_centralization.to_string(),
            g.mean_in_closeness.to_string(),
            g.mean_out_closeness.to_string(),
            g.mean_in_strength.to_string(),
            g.mean_out_strength.to_string(),
            g.mean_betweenness.to_string(),
        ]);
    }
    ctx.csv(
        "netstats_nodes.csv",
        &[
            "subgroup",
            "node",
            "in_degree",
            "out_degree",
            "in_strength",
            "out_strength",
            "in_closeness",
            "out_closeness",
            "betweenness",
        ],
        node_rows,
    )?;
    ctx.csv(
        "netstats_graph.csv",
        &[
            "subgroup",
            "nodes",
            "arcs",
            "total_transfers",
            "in_centralization",
            "out_centralization",
            "mean_in_closeness",
            "mean_out_closeness",
            "mean_in_strength",
            "mean_out_strength",
            "mean_betweenness",
        ],
        graph_rows,
    )
}

fn communities(ctx: &mut Ctx, inputs: &Inputs) -> Result<()> {
    let seed = derive_seed(ctx.cfg.seed, "communities", 0);
    let part = louvain_communities::<f64>(&inputs.net, seed)?;
    let q = part.modularity.to_string();
    let rows: Vec<[String; 3]> = inputs
        .net
        .nodes()
        .iter()
        .zip(&part.assignment)
        .map(|(id, c)| [id.clone(), c.to_string(), q.clone()])
        .collect();
    ctx.csv("communities.csv", &["node", "community", "modularity"], rows)
}

fn fit_stage1(ctx: &mut Ctx, inputs: &Inputs) -> Result<()> {
    let design = stage1_design(inputs, &ctx.cfg.srm)?;
    let cfg = ctx.cfg.mcmc_config();
    info!("fitting flow model: {} rows, {} columns", design.rows(), design.dim());
    let samples = fit_srm(&design, &cfg)?;
    ctx.csv("stage1_summary.csv", &SUMMARY_HEADER, summary_rows(&summarize_posterior(&samples)))?;
    let names = samples.parameter_names();
    let mut header = vec!["draw"];
    header.extend(names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = samples
        .draw_matrix()
        .into_iter()
        .enumerate()
        .map(|(d, row)| {
            std::iter::once(d.to_string())
                .chain(row.into_iter().map(|v| v.to_string()))
                .collect()
        })
        .collect();
    ctx.csv("stage1_draws.csv", &header, rows)?;
    ctx.json(STAGE1_FIT, &samples)
}

fn load_stage1(ctx: &Ctx) -> Result<PosteriorSamples> {
    let path = ctx.path(STAGE1_FIT);
    if !path.exists() {
        return Err(Error::input(format!(
            "{} not found; run fit-stage1 first",
            path.display()
        )));
    }
    read_json(&path)
}

fn gof(ctx: &mut Ctx, inputs: &Inputs) -> Result<()> {
    let samples = load_stage1(ctx)?;
    let design = stage1_design(inputs, &samples.provenance.spec)?;
    let report = posterior_predictive_gof(
        &samples,
        &design,
        &inputs.net,
        derive_seed(ctx.cfg.seed, "gof", 0),
    )?;
    for (name, reps, obs) in report.series() {
        let rows: Vec<[String; 3]> = reps
            .iter()
            .enumerate()
            .map(|(d, v)| [d.to_string(), fmt_opt(*v), fmt_opt(obs)])
            .collect();
        ctx.csv(
            &format!("gof_{name}.csv"),
            &["draw", "replicate_value", "observed_value"],
            rows,
        )?;
    }
    ctx.json("gof_report.json", &report)
}

fn predict(ctx: &mut Ctx, inputs: &Inputs) -> Result<PredictedTransfers> {
    let samples = load_stage1(ctx)?;
    if samples.provenance.quality_in_design {
        return Err(Error::provenance(
            "stage-one fit included hospital quality measures (AM/AR); refit with \
             include_quality = false before predicting transfers",
        ));
    }
    let design = stage1_design(inputs, &samples.provenance.spec)?;
    let that = predict_transfers(&samples, &design)?;
    let ids = &that.node_ids;
    let mut rows = Vec::new();
    for i in 0..ids.len() {
        for j in 0..ids.len() {
            if i != j {
                rows.push([ids[i].clone(), ids[j].clone(), that.values[i][j].to_string()]);
            }
        }
    }
    ctx.csv("predicted_transfers.csv", &["src", "dst", "predicted_transfers"], rows)?;
    ctx.json(PREDICTED_JSON, &that)?;
    Ok(that)
}

fn fit_stage2(ctx: &mut Ctx, inputs: &Inputs) -> Result<()> {
    let stage1_path = ctx.path(STAGE1_FIT);
    if stage1_path.exists() {
        let samples: PosteriorSamples = read_json(&stage1_path)?;
        if samples.provenance.quality_in_design {
            return Err(Error::provenance(
                "stage-one fit included hospital quality measures (AM/AR); the quality model \
                 only accepts transfers predicted without them",
            ));
        }
    }
    let predicted_path = ctx.path(PREDICTED_JSON);
    let that: PredictedTransfers = if predicted_path.exists() {
        read_json(&predicted_path)?
    } else {
        predict(ctx, inputs)?
    };
    that.ensure_exogenous()?;
    let nodes = inputs.nodes()?;
    let spec = ctx.cfg.quality.clone();
    let w = quality_from_nodes(nodes, spec.outcome)?;
    let design = assemble_quality_design(&w, &that, nodes, &spec)?;
    let cfg = ctx
        .cfg
        .mcmc_config()
        .with_seed(derive_seed(ctx.cfg.seed, "stage2", 0));
    info!("fitting quality model: {} pairs, {} columns", design.rows(), design.dim());
    let post = fit_quality_model(&design, &cfg)?;

    let mut rows = post.summarize();
    let xi = post.xi();
    let pct: Vec<f64> = xi.iter().map(|&x| effect_size(x)).collect();
    rows.push(summarize_draws("effect_size_pct", &pct));
    ctx.csv("stage2_summary.csv", &SUMMARY_HEADER, summary_rows(&rows))?;

    let xi_mean = xi.iter().sum::<f64>() / xi.len() as f64;
    let mut notes = format!(
        "outcome: {}\n\
         {THAT_COLUMN}: symmetrized predicted transfers T_ij + T_ji per unordered pair\n\
         reference levels: OWN = public-public; Teach, Mono, Techno = neither\n\
         {}\n",
        spec.outcome.column(),
        effect_size_note(xi_mean)
    );
    let slopes = post.marginal_slopes();
    if !slopes.is_empty() {
        let srows: Vec<ParameterSummary> = slopes
            .iter()
            .map(|(level, draws)| summarize_draws(&format!("{THAT_COLUMN}|OWN:{level}"), draws))
            .collect();
        ctx.csv("stage2_marginal_slopes.csv", &SUMMARY_HEADER, summary_rows(&srows))?;
        notes.push_str("marginal slopes: xi + interaction per ownership level, per draw\n");
    }
    ctx.text("stage2_notes.txt", &notes)?;
    ctx.json("stage2_fit.json", &post)?;

    for filter in OwnershipFilter::ALL {
        let map = heatmap_export(&post, &inputs.net, nodes, filter)?;
        let rows: Vec<[String; 6]> = map
            .cells
            .iter()
            .map(|c| {
                [
                    c.row_id.clone(),
                    c.col_id.clone(),
                    c.observed_transfers.to_string(),
                    c.predicted_outcome_per_discharge.to_string(),
                    fmt_opt(c.log_value),
                    u8::from(c.is_zero).to_string(),
                ]
            })
            .collect();
        ctx.csv(
            &format!("heatmap_{}.csv", filter.name()),
            &[
                "row_id",
                "col_id",
                "observed_transfers",
                "predicted_outcome_per_discharge",
                "log_value",
                "is_zero",
            ],
            rows,
        )?;
    }
    Ok(())
}

fn robustness(ctx: &mut Ctx, inputs: &Inputs) -> Result<()> {
    let thresholds = ctx.cfg.robustness_thresholds.clone();
    let cfg = ctx
        .cfg
        .mcmc_config()
        .with_seed(derive_seed(ctx.cfg.seed, "robustness", 0));
    let report = dc_threshold_robustness(
        inputs.nodes()?,
        inputs.dyads()?,
        &inputs.net,
        &thresholds,
        &ctx.cfg.srm,
        &cfg,
    )?;
    let mut header = vec!["threshold".to_string()];
    header.extend(thresholds.iter().map(|t| t.to_string()));
    let href: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = thresholds
        .iter()
        .zip(&report.correlations)
        .map(|(t, row)| {
            std::iter::once(t.to_string())
                .chain(row.iter().map(|v| v.to_string()))
                .collect()
        })
        .collect();
    ctx.csv("robustness.csv", &href, rows)
}

fn simulate(ctx: &mut Ctx) -> Result<()> {
    let truth = ctx.cfg.truth();
    let sim = simulate_stage1(&truth)?;
    for (name, res) in [
        ("nodes.csv", io::write_node_table(&ctx.path("nodes.csv"), &sim.nodes)),
        ("dyads.csv", io::write_dyad_table(&ctx.path("dyads.csv"), &sim.dyads)),
        ("edges.csv", io::write_edges(&ctx.path("edges.csv"), &sim.network)),
        (
            "travel_times.csv",
            io::write_travel_matrix(
                &ctx.path("travel_times.csv"),
                sim.dyads.ids(),
                sim.dyads.distance_matrix(),
            ),
        ),
    ] {
        res?;
        ctx.outputs.push(name.to_string());
    }
    ctx.json("truth.json", &truth)
}

fn recovery_rows(report: &RecoveryReport) -> Vec<[String; 8]> {
    report
        .rows
        .iter()
        .map(|r| {
            [
                r.parameter.clone(),
                r.truth.to_string(),
                r.replicates.to_string(),
                r.covered.to_string(),
                r.coverage.to_string(),
                r.sign_agree.to_string(),
                r.bias.to_string(),
                r.mean_ci_width.to_string(),
            ]
        })
        .collect()
}

const RECOVERY_HEADER: [&str; 8] = [
    "parameter",
    "truth",
    "replicates",
    "covered",
    "coverage",
    "sign_agree",
    "bias",
    "mean_ci_width",
];

fn recovery(ctx: &mut Ctx) -> Result<()> {
    let truth = ctx.cfg.truth();
    let cfg = ctx.cfg.mcmc_config();
    let report = recovery_experiment(&truth, ctx.cfg.replicates, &cfg)?;
    ctx.csv("recovery_stage1.csv", &RECOVERY_HEADER, recovery_rows(&report))?;
    ctx.json("recovery_stage1.json", &report)?;
    if ctx.cfg.recovery_stage2 {
        let report = stage2_recovery_experiment(&truth, ctx.cfg.replicates, &cfg)?;
        ctx.csv("recovery_stage2.csv", &RECOVERY_HEADER, recovery_rows(&report))?;
        ctx.json("recovery_stage2.json", &report)?;
    }
    Ok(())
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<()> {
    match command {
        Command::Simulate => simulate(ctx),
        Command::Recovery => recovery(ctx),
        _ => {
            let inputs = load_inputs(&ctx.cfg)?;
            match command {
                Command::Netstats => netstats(ctx, &inputs),
                Command::Communities => communities(ctx, &inputs),
                Command::FitStage1 => fit_stage1(ctx, &inputs),
                Command::Gof => gof(ctx, &inputs),
                Command::Predict => predict(ctx, &inputs).map(|_| ()),
                Command::FitStage2 => fit_stage2(ctx, &inputs),
                Command::Pipeline => {
                    netstats(ctx, &inputs)?;
                    communities(ctx, &inputs)?;
                    fit_stage1(ctx, &inputs)?;
                    gof(ctx, &inputs)?;
                    predict(ctx, &inputs)?;
                    fit_stage2(ctx, &inputs)?;
                    if !ctx.cfg.robustness_thresholds.is_empty() {
                        robustness(ctx, &inputs)?;
                    }
                    Ok(())
                }
                Command::Simulate | Command::Recovery => unreachable!(),
            }
        }
    }
}

/// Runs one command and always writes the manifest. Returns the exit code.
pub fn run(command: Command, config_path: &Path, overrides: &Overrides) -> i32 {
    let start = Instant::now();
    let loaded = PipelineConfig::load(config_path);
    let raw = std::fs::read(config_path).unwrap_or_default();
    let out = overrides
        .out
        .clone()
        .or_else(|| loaded.as_ref().ok().and_then(|(c, _)| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut outputs = Vec::new();
    let mut seed = None;
    let result = loaded.and_then(|(mut cfg, _)| {
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        seed = Some(cfg.seed);
        std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
        let mut ctx = Ctx {
            cfg,
            out: out.clone(),
            outputs: Vec::new(),
        };
        let r = dispatch(command, &mut ctx);
        outputs = ctx.outputs;
        r
    });
    let (status, code, message) = match &result {
        Ok(()) => ("ok", 0, None),
        Err(e) => ("error", e.exit_code(), Some(e.to_string())),
    };
    if let Some(m) = &message {
        eprintln!("dyadnet {}: {m}", command.name());
    }
    let manifest = Manifest {
        command: command.name().to_string(),
        config_sha256: config_hash(&raw),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        status: status.to_string(),
        exit_code: code,
        message,
        outputs,
    };
    if let Err(e) = std::fs::create_dir_all(&out)
        .map_err(|e| Error::io(out.display().to_string(), e))
        .and_then(|_| write_manifest(&out, &manifest))
    {
        eprintln!("dyadnet: cannot write manifest: {e}");
        return if code == 0 { e.exit_code() } else { code };
    }
    code
}
