//! Generative simulator for both stages with known ground truth.

use std::collections::BTreeMap;

use log::warn;
use nalgebra::Matrix2;
use rand::Rng as _;
use rand_distr::{Beta, Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gof::poisson_draw;
use crate::graph::{geo_threshold_network, DirectedCountNetwork};
use crate::linalg::{mvn2, psd_factor2, std_normal};
use crate::mcmc::{fit_srm, summarize_posterior, McmcConfig, ParameterSummary};
use crate::rng::{self, Rng};
use crate::srm::{
    assemble_design, DyadCovariate, DyadCovarianceParams, DyadTable, NodeCovariate, NodeTable,
    SrmSpec, DEATHS_COLUMN, READMISSIONS_COLUMN,
};
use crate::two_stage::{
    assemble_quality_design, fit_quality_model, overall_quality, PredictedTransfers,
    QualityMatrix, QualityModelSpec,
};

/// Spatial layout of the synthetic nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryRecipe {
    /// Travel times are rescaled so their mean over ordered pairs equals this.
    pub mean_distance: f64,
    /// The unit square is cut into `lha_grid x lha_grid` administrative areas.
    pub lha_grid: usize,
    /// Proximity threshold (minutes) for the DC and BW covariates.
    pub geo_threshold: f64,
}

impl Default for GeometryRecipe {
    fn default() -> Self {
        Self {
            mean_distance: 64.0,
            lha_grid: 4,
            geo_threshold: 30.0,
        }
    }
}

/// Ground truth of the pairwise quality model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stage2Truth {
    pub spec: QualityModelSpec,
    /// Original-scale coefficients by design column; absent columns are zero.
    pub coefficients: BTreeMap<String, f64>,
    pub sigma_u2: f64,
    pub sigma_eps2: f64,
}

impl Default for Stage2Truth {
    fn default() -> Self {
        let coefficients = [
            ("(Intercept)", 1.689),
            ("HD", 0.084),
            ("DW", 0.521),
            ("A", 0.017),
            ("F", 0.512),
            ("That", -0.012),
            ("OWN:private-private", -0.772),
            ("OWN:public-private", -0.293),
            ("Teach:both", 0.003),
            ("Teach:one", -0.010),
            ("Mono:both", -0.001),
            ("Mono:one", -0.341),
            ("Techno:both", -0.293),
            ("Techno:one", -0.564),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            spec: QualityModelSpec::default(),
            coefficients,
            sigma_u2: 0.116,
            sigma_eps2: 0.074,
        }
    }
}

/// Intercept of [`SyntheticTruth::full_table`].
pub const FULL_TABLE_INTERCEPT: f64 = -8.78;

/// Full simulation truth for both stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticTruth {
    pub nodes: usize,
    pub seed: u64,
    /// Covariates entering the flow model.
    pub spec: SrmSpec,
    /// Original-scale flow coefficients by design column; absent columns are zero.
    pub coefficients: BTreeMap<String, f64>,
    pub covariance: DyadCovarianceParams<f64>,
    pub geometry: GeometryRecipe,
    pub stage2: Stage2Truth,
}

impl Default for SyntheticTruth {
    fn default() -> Self {
        Self::benchmark(145, 0)
    }
}

impl SyntheticTruth {
    /// Flow model with discharges and geographic degree on both sides,
    /// travel time and co-membership; variance components and the reported
    /// coefficients of the original regional fit.
    pub fn benchmark(nodes: usize, seed: u64) -> Self {
        let spec = SrmSpec {
            sender: vec![NodeCovariate::Discharges, NodeCovariate::GeoDegree],
            receiver: vec![NodeCovariate::Discharges, NodeCovariate::GeoDegree],
            dyad: vec![DyadCovariate::Distance, DyadCovariate::CoMembership],
            ..SrmSpec::default()
        };
        let coefficients = [
            ("(Intercept)", -3.9),
            ("sender:HD", 0.075),
            ("receiver:HD", 0.088),
            ("sender:DC", 0.059),
            ("receiver:DC", 0.046),
            ("D", -0.070),
            ("CM", 1.787),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            nodes,
            seed,
            spec,
            coefficients,
            covariance: DyadCovarianceParams {
                sigma_a2: 0.544,
                sigma_b2: 0.616,
                sigma_ab: 0.362,
                sigma_nu2: 1.961,
                rho: 0.886,
            },
            geometry: GeometryRecipe::default(),
            stage2: Stage2Truth::default(),
        }
    }

    /// Every non-quality node covariate on both sides plus D and CM, at the
    /// reference first-stage values. The intercept keeps the mean count
    /// of [`SyntheticTruth::benchmark`].
    pub fn full_table(nodes: usize, seed: u64) -> Self {
        use NodeCovariate::*;
        let side = vec![
            Discharges,
            DrgWeight,
            Age,
            Female,
            GeoDegree,
            GeoBetweenness,
            Teaching,
            Monospecialized,
            Technological,
            Public,
            BedSaturation,
            BedTurnover,
        ];
        let spec = SrmSpec {
            sender: side.clone(),
            receiver: side,
            dyad: vec![DyadCovariate::Distance, DyadCovariate::CoMembership],
            ..SrmSpec::default()
        };
        let coefficients = [
            ("(Intercept)", FULL_TABLE_INTERCEPT),
            ("D", -0.070),
            ("CM", 1.787),
            ("sender:HD", 0.075),
            ("sender:DW", -0.012),
            ("sender:A", 0.026),
            ("sender:F", -0.804),
            ("sender:DC", 0.059),
            ("sender:BW", -0.678),
            ("sender:Teach", 0.075),
            ("sender:Mono", -0.373),
            ("sender:Techno", 0.887),
            ("sender:Public", 0.681),
            ("sender:BS", 0.023),
            ("sender:BT", 0.009),
            ("receiver:HD", 0.088),
            ("receiver:DW", 1.199),
            ("receiver:A", -0.035),
            ("receiver:F", -1.831),
            ("receiver:DC", 0.046),
            ("receiver:BW", 0.449),
            ("receiver:Teach", 0.536),
            ("receiver:Mono", 0.328),
            ("receiver:Techno", 0.918),
            ("receiver:Public", 0.288),
            ("receiver:BS", 0.026),
            ("receiver:BT", -0.003),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            spec,
            coefficients,
            ..Self::benchmark(nodes, seed)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 3 {
            return Err(Error::config("synthetic truth needs at least three nodes"));
        }
        self.covariance.validate()?;
        if !(self.stage2.sigma_u2 >= 0.0 && self.stage2.sigma_eps2 >= 0.0) {
            return Err(Error::config("stage-two variances must be non-negative"));
        }
        let g = &self.geometry;
        if !(g.mean_distance > 0.0 && g.geo_threshold > 0.0 && g.lha_grid >= 1) {
            return Err(Error::config("geometry recipe needs positive distance, threshold and grid"));
        }
        Ok(())
    }
}

/// Zero-padded identifiers `H001, H002, ...`.
pub fn node_ids(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(3);
    (1..=n).map(|k| format!("H{k:0width$}")).collect()
}

/// Output of [`simulate_stage1`].
#[derive(Debug, Clone)]
pub struct SyntheticStage1 {
    pub nodes: NodeTable,
    pub dyads: DyadTable,
    pub network: DirectedCountNetwork,
    /// `exp(x_ij' beta)` under the truth, in node order.
    pub fixed_mean: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `eps_ij = a_i + b_j + nu_ij`; zero diagonal.
    pub residuals: Vec<Vec<f64>>,
    /// Pairs whose linear predictor hit the clamp.
    pub saturated: usize,
}

impl SyntheticStage1 {
    /// The true fixed-effect means as exogenous predicted transfers.
    pub fn true_transfers(&self) -> Result<PredictedTransfers> {
        PredictedTransfers::from_fixed_effects(self.nodes.ids().to_vec(), self.fixed_mean.clone())
    }
}

fn normal(rng: &mut Rng, mean: f64, sd: f64) -> f64 {
    mean + sd * std_normal(rng)
}

fn geometry(n: usize, recipe: &GeometryRecipe, rng: &mut Rng) -> (Vec<Vec<f64>>, Vec<Vec<bool>>) {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut dist = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i][j] = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                total += dist[i][j];
            }
        }
    }
    let scale = recipe.mean_distance / (total / (n * (n - 1)) as f64);
    let g = recipe.lha_grid;
    let cell = |p: (f64, f64)| {
        let cx = ((p.0 * g as f64) as usize).min(g - 1);
        let cy = ((p.1 * g as f64) as usize).min(g - 1);
        cx * g + cy
    };
    let mut cm = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] *= scale;
            cm[i][j] = i != j && cell(pts[i]) == cell(pts[j]);
        }
    }
    (dist, cm)
}

fn node_covariates(ids: &[String], rng: &mut Rng) -> Result<NodeTable> {
    let n = ids.len();
    let mut table = NodeTable::new(ids.to_vec())?;
    let hd_dist = LogNormal::new(6000f64.ln(), 0.5).expect("valid lognormal");
    let f_dist = Beta::new(13.0, 11.0).expect("valid beta");
    let mut cols: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for _ in 0..n {
        let hd = hd_dist.sample(rng).round().max(50.0);
        let row = [
            ("HD", hd),
            ("DW", normal(rng, 1.16, 0.24).clamp(0.4, 3.0)),
            ("A", normal(rng, 62.4, 7.4)),
            ("F", f_dist.sample(rng)),
            ("Teach", f64::from(u8::from(rng.random_bool(0.15)))),
            ("Mono", f64::from(u8::from(rng.random_bool(0.15)))),
            ("Techno", f64::from(u8::from(rng.random_bool(0.3)))),
            ("Public", f64::from(u8::from(rng.random_bool(0.6)))),
            ("AM", normal(rng, 7.0, 1.5)),
            ("AR", normal(rng, 10.0, 2.0)),
            ("BS", normal(rng, 72.0, 17.6).clamp(0.0, 100.0)),
            ("BT", normal(rng, 40.6, 9.6).max(1.0)),
            (DEATHS_COLUMN, poisson_draw(0.07 * hd, rng)),
            (READMISSIONS_COLUMN, poisson_draw(0.10 * hd, rng)),
        ];
        for (k, v) in row {
            cols.entry(k).or_default().push(v);
        }
    }
    for (k, v) in cols {
        table.set_values(k, &v)?;
    }
    Ok(table)
}

fn coefficient_vector(columns: &[String], truth: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    if let Some(unknown) = truth.keys().find(|k| !columns.contains(k)) {
        return Err(Error::config(format!(
            "truth coefficient '{unknown}' is not a design column (columns: {})",
            columns.join(", ")
        )));
    }
    Ok(columns.iter().map(|c| truth.get(c).copied().unwrap_or(0.0)).collect())
}

/// Draws node, dyad and transfer tables from the flow model's generative law.
pub fn simulate_stage1(truth: &SyntheticTruth) -> Result<SyntheticStage1> {
    truth.validate()?;
    let n = truth.nodes;
    let ids = node_ids(n);
    let (dist, cm) = geometry(n, &truth.geometry, &mut rng::stream(truth.seed, "synth-geometry", 0));
    let dyads = DyadTable::from_matrices(ids.clone(), dist.clone(), cm)?;
    let mut nodes = node_covariates(&ids, &mut rng::stream(truth.seed, "synth-covariates", 0))?;
    let geo = geo_threshold_network(&ids, &dist, truth.geometry.geo_threshold)?;
    let dc: Vec<f64> = geo.degrees().into_iter().map(|d| d as f64).collect();
    nodes.set_values(NodeCovariate::GeoDegree.column(), &dc)?;
    nodes.set_values(NodeCovariate::GeoBetweenness.column(), &geo.betweenness::<f64>())?;

    let raw_spec = SrmSpec {
        standardize: false,
        ..truth.spec.clone()
    };
    let empty = DirectedCountNetwork::with_nodes(&ids)?;
    let design = assemble_design::<f64>(&nodes, &dyads, &empty, &raw_spec)?;
    let beta = coefficient_vector(design.columns(), &truth.coefficients)?;

    let cov = &truth.covariance;
    let mut erng = rng::stream(truth.seed, "synth-effects", 0);
    let l_ab = psd_factor2(&Matrix2::new(
        cov.sigma_a2,
        cov.sigma_ab,
        cov.sigma_ab,
        cov.sigma_b2,
    ));
    let effects: Vec<_> = (0..n).map(|_| mvn2(&l_ab, &mut erng)).collect();
    let a: Vec<f64> = effects.iter().map(|e| e[0]).collect();
    let b: Vec<f64> = effects.iter().map(|e| e[1]).collect();
    let l_nu = psd_factor2(&(Matrix2::new(1.0, cov.rho, cov.rho, 1.0) * cov.sigma_nu2));
    let mut nu = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = mvn2(&l_nu, &mut erng);
            nu[i][j] = v[0];
            nu[j][i] = v[1];
        }
    }

    let bound = design.clamp();
    let mut crng = rng::stream(truth.seed, "synth-counts", 0);
    let mut fixed_mean = vec![vec![0.0; n]; n];
    let mut residuals = vec![vec![0.0; n]; n];
    let mut counts = vec![vec![0u64; n]; n];
    let mut saturated = 0;
    for r in 0..design.rows() {
        let (i, j) = design.endpoints(r);
        let xb = design.dot(r, &beta);
        let eps = a[i] + b[j] + nu[i][j];
        let eta = xb + eps;
        if eta.abs() > bound {
            saturated += 1;
        }
        fixed_mean[i][j] = xb.clamp(-bound, bound).exp();
        residuals[i][j] = eps;
        counts[i][j] = poisson_draw(eta.clamp(-bound, bound).exp(), &mut crng) as u64;
    }
    if saturated as f64 > 0.001 * design.rows() as f64 {
        warn!(
            "{saturated} of {} pairs saturate the linear-predictor clamp; truth is too extreme",
            design.rows()
        );
    }
    let network = DirectedCountNetwork::from_matrix(&ids, &counts)?;
    Ok(SyntheticStage1 {
        nodes,
        dyads,
        network,
        fixed_mean,
        a,
        b,
        residuals,
        saturated,
    })
}

/// Draws pairwise outcome counts from the quality model's generative law.
pub fn simulate_stage2(
    truth: &Stage2Truth,
    that: &PredictedTransfers,
    nodes: &NodeTable,
    seed: u64,
) -> Result<QualityMatrix> {
    if !(truth.sigma_u2 >= 0.0 && truth.sigma_eps2 >= 0.0) {
        return Err(Error::config("stage-two variances must be non-negative"));
    }
    let ids = that.node_ids.clone();
    let zero = overall_quality(&ids, &vec![0; ids.len()])?;
    let spec = QualityModelSpec {
        standardize: false,
        ..truth.spec.clone()
    };
    let design = assemble_quality_design(&zero, that, nodes, &spec)?;
    let beta = coefficient_vector(&design.columns, &truth.coefficients)?;
    let mut rng = rng::stream(seed, "synth-stage2", 0);
    let n = design.node_ids.len();
    let su = truth.sigma_u2.sqrt();
    let se = truth.sigma_eps2.sqrt();
    let u: Vec<f64> = (0..n).map(|_| su * std_normal(&mut rng)).collect();
    let mut values = vec![vec![0u64; n]; n];
    for (r, &(i, j)) in design.pairs.iter().enumerate() {
        let eta = design.dot(r, &beta) + u[i] + u[j] + se * std_normal(&mut rng);
        let w = poisson_draw(eta.clamp(-spec.clamp, spec.clamp).exp(), &mut rng) as u64;
        values[i][j] = w;
        values[j][i] = w;
    }
    QualityMatrix::from_values(design.node_ids.clone(), values)
}

/// Calibration of one parameter across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub parameter: String,
    pub truth: f64,
    pub replicates: usize,
    /// Replicates whose 95% credible interval contains the truth.
    pub covered: usize,
    pub coverage: f64,
    /// Replicates whose posterior mean has the sign of the truth.
    pub sign_agree: usize,
    pub bias: f64,
    pub mean_ci_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub replicates: usize,
    pub rows: Vec<RecoveryRow>,
}

impl RecoveryReport {
    pub fn row(&self, parameter: &str) -> Option<&RecoveryRow> {
        self.rows.iter().find(|r| r.parameter == parameter)
    }

    fn assemble(truths: &[(String, f64)], fits: &[Vec<ParameterSummary>]) -> Self {
        let k = fits.len();
        let rows = truths
            .iter()
            .map(|(name, truth)| {
                let sums: Vec<&ParameterSummary> = fits
                    .iter()
                    .map(|f| f.iter().find(|s| &s.parameter == name).expect("parameter present"))
                    .collect();
                let covered = sums.iter().filter(|s| s.covers(*truth)).count();
                let sign_agree = sums
                    .iter()
                    .filter(|s| s.mean.signum() == truth.signum())
                    .count();
                RecoveryRow {
                    parameter: name.clone(),
                    truth: *truth,
                    replicates: k,
                    covered,
                    coverage: covered as f64 / k as f64,
                    sign_agree,
                    bias: sums.iter().map(|s| s.mean - truth).sum::<f64>() / k as f64,
                    mean_ci_width: sums.iter().map(|s| s.ci_upper - s.ci_lower).sum::<f64>()
                        / k as f64,
                }
            })
            .collect();
        Self { replicates: k, rows }
    }
}

fn replicate_seeds(truth_seed: u64, config_seed: u64, r: usize) -> (u64, u64) {
    (
        rng::derive_seed(truth_seed, "replicate", r as u64),
        rng::derive_seed(config_seed, "replicate-fit", r as u64),
    )
}

/// Simulates and refits the flow model `replicates` times.
pub fn recovery_experiment(
    truth: &SyntheticTruth,
    replicates: usize,
    config: &McmcConfig,
) -> Result<RecoveryReport> {
    if replicates == 0 {
        return Err(Error::config("recovery needs at least one replicate"));
    }
    truth.validate()?;
    let fits = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let (ts, cs) = replicate_seeds(truth.seed, config.seed, r);
            let sim = simulate_stage1(&truth.clone().with_seed(ts))?;
            let design = assemble_design::<f64>(&sim.nodes, &sim.dyads, &sim.network, &truth.spec)?;
            let samples = fit_srm(&design, &config.clone().with_seed(cs))?;
            Ok((design.columns().to_vec(), summarize_posterior(&samples)))
        })
        .collect::<Result<Vec<_>>>()?;
    let columns = &fits[0].0;
    let cov = &truth.covariance;
    let mut truths: Vec<(String, f64)> = columns
        .iter()
        .map(|c| (c.clone(), truth.coefficients.get(c).copied().unwrap_or(0.0)))
        .collect();
    truths.extend([
        ("sigma_a2".to_string(), cov.sigma_a2),
        ("sigma_ab".to_string(), cov.sigma_ab),
        ("sigma_b2".to_string(), cov.sigma_b2),
        ("sigma_nu2".to_string(), cov.sigma_nu2),
        ("rho".to_string(), cov.rho),
    ]);
    let summaries: Vec<_> = fits.into_iter().map(|f| f.1).collect();
    Ok(RecoveryReport::assemble(&truths, &summaries))
}

/// Simulates the quality outcome on top of the true fixed-effect transfer
/// means and refits the quality model `replicates` times.
pub fn stage2_recovery_experiment(
    truth: &SyntheticTruth,
    replicates: usize,
    config: &McmcConfig,
) -> Result<RecoveryReport> {
    if replicates == 0 {
        return Err(Error::config("recovery needs at least one replicate"));
    }
    truth.validate()?;
    let fits = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let (ts, cs) = replicate_seeds(truth.seed, config.seed, r);
            let sim = simulate_stage1(&truth.clone().with_seed(ts))?;
            let that = sim.true_transfers()?;
            let w = simulate_stage2(&truth.stage2, &that, &sim.nodes, ts)?;
            let design = assemble_quality_design(&w, &that, &sim.nodes, &truth.stage2.spec)?;
            let post = fit_quality_model(&design, &config.clone().with_seed(cs))?;
            Ok((design.columns.clone(), post.summarize()))
        })
        .collect::<Result<Vec<_>>>()?;
    let columns = &fits[0].0;
    let s2 = &truth.stage2;
    let mut truths: Vec<(String, f64)> = columns
        .iter()
        .map(|c| (c.clone(), s2.coefficients.get(c).copied().unwrap_or(0.0)))
        .collect();
    truths.push(("sigma_u2".to_string(), s2.sigma_u2));
    truths.push(("sigma_eps2".to_string(), s2.sigma_eps2));
    let summaries: Vec<_> = fits.into_iter().map(|f| f.1).collect();
    Ok(RecoveryReport::assemble(&truths, &summaries))
}
