use serde::{Deserialize, Serialize};

use super::predict::PredictedTransfers;
use crate::error::{Error, Result};
use crate::srm::{standardize_columns, CoefTransform, NodeTable, DEATHS_COLUMN, READMISSIONS_COLUMN};

/// Symmetric pairwise outcome counts `W_ij` in canonical node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityMatrix {
    pub node_ids: Vec<String>,
    /// Square, symmetric, zero diagonal.
    pub values: Vec<Vec<u64>>,
}

impl QualityMatrix {
    pub fn from_values(node_ids: Vec<String>, values: Vec<Vec<u64>>) -> Result<Self> {
        let n = node_ids.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::input("quality matrix must be square"));
        }
        for i in 0..n {
            for j in 0..i {
                if values[i][j] != values[j][i] {
                    return Err(Error::input(format!(
                        "quality matrix is not symmetric at ({}, {})",
                        node_ids[i], node_ids[j]
                    )));
                }
            }
        }
        Ok(Self { node_ids, values })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.values[i][j]
    }
}

/// `W_ij = W_i + W_j` for every pair.
pub fn overall_quality(node_ids: &[String], outcomes: &[i64]) -> Result<QualityMatrix> {
    if node_ids.len() != outcomes.len() {
        return Err(Error::input("one outcome count per node is required"));
    }
    if let Some(k) = outcomes.iter().position(|&w| w < 0) {
        return Err(Error::input(format!(
            "outcome count for node '{}' is negative",
            node_ids[k]
        )));
    }
    let n = node_ids.len();
    let values = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0 } else { (outcomes[i] + outcomes[j]) as u64 })
                .collect()
        })
        .collect();
    Ok(QualityMatrix {
        node_ids: node_ids.to_vec(),
        values,
    })
}

/// Which adverse outcome is counted per hospital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    #[default]
    Deaths,
    Readmissions,
}

impl Outcome {
    pub fn column(self) -> &'static str {
        match self {
            Self::Deaths => DEATHS_COLUMN,
            Self::Readmissions => READMISSIONS_COLUMN,
        }
    }
}

/// Pair outcome matrix from the per-node outcome column, in sorted id order.
pub fn quality_from_nodes(nodes: &NodeTable, outcome: Outcome) -> Result<QualityMatrix> {
    let mut ids = nodes.ids().to_vec();
    ids.sort();
    let w = ids
        .iter()
        .map(|id| {
            let v = nodes.require(id, outcome.column())?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::input(format!(
                    "{} for node '{id}' must be a non-negative integer",
                    outcome.column()
                )));
            }
            Ok(v as i64)
        })
        .collect::<Result<Vec<_>>>()?;
    overall_quality(&ids, &w)
}

/// Covariates of the pairwise quality model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityModelSpec {
    pub outcome: Outcome,
    /// Log of the pair-average discharges.
    pub discharges: bool,
    pub drg_weight: bool,
    pub age: bool,
    pub female: bool,
    /// Ownership category; reference level public-public.
    pub ownership: bool,
    /// Binary-attribute categories; reference level "neither".
    pub teaching: bool,
    pub monospecialized: bool,
    pub technological: bool,
    /// Predicted transfers times ownership dummies.
    pub interaction: bool,
    pub standardize: bool,
    pub clamp: f64,
}

impl Default for QualityModelSpec {
    fn default() -> Self {
        Self {
            outcome: Outcome::Deaths,
            discharges: true,
            drg_weight: true,
            age: true,
            female: true,
            ownership: true,
            teaching: true,
            monospecialized: true,
            technological: true,
            interaction: false,
            standardize: true,
            clamp: 30.0,
        }
    }
}

pub const THAT_COLUMN: &str = "That";
pub const OWNERSHIP_LEVELS: [&str; 3] = ["public-public", "private-private", "public-private"];
pub const BINARY_LEVELS: [&str; 3] = ["neither", "both", "one"];

/// Ownership level index into [`OWNERSHIP_LEVELS`].
pub fn ownership_level(public_i: bool, public_j: bool) -> usize {
    match (public_i, public_j) {
        (true, true) => 0,
        (false, false) => 1,
        _ => 2,
    }
}

/// Binary-attribute level index into [`BINARY_LEVELS`].
pub fn binary_level(x_i: bool, x_j: bool) -> usize {
    match (x_i, x_j) {
        (false, false) => 0,
        (true, true) => 1,
        _ => 2,
    }
}

/// One row per unordered pair `i < j` in canonical node order.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityDesign {
    pub node_ids: Vec<String>,
    pub pairs: Vec<(usize, usize)>,
    pub columns: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub transform: CoefTransform<f64>,
    pub clamp: f64,
    pub spec: QualityModelSpec,
}

impl QualityDesign {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn rows(&self) -> usize {
        self.pairs.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let p = self.dim();
        &self.x[r * p..(r + 1) * p]
    }

    pub fn dot(&self, r: usize, beta: &[f64]) -> f64 {
        self.row(r).iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn flag(nodes: &NodeTable, id: &str, col: &str) -> Result<bool> {
    let v = nodes.require(id, col)?;
    if v != 0.0 && v != 1.0 {
        return Err(Error::input(format!("{col} for node '{id}' must be 0 or 1")));
    }
    Ok(v == 1.0)
}

/// Builds the pair design: intercept, pair-average node covariates, the
/// symmetrized predicted transfers, category dummies and optional
/// transfer-by-ownership products.
pub fn assemble_quality_design(
    w: &QualityMatrix,
    that: &PredictedTransfers,
    nodes: &NodeTable,
    spec: &QualityModelSpec,
) -> Result<QualityDesign> {
    that.ensure_exogenous()?;
    if !(spec.clamp > 0.0) {
        return Err(Error::config("linear-predictor clamp must be positive"));
    }
    let mut ids = w.node_ids.clone();
    ids.sort();
    let n = ids.len();
    if n < 3 {
        return Err(Error::input("quality model needs at least three nodes"));
    }
    let wi: Vec<usize> = ids.iter().map(|id| w.node_ids.iter().position(|x| x == id).unwrap()).collect();
    let ti: Vec<usize> = ids
        .iter()
        .map(|id| {
            that.index_of(id)
                .ok_or_else(|| Error::input(format!("node '{id}' missing from predicted transfers")))
        })
        .collect::<Result<_>>()?;
    if that.len() != n {
        return Err(Error::input("predicted transfers and quality matrix cover different nodes"));
    }

    let mut columns = vec!["(Intercept)".to_string()];
    let mut continuous = vec![false];
    let averaged: Vec<(&str, &str, bool)> = [
        ("HD", "HD", spec.discharges),
        ("DW", "DW", spec.drg_weight),
        ("A", "A", spec.age),
        ("F", "F", spec.female),
    ]
    .into_iter()
    .filter(|t| t.2)
    .collect();
    for (name, _, _) in &averaged {
        columns.push(name.to_string());
        continuous.push(true);
    }
    columns.push(THAT_COLUMN.to_string());
    continuous.push(true);
    let mut categories: Vec<(&str, &[&str; 3])> = Vec::new();
    if spec.ownership || spec.interaction {
        categories.push(("OWN", &OWNERSHIP_LEVELS));
    }
    for (on, col) in [
        (spec.teaching, "Teach"),
        (spec.monospecialized, "Mono"),
        (spec.technological, "Techno"),
    ] {
        if on {
            categories.push((col, &BINARY_LEVELS));
        }
    }
    for (cat, levels) in &categories {
        for level in &levels[1..] {
            columns.push(format!("{cat}:{level}"));
            continuous.push(false);
        }
    }
    if spec.interaction {
        for level in &OWNERSHIP_LEVELS[1..] {
            columns.push(format!("{THAT_COLUMN}:OWN:{level}"));
            continuous.push(true);
        }
    }
    let p = columns.len();

    let node_avg = |id: &str, col: &str| nodes.require(id, col);
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut x = Vec::with_capacity(n * (n - 1) / 2 * p);
    let mut y = Vec::with_capacity(n * (n - 1) / 2);
    let mut level_counts = vec![[0usize; 3]; categories.len()];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&ids[i], &ids[j]);
            pairs.push((i, j));
            y.push(w.get(wi[i], wi[j]) as f64);
            x.push(1.0);
            for (_, col, _) in &averaged {
                let avg = 0.5 * (node_avg(a, col)? + node_avg(b, col)?);
                if *col == "HD" {
                    if !(avg > 0.0) {
                        return Err(Error::input(format!(
                            "discharges for pair ({a}, {b}) must be positive"
                        )));
                    }
                    x.push(avg.ln());
                } else {
                    x.push(avg);
                }
            }
            let t = that.symmetrized(ti[i], ti[j]);
            x.push(t);
            let mut own = 0;
            for (k, (cat, _)) in categories.iter().enumerate() {
                let col = if *cat == "OWN" { "Public" } else { cat };
                let (xa, xb) = (flag(nodes, a, col)?, flag(nodes, b, col)?);
                let level = if *cat == "OWN" {
                    own = ownership_level(xa, xb);
                    own
                } else {
                    binary_level(xa, xb)
                };
                level_counts[k][level] += 1;
                x.push(f64::from(u8::from(level == 1)));
                x.push(f64::from(u8::from(level == 2)));
            }
            if spec.interaction {
                x.push(if own == 1 { t } else { 0.0 });
                x.push(if own == 2 { t } else { 0.0 });
            }
        }
    }
    for (k, (cat, levels)) in categories.iter().enumerate() {
        for (l, level) in levels.iter().enumerate() {
            let needed = l > 0 || (*cat == "OWN" && spec.interaction);
            if needed && level_counts[k][l] == 0 {
                return Err(Error::input(format!(
                    "category {cat}:{level} has no pairs; drop the {cat} terms from the quality model"
                )));
            }
        }
    }
    let transform = if spec.standardize {
        standardize_columns(&mut x, p, &continuous).1
    } else {
        CoefTransform::identity(p)
    };
    Ok(QualityDesign {
        node_ids: ids,
        pairs,
        columns,
        x,
        y,
        transform,
        clamp: spec.clamp,
        spec: spec.clone(),
    })
}
