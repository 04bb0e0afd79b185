//! Ordered-pair design matrix for the flow model.

use serde::{Deserialize, Serialize};

use super::spec::SrmSpec;
use super::tables::{DyadTable, NodeTable};
use crate::error::{Error, Result};
use crate::graph::DirectedCountNetwork;
use crate::scalar::Real;

/// Linear map from working-scale coefficients to original-scale coefficients:
/// `beta_original = M * beta_working`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefTransform<T> {
    dim: usize,
    /// Row-major `dim x dim`.
    matrix: Vec<T>,
}

impl<T: Real> CoefTransform<T> {
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![T::zero(); dim * dim];
        for k in 0..dim {
            matrix[k * dim + k] = T::one();
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.matrix[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.matrix[r * self.dim + c] = v;
    }

    pub fn apply(&self, working: &[T]) -> Vec<T> {
        assert_eq!(working.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.matrix[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(working)
                    .map(|(&m, &b)| m * b)
                    .sum()
            })
            .collect()
    }
}

/// Centering/scaling recorded for one column; identity when the column was left raw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling<T> {
    pub center: T,
    pub scale: T,
}

/// Standardizes the flagged columns of a row-major matrix in place and returns
/// the coefficient back-transform. Column 0 must be the intercept.
pub fn standardize_columns<T: Real>(
    x: &mut [T],
    p: usize,
    continuous: &[bool],
) -> (Vec<ColumnScaling<T>>, CoefTransform<T>) {
    let rows = x.len() / p;
    let mut scaling = vec![
        ColumnScaling {
            center: T::zero(),
            scale: T::one()
        };
        p
    ];
    let mut transform = CoefTransform::identity(p);
    for k in 1..p {
        if !continuous[k] || rows < 2 {
            continue;
        }
        let col: Vec<T> = (0..rows).map(|r| x[r * p + k]).collect();
        let m = crate::stats::mean(&col);
        let s = crate::stats::sd(&col);
        if !(s > T::zero()) {
            continue;
        }
        for r in 0..rows {
            x[r * p + k] = (x[r * p + k] - m) / s;
        }
        scaling[k] = ColumnScaling {
            center: m,
            scale: s,
        };
        transform.set(k, k, T::one() / s);
        transform.set(0, k, -m / s);
    }
    (scaling, transform)
}

/// What went into a design; carried into every downstream artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProvenance {
    pub spec: SrmSpec,
    /// True when a quality measure is among the design columns.
    pub quality_in_design: bool,
    /// Covariates requested by the `SrmSpec` but excluded as quality-related.
    pub excluded: Vec<String>,
}

/// One row per ordered pair `(i, j)`, `i != j`, zero counts included.
///
/// Nodes are held in sorted-id order so that relabeling or reordering the
/// inputs yields the same design. Row `r(i, j) = i (N - 1) + j'` where `j'`
/// skips the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadDesign<T> {
    node_ids: Vec<String>,
    columns: Vec<String>,
    continuous: Vec<bool>,
    x: Vec<T>,
    y: Vec<u64>,
    scaling: Vec<ColumnScaling<T>>,
    transform: CoefTransform<T>,
    clamp: T,
    provenance: DesignProvenance,
}

impl<T: Real> DyadDesign<T> {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn is_continuous(&self, k: usize) -> bool {
        self.continuous[k]
    }

    pub fn response(&self) -> &[u64] {
        &self.y
    }

    pub fn row(&self, r: usize) -> &[T] {
        let p = self.dim();
        &self.x[r * p..(r + 1) * p]
    }

    pub fn matrix(&self) -> &[T] {
        &self.x
    }

    pub fn scaling(&self) -> &[ColumnScaling<T>] {
        &self.scaling
    }

    pub fn transform(&self) -> &CoefTransform<T> {
        &self.transform
    }

    pub fn clamp(&self) -> T {
        self.clamp
    }

    pub fn provenance(&self) -> &DesignProvenance {
        &self.provenance
    }

    pub fn row_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j);
        let n = self.node_count();
        i * (n - 1) + if j < i { j } else { j - 1 }
    }

    /// `(sender, receiver)` of row `r`.
    pub fn endpoints(&self, r: usize) -> (usize, usize) {
        let n1 = self.node_count() - 1;
        let i = r / n1;
        let k = r % n1;
        (i, if k < i { k } else { k + 1 })
    }

    /// Rows `(r(i, j), r(j, i))` for every unordered pair `i < j`, in
    /// lexicographic pair order.
    pub fn pair_rows(&self) -> Vec<(usize, usize)> {
        let n = self.node_count();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push((self.row_index(i, j), self.row_index(j, i)));
            }
        }
        out
    }

    /// `x_r' beta` on the working scale.
    pub fn dot(&self, r: usize, beta: &[T]) -> T {
        self.row(r).iter().zip(beta).map(|(&x, &b)| x * b).sum()
    }

    /// Replaces the response with counts from `net` (same node ids).
    pub fn with_response(mut self, net: &DirectedCountNetwork) -> Result<Self> {
        self.y = responses(&self.node_ids, net)?;
        Ok(self)
    }
}

fn responses(ids: &[String], net: &DirectedCountNetwork) -> Result<Vec<u64>> {
    let n = ids.len();
    let idx: Vec<usize> = ids
        .iter()
        .map(|id| {
            net.index_of(id)
                .ok_or_else(|| Error::input(format!("node '{id}' missing from network")))
        })
        .collect::<Result<_>>()?;
    if net.len() != n {
        return Err(Error::input(format!(
            "network has {} nodes, covariate tables have {n}",
            net.len()
        )));
    }
    let mut y = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                y.push(net.count(idx[i], idx[j]));
            }
        }
    }
    Ok(y)
}

/// Assembles the ordered-pair design for `net` under `spec`.
pub fn assemble_design<T: Real>(
    nodes: &NodeTable,
    dyads: &DyadTable,
    net: &DirectedCountNetwork,
    spec: &SrmSpec,
) -> Result<DyadDesign<T>> {
    let mut ids: Vec<String> = net.nodes().to_vec();
    ids.sort();
    let n = ids.len();
    if n < 2 {
        return Err(Error::input("flow model needs at least two nodes"));
    }
    if !(spec.clamp > 0.0) {
        return Err(Error::config("linear-predictor clamp must be positive"));
    }
    let sender = spec.active_sender();
    let receiver = spec.active_receiver();

    let mut columns = vec!["(Intercept)".to_string()];
    let mut continuous = vec![false];
    for c in &sender {
        columns.push(format!("sender:{c}"));
        continuous.push(!c.is_binary());
    }
    for c in &receiver {
        columns.push(format!("receiver:{c}"));
        continuous.push(!c.is_binary());
    }
    for d in &spec.dyad {
        columns.push(d.column().to_string());
        continuous.push(matches!(d, super::tables::DyadCovariate::Distance));
    }
    let p = columns.len();

    let node_values = |covs: &[super::tables::NodeCovariate]| -> Result<Vec<Vec<f64>>> {
        ids.iter()
            .map(|id| covs.iter().map(|&c| nodes.covariate(id, c)).collect())
            .collect()
    };
    let sv = node_values(&sender)?;
    let rv = node_values(&receiver)?;
    let dyad_idx: Vec<usize> = ids
        .iter()
        .map(|id| {
            dyads
                .index_of(id)
                .ok_or_else(|| Error::input(format!("node '{id}' missing from dyad table")))
        })
        .collect::<Result<_>>()?;

    let mut x = Vec::with_capacity(n * (n - 1) * p);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            x.push(T::one());
            x.extend(sv[i].iter().map(|&v| T::of(v)));
            x.extend(rv[j].iter().map(|&v| T::of(v)));
            x.extend(
                spec.dyad
                    .iter()
                    .map(|&d| T::of(dyads.value(dyad_idx[i], dyad_idx[j], d))),
            );
        }
    }

    let (scaling, transform) = if spec.standardize {
        standardize_columns(&mut x, p, &continuous)
    } else {
        (
            vec![
                ColumnScaling {
                    center: T::zero(),
                    scale: T::one()
                };
                p
            ],
            CoefTransform::identity(p),
        )
    };

    let excluded = spec
        .sender
        .iter()
        .map(|c| format!("sender:{c}"))
        .chain(spec.receiver.iter().map(|c| format!("receiver:{c}")))
        .filter(|name| !columns.contains(name))
        .collect();

    Ok(DyadDesign {
        y: responses(&ids, net)?,
        node_ids: ids,
        columns,
        continuous,
        x,
        scaling,
        transform,
        clamp: T::of(spec.clamp),
        provenance: DesignProvenance {
            spec: spec.clone(),
            quality_in_design: spec.uses_quality(),
            excluded,
        },
    })
}
