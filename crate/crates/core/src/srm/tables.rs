//! Node- and dyad-level covariate tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node covariates that can enter the flow model as sender and receiver terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeCovariate {
    /// Discharges; enters the model on the log scale.
    #[serde(rename = "HD")]
    Discharges,
    /// Mean DRG weight.
    #[serde(rename = "DW")]
    DrgWeight,
    /// Mean patient age.
    #[serde(rename = "A")]
    Age,
    /// Female share.
    #[serde(rename = "F")]
    Female,
    /// Degree on the travel-time proximity network.
    #[serde(rename = "DC")]
    GeoDegree,
    /// Rescaled betweenness on the proximity network.
    #[serde(rename = "BW")]
    GeoBetweenness,
    #[serde(rename = "Teach")]
    Teaching,
    #[serde(rename = "Mono")]
    Monospecialized,
    #[serde(rename = "Techno")]
    Technological,
    #[serde(rename = "Public")]
    Public,
    /// Risk-adjusted mortality.
    #[serde(rename = "AM")]
    AdjustedMortality,
    /// Risk-adjusted 45-day readmission.
    #[serde(rename = "AR")]
    AdjustedReadmission,
    /// Beds saturation (percent).
    #[serde(rename = "BS")]
    BedSaturation,
    /// Beds turnover.
    #[serde(rename = "BT")]
    BedTurnover,
}

impl NodeCovariate {
    pub const ALL: [NodeCovariate; 14] = [
        Self::Discharges,
        Self::DrgWeight,
        Self::Age,
        Self::Female,
        Self::GeoDegree,
        Self::GeoBetweenness,
        Self::Teaching,
        Self::Monospecialized,
        Self::Technological,
        Self::Public,
        Self::AdjustedMortality,
        Self::AdjustedReadmission,
        Self::BedSaturation,
        Self::BedTurnover,
    ];

    /// Column header in node-table CSV files.
    pub fn column(self) -> &'static str {
        match self {
            Self::Discharges => "HD",
            Self::DrgWeight => "DW",
            Self::Age => "A",
            Self::Female => "F",
            Self::GeoDegree => "DC",
            Self::GeoBetweenness => "BW",
            Self::Teaching => "Teach",
            Self::Monospecialized => "Mono",
            Self::Technological => "Techno",
            Self::Public => "Public",
            Self::AdjustedMortality => "AM",
            Self::AdjustedReadmission => "AR",
            Self::BedSaturation => "BS",
            Self::BedTurnover => "BT",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.column() == name)
    }

    pub fn is_binary(self) -> bool {
        matches!(
            self,
            Self::Teaching | Self::Monospecialized | Self::Technological | Self::Public
        )
    }

    /// Hospital-quality measures that must stay out of the exogenous flow model.
    pub fn is_quality(self) -> bool {
        matches!(self, Self::AdjustedMortality | Self::AdjustedReadmission)
    }

    /// Validates a raw value and maps it onto the model scale.
    pub fn model_value(self, raw: f64) -> std::result::Result<f64, String> {
        if !raw.is_finite() {
            return Err("value is not finite".into());
        }
        match self {
            Self::Discharges if raw <= 0.0 => Err("discharges must be positive".into()),
            Self::Discharges => Ok(raw.ln()),
            Self::DrgWeight if raw <= 0.0 => Err("DRG weight must be positive".into()),
            Self::Female | Self::GeoBetweenness if !(0.0..=1.0).contains(&raw) => {
                Err("share must lie in [0, 1]".into())
            }
            Self::BedSaturation if !(0.0..=100.0).contains(&raw) => {
                Err("beds saturation must lie in [0, 100]".into())
            }
            Self::GeoDegree if raw < 0.0 => Err("degree must be non-negative".into()),
            c if c.is_binary() && raw != 0.0 && raw != 1.0 => Err("indicator must be 0 or 1".into()),
            _ => Ok(raw),
        }
    }
}

impl fmt::Display for NodeCovariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// Dyadic covariates of the flow model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DyadCovariate {
    /// Travel time in minutes.
    #[serde(rename = "D")]
    Distance,
    /// Same local health authority.
    #[serde(rename = "CM")]
    CoMembership,
}

impl DyadCovariate {
    pub fn column(self) -> &'static str {
        match self {
            Self::Distance => "D",
            Self::CoMembership => "CM",
        }
    }
}

/// Per-node outcome counts used by the quality stage.
pub const DEATHS_COLUMN: &str = "deaths";
pub const READMISSIONS_COLUMN: &str = "readmissions";

/// Named columns of per-node values; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeTable {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    columns: BTreeMap<String, Vec<Option<f64>>>,
}

impl NodeTable {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (k, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), k).is_some() {
                return Err(Error::input(format!("duplicate node id '{id}' in node table")));
            }
        }
        Ok(Self {
            ids,
            index,
            columns: BTreeMap::new(),
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn set_column(&mut self, name: &str, values: Vec<Option<f64>>) -> Result<()> {
        if values.len() != self.ids.len() {
            return Err(Error::input(format!(
                "column '{name}' has {} values for {} nodes",
                values.len(),
                self.ids.len()
            )));
        }
        self.columns.insert(name.to_string(), values);
        Ok(())
    }

    pub fn set_values(&mut self, name: &str, values: &[f64]) -> Result<()> {
        self.set_column(name, values.iter().map(|&v| Some(v)).collect())
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns.get(name).map(Vec::as_slice)
    }

    /// Raw value for node `id` in column `name`; errors name the node and column.
    pub fn require(&self, id: &str, name: &str) -> Result<f64> {
        let k = self
            .index_of(id)
            .ok_or_else(|| Error::input(format!("node '{id}' missing from node table")))?;
        self.columns
            .get(name)
            .and_then(|col| col[k])
            .ok_or_else(|| Error::input(format!("missing covariate '{name}' for node '{id}'")))
    }

    /// Covariate on the model scale, validated.
    pub fn covariate(&self, id: &str, cov: NodeCovariate) -> Result<f64> {
        let raw = self.require(id, cov.column())?;
        cov.model_value(raw)
            .map_err(|e| Error::input(format!("covariate '{cov}' for node '{id}': {e}")))
    }
}

/// Complete, symmetric dyadic covariates stored densely in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadTable {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    distance: Vec<Vec<f64>>,
    co_membership: Vec<Vec<bool>>,
}

impl DyadTable {
    /// From `(src, dst, distance_minutes, co_membership)` rows covering every ordered pair.
    pub fn from_rows(ids: Vec<String>, rows: &[(String, String, f64, bool)]) -> Result<Self> {
        let n = ids.len();
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(k, id)| (id.clone(), k)).collect();
        let mut distance = vec![vec![f64::NAN; n]; n];
        let mut cm = vec![vec![None; n]; n];
        for (src, dst, d, c) in rows {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::input(format!("unknown node id '{id}' in dyad table")))
            };
            let (i, j) = (lookup(src)?, lookup(dst)?);
            if i == j {
                continue;
            }
            if !(d.is_finite() && *d >= 0.0) {
                return Err(Error::input(format!("distance {src}->{dst} must be >= 0")));
            }
            distance[i][j] = *d;
            cm[i][j] = Some(*c);
        }
        let mut co_membership = vec![vec![false; n]; n];
        for i in 0..n {
            distance[i][i] = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let c = cm[i][j].ok_or_else(|| {
                    Error::input(format!("dyad table missing pair {} -> {}", ids[i], ids[j]))
                })?;
                co_membership[i][j] = c;
            }
        }
        Self::from_matrices(ids, distance, co_membership)
    }

    pub fn from_matrices(
        ids: Vec<String>,
        distance: Vec<Vec<f64>>,
        co_membership: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let n = ids.len();
        if distance.len() != n
            || co_membership.len() != n
            || distance.iter().any(|r| r.len() != n)
            || co_membership.iter().any(|r| r.len() != n)
        {
            return Err(Error::input("dyad matrices must be square in the node count"));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if (distance[i][j] - distance[j][i]).abs() > 1e-9 {
                    return Err(Error::input(format!(
                        "distance between {} and {} is not symmetric",
                        ids[i], ids[j]
                    )));
                }
                if co_membership[i][j] != co_membership[j][i] {
                    return Err(Error::input(format!(
                        "co-membership between {} and {} is not symmetric",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        let index = ids.iter().enumerate().map(|(k, id)| (id.clone(), k)).collect();
        Ok(Self {
            ids,
            index,
            distance,
            co_membership,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn distance_matrix(&self) -> &[Vec<f64>] {
        &self.distance
    }

    pub fn value(&self, i: usize, j: usize, cov: DyadCovariate) -> f64 {
        match cov {
            DyadCovariate::Distance => self.distance[i][j],
            DyadCovariate::CoMembership => f64::from(u8::from(self.co_membership[i][j])),
        }
    }

    pub fn co_member(&self, i: usize, j: usize) -> bool {
        self.co_membership[i][j]
    }
}
