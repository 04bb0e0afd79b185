//! Posterior-predictive checks on three network statistics: the spread of
//! row means, the spread of column means and the within-dyad correlation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedCountNetwork;
use crate::linalg::{chol2, mvn2};
use crate::mcmc::PosteriorSamples;
use crate::rng::{self, Rng};
use crate::scalar::Real;
use crate::srm::DyadDesign;
use crate::stats;
use nalgebra::Matrix2;
use rand_distr::{Distribution, Poisson};

/// The three summary statistics of a count matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofTriple<T> {
    pub sd_row_means: T,
    pub sd_col_means: T,
    /// `None` when either side of the dyad vectors has zero variance.
    pub dyad_correlation: Option<T>,
}

/// Statistics of a square matrix whose diagonal is ignored.
pub fn network_stat_triple<T: Real>(counts: &[Vec<T>]) -> Result<GofTriple<T>> {
    let n = counts.len();
    if n < 3 {
        return Err(Error::input("network statistics need at least three nodes"));
    }
    if counts.iter().any(|r| r.len() != n) {
        return Err(Error::input("count matrix must be square"));
    }
    let denom = T::of_usize(n - 1);
    let mut rows = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = T::zero();
        let mut c = T::zero();
        for j in 0..n {
            if i != j {
                r = r + counts[i][j];
                c = c + counts[j][i];
            }
        }
        rows.push(r / denom);
        cols.push(c / denom);
    }
    let mut fwd = Vec::with_capacity(n * (n - 1));
    let mut bwd = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                fwd.push(counts[i][j]);
                bwd.push(counts[j][i]);
            }
        }
    }
    Ok(GofTriple {
        sd_row_means: stats::sd(&rows),
        sd_col_means: stats::sd(&cols),
        dyad_correlation: stats::pearson(&fwd, &bwd),
    })
}

/// Statistics of an observed network.
pub fn network_triple(net: &DirectedCountNetwork) -> Result<GofTriple<f64>> {
    let m: Vec<Vec<f64>> = net
        .to_matrix()
        .into_iter()
        .map(|r| r.into_iter().map(|c| c as f64).collect())
        .collect();
    network_stat_triple(&m)
}

/// Posterior-predictive quantile of the observed value for each statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofQuantiles {
    pub sd_row_means: Option<f64>,
    pub sd_col_means: Option<f64>,
    pub dyad_correlation: Option<f64>,
}

impl GofQuantiles {
    /// Whether every defined quantile lies in `[alpha/2, 1 - alpha/2]`.
    pub fn all_inside(&self, alpha: f64) -> bool {
        [self.sd_row_means, self.sd_col_means, self.dyad_correlation]
            .into_iter()
            .all(|q| q.is_some_and(|q| q >= alpha / 2.0 && q <= 1.0 - alpha / 2.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub observed: GofTriple<f64>,
    pub replicates: Vec<GofTriple<f64>>,
    pub quantiles: GofQuantiles,
}

impl GofReport {
    /// `(replicate, observed)` pairs per statistic name, for histogram export.
    pub fn series(&self) -> Vec<(&'static str, Vec<Option<f64>>, Option<f64>)> {
        vec![
            (
                "sd_row_means",
                self.replicates.iter().map(|t| Some(t.sd_row_means)).collect(),
                Some(self.observed.sd_row_means),
            ),
            (
                "sd_col_means",
                self.replicates.iter().map(|t| Some(t.sd_col_means)).collect(),
                Some(self.observed.sd_col_means),
            ),
            (
                "dyad_correlation",
                self.replicates.iter().map(|t| t.dyad_correlation).collect(),
                self.observed.dyad_correlation,
            ),
        ]
    }
}

/// One count matrix from the generative law with fresh node effects and
/// dyadic residuals; `beta` is on the design's working scale.
pub fn simulate_counts(
    design: &DyadDesign<f64>,
    beta: &[f64],
    sigma_ab: &Matrix2<f64>,
    sigma_nu2: f64,
    rho: f64,
    rng: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    let n = design.node_count();
    let l_ab = chol2(sigma_ab)
        .ok_or_else(|| Error::numeric("Sigma_ab draw is not positive definite"))?;
    let l_nu = chol2(&(Matrix2::new(1.0, rho, rho, 1.0) * sigma_nu2))
        .ok_or_else(|| Error::numeric("dyadic covariance is not positive definite"))?;
    let effects: Vec<_> = (0..n).map(|_| mvn2(&l_ab, rng)).collect();
    let bound = design.clamp();
    let mut out = vec![vec![0.0; n]; n];
    for (r1, r2) in design.pair_rows() {
        let nu = mvn2(&l_nu, rng);
        for (r, e) in [(r1, nu[0]), (r2, nu[1])] {
            let (i, j) = design.endpoints(r);
            let eta = design.dot(r, beta) + effects[i][0] + effects[j][1] + e;
            out[i][j] = poisson_draw(eta.clamp(-bound, bound).exp(), rng);
        }
    }
    Ok(out)
}

pub(crate) fn poisson_draw(lambda: f64, rng: &mut Rng) -> f64 {
    match Poisson::new(lambda) {
        Ok(d) => d.sample(rng),
        Err(_) => 0.0,
    }
}

/// Compares the observed statistics with one replicate per saved draw.
pub fn posterior_predictive_gof(
    samples: &PosteriorSamples,
    design: &DyadDesign<f64>,
    observed: &DirectedCountNetwork,
    seed: u64,
) -> Result<GofReport> {
    if samples.draws() == 0 {
        return Err(Error::input("posterior has no draws"));
    }
    let ids = design.node_ids();
    let idx: Vec<usize> = ids
        .iter()
        .map(|id| {
            observed
                .index_of(id)
                .ok_or_else(|| Error::input(format!("node '{id}' missing from observed network")))
        })
        .collect::<Result<_>>()?;
    let obs: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| observed.count(i, j) as f64).collect())
        .collect();
    let observed_triple = network_stat_triple(&obs)?;

    let replicates = (0..samples.draws())
        .into_par_iter()
        .map(|d| {
            let mut rng = rng::stream(seed, "gof-replicate", d as u64);
            let sab = Matrix2::new(
                samples.sigma_a2[d],
                samples.sigma_ab[d],
                samples.sigma_ab[d],
                samples.sigma_b2[d],
            );
            let m = simulate_counts(
                design,
                &samples.beta_working[d],
                &sab,
                samples.sigma_nu2[d],
                samples.rho[d],
                &mut rng,
            )?;
            network_stat_triple(&m)
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<f64> = replicates.iter().map(|t| t.sd_row_means).collect();
    let cols: Vec<f64> = replicates.iter().map(|t| t.sd_col_means).collect();
    let corr: Vec<f64> = replicates.iter().filter_map(|t| t.dyad_correlation).collect();
    let quantiles = GofQuantiles {
        sd_row_means: stats::mid_rank(&rows, observed_triple.sd_row_means),
        sd_col_means: stats::mid_rank(&cols, observed_triple.sd_col_means),
        dyad_correlation: observed_triple
            .dyad_correlation
            .and_then(|c| stats::mid_rank(&corr, c)),
    };
    Ok(GofReport {
        observed: observed_triple,
        replicates,
        quantiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(entries: &[(usize, usize, f64)], n: usize) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for &(i, j, v) in entries {
            m[i][j] = v;
        }
        m
    }

    #[test]
    fn symmetric_matrix_has_unit_dyad_correlation() {
        let m = mat(&[(0, 1, 2.0), (1, 0, 2.0), (0, 2, 5.0), (2, 0, 5.0), (1, 2, 1.0), (2, 1, 1.0)], 3);
        let t = network_stat_triple(&m).unwrap();
        assert!((t.dyad_correlation.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_row_means_have_zero_spread() {
        let m = mat(&[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], 3);
        let t = network_stat_triple(&m).unwrap();
        assert_eq!(t.sd_row_means, 0.0);
        assert_eq!(t.sd_col_means, 0.0);
    }

    #[test]
    fn anti_reciprocal_example() {
        // Dyad vectors (2,0,0,2,1,1) and (0,2,2,0,1,1) are exact mirror images
        // around their common mean of 1, so the correlation is -1.
        let m = mat(&[(0, 1, 2.0), (1, 0, 0.0), (0, 2, 0.0), (2, 0, 2.0), (1, 2, 1.0), (2, 1, 1.0)], 3);
        let t = network_stat_triple(&m).unwrap();
        assert!((t.dyad_correlation.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_matrix_is_undefined() {
        let m = vec![vec![4.0_f32; 4]; 4];
        assert!(network_stat_triple(&m).unwrap().dyad_correlation.is_none());
    }

    #[test]
    fn small_networks_rejected() {
        assert!(network_stat_triple(&vec![vec![0.0_f64; 2]; 2]).is_err());
    }
}
