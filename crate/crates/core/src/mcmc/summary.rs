use serde::{Deserialize, Serialize};

use crate::stats;

/// Posterior summary of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub parameter: String,
    pub mean: f64,
    /// Posterior standard deviation.
    pub sd: f64,
    /// `2 min(P(x <= 0), P(x >= 0))`, capped at 1.
    pub pseudo_p: f64,
    pub stars: String,
    /// Central 95% credible interval.
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl ParameterSummary {
    pub fn covers(&self, value: f64) -> bool {
        self.ci_lower <= value && value <= self.ci_upper
    }
}

pub fn pseudo_p(draws: &[f64]) -> f64 {
    let n = draws.len() as f64;
    let le = draws.iter().filter(|&&x| x <= 0.0).count() as f64 / n;
    let ge = draws.iter().filter(|&&x| x >= 0.0).count() as f64 / n;
    (2.0 * le.min(ge)).min(1.0)
}

/// `***` below 0.01, `**` below 0.05, `*` below 0.1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

pub fn summarize_draws(name: &str, draws: &[f64]) -> ParameterSummary {
    let p = pseudo_p(draws);
    ParameterSummary {
        parameter: name.to_string(),
        mean: stats::mean(draws),
        sd: stats::sd(draws),
        pseudo_p: p,
        stars: stars(p).to_string(),
        ci_lower: stats::quantile(draws, 0.025),
        ci_upper: stats::quantile(draws, 0.975),
    }
}

/// Summary rows for every named parameter; needs at least two draws.
pub fn summarize_named(names: &[String], matrix: &[Vec<f64>]) -> Vec<ParameterSummary> {
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let col: Vec<f64> = matrix.iter().map(|row| row[k]).collect();
            summarize_draws(name, &col)
        })
        .collect()
}

pub fn summarize_posterior(samples: &super::PosteriorSamples) -> Vec<ParameterSummary> {
    summarize_named(&samples.parameter_names(), &samples.draw_matrix())
}
