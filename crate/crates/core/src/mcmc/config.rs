use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior hyperparameters. Coefficient priors apply on the working
/// (standardized) scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    /// `beta ~ Normal(0, beta_variance * I)`.
    pub beta_variance: f64,
    /// `Sigma_ab ~ IW(sigma_ab_df, sigma_ab_scale * I)`.
    pub sigma_ab_df: f64,
    pub sigma_ab_scale: f64,
    /// Dyadic covariance `~ IW(nu_df, nu_scale * I)`, projected to equal diagonal.
    pub nu_df: f64,
    pub nu_scale: f64,
    /// Inverse-gamma shape and scale for the scalar variances of the quality model.
    pub inv_gamma_shape: f64,
    pub inv_gamma_scale: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            beta_variance: 100.0,
            sigma_ab_df: 4.0,
            sigma_ab_scale: 1.0,
            nu_df: 4.0,
            nu_scale: 1.0,
            inv_gamma_shape: 2.0,
            inv_gamma_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub burn_in: usize,
    /// Iterations after burn-in.
    pub iterations: usize,
    /// Keep every `thin`-th post-burn-in iteration.
    pub thin: usize,
    pub seed: u64,
    /// Iterations between re-estimates of the coefficient proposal covariance.
    pub adapt_window: usize,
    pub target_accept_beta: f64,
    pub target_accept_scalar: f64,
    pub prior: PriorConfig,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 1000,
            iterations: 10_000,
            thin: 25,
            seed: 0,
            adapt_window: 50,
            target_accept_beta: 0.234,
            target_accept_scalar: 0.44,
            prior: PriorConfig::default(),
        }
    }
}

impl McmcConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn short(burn_in: usize, iterations: usize, thin: usize, seed: u64) -> Self {
        Self {
            burn_in,
            iterations,
            thin,
            seed,
            ..Self::default()
        }
    }

    pub fn draws(&self) -> usize {
        self.iterations / self.thin
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 || self.iterations == 0 {
            return Err(Error::config("iterations and thin must be positive"));
        }
        if self.iterations % self.thin != 0 {
            return Err(Error::config(format!(
                "thin {} does not divide iterations {}",
                self.thin, self.iterations
            )));
        }
        if self.adapt_window == 0 {
            return Err(Error::config("adapt_window must be positive"));
        }
        for (name, t) in [
            ("target_accept_beta", self.target_accept_beta),
            ("target_accept_scalar", self.target_accept_scalar),
        ] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1)")));
            }
        }
        let p = &self.prior;
        if !(p.beta_variance > 0.0 && p.sigma_ab_scale > 0.0 && p.nu_scale > 0.0) {
            return Err(Error::config("prior variances and scales must be positive"));
        }
        if !(p.sigma_ab_df > 1.0 && p.nu_df > 1.0) {
            return Err(Error::config("inverse-Wishart degrees of freedom must exceed 1"));
        }
        if !(p.inv_gamma_shape > 0.0 && p.inv_gamma_scale > 0.0) {
            return Err(Error::config("inverse-gamma hyperparameters must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_protocol_yields_400_draws() {
        let c = McmcConfig::default();
        assert_eq!((c.burn_in, c.iterations, c.thin), (1000, 10_000, 25));
        assert_eq!(c.draws(), 400);
        c.validate().unwrap();
    }

    #[test]
    fn thin_must_divide() {
        let c = McmcConfig::short(10, 100, 7, 1);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }
}
