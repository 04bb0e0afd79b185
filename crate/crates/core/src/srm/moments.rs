use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Variance components of `eps_ij = a_i + b_j + nu_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DyadCovarianceParams<T> {
    pub sigma_a2: T,
    pub sigma_b2: T,
    pub sigma_ab: T,
    pub sigma_nu2: T,
    pub rho: T,
}

impl<T: Real> DyadCovarianceParams<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.sigma_a2 >= T::zero()
            && self.sigma_b2 >= T::zero()
            && self.sigma_nu2 >= T::zero()
            && self.sigma_ab * self.sigma_ab <= self.sigma_a2 * self.sigma_b2
            && self.rho.abs() < T::one();
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid dyadic covariance parameters {self:?}")))
        }
    }
}

/// Second moments of the composite error across the six pair configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedMoments<T> {
    /// `E(eps_ij^2)`
    pub variance: T,
    /// `E(eps_ij eps_ik)`: shared sender.
    pub same_sender: T,
    /// `E(eps_ij eps_ji)`: reciprocal pair.
    pub reciprocal: T,
    /// `E(eps_ij eps_kj)`: shared receiver.
    pub same_receiver: T,
    /// `E(eps_ij eps_kl)`: disjoint pairs.
    pub disjoint: T,
    /// `E(eps_ij eps_ki)`: sender of one is receiver of the other.
    pub sender_receiver: T,
}

pub fn implied_moments<T: Real>(p: &DyadCovarianceParams<T>) -> ImpliedMoments<T> {
    ImpliedMoments {
        variance: p.sigma_a2 + p.sigma_b2 + p.sigma_nu2,
        same_sender: p.sigma_a2,
        reciprocal: p.rho * p.sigma_nu2 + p.sigma_ab + p.sigma_ab,
        same_receiver: p.sigma_b2,
        disjoint: T::zero(),
        sender_receiver: p.sigma_ab,
    }
}
