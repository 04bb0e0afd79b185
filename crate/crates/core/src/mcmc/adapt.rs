//! Proposal adaptation, active during burn-in only.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::linalg::std_normal;

fn gain(t: usize) -> f64 {
    (1.0 + t as f64).powf(-0.6)
}

/// Multivariate random-walk proposal with a Robbins-Monro scale and an
/// empirical covariance learned from the chain.
#[derive(Debug, Clone)]
pub struct AdaptiveRwProposal {
    dim: usize,
    log_scale: f64,
    chol: DMatrix<f64>,
    target: f64,
    window: usize,
    seen: usize,
    mean: DVector<f64>,
    m2: DMatrix<f64>,
}

impl AdaptiveRwProposal {
    /// `base_cov` is the starting proposal shape; the scale starts at `2.38 / sqrt(dim)`.
    pub fn new(base_cov: &DMatrix<f64>, target: f64, window: usize) -> Self {
        let dim = base_cov.nrows();
        let chol = base_cov
            .clone()
            .cholesky()
            .map(|c| c.l())
            .unwrap_or_else(|| DMatrix::identity(dim, dim) * 0.01);
        Self {
            dim,
            log_scale: (2.38 / (dim as f64).sqrt()).ln(),
            chol,
            target,
            window,
            seen: 0,
            mean: DVector::zeros(dim),
            m2: DMatrix::zeros(dim, dim),
        }
    }

    /// Random-walk increment.
    pub fn step<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim, |_, _| std_normal(rng));
        (&self.chol * z) * self.log_scale.exp()
    }

    /// Feeds the outcome of iteration `t` and the current state back.
    pub fn adapt(&mut self, t: usize, accepted: bool, state: &[f64]) {
        let acc = if accepted { 1.0 } else { 0.0 };
        self.log_scale += gain(t) * (acc - self.target);
        self.seen += 1;
        let x = DVector::from_column_slice(state);
        let delta = &x - &self.mean;
        self.mean += &delta / self.seen as f64;
        let delta2 = &x - &self.mean;
        self.m2 += &delta * delta2.transpose();
        if self.seen >= 2 * self.dim + 20 && self.seen % self.window == 0 {
            let cov = &self.m2 / (self.seen - 1) as f64;
            let ridge = DMatrix::identity(self.dim, self.dim) * 1e-10;
            if let Some(c) = (cov + ridge).cholesky() {
                self.chol = c.l();
            }
        }
    }
}

/// Independent log-scales for many small blocks (one per dyad or node).
#[derive(Debug, Clone)]
pub struct ScaleBank {
    log_scales: Vec<f64>,
    target: f64,
}

impl ScaleBank {
    pub fn new(len: usize, initial: f64, target: f64) -> Self {
        Self {
            log_scales: vec![initial.ln(); len],
            target,
        }
    }

    pub fn scale(&self, k: usize) -> f64 {
        self.log_scales[k].exp()
    }

    pub fn set_scale(&mut self, k: usize, scale: f64) {
        self.log_scales[k] = scale.ln();
    }

    pub fn adapt(&mut self, k: usize, t: usize, accepted: bool) {
        let acc = if accepted { 1.0 } else { 0.0 };
        self.log_scales[k] = (self.log_scales[k] + gain(t) * (acc - self.target)).clamp(-12.0, 3.0);
    }
}

/// Accept/attempt tallies for one block.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tally {
    pub accepted: u64,
    pub attempted: u64,
}

impl Tally {
    pub fn record(&mut self, accepted: bool) {
        self.attempted += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}
