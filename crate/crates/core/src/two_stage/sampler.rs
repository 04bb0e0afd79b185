//! Sampler for the pairwise quality model
//! `log E W_ij = z_ij' beta + u_i + u_j + eps_ij`.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::quality::{QualityDesign, QualityModelSpec, OWNERSHIP_LEVELS, THAT_COLUMN};
use crate::error::{Error, Result};
use crate::linalg::{gaussian_canonical, std_normal};
use crate::mcmc::{
    glm_start, summarize_named, update_inverse_gamma, AcceptanceRates, AdaptiveRwProposal,
    McmcConfig, ParameterSummary, ScaleBank, Tally,
};
use crate::rng::{self, Rng};

const REFRESH_EVERY: usize = 100;

/// Thinned draws of the quality model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityPosterior {
    pub columns: Vec<String>,
    pub node_ids: Vec<String>,
    /// Coefficients on the original covariate scale, one vector per draw.
    pub beta: Vec<Vec<f64>>,
    pub beta_working: Vec<Vec<f64>>,
    pub sigma_u2: Vec<f64>,
    pub sigma_eps2: Vec<f64>,
    /// Posterior mean of `E(W_ij | u, eps)` per design pair.
    pub fitted: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    pub acceptance: AcceptanceRates,
    pub spec: QualityModelSpec,
    pub config: McmcConfig,
}

impl QualityPosterior {
    pub fn draws(&self) -> usize {
        self.sigma_u2.len()
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .cloned()
            .chain(["sigma_u2".to_string(), "sigma_eps2".to_string()])
            .collect()
    }

    pub fn parameter(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(k) = self.columns.iter().position(|c| c == name) {
            return Some(self.beta.iter().map(|d| d[k]).collect());
        }
        match name {
            "sigma_u2" => Some(self.sigma_u2.clone()),
            "sigma_eps2" => Some(self.sigma_eps2.clone()),
            _ => None,
        }
    }

    pub fn draw_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.draws())
            .map(|d| {
                let mut row = self.beta[d].clone();
                row.extend([self.sigma_u2[d], self.sigma_eps2[d]]);
                row
            })
            .collect()
    }

    pub fn summarize(&self) -> Vec<ParameterSummary> {
        summarize_named(&self.parameter_names(), &self.draw_matrix())
    }

    /// Draws of the predicted-transfer coefficient.
    pub fn xi(&self) -> Vec<f64> {
        self.parameter(THAT_COLUMN).unwrap_or_default()
    }

    /// Per ownership level, draws of `xi + gamma_level` (the reference level
    /// carries `xi` alone). Empty without the interaction terms.
    pub fn marginal_slopes(&self) -> Vec<(String, Vec<f64>)> {
        let xi = self.xi();
        if xi.is_empty() || !self.spec.interaction {
            return Vec::new();
        }
        OWNERSHIP_LEVELS
            .iter()
            .enumerate()
            .map(|(l, level)| {
                let draws = if l == 0 {
                    xi.clone()
                } else {
                    let g = self
                        .parameter(&format!("{THAT_COLUMN}:OWN:{level}"))
                        .unwrap_or_else(|| vec![0.0; xi.len()]);
                    xi.iter().zip(&g).map(|(a, b)| a + b).collect()
                };
                (level.to_string(), draws)
            })
            .collect()
    }
}

#[inline]
fn term(y: f64, eta: f64, bound: f64) -> (f64, f64) {
    let c = eta.clamp(-bound, bound);
    let mu = c.exp();
    (y * c - mu, mu)
}

struct QualityChain<'a> {
    d: &'a QualityDesign,
    cfg: &'a McmcConfig,
    n: usize,
    p: usize,
    node_pairs: Vec<Vec<usize>>,
    xtx: DMatrix<f64>,
    beta: Vec<f64>,
    u: Vec<f64>,
    eps: Vec<f64>,
    eta: Vec<f64>,
    mu: Vec<f64>,
    sigma_u2: f64,
    sigma_eps2: f64,
    beta_prop: AdaptiveRwProposal,
    eps_scales: ScaleBank,
    u_scales: ScaleBank,
    tally_beta: Tally,
    tally_eps: Tally,
    tally_u: Tally,
    scratch_shift: Vec<f64>,
    scratch_eta: Vec<f64>,
    scratch_mu: Vec<f64>,
    rng: Rng,
}

impl<'a> QualityChain<'a> {
    fn new(d: &'a QualityDesign, cfg: &'a McmcConfig) -> Result<Self> {
        let n = d.node_ids.len();
        let p = d.dim();
        let rows = d.rows();
        if rows == 0 {
            return Err(Error::input("quality design has no pairs"));
        }
        let mut node_pairs = vec![Vec::new(); n];
        for (k, &(i, j)) in d.pairs.iter().enumerate() {
            node_pairs[i].push(k);
            node_pairs[j].push(k);
        }
        let xm = DMatrix::from_row_slice(rows, p, &d.x);
        let xtx = xm.transpose() * &xm;
        let (beta, cov) = glm_start(&d.x, p, &d.y, cfg.prior.beta_variance, d.clamp);
        let eta: Vec<f64> = (0..rows).map(|r| d.dot(r, &beta)).collect();
        let mu: Vec<f64> = eta.iter().map(|&e| e.clamp(-d.clamp, d.clamp).exp()).collect();
        let sigma_eps2 = 0.1;
        let mut eps_scales = ScaleBank::new(rows, 1.0, cfg.target_accept_scalar);
        for r in 0..rows {
            eps_scales.set_scale(r, 1.0 / (1.0 + mu[r] * sigma_eps2).sqrt());
        }
        let mut u_scales = ScaleBank::new(n, 1.0, cfg.target_accept_scalar);
        for i in 0..n {
            let info: f64 = node_pairs[i].iter().map(|&r| mu[r]).sum();
            u_scales.set_scale(i, 1.0 / (1.0 + info * 0.1).sqrt());
        }
        Ok(Self {
            d,
            cfg,
            n,
            p,
            node_pairs,
            xtx,
            beta_prop: AdaptiveRwProposal::new(&cov, cfg.target_accept_beta, cfg.adapt_window),
            beta,
            u: vec![0.0; n],
            eps: vec![0.0; rows],
            eta,
            mu,
            sigma_u2: 0.1,
            sigma_eps2,
            eps_scales,
            u_scales,
            tally_beta: Tally::default(),
            tally_eps: Tally::default(),
            tally_u: Tally::default(),
            scratch_shift: vec![0.0; rows],
            scratch_eta: vec![0.0; rows],
            scratch_mu: vec![0.0; rows],
            rng: rng::stream(cfg.seed, "quality-chain", 0),
        })
    }

    fn refresh(&mut self, t: usize) -> Result<()> {
        let b = self.d.clamp;
        let mut ll = 0.0;
        for (r, &(i, j)) in self.d.pairs.iter().enumerate() {
            self.eta[r] = self.d.dot(r, &self.beta) + self.u[i] + self.u[j] + self.eps[r];
            let (l, m) = term(self.d.y[r], self.eta[r], b);
            self.mu[r] = m;
            ll += l;
        }
        if !ll.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite log-likelihood at iteration {t}: beta={:?} sigma_u2={} sigma_eps2={}",
                self.beta, self.sigma_u2, self.sigma_eps2
            )));
        }
        Ok(())
    }

    fn update_beta(&mut self, t: usize, adapting: bool) {
        let b = self.d.clamp;
        let v = self.cfg.prior.beta_variance;
        let step = self.beta_prop.step(&mut self.rng);
        let proposal: Vec<f64> = self.beta.iter().zip(step.iter()).map(|(x, s)| x + s).collect();
        let prior_diff = -0.5
            * (proposal.iter().map(|x| x * x).sum::<f64>()
                - self.beta.iter().map(|x| x * x).sum::<f64>())
            / v;
        let mut ll_diff = 0.0;
        for r in 0..self.d.rows() {
            let shift = self.d.dot(r, step.as_slice());
            let e = self.eta[r] + shift;
            let (l, m) = term(self.d.y[r], e, b);
            ll_diff += l - (self.d.y[r] * self.eta[r].clamp(-b, b) - self.mu[r]);
            self.scratch_shift[r] = shift;
            self.scratch_eta[r] = e;
            self.scratch_mu[r] = m;
        }
        let accepted = self.rng.random::<f64>().ln() < ll_diff + prior_diff;
        if accepted {
            self.beta = proposal;
            std::mem::swap(&mut self.eta, &mut self.scratch_eta);
            std::mem::swap(&mut self.mu, &mut self.scratch_mu);
        }
        if adapting {
            self.beta_prop.adapt(t, accepted, &self.beta);
        } else {
            self.tally_beta.record(accepted);
        }
    }

    /// Gaussian draw of `d` for `(beta + d, eps - Z d)`.
    fn shift_beta_against_eps(&mut self) {
        let p = self.p;
        let v = self.cfg.prior.beta_variance;
        let q = 1.0 / self.sigma_eps2;
        let precision = &self.xtx * q + DMatrix::identity(p, p) / v;
        let mut linear = DVector::from_iterator(p, self.beta.iter().map(|b| -b / v));
        for r in 0..self.d.rows() {
            let row = self.d.row(r);
            for k in 0..p {
                linear[k] += row[k] * self.eps[r] * q;
            }
        }
        let Some(delta) = gaussian_canonical(&precision, &linear, &mut self.rng) else {
            return;
        };
        for k in 0..p {
            self.beta[k] += delta[k];
        }
        for r in 0..self.d.rows() {
            self.eps[r] -= self.d.dot(r, delta.as_slice());
        }
    }

    fn update_eps(&mut self, t: usize, adapting: bool) {
        let b = self.d.clamp;
        let s = self.sigma_eps2.sqrt();
        for r in 0..self.d.rows() {
            let step = self.eps_scales.scale(r) * s * std_normal(&mut self.rng);
            let old = self.eps[r];
            let prior_diff = -((old + step).powi(2) - old * old) / (2.0 * self.sigma_eps2);
            let (l, m) = term(self.d.y[r], self.eta[r] + step, b);
            let l_old = self.d.y[r] * self.eta[r].clamp(-b, b) - self.mu[r];
            let accepted = self.rng.random::<f64>().ln() < l - l_old + prior_diff;
            if accepted {
                self.eps[r] += step;
                self.eta[r] += step;
                self.mu[r] = m;
            }
            if adapting {
                self.eps_scales.adapt(r, t, accepted);
            } else {
                self.tally_eps.record(accepted);
            }
        }
    }

    fn update_u(&mut self, t: usize, adapting: bool) {
        let b = self.d.clamp;
        let s = self.sigma_u2.sqrt();
        let mut new = Vec::new();
        for i in 0..self.n {
            let step = self.u_scales.scale(i) * s * std_normal(&mut self.rng);
            let old = self.u[i];
            let prior_diff = -((old + step).powi(2) - old * old) / (2.0 * self.sigma_u2);
            let mut ll = 0.0;
            new.clear();
            for &r in &self.node_pairs[i] {
                let e = self.eta[r] + step;
                let (l, m) = term(self.d.y[r], e, b);
                ll += l - (self.d.y[r] * self.eta[r].clamp(-b, b) - self.mu[r]);
                new.push((e, m));
            }
            let accepted = self.rng.random::<f64>().ln() < ll + prior_diff;
            if accepted {
                self.u[i] += step;
                for (k, &r) in self.node_pairs[i].iter().enumerate() {
                    (self.eta[r], self.mu[r]) = new[k];
                }
            }
            if adapting {
                self.u_scales.adapt(i, t, accepted);
            } else {
                self.tally_u.record(accepted);
            }
        }
    }

    /// Node effects against their pair residuals, then the intercept against
    /// all node effects; linear predictors are unchanged.
    fn shift_effects(&mut self) {
        let qe = 1.0 / self.sigma_eps2;
        let qu = 1.0 / self.sigma_u2;
        for i in 0..self.n {
            let k = self.node_pairs[i].len() as f64;
            let sum: f64 = self.node_pairs[i].iter().map(|&r| self.eps[r]).sum();
            let prec = k * qe + qu;
            let mean = (sum * qe - self.u[i] * qu) / prec;
            let d = mean + std_normal(&mut self.rng) / prec.sqrt();
            self.u[i] += d;
            for &r in &self.node_pairs[i] {
                self.eps[r] -= d;
            }
        }
        let v = self.cfg.prior.beta_variance;
        let prec = self.n as f64 * qu + 4.0 / v;
        let lin = self.u.iter().sum::<f64>() * qu - 2.0 * self.beta[0] / v;
        let d = lin / prec + std_normal(&mut self.rng) / prec.sqrt();
        for u in &mut self.u {
            *u -= d;
        }
        self.beta[0] += 2.0 * d;
    }

    fn update_variances(&mut self) -> Result<()> {
        let pr = &self.cfg.prior;
        let ss_u: f64 = self.u.iter().map(|x| x * x).sum();
        self.sigma_u2 =
            update_inverse_gamma(self.n, ss_u, pr.inv_gamma_shape, pr.inv_gamma_scale, &mut self.rng)?;
        let ss_e: f64 = self.eps.iter().map(|x| x * x).sum();
        self.sigma_eps2 = update_inverse_gamma(
            self.eps.len(),
            ss_e,
            pr.inv_gamma_shape,
            pr.inv_gamma_scale,
            &mut self.rng,
        )?;
        Ok(())
    }

    fn run(mut self) -> Result<QualityPosterior> {
        let cfg = self.cfg;
        let total = cfg.burn_in + cfg.iterations;
        let keep = cfg.draws();
        let mut out = QualityPosterior {
            columns: self.d.columns.clone(),
            node_ids: self.d.node_ids.clone(),
            beta: Vec::with_capacity(keep),
            beta_working: Vec::with_capacity(keep),
            sigma_u2: Vec::with_capacity(keep),
            sigma_eps2: Vec::with_capacity(keep),
            fitted: vec![0.0; self.d.rows()],
            pairs: self.d.pairs.clone(),
            acceptance: AcceptanceRates {
                beta: f64::NAN,
                nu: f64::NAN,
                ab: f64::NAN,
            },
            spec: self.d.spec.clone(),
            config: cfg.clone(),
        };
        self.refresh(0)?;
        for t in 0..total {
            let adapting = t < cfg.burn_in;
            if t % REFRESH_EVERY == 0 {
                self.refresh(t)?;
            }
            self.update_beta(t, adapting);
            self.shift_beta_against_eps();
            self.update_eps(t, adapting);
            self.update_u(t, adapting);
            self.shift_effects();
            self.update_variances()?;
            if !adapting && (t - cfg.burn_in + 1) % cfg.thin == 0 {
                out.beta.push(self.d.transform.apply(&self.beta));
                out.beta_working.push(self.beta.clone());
                out.sigma_u2.push(self.sigma_u2);
                out.sigma_eps2.push(self.sigma_eps2);
                for (f, m) in out.fitted.iter_mut().zip(&self.mu) {
                    *f += m;
                }
            }
        }
        self.refresh(total)?;
        let k = out.draws().max(1) as f64;
        for f in &mut out.fitted {
            *f /= k;
        }
        out.acceptance = AcceptanceRates {
            beta: self.tally_beta.rate(),
            nu: self.tally_eps.rate(),
            ab: self.tally_u.rate(),
        };
        Ok(out)
    }
}

/// Runs one chain of the quality-model sampler.
pub fn fit_quality_model(design: &QualityDesign, config: &McmcConfig) -> Result<QualityPosterior> {
    config.validate()?;
    QualityChain::new(design, config)?.run()
}
