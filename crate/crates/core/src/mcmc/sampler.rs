//! Metropolis-within-Gibbs sampler for the over-dispersed Poisson
//! social-relations flow model.
//!
//! One sweep updates, in order:
//!
//! 1. `beta` by adaptive random-walk Metropolis on the full likelihood, then an
//!    exact Gaussian draw of a joint translation `(beta + d, nu - X d)` that
//!    leaves every linear predictor unchanged;
//! 2. each dyad `(nu_ij, nu_ji)` by bivariate random-walk Metropolis, then a
//!    joint rescaling `(c nu, c^2 sigma_nu2)` by Metropolis;
//! 3. each node `(a_i, b_i)` by bivariate random-walk Metropolis, followed by
//!    predictor-preserving translations of `(a_i, b_i)` against the node's
//!    dyadic residuals, of the node-level coefficients against the node
//!    effects, and of the intercept against all node effects;
//! 4. `Sigma_ab` from its inverse-Wishart full conditional;
//! 5. `(sigma_nu2, rho)` from the projected inverse-Wishart draw.
//!
//! Proposal scales adapt during burn-in only.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::Rng as _;
use rayon::prelude::*;

use super::adapt::{AdaptiveRwProposal, ScaleBank, Tally};
use super::config::McmcConfig;
use super::conjugate::{update_dyad_cov, update_sigma_ab, IwPrior};
use super::samples::{AcceptanceRates, PosteriorSamples};
use crate::error::{Error, Result};
use crate::linalg::{gaussian_canonical, std_normal};
use crate::rng::{self, Rng};
use crate::srm::DyadDesign;

const REFRESH_EVERY: usize = 100;

#[inline]
fn term(y: f64, eta: f64, bound: f64) -> (f64, f64) {
    let c = eta.clamp(-bound, bound);
    let mu = c.exp();
    (y * c - mu, mu)
}

/// Poisson GLM mode (fixed effects only) and the inverse Hessian there.
pub(crate) fn glm_start(
    x: &[f64],
    p: usize,
    y: &[f64],
    prior_var: f64,
    bound: f64,
) -> (Vec<f64>, DMatrix<f64>) {
    let rows = y.len();
    let mut beta = vec![0.0; p];
    let ybar = y.iter().sum::<f64>() / rows as f64;
    beta[0] = (ybar + 0.5).ln();
    let mut hess = DMatrix::identity(p, p) / prior_var;
    for _ in 0..50 {
        let mut grad = DVector::from_iterator(p, beta.iter().map(|b| -b / prior_var));
        hess = DMatrix::identity(p, p) / prior_var;
        for r in 0..rows {
            let xr = &x[r * p..(r + 1) * p];
            let eta: f64 = xr.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let mu = eta.clamp(-bound, bound).exp();
            for k in 0..p {
                grad[k] += xr[k] * (y[r] - mu);
                for l in 0..=k {
                    hess[(k, l)] += mu * xr[k] * xr[l];
                }
            }
        }
        for k in 0..p {
            for l in 0..k {
                hess[(l, k)] = hess[(k, l)];
            }
        }
        let Some(chol) = hess.clone().cholesky() else {
            break;
        };
        let mut step = chol.solve(&grad);
        let big = step.amax();
        if big > 1.0 {
            step /= big;
        }
        for k in 0..p {
            beta[k] += step[k];
        }
        if big < 1e-8 {
            break;
        }
    }
    let cov = hess
        .try_inverse()
        .unwrap_or_else(|| DMatrix::identity(p, p) * 1e-4);
    (beta, cov)
}

struct SrmChain<'a> {
    design: &'a DyadDesign<f64>,
    cfg: &'a McmcConfig,
    n: usize,
    p: usize,
    bound: f64,
    y: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    in_rows: Vec<Vec<usize>>,
    pair_diag: DMatrix<f64>,
    pair_cross: DMatrix<f64>,
    /// Sender-side and receiver-side coefficient columns with their
    /// per-node values.
    sender_cols: Vec<usize>,
    receiver_cols: Vec<usize>,
    sender_x: Vec<Vec<f64>>,
    receiver_x: Vec<Vec<f64>>,

    beta: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    nu: Vec<f64>,
    xb: Vec<f64>,
    eta: Vec<f64>,
    mu: Vec<f64>,
    sigma_ab: Matrix2<f64>,
    sigma_nu2: f64,
    rho: f64,

    beta_prop: AdaptiveRwProposal,
    nu_scales: ScaleBank,
    ab_scales: ScaleBank,
    nu_rescale: ScaleBank,
    tally_beta: Tally,
    tally_nu: Tally,
    tally_ab: Tally,

    scratch_shift: Vec<f64>,
    scratch_eta: Vec<f64>,
    scratch_mu: Vec<f64>,
    rng: Rng,
}

impl<'a> SrmChain<'a> {
    fn new(design: &'a DyadDesign<f64>, cfg: &'a McmcConfig) -> Result<Self> {
        let n = design.node_count();
        let p = design.dim();
        let rows = design.rows();
        if n < 2 || rows == 0 {
            return Err(Error::input("design has no dyads"));
        }
        let bound = design.clamp();
        let y: Vec<f64> = design.response().iter().map(|&c| c as f64).collect();
        let pairs = design.pair_rows();
        let mut in_rows = vec![Vec::with_capacity(n - 1); n];
        for r in 0..rows {
            in_rows[design.endpoints(r).1].push(r);
        }

        let mut pair_diag = DMatrix::zeros(p, p);
        let mut pair_cross = DMatrix::zeros(p, p);
        for &(r1, r2) in &pairs {
            let (x1, x2) = (design.row(r1), design.row(r2));
            for k in 0..p {
                for l in 0..p {
                    pair_diag[(k, l)] += x1[k] * x1[l] + x2[k] * x2[l];
                    pair_cross[(k, l)] += x1[k] * x2[l] + x2[k] * x1[l];
                }
            }
        }

        let sender_cols: Vec<usize> = (0..p)
            .filter(|&k| design.columns()[k].starts_with("sender:"))
            .collect();
        let receiver_cols: Vec<usize> = (0..p)
            .filter(|&k| design.columns()[k].starts_with("receiver:"))
            .collect();
        let sender_x = (0..n)
            .map(|i| {
                let row = design.row(design.row_index(i, if i == 0 { 1 } else { 0 }));
                sender_cols.iter().map(|&k| row[k]).collect()
            })
            .collect();
        let receiver_x = (0..n)
            .map(|j| {
                let row = design.row(design.row_index(if j == 0 { 1 } else { 0 }, j));
                receiver_cols.iter().map(|&k| row[k]).collect()
            })
            .collect();

        let (beta, cov) = glm_start(design.matrix(), p, &y, cfg.prior.beta_variance, bound);
        let xb: Vec<f64> = (0..rows).map(|r| design.dot(r, &beta)).collect();
        let mu: Vec<f64> = xb.iter().map(|&e| e.clamp(-bound, bound).exp()).collect();

        let sigma_nu2 = 1.0;
        let mut nu_scales = ScaleBank::new(pairs.len(), 1.0, cfg.target_accept_scalar);
        for (k, &(r1, r2)) in pairs.iter().enumerate() {
            let info = 0.5 * (mu[r1] + mu[r2]) * sigma_nu2;
            nu_scales = set_initial(nu_scales, k, 1.0 / (1.0 + info).sqrt());
        }
        let mut ab_scales = ScaleBank::new(n, 1.0, cfg.target_accept_scalar);
        for i in 0..n {
            let out: f64 = (i * (n - 1)..(i + 1) * (n - 1)).map(|r| mu[r]).sum();
            let inc: f64 = in_rows[i].iter().map(|&r| mu[r]).sum();
            ab_scales = set_initial(ab_scales, i, 1.0 / (1.0 + 0.5 * (out + inc)).sqrt());
        }

        Ok(Self {
            design,
            cfg,
            n,
            p,
            bound,
            y,
            pairs,
            in_rows,
            pair_diag,
            pair_cross,
            sender_cols,
            receiver_cols,
            sender_x,
            receiver_x,
            beta_prop: AdaptiveRwProposal::new(&cov, cfg.target_accept_beta, cfg.adapt_window),
            beta,
            a: vec![0.0; n],
            b: vec![0.0; n],
            nu: vec![0.0; rows],
            eta: xb.clone(),
            xb,
            mu,
            sigma_ab: Matrix2::identity() * 0.5,
            sigma_nu2,
            rho: 0.0,
            nu_scales,
            ab_scales,
            nu_rescale: ScaleBank::new(1, 0.05, cfg.target_accept_scalar),
            tally_beta: Tally::default(),
            tally_nu: Tally::default(),
            tally_ab: Tally::default(),
            scratch_shift: vec![0.0; rows],
            scratch_eta: vec![0.0; rows],
            scratch_mu: vec![0.0; rows],
            rng: rng::stream(cfg.seed, "srm-chain", 0),
        })
    }

    fn state_dump(&self, t: usize) -> String {
        format!(
            "iteration {t}: beta={:?} sigma_ab={:?} sigma_nu2={} rho={}",
            self.beta,
            self.sigma_ab.as_slice(),
            self.sigma_nu2,
            self.rho
        )
    }

    /// Recomputes cached predictors from scratch and checks the likelihood.
    fn refresh(&mut self, t: usize) -> Result<()> {
        let n1 = self.n - 1;
        let mut ll = 0.0;
        for r in 0..self.y.len() {
            let (i, j) = (r / n1, self.design.endpoints(r).1);
            self.xb[r] = self.design.dot(r, &self.beta);
            self.eta[r] = self.xb[r] + self.a[i] + self.b[j] + self.nu[r];
            let (l, m) = term(self.y[r], self.eta[r], self.bound);
            self.mu[r] = m;
            ll += l;
        }
        if !ll.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite log-likelihood; {}",
                self.state_dump(t)
            )));
        }
        Ok(())
    }

    fn nu_precision(&self) -> (f64, f64) {
        let q = 1.0 / (self.sigma_nu2 * (1.0 - self.rho * self.rho));
        (q, -self.rho * q)
    }

    fn update_beta(&mut self, t: usize, adapting: bool) -> Result<()> {
        let v = self.cfg.prior.beta_variance;
        let step = self.beta_prop.step(&mut self.rng);
        let proposal: Vec<f64> = self.beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
        let prior_diff = -0.5
            * (proposal.iter().map(|x| x * x).sum::<f64>()
                - self.beta.iter().map(|x| x * x).sum::<f64>())
            / v;
        let mut ll_diff = 0.0;
        for r in 0..self.y.len() {
            let shift = self.design.dot(r, step.as_slice());
            let eta_new = self.eta[r] + shift;
            let (l_new, mu_new) = term(self.y[r], eta_new, self.bound);
            let c_old = self.eta[r].clamp(-self.bound, self.bound);
            ll_diff += l_new - (self.y[r] * c_old - self.mu[r]);
            self.scratch_shift[r] = shift;
            self.scratch_eta[r] = eta_new;
            self.scratch_mu[r] = mu_new;
        }
        if ll_diff.is_nan() {
            return Err(Error::numeric(format!(
                "NaN likelihood ratio in coefficient update; {}",
                self.state_dump(t)
            )));
        }
        let accepted = self.rng.random::<f64>().ln() < ll_diff + prior_diff;
        if accepted {
            self.beta = proposal;
            for r in 0..self.y.len() {
                self.xb[r] += self.scratch_shift[r];
            }
            std::mem::swap(&mut self.eta, &mut self.scratch_eta);
            std::mem::swap(&mut self.mu, &mut self.scratch_mu);
        }
        if adapting {
            self.beta_prop.adapt(t, accepted, &self.beta);
        } else {
            self.tally_beta.record(accepted);
        }
        Ok(())
    }

    /// Gaussian draw of `d` for `(beta + d, nu - X d)`.
    fn shift_beta_against_nu(&mut self) {
        let p = self.p;
        let v = self.cfg.prior.beta_variance;
        let (q, r) = self.nu_precision();
        let precision = &self.pair_diag * q + &self.pair_cross * r + DMatrix::identity(p, p) / v;
        let mut linear = DVector::from_iterator(p, self.beta.iter().map(|b| -b / v));
        for &(r1, r2) in &self.pairs {
            let (n1, n2) = (self.nu[r1], self.nu[r2]);
            let (w1, w2) = (q * n1 + r * n2, r * n1 + q * n2);
            let (x1, x2) = (self.design.row(r1), self.design.row(r2));
            for k in 0..p {
                linear[k] += x1[k] * w1 + x2[k] * w2;
            }
        }
        let Some(delta) = gaussian_canonical(&precision, &linear, &mut self.rng) else {
            return;
        };
        for k in 0..p {
            self.beta[k] += delta[k];
        }
        for row in 0..self.y.len() {
            let shift = self.design.dot(row, delta.as_slice());
            self.nu[row] -= shift;
            self.xb[row] += shift;
        }
    }

    fn update_nu(&mut self, t: usize, adapting: bool) {
        let s = self.sigma_nu2.sqrt();
        let tail = (1.0 - self.rho * self.rho).sqrt();
        let (q, rq) = self.nu_precision();
        let quad = |u: f64, w: f64| q * (u * u + w * w) + 2.0 * rq * u * w;
        for k in 0..self.pairs.len() {
            let (r1, r2) = self.pairs[k];
            let scale = self.nu_scales.scale(k) * s;
            let z1 = std_normal(&mut self.rng);
            let z2 = std_normal(&mut self.rng);
            let d1 = scale * z1;
            let d2 = scale * (self.rho * z1 + tail * z2);
            let (o1, o2) = (self.nu[r1], self.nu[r2]);
            let prior_diff = -0.5 * (quad(o1 + d1, o2 + d2) - quad(o1, o2));
            let (l1, m1) = term(self.y[r1], self.eta[r1] + d1, self.bound);
            let (l2, m2) = term(self.y[r2], self.eta[r2] + d2, self.bound);
            let old1 = self.y[r1] * self.eta[r1].clamp(-self.bound, self.bound) - self.mu[r1];
            let old2 = self.y[r2] * self.eta[r2].clamp(-self.bound, self.bound) - self.mu[r2];
            let log_ratio = l1 + l2 - old1 - old2 + prior_diff;
            let accepted = self.rng.random::<f64>().ln() < log_ratio;
            if accepted {
                self.nu[r1] += d1;
                self.nu[r2] += d2;
                self.eta[r1] += d1;
                self.eta[r2] += d2;
                self.mu[r1] = m1;
                self.mu[r2] = m2;
            }
            if adapting {
                self.nu_scales.adapt(k, t, accepted);
            } else {
                self.tally_nu.record(accepted);
            }
        }
    }

    /// Metropolis move `nu -> c nu`, `sigma_nu2 -> c^2 sigma_nu2`. The Gaussian
    /// prior density of the residuals cancels against the Jacobian up to
    /// `c^2`; `sigma_nu2` carries the inverse-gamma(3/2, 1/2) marginal of the
    /// inverse-Wishart prior diagonal.
    fn rescale_nu(&mut self, t: usize, adapting: bool) {
        let log_c = self.nu_rescale.scale(0) * std_normal(&mut self.rng);
        let c = log_c.exp();
        let mut ll_diff = 0.0;
        for r in 0..self.y.len() {
            let e = self.eta[r] + (c - 1.0) * self.nu[r];
            let (l, m) = term(self.y[r], e, self.bound);
            ll_diff += l - (self.y[r] * self.eta[r].clamp(-self.bound, self.bound) - self.mu[r]);
            self.scratch_eta[r] = e;
            self.scratch_mu[r] = m;
        }
        let (s_old, s_new) = (self.sigma_nu2, self.sigma_nu2 * c * c);
        let log_prior = |s: f64| -2.5 * s.ln() - 0.5 / s;
        let log_ratio = ll_diff + log_prior(s_new) - log_prior(s_old) + 2.0 * log_c;
        let accepted = self.rng.random::<f64>().ln() < log_ratio;
        if accepted {
            self.sigma_nu2 = s_new;
            for v in &mut self.nu {
                *v *= c;
            }
            std::mem::swap(&mut self.eta, &mut self.scratch_eta);
            std::mem::swap(&mut self.mu, &mut self.scratch_mu);
        }
        if adapting {
            self.nu_rescale.adapt(0, t, accepted);
        }
    }

    fn update_ab(&mut self, t: usize, adapting: bool) -> Result<()> {
        let n1 = self.n - 1;
        let chol = self
            .sigma_ab
            .cholesky()
            .ok_or_else(|| Error::numeric(format!("Sigma_ab not SPD; {}", self.state_dump(t))))?;
        let lower = chol.l();
        let prec = chol.inverse();
        let quad = |c: Vector2<f64>| (c.transpose() * prec * c)[(0, 0)];
        let mut new_out = vec![(0.0, 0.0); n1];
        let mut new_in = vec![(0.0, 0.0); n1];
        for i in 0..self.n {
            let z = Vector2::new(std_normal(&mut self.rng), std_normal(&mut self.rng));
            let d = lower * z * self.ab_scales.scale(i);
            let old = Vector2::new(self.a[i], self.b[i]);
            let prior_diff = -0.5 * (quad(old + d) - quad(old));
            let mut ll_diff = 0.0;
            for (k, r) in (i * n1..(i + 1) * n1).enumerate() {
                let e = self.eta[r] + d[0];
                let (l, m) = term(self.y[r], e, self.bound);
                ll_diff += l - (self.y[r] * self.eta[r].clamp(-self.bound, self.bound) - self.mu[r]);
                new_out[k] = (e, m);
            }
            for (k, &r) in self.in_rows[i].iter().enumerate() {
                let e = self.eta[r] + d[1];
                let (l, m) = term(self.y[r], e, self.bound);
                ll_diff += l - (self.y[r] * self.eta[r].clamp(-self.bound, self.bound) - self.mu[r]);
                new_in[k] = (e, m);
            }
            let accepted = self.rng.random::<f64>().ln() < ll_diff + prior_diff;
            if accepted {
                self.a[i] += d[0];
                self.b[i] += d[1];
                for (k, r) in (i * n1..(i + 1) * n1).enumerate() {
                    (self.eta[r], self.mu[r]) = new_out[k];
                }
                for (k, &r) in self.in_rows[i].iter().enumerate() {
                    (self.eta[r], self.mu[r]) = new_in[k];
                }
            }
            if adapting {
                self.ab_scales.adapt(i, t, accepted);
            } else {
                self.tally_ab.record(accepted);
            }
        }
        Ok(())
    }

    /// Per node, Gaussian draw of `d` for `(a_i + d_a, b_i + d_b)` with
    /// `nu_ij -= d_a`, `nu_ji -= d_b`; then the intercept against all node effects.
    fn shift_effects(&mut self) {
        let n1 = self.n - 1;
        let (q, r) = self.nu_precision();
        let q_mat = Matrix2::new(q, r, r, q);
        let Some(a_prec) = self.sigma_ab.try_inverse() else {
            return;
        };
        for i in 0..self.n {
            let mut sum = Vector2::zeros();
            for (k, ro) in (i * n1..(i + 1) * n1).enumerate() {
                sum[0] += self.nu[ro];
                sum[1] += self.nu[self.in_rows[i][k]];
            }
            let c = Vector2::new(self.a[i], self.b[i]);
            let precision = q_mat * n1 as f64 + a_prec;
            let linear = q_mat * sum - a_prec * c;
            let Some(d) = draw2(&precision, &linear, &mut self.rng) else {
                continue;
            };
            self.a[i] += d[0];
            self.b[i] += d[1];
            for ro in i * n1..(i + 1) * n1 {
                self.nu[ro] -= d[0];
            }
            for &ri in &self.in_rows[i] {
                self.nu[ri] -= d[1];
            }
        }

        self.shift_node_coefficients(&a_prec);

        let v = self.cfg.prior.beta_variance;
        let total = Vector2::new(self.a.iter().sum(), self.b.iter().sum());
        let precision = a_prec * self.n as f64 + Matrix2::from_element(1.0 / v);
        let linear = a_prec * total - Vector2::from_element(self.beta[0] / v);
        if let Some(d) = draw2(&precision, &linear, &mut self.rng) {
            for i in 0..self.n {
                self.a[i] -= d[0];
                self.b[i] -= d[1];
            }
            let s = d[0] + d[1];
            self.beta[0] += s;
            for x in &mut self.xb {
                *x += s;
            }
        }
    }

    /// Gaussian draw of `d` for `(beta_s + d_s, a_i - x_i' d_s)` and
    /// `(beta_r + d_r, b_i - x_i' d_r)` over the sender and receiver columns.
    fn shift_node_coefficients(&mut self, a_prec: &Matrix2<f64>) {
        let (ns, nr) = (self.sender_cols.len(), self.receiver_cols.len());
        let m = ns + nr;
        if m == 0 {
            return;
        }
        let v = self.cfg.prior.beta_variance;
        let mut precision = DMatrix::identity(m, m) / v;
        let mut linear = DVector::zeros(m);
        for (k, &c) in self.sender_cols.iter().chain(&self.receiver_cols).enumerate() {
            linear[k] = -self.beta[c] / v;
        }
        for i in 0..self.n {
            let mut loading = DMatrix::zeros(2, m);
            for k in 0..ns {
                loading[(0, k)] = self.sender_x[i][k];
            }
            for k in 0..nr {
                loading[(1, ns + k)] = self.receiver_x[i][k];
            }
            let weighted = loading.transpose() * a_prec;
            precision += &weighted * &loading;
            linear += &weighted * DVector::from_column_slice(&[self.a[i], self.b[i]]);
        }
        let Some(delta) = gaussian_canonical(&precision, &linear, &mut self.rng) else {
            return;
        };
        for (k, &c) in self.sender_cols.iter().chain(&self.receiver_cols).enumerate() {
            self.beta[c] += delta[k];
        }
        let mut ds = vec![0.0; self.n];
        let mut dr = vec![0.0; self.n];
        for i in 0..self.n {
            ds[i] = (0..ns).map(|k| self.sender_x[i][k] * delta[k]).sum();
            dr[i] = (0..nr).map(|k| self.receiver_x[i][k] * delta[ns + k]).sum();
            self.a[i] -= ds[i];
            self.b[i] -= dr[i];
        }
        for r in 0..self.y.len() {
            let (i, j) = self.design.endpoints(r);
            self.xb[r] += ds[i] + dr[j];
        }
    }

    fn update_variances(&mut self) -> Result<()> {
        let prior = &self.cfg.prior;
        self.sigma_ab = update_sigma_ab(
            &self.a,
            &self.b,
            IwPrior {
                df: prior.sigma_ab_df,
                scale: prior.sigma_ab_scale,
            },
            &mut self.rng,
        )?;
        let nu = &self.nu;
        let (s2, rho) = update_dyad_cov(
            self.pairs.iter().map(|&(r1, r2)| (nu[r1], nu[r2])),
            IwPrior {
                df: prior.nu_df,
                scale: prior.nu_scale,
            },
            &mut self.rng,
        )?;
        self.sigma_nu2 = s2;
        self.rho = rho;
        Ok(())
    }

    fn run(mut self) -> Result<PosteriorSamples> {
        let cfg = self.cfg;
        let total = cfg.burn_in + cfg.iterations;
        let keep = cfg.draws();
        let mut out = PosteriorSamples {
            columns: self.design.columns().to_vec(),
            node_ids: self.design.node_ids().to_vec(),
            beta_working: Vec::with_capacity(keep),
            beta: Vec::with_capacity(keep),
            sigma_a2: Vec::with_capacity(keep),
            sigma_ab: Vec::with_capacity(keep),
            sigma_b2: Vec::with_capacity(keep),
            sigma_nu2: Vec::with_capacity(keep),
            rho: Vec::with_capacity(keep),
            a: Vec::with_capacity(keep),
            b: Vec::with_capacity(keep),
            acceptance: AcceptanceRates {
                beta: f64::NAN,
                nu: f64::NAN,
                ab: f64::NAN,
            },
            provenance: self.design.provenance().clone(),
            config: cfg.clone(),
        };
        self.refresh(0)?;
        for t in 0..total {
            let adapting = t < cfg.burn_in;
            if t % REFRESH_EVERY == 0 {
                self.refresh(t)?;
            }
            self.update_beta(t, adapting)?;
            self.shift_beta_against_nu();
            self.update_nu(t, adapting);
            self.rescale_nu(t, adapting);
            self.update_ab(t, adapting)?;
            self.shift_effects();
            self.update_variances()?;

            if !adapting && (t - cfg.burn_in + 1) % cfg.thin == 0 {
                out.beta.push(self.design.transform().apply(&self.beta));
                out.beta_working.push(self.beta.clone());
                out.sigma_a2.push(self.sigma_ab[(0, 0)]);
                out.sigma_ab.push(self.sigma_ab[(0, 1)]);
                out.sigma_b2.push(self.sigma_ab[(1, 1)]);
                out.sigma_nu2.push(self.sigma_nu2);
                out.rho.push(self.rho);
                out.a.push(self.a.clone());
                out.b.push(self.b.clone());
            }
        }
        self.refresh(total)?;
        out.acceptance = AcceptanceRates {
            beta: self.tally_beta.rate(),
            nu: self.tally_nu.rate(),
            ab: self.tally_ab.rate(),
        };
        Ok(out)
    }
}

fn set_initial(mut bank: ScaleBank, k: usize, scale: f64) -> ScaleBank {
    bank.set_scale(k, scale);
    bank
}

fn draw2(precision: &Matrix2<f64>, linear: &Vector2<f64>, rng: &mut Rng) -> Option<Vector2<f64>> {
    let chol = precision.cholesky()?;
    let mean = chol.solve(linear);
    let z = Vector2::new(std_normal(rng), std_normal(rng));
    let dev = chol.l().transpose().solve_upper_triangular(&z)?;
    Some(mean + dev)
}

/// Runs one chain of the flow-model sampler.
pub fn fit_srm(design: &DyadDesign<f64>, config: &McmcConfig) -> Result<PosteriorSamples> {
    config.validate()?;
    SrmChain::new(design, config)?.run()
}

/// Independent chains with seeds derived from `config.seed`; chain 0 uses
/// the configured seed itself.
pub fn fit_srm_chains(
    design: &DyadDesign<f64>,
    config: &McmcConfig,
    chains: usize,
) -> Result<Vec<PosteriorSamples>> {
    (0..chains)
        .into_par_iter()
        .map(|c| {
            let seed = if c == 0 {
                config.seed
            } else {
                rng::derive_seed(config.seed, "chain", c as u64)
            };
            fit_srm(design, &config.clone().with_seed(seed))
        })
        .collect()
}
