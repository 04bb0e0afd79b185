//! Conjugate full-conditional draws for the variance components.

use nalgebra::Matrix2;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::linalg::inverse_wishart2;

/// Inverse-Wishart hyperparameters `IW(df, scale * I)` for a 2x2 covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwPrior {
    pub df: f64,
    pub scale: f64,
}

/// Largest |rho| allowed for the reciprocal dyadic correlation.
pub const RHO_BOUND: f64 = 0.995;

/// Draw of `Sigma_ab` from `IW(df0 + N, S0 + sum_i (a_i, b_i)(a_i, b_i)')`.
pub fn update_sigma_ab<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    prior: IwPrior,
    rng: &mut R,
) -> Result<Matrix2<f64>> {
    if a.len() != b.len() {
        return Err(Error::input("sender and receiver effects differ in length"));
    }
    if a.len() < 2 {
        return Err(Error::input("Sigma_ab update needs at least two nodes"));
    }
    let mut s = Matrix2::identity() * prior.scale;
    for (&ai, &bi) in a.iter().zip(b) {
        s[(0, 0)] += ai * ai;
        s[(0, 1)] += ai * bi;
        s[(1, 1)] += bi * bi;
    }
    s[(1, 0)] = s[(0, 1)];
    inverse_wishart2(prior.df + a.len() as f64, &s, rng)
}

/// Dyadic covariance draw: inverse-Wishart from the stacked `(nu_ij, nu_ji)`
/// outer products, projected to equal diagonal. Returns `(sigma_nu2, rho)`
/// with `|rho| <= RHO_BOUND`.
pub fn update_dyad_cov<R: Rng + ?Sized>(
    pairs: impl IntoIterator<Item = (f64, f64)>,
    prior: IwPrior,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let mut s = Matrix2::identity() * prior.scale;
    let mut count = 0usize;
    for (u, v) in pairs {
        s[(0, 0)] += u * u;
        s[(0, 1)] += u * v;
        s[(1, 1)] += v * v;
        count += 1;
    }
    if count == 0 {
        return Err(Error::input("dyadic covariance update needs at least one pair"));
    }
    s[(1, 0)] = s[(0, 1)];
    let draw = inverse_wishart2(prior.df + count as f64, &s, rng)?;
    Ok(project_equal_diagonal(&draw))
}

/// `(mean diagonal, off-diagonal / mean diagonal)` with rho clamped.
pub fn project_equal_diagonal(m: &Matrix2<f64>) -> (f64, f64) {
    let sigma2 = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let rho = (m[(0, 1)] / sigma2).clamp(-RHO_BOUND, RHO_BOUND);
    (sigma2, rho)
}

/// Inverse-gamma draw for a scalar variance given `n` centered values with
/// sum of squares `ss`: `IG(shape + n/2, scale + ss/2)`.
pub fn update_inverse_gamma<R: Rng + ?Sized>(
    n: usize,
    ss: f64,
    shape: f64,
    scale: f64,
    rng: &mut R,
) -> Result<f64> {
    let a = shape + n as f64 / 2.0;
    let b = scale + ss / 2.0;
    let g = Gamma::new(a, 1.0 / b)
        .map_err(|e| Error::numeric(format!("inverse-gamma({a}, {b}): {e}")))?;
    Ok(1.0 / g.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{chol2, is_spd2, mvn2};
    use crate::rng::stream;

    #[test]
    fn sigma_ab_concentrates_at_truth() {
        let mut rng = stream(3, "sab", 0);
        let truth = Matrix2::new(1.0, 0.5, 0.5, 1.0);
        let l = chol2(&truth).unwrap();
        let n = 10_000;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..n {
            let d = mvn2(&l, &mut rng);
            a.push(d[0]);
            b.push(d[1]);
        }
        let prior = IwPrior { df: 4.0, scale: 1.0 };
        let reps = 200;
        let mut acc = Matrix2::zeros();
        for _ in 0..reps {
            acc += update_sigma_ab(&a, &b, prior, &mut rng).unwrap();
        }
        let mean = acc / reps as f64;
        assert!((mean - truth).abs().max() < 0.05, "{mean}");
    }

    #[test]
    fn zero_effects_give_prior_mean() {
        // IW(4 + N, I) has mean I / (4 + N - 3).
        let mut rng = stream(4, "sab", 0);
        let n = 5;
        let zeros = vec![0.0; n];
        let reps = 40_000;
        let mut acc = Matrix2::zeros();
        for _ in 0..reps {
            let d = update_sigma_ab(&zeros, &zeros, IwPrior { df: 4.0, scale: 1.0 }, &mut rng).unwrap();
            assert!(is_spd2(&d));
            acc += d;
        }
        let mean = acc / reps as f64;
        let expect = 1.0 / (4.0 + n as f64 - 3.0);
        assert!((mean[(0, 0)] - expect).abs() < 0.01, "{mean}");
        assert!((mean[(1, 1)] - expect).abs() < 0.01, "{mean}");
        assert!(mean[(0, 1)].abs() < 0.01, "{mean}");
    }

    #[test]
    fn sigma_ab_needs_two_nodes() {
        let mut rng = stream(0, "x", 0);
        let prior = IwPrior { df: 4.0, scale: 1.0 };
        assert!(update_sigma_ab(&[0.1], &[0.2], prior, &mut rng).is_err());
    }

    #[test]
    fn dyad_cov_recovers_truth() {
        let mut rng = stream(8, "nu", 0);
        let (s2, rho) = (2.0, 0.8);
        let l = chol2(&Matrix2::new(s2, rho * s2, rho * s2, s2)).unwrap();
        let pairs: Vec<(f64, f64)> = (0..10_000)
            .map(|_| {
                let d = mvn2(&l, &mut rng);
                (d[0], d[1])
            })
            .collect();
        let (est_s2, est_rho) =
            update_dyad_cov(pairs.iter().copied(), IwPrior { df: 4.0, scale: 1.0 }, &mut rng).unwrap();
        assert!((est_s2 - s2).abs() < 0.1, "{est_s2}");
        assert!((est_rho - rho).abs() < 0.1, "{est_rho}");
    }

    #[test]
    fn zero_residuals_shrink_to_prior_scale() {
        let mut rng = stream(9, "nu", 0);
        let prior = IwPrior { df: 4.0, scale: 1.0 };
        let mut small = 0.0;
        for _ in 0..2000 {
            small += update_dyad_cov(vec![(0.0, 0.0); 50], prior, &mut rng).unwrap().0;
        }
        // IW(54, I) has mean I / 51.
        assert!((small / 2000.0 - 1.0 / 51.0).abs() < 0.002);
    }

    #[test]
    fn rho_is_clamped() {
        let mut rng = stream(10, "nu", 0);
        let pairs: Vec<(f64, f64)> = (0..5000)
            .map(|k| {
                let x = (k as f64 * 0.37).sin() * 3.0;
                (x, x * 0.99999)
            })
            .collect();
        let (_, rho) =
            update_dyad_cov(pairs, IwPrior { df: 4.0, scale: 1e-6 }, &mut rng).unwrap();
        assert_eq!(rho, RHO_BOUND);
        assert_eq!(project_equal_diagonal(&Matrix2::new(1.0, -2.0, -2.0, 1.0)).1, -RHO_BOUND);
    }

    #[test]
    fn inverse_gamma_mean() {
        let mut rng = stream(12, "ig", 0);
        let reps = 50_000;
        let m: f64 = (0..reps)
            .map(|_| update_inverse_gamma(10, 8.0, 2.0, 1.0, &mut rng).unwrap())
            .sum::<f64>()
            / reps as f64;
        // IG(7, 5) mean = 5 / 6.
        assert!((m - 5.0 / 6.0).abs() < 0.01, "{m}");
    }
}
