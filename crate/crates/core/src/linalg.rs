//! Dense linear-algebra helpers for the samplers.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Lower Cholesky factor of a 2x2 SPD matrix.
pub fn chol2(m: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    m.cholesky().map(|c| c.l())
}

/// Lower factor of a 2x2 positive semidefinite matrix; zero variances give
/// zero rows instead of failing.
pub fn psd_factor2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let l11 = m[(0, 0)].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { m[(1, 0)] / l11 } else { 0.0 };
    let l22 = (m[(1, 1)] - l21 * l21).max(0.0).sqrt();
    Matrix2::new(l11, 0.0, l21, l22)
}

/// Draw from `MVN(0, L L')` given the lower factor `L`.
pub fn mvn2<R: Rng + ?Sized>(chol: &Matrix2<f64>, rng: &mut R) -> Vector2<f64> {
    chol * Vector2::new(std_normal(rng), std_normal(rng))
}

/// 2x2 inverse-Wishart draw `IW(df, scale)` via the Bartlett decomposition of
/// the Wishart precision.
pub fn inverse_wishart2<R: Rng + ?Sized>(
    df: f64,
    scale: &Matrix2<f64>,
    rng: &mut R,
) -> Result<Matrix2<f64>> {
    if !(df > 1.0) {
        return Err(Error::numeric(format!("inverse-Wishart needs df > 1, got {df}")));
    }
    let degenerate = || Error::numeric(format!("degenerate inverse-Wishart scale {scale:?}"));
    let precision_scale = scale.try_inverse().ok_or_else(degenerate)?;
    let l = chol2(&precision_scale).ok_or_else(degenerate)?;
    let c1 = ChiSquared::new(df).map_err(|_| degenerate())?.sample(rng).sqrt();
    let c2 = ChiSquared::new(df - 1.0).map_err(|_| degenerate())?.sample(rng).sqrt();
    let a = Matrix2::new(c1, 0.0, std_normal(rng), c2);
    let la = l * a;
    let wishart = la * la.transpose();
    let sigma = wishart.try_inverse().ok_or_else(degenerate)?;
    let sym = (sigma + sigma.transpose()) * 0.5;
    if !is_spd2(&sym) {
        return Err(degenerate());
    }
    Ok(sym)
}

pub fn is_spd2(m: &Matrix2<f64>) -> bool {
    m[(0, 0)] > 0.0
        && m[(1, 1)] > 0.0
        && (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * (1.0 + m[(0, 1)].abs())
        && m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] > 0.0
}

/// Draw from the Gaussian with precision `precision` and canonical mean
/// `linear` (density proportional to `exp(-x'Px/2 + h'x)`).
pub fn gaussian_canonical<R: Rng + ?Sized>(
    precision: &DMatrix<f64>,
    linear: &DVector<f64>,
    rng: &mut R,
) -> Option<DVector<f64>> {
    let chol = precision.clone().cholesky()?;
    let mean = chol.solve(linear);
    let z = DVector::from_fn(linear.len(), |_, _| std_normal(rng));
    let dev = chol.l().transpose().solve_upper_triangular(&z)?;
    Some(mean + dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn inverse_wishart_mean() {
        // E[IW(df, S)] = S / (df - p - 1) with p = 2.
        let mut rng = stream(11, "iw", 0);
        let scale = Matrix2::new(2.0, 0.5, 0.5, 1.0);
        let df = 12.0;
        let reps = 40_000;
        let mut acc = Matrix2::zeros();
        for _ in 0..reps {
            acc += inverse_wishart2(df, &scale, &mut rng).unwrap();
        }
        let mean = acc / reps as f64;
        let expect = scale / (df - 3.0);
        assert!((mean - expect).abs().max() < 0.01, "{mean} vs {expect}");
    }

    #[test]
    fn canonical_gaussian_moments() {
        let mut rng = stream(5, "gauss", 0);
        let p = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]);
        let h = DVector::from_row_slice(&[1.0, -1.0]);
        let cov = p.clone().try_inverse().unwrap();
        let mu = &cov * &h;
        let reps = 50_000;
        let draws: Vec<DVector<f64>> =
            (0..reps).map(|_| gaussian_canonical(&p, &h, &mut rng).unwrap()).collect();
        let m0 = draws.iter().map(|d| d[0]).sum::<f64>() / reps as f64;
        let v0 = draws.iter().map(|d| (d[0] - mu[0]).powi(2)).sum::<f64>() / reps as f64;
        assert!((m0 - mu[0]).abs() < 0.01);
        assert!((v0 - cov[(0, 0)]).abs() < 0.01);
    }

    #[test]
    fn rejects_degenerate_scale() {
        let mut rng = stream(1, "iw", 0);
        assert!(inverse_wishart2(5.0, &Matrix2::zeros(), &mut rng).is_err());
    }
}
