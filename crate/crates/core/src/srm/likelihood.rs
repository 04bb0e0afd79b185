use super::design::DyadDesign;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `eta_ij = x_ij' beta + a_i + b_j + nu_ij`, clamped to the design's bound.
///
/// `nu` is indexed by design row.
pub fn linear_predictor<T: Real>(
    design: &DyadDesign<T>,
    beta: &[T],
    a: &[T],
    b: &[T],
    nu: &[T],
) -> Result<Vec<T>> {
    let n = design.node_count();
    if beta.len() != design.dim() || a.len() != n || b.len() != n || nu.len() != design.rows() {
        return Err(Error::input(format!(
            "dimension mismatch: beta {} (want {}), a {} / b {} (want {n}), nu {} (want {})",
            beta.len(),
            design.dim(),
            a.len(),
            b.len(),
            nu.len(),
            design.rows()
        )));
    }
    let bound = design.clamp();
    Ok((0..design.rows())
        .map(|r| {
            let (i, j) = design.endpoints(r);
            let eta = design.dot(r, beta) + a[i] + b[j] + nu[r];
            eta.max(-bound).min(bound)
        })
        .collect())
}

/// `sum [y eta - exp(eta) - ln(y!)]`.
pub fn poisson_loglik<T: Real>(counts: &[T], eta: &[T]) -> Result<T> {
    if counts.len() != eta.len() {
        return Err(Error::input("counts and linear predictor differ in length"));
    }
    let mut total = T::zero();
    for (&y, &e) in counts.iter().zip(eta) {
        if y < T::zero() || y.fract() != T::zero() || !y.is_finite() {
            return Err(Error::input(format!(
                "Poisson counts must be non-negative integers, got {y:?}"
            )));
        }
        let log_fact = T::of(statrs::function::factorial::ln_factorial(y.as_f64() as u64));
        total = total + y * e - e.exp() - log_fact;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terms() {
        assert_eq!(poisson_loglik(&[0.0_f64], &[0.0]).unwrap(), -1.0);
        let v = poisson_loglik(&[2.0_f64], &[2f64.ln()]).unwrap();
        assert!((v - (2.0 * 2f64.ln() - 2.0 - 2f64.ln())).abs() < 1e-14);
        assert!((v + 1.306_852_819_440_054_7).abs() < 1e-12);
    }

    #[test]
    fn additive_over_pairs() {
        let ys = [0.0_f64, 3.0, 7.0];
        let es = [0.1, -0.4, 1.9];
        let total = poisson_loglik(&ys, &es).unwrap();
        let parts: f64 = (0..3)
            .map(|k| poisson_loglik(&ys[k..=k], &es[k..=k]).unwrap())
            .sum();
        assert!((total - parts).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_integer_counts() {
        assert!(poisson_loglik(&[1.5_f64], &[0.0]).is_err());
        assert!(poisson_loglik(&[-1.0_f32], &[0.0]).is_err());
    }
}
