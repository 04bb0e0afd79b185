use crate::scalar::Real;

/// Percentage reduction of the mean outcome per unit increase of the
/// covariate: `(1 - exp(xi)) * 100`. Negative values are increases.
pub fn effect_size<T: Real>(xi: T) -> T {
    (T::one() - xi.exp()) * T::of(100.0)
}

/// Output note stating the transform used for the effect-size row.
pub fn effect_size_note(xi: f64) -> String {
    format!(
        "effect_size_pct = (1 - exp(xi)) * 100 = {:.3}% for xi = {xi}; \
         a coefficient of -0.012 maps to 1.193%, not 1.9%",
        effect_size(xi)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(effect_size(0.0_f64), 0.0);
        assert!((effect_size(-0.012_f64) - 1.192_828_713_806_948).abs() < 1e-9);
        assert!((effect_size(-0.013_f64) - 1.291_586_497_971_242).abs() < 1e-9);
        assert_eq!(format!("{:.3}", effect_size(-0.012_f64)), "1.193");
        assert!(effect_size(0.5_f32) < 0.0);
    }

    #[test]
    fn strictly_decreasing() {
        let xs: Vec<f64> = (-50..50).map(|k| k as f64 * 0.03).collect();
        assert!(xs.windows(2).all(|w| effect_size(w[0]) > effect_size(w[1])));
    }
}
