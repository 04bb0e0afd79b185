//! Small descriptive statistics used throughout.

use crate::scalar::Real;

pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Sample variance with divisor `n - 1`.
pub fn variance<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::nan();
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::of_usize(xs.len() - 1)
}

pub fn sd<T: Real>(xs: &[T]) -> T {
    variance(xs).sqrt()
}

/// Pearson correlation; `None` when either vector has zero variance.
pub fn pearson<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    assert_eq!(xs.len(), ys.len(), "pearson: length mismatch");
    if xs.len() < 2 {
        return None;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    Some(r.max(-T::one()).min(T::one()))
}

/// Linear-interpolation quantile of unsorted data (`0 <= p <= 1`).
pub fn quantile<T: Real>(xs: &[T], p: f64) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("quantile of NaN"));
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let w = T::of(h - lo as f64);
    v[lo] + (v[hi] - v[lo]) * w
}

/// Mid-rank position of `observed` within `reference`, in `[0, 1]`.
pub fn mid_rank<T: Real>(reference: &[T], observed: T) -> Option<f64> {
    if reference.is_empty() {
        return None;
    }
    let below = reference.iter().filter(|&&r| r < observed).count();
    let ties = reference.iter().filter(|&&r| r == observed).count();
    Some((below as f64 + 0.5 * ties as f64) / reference.len() as f64)
}
