//! Finite-sample trend conventions shared by the estimators and reports.

use crate::scalar::Real;

/// Upper half of a dims-indexed slice: entries from index `len / 2` on.
pub fn top_half<X>(xs: &[X]) -> &[X] {
    &xs[xs.len() / 2..]
}

/// Least-squares slope of `value` against `ln n`; `None` with fewer than
/// two points.
pub fn log_slope<T: Real>(points: &[(usize, T)]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let k = T::from_usize_lossy(points.len());
    let xs: Vec<T> = points.iter().map(|(n, _)| T::from_usize_lossy(*n).ln()).collect();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / k;
    let my = points.iter().fold(T::zero(), |a, &(_, v)| a + v) / k;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, (_, y)) in xs.iter().zip(points) {
        sxy += (*x - mx) * (*y - my);
        sxx += (*x - mx) * (*x - mx);
    }
    (sxx > T::zero()).then(|| sxy / sxx)
}

/// Non-increasing up to at most one upward step of size `<= slack`.
pub fn non_increasing_with_slack<T: Real>(xs: &[T], slack: T) -> bool {
    let mut used = false;
    for w in xs.windows(2) {
        let rise = w[1] - w[0];
        if rise > T::zero() {
            if used || rise > slack {
                return false;
            }
            used = true;
        }
    }
    true
}

/// Per-dimension ratios non-increasing up to one upward step worth a single
/// unit at the larger dimension, i.e. at most `1/dims[k+1]`.
pub fn non_increasing_per_unit<T: Real>(xs: &[T], dims: &[usize]) -> bool {
    let mut used = false;
    for (k, w) in xs.windows(2).enumerate() {
        let rise = w[1] - w[0];
        if rise > T::zero() {
            let slack = T::one() / T::from_usize_lossy(dims[k + 1]);
            if used || rise > slack * (T::one() + T::cst(1e-12)) {
                return false;
            }
            used = true;
        }
    }
    true
}
