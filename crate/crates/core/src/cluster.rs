//! Type 2 singular-value clustering of a difference sequence `{Δ_n}` at zero.
//!
//! `o(n)` and `O(1)` are not observable at finite `n`, so labels follow
//! fixed conventions over the top half of the dimension grid:
//!
//! * **strong**: outlier counts `c(n, ε) = #{σ_i(Δ_n) >= ε}` non-increasing
//!   and at most `strong_cap`;
//! * **weak**: `c(n, ε)/n` non-increasing and at most `weak_tol` at the
//!   largest `n`;
//! * **none** otherwise; grids with fewer than four dimensions are
//!   **inconclusive**.
//!
//! "Non-increasing" tolerates a single upward step worth at most one count.
//! Labels nest: strong implies weak.

use rayon::prelude::*;
use serde::Serialize;

use crate::acs::{svd_profile, validate_dims, SingularProfile};
use crate::matrix::MatrixSeq;
use crate::plotdata::{fmt_float, PlotData};
use crate::scalar::Real;
use crate::trend::{log_slope, non_increasing_per_unit, non_increasing_with_slack, top_half};
use crate::{GltError, Result};

pub const WEAK_TOL: f64 = 0.02;
pub const STRONG_CAP: usize = 8;
pub const MIN_CLASSIFY_DIMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterThresholds {
    pub weak_tol: f64,
    pub strong_cap: usize,
}

impl Default for ClusterThresholds {
    fn default() -> Self {
        Self { weak_tol: WEAK_TOL, strong_cap: STRONG_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterLabel {
    Strong,
    Weak,
    None,
    Inconclusive,
}

impl ClusterLabel {
    pub fn is_weak_or_stronger(self) -> bool {
        matches!(self, ClusterLabel::Strong | ClusterLabel::Weak)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClusterLabel::Strong => "strong",
            ClusterLabel::Weak => "weak",
            ClusterLabel::None => "none",
            ClusterLabel::Inconclusive => "inconclusive",
        }
    }
}

/// One-way evidence from the Frobenius trend of `Δ_n`: `||Δ_n||_F^2 = o(n)`
/// gives weak clustering, `O(1)` gives strong clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrobeniusLabel {
    StrongEvidence,
    WeakEvidence,
    NoEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport<T> {
    pub thresholds: ClusterThresholds,
    pub dims: Vec<usize>,
    pub eps_grid: Vec<T>,
    /// `counts[i][j] = #{σ(Δ_{dims[i]}) >= eps_grid[j]}`.
    pub counts: Vec<Vec<usize>>,
    pub frob2: Vec<T>,
    pub frob2_over_n: Vec<T>,
    pub labels: Vec<ClusterLabel>,
    /// Least-squares slope of `ln c` against `ln n` (positive counts only).
    pub fit: Vec<Option<T>>,
    pub frobenius: FrobeniusLabel,
    /// Strong at every sampled `ε` under the common cap.
    pub uniform: bool,
}

impl<T: Real> ClusterReport<T> {
    /// Assembles a report (and its labels) from raw counts and Frobenius norms.
    pub fn from_counts(
        dims: Vec<usize>,
        eps_grid: Vec<T>,
        counts: Vec<Vec<usize>>,
        frob2: Vec<T>,
        thresholds: ClusterThresholds,
    ) -> Result<Self> {
        validate_dims(&dims, 1)?;
        validate_eps(&eps_grid)?;
        if counts.len() != dims.len() || frob2.len() != dims.len() || counts.iter().any(|r| r.len() != eps_grid.len()) {
            return Err(GltError::Invalid("count table shape does not match grids".into()));
        }
        for (row, &n) in counts.iter().zip(&dims) {
            if row.iter().any(|&c| c > n) || row.windows(2).any(|w| w[1] > w[0]) {
                return Err(GltError::Invalid(format!("inconsistent outlier counts at n = {n}")));
            }
        }
        let frob2_over_n = frob2.iter().zip(&dims).map(|(f, &n)| *f / T::from_usize_lossy(n)).collect();
        let mut rep = Self {
            thresholds,
            dims,
            eps_grid,
            counts,
            frob2,
            frob2_over_n,
            labels: Vec::new(),
            fit: Vec::new(),
            frobenius: FrobeniusLabel::Inconclusive,
            uniform: false,
        };
        rep.labels = classify(&rep);
        rep.fit = (0..rep.eps_grid.len())
            .map(|j| {
                let pts: Vec<(usize, T)> = rep
                    .dims
                    .iter()
                    .zip(&rep.counts)
                    .filter(|(_, row)| row[j] > 0)
                    .map(|(&n, row)| (n, T::from_usize_lossy(row[j]).ln()))
                    .collect();
                log_slope(&pts)
            })
            .collect();
        rep.frobenius = frobenius_criterion(&rep);
        rep.uniform = !rep.labels.is_empty() && rep.labels.iter().all(|l| *l == ClusterLabel::Strong);
        Ok(rep)
    }

    pub fn count_column(&self, j: usize) -> Vec<usize> {
        self.counts.iter().map(|r| r[j]).collect()
    }

    pub fn label_at(&self, eps: T) -> Option<ClusterLabel> {
        self.eps_grid.iter().position(|&e| e == eps).map(|j| self.labels[j])
    }

    /// Outlier fraction `c(n, ε)/n` at `(dims[i], eps_grid[j])`.
    pub fn fraction(&self, i: usize, j: usize) -> T {
        T::from_usize_lossy(self.counts[i][j]) / T::from_usize_lossy(self.dims[i])
    }
}

fn validate_eps<T: Real>(eps: &[T]) -> Result<()> {
    if eps.is_empty() {
        return Err(GltError::Invalid("epsilon grid is empty".into()));
    }
    if let Some(bad) = eps.iter().find(|e| !(**e > T::zero() && e.is_finite())) {
        return Err(GltError::InvalidEps(bad.to_f64_lossy()));
    }
    if eps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GltError::Invalid("epsilon grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Counts from precomputed profiles of `Δ_n` and the Frobenius norms `||Δ_n||_F^2`.
pub fn report_from_profiles<T: Real>(
    dims: &[usize],
    profs: &[SingularProfile<T>],
    frob2: Vec<T>,
    eps_grid: &[T],
    thresholds: ClusterThresholds,
) -> Result<ClusterReport<T>> {
    let counts = profs.iter().map(|p| eps_grid.iter().map(|&e| p.count_at_least(e)).collect()).collect();
    ClusterReport::from_counts(dims.to_vec(), eps_grid.to_vec(), counts, frob2, thresholds)
}

pub fn outlier_counts<T: Real>(
    delta: &MatrixSeq<T>,
    dims: &[usize],
    eps_grid: &[T],
    thresholds: ClusterThresholds,
) -> Result<ClusterReport<T>> {
    validate_dims(dims, 1)?;
    validate_eps(eps_grid)?;
    let per_n: Vec<(SingularProfile<T>, T)> = dims
        .par_iter()
        .map(|&n| {
            let d = delta.eval(n)?;
            Ok((svd_profile(&d)?, d.frobenius_sq()))
        })
        .collect::<Result<_>>()?;
    let (profs, frob2): (Vec<_>, Vec<_>) = per_n.into_iter().unzip();
    report_from_profiles(dims, &profs, frob2, eps_grid, thresholds)
}

/// Label for a single `ε` column of counts.
pub fn classify_counts<T: Real>(dims: &[usize], counts: &[usize], thresholds: ClusterThresholds) -> ClusterLabel {
    if dims.len() < MIN_CLASSIFY_DIMS || counts.len() != dims.len() {
        return ClusterLabel::Inconclusive;
    }
    let top_dims = top_half(dims);
    let top_counts = top_half(counts);
    let as_t: Vec<T> = top_counts.iter().map(|&c| T::from_usize_lossy(c)).collect();
    let strong = non_increasing_with_slack(&as_t, T::one())
        && top_counts.iter().all(|&c| c <= thresholds.strong_cap);
    if strong {
        return ClusterLabel::Strong;
    }
    let ratios: Vec<T> =
        top_counts.iter().zip(top_dims).map(|(&c, &n)| T::from_usize_lossy(c) / T::from_usize_lossy(n)).collect();
    let ratio_ok = non_increasing_per_unit(&ratios, top_dims);
    let last = *ratios.last().expect("non-empty top half");
    if ratio_ok && last <= T::cst(thresholds.weak_tol) {
        ClusterLabel::Weak
    } else {
        ClusterLabel::None
    }
}

/// Per-`ε` labels of a report.
pub fn classify<T: Real>(report: &ClusterReport<T>) -> Vec<ClusterLabel> {
    (0..report.eps_grid.len())
        .map(|j| classify_counts::<T>(&report.dims, &report.count_column(j), report.thresholds))
        .collect()
}

/// Frobenius-trend label from per-n `||Δ_n||_F^2`.
pub fn frobenius_trend<T: Real>(dims: &[usize], frob2: &[T], thresholds: ClusterThresholds) -> FrobeniusLabel {
    if dims.len() < MIN_CLASSIFY_DIMS || frob2.len() != dims.len() {
        return FrobeniusLabel::Inconclusive;
    }
    let top = top_half(frob2);
    let max = top.iter().fold(T::zero(), |a, &b| a.max(b));
    let min = top.iter().fold(top[0], |a, &b| a.min(b));
    if max <= T::cst(2.0) * min + T::from_usize_lossy(thresholds.strong_cap) {
        return FrobeniusLabel::StrongEvidence;
    }
    let ratios: Vec<T> = frob2.iter().zip(dims).map(|(&f, &n)| f / T::from_usize_lossy(n)).collect();
    let top_r = top_half(&ratios);
    let monotone = top_r.windows(2).all(|w| w[1] <= w[0] * (T::one() + T::cst(1e-12)));
    if monotone && *top_r.last().expect("non-empty") <= T::cst(thresholds.weak_tol) {
        FrobeniusLabel::WeakEvidence
    } else {
        FrobeniusLabel::NoEvidence
    }
}

pub fn frobenius_criterion<T: Real>(report: &ClusterReport<T>) -> FrobeniusLabel {
    frobenius_trend(&report.dims, &report.frob2, report.thresholds)
}

impl<T: Real> PlotData for ClusterReport<T> {
    fn header(&self) -> &'static str {
        "n,eps,count,count_over_n,frob2,frob2_over_n"
    }

    fn rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for (i, &n) in self.dims.iter().enumerate() {
            for (j, &e) in self.eps_grid.iter().enumerate() {
                rows.push(format!(
                    "{n},{},{},{},{},{}",
                    fmt_float(e),
                    self.counts[i][j],
                    fmt_float(self.fraction(i, j)),
                    fmt_float(self.frob2[i]),
                    fmt_float(self.frob2_over_n[i]),
                ));
            }
        }
        rows
    }
}
