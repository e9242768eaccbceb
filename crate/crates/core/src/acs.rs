//! Singular-value machinery: the single-matrix functional `P(A_n)`, the
//! a.c.s. pseudometric and finite-n estimators of the `q_w` / `q_{w^p}`
//! seminorms.
//!
//! The asymptotic quantities are replaced by observables on a dimension grid
//! `dims` and a cutoff-fraction grid `deltas`. For a cutoff `δ` the rank part
//! keeps the top `⌊δn⌋` singular values (the SVD truncation family), so
//!
//! * `q̂_w(n, δ)     = σ_{⌊δn⌋+1}(A_n)`
//! * `q̂_{w^p}(n, δ) = (Σ_{i>⌊δn⌋} σ_i^p / n)^{1/p}`
//!
//! and a cell is absent when `⌊δn⌋ + 1 > n`.

use nalgebra::{ComplexField, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::matrix::{DenseMatrix, MatrixSeq};
use crate::plotdata::{fmt_float, PlotData};
use crate::scalar::{Exponent, Real, C};
use crate::trend::{log_slope, top_half};
use crate::{GltError, Result};

/// Singular values `σ_1 >= ... >= σ_n >= 0` of one matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularProfile<T> {
    n: usize,
    sigma: Vec<T>,
}

impl<T: Real> SingularProfile<T> {
    /// Validates and sorts arbitrary nonnegative values (no dust clamping).
    pub fn from_values(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(GltError::ZeroDimension);
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
            return Err(GltError::Invalid(format!("singular value {bad} is not a finite nonnegative number")));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        Ok(Self { n: values.len(), sigma: values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    /// One-based access with the convention `σ_{n+1} = 0`.
    pub fn sigma_at(&self, i: usize) -> T {
        assert!(i >= 1, "singular values are indexed from 1");
        self.sigma.get(i - 1).copied().unwrap_or_else(T::zero)
    }

    pub fn spectral_norm(&self) -> T {
        self.sigma[0]
    }

    /// `#{i : σ_i >= α}`.
    pub fn count_at_least(&self, alpha: T) -> usize {
        self.sigma.partition_point(|&s| s >= alpha)
    }

    /// `(Σ_{i > skip} σ_i^p)^{1/p}`.
    pub fn schatten_tail(&self, skip: usize, p: T) -> T {
        let sum = self.sigma.iter().skip(skip).fold(T::zero(), |acc, s| acc + s.powf(p));
        sum.powf(T::one() / p)
    }

    pub fn schatten(&self, p: Exponent<T>) -> T {
        match p {
            Exponent::Infinity => self.spectral_norm(),
            Exponent::Finite(p) => self.schatten_tail(0, p),
        }
    }
}

fn svd_iteration_budget(n: usize) -> usize {
    200 * n + 1000
}

/// Singular values of `a`, with values below `dust_ratio · σ_1` set to zero.
pub fn svd_profile<T: Real>(a: &DenseMatrix<T>) -> Result<SingularProfile<T>> {
    let n = a.dim();
    if n == 0 {
        return Err(GltError::ZeroDimension);
    }
    let svd = a
        .as_matrix()
        .clone()
        .try_svd(false, false, T::default_epsilon(), svd_iteration_budget(n))
        .ok_or(GltError::SvdNonConvergence { n })?;
    let mut sigma: Vec<T> = svd.singular_values.iter().copied().collect();
    sigma.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    let cut = sigma[0] * T::dust_ratio();
    for s in sigma.iter_mut() {
        if *s < cut {
            *s = T::zero();
        }
    }
    Ok(SingularProfile { n, sigma })
}

/// Full decomposition `A = U Σ V*` with its reconstruction residual.
#[derive(Debug, Clone)]
pub struct SvdFactors<T: Real> {
    pub u: DMatrix<C<T>>,
    pub sigma: Vec<T>,
    pub v_t: DMatrix<C<T>>,
    /// `||U Σ V* - A||_F`.
    pub residual: T,
}

pub fn svd_factors<T: Real>(a: &DenseMatrix<T>) -> Result<SvdFactors<T>> {
    let n = a.dim();
    let svd = a
        .as_matrix()
        .clone()
        .try_svd(true, true, T::default_epsilon(), svd_iteration_budget(n))
        .ok_or(GltError::SvdNonConvergence { n })?;
    let u = svd.u.clone().ok_or(GltError::SvdNonConvergence { n })?;
    let v_t = svd.v_t.clone().ok_or(GltError::SvdNonConvergence { n })?;
    let sigma: Vec<T> = svd.singular_values.iter().copied().collect();
    let rebuilt = svd.recompose().map_err(|e| GltError::Invalid(e.to_string()))?;
    let residual = (rebuilt - a.as_matrix()).iter().fold(T::zero(), |acc, z| acc + z.modulus_squared()).sqrt();
    Ok(SvdFactors { u, sigma, v_t, residual })
}

pub fn spectral_norm<T: Real>(a: &DenseMatrix<T>) -> Result<T> {
    Ok(svd_profile(a)?.spectral_norm())
}

/// `P(A_n) = min_{i=1..n} { i/n + σ_{i+1}(A_n) }`.
pub fn p_of_matrix<T: Real>(prof: &SingularProfile<T>) -> T {
    p_split(prof).1
}

/// Minimizing index and value of `P`.
pub fn p_split<T: Real>(prof: &SingularProfile<T>) -> (usize, T) {
    let nf = T::from_usize_lossy(prof.n);
    (1..=prof.n)
        .map(|i| (i, T::from_usize_lossy(i) / nf + prof.sigma_at(i + 1)))
        .fold((prof.n, T::one() + prof.sigma_at(1)), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// `(α, #(σ >= α)/n)` for increasing `alphas`.
pub fn alpha_profile<T: Real>(prof: &SingularProfile<T>, alphas: &[T]) -> Result<Vec<(T, T)>> {
    if alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(GltError::Invalid("alpha grid must be strictly increasing".into()));
    }
    let nf = T::from_usize_lossy(prof.n);
    Ok(alphas.iter().map(|&a| (a, T::from_usize_lossy(prof.count_at_least(a)) / nf)).collect())
}

/// `⌊δn⌋`, robust to representation error in `δ`.
pub fn cutoff<T: Real>(n: usize, delta: T) -> usize {
    (delta.to_f64_lossy() * n as f64 + 1e-9).floor() as usize
}

/// `σ_{⌊δn⌋+1}`, or `None` when that index exceeds `n`.
pub fn qw_cell<T: Real>(prof: &SingularProfile<T>, delta: T) -> Option<T> {
    let k = cutoff(prof.n, delta);
    (k < prof.n).then(|| prof.sigma[k])
}

/// `(Σ_{i>⌊δn⌋} σ_i^p)^{1/p} / n^{1/p}`, or `None` when `⌊δn⌋+1 > n`.
pub fn qwp_cell<T: Real>(prof: &SingularProfile<T>, delta: T, p: T) -> Option<T> {
    let k = cutoff(prof.n, delta);
    (k < prof.n).then(|| prof.schatten_tail(k, p) / T::from_usize_lossy(prof.n).powf(T::one() / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateKind<T> {
    PAcs,
    QW,
    QWp { p: T },
}

impl<T: Real> EstimateKind<T> {
    pub fn name(&self) -> String {
        match self {
            EstimateKind::PAcs => "p_acs".into(),
            EstimateKind::QW => "q_w".into(),
            EstimateKind::QWp { p } => format!("q_wp(p={p})"),
        }
    }
}

/// Table of finite-n estimates with headline and per-column trend.
#[derive(Debug, Clone, Serialize)]
pub struct SeminormEstimate<T> {
    pub kind: EstimateKind<T>,
    pub dims: Vec<usize>,
    /// Empty for `p_acs`, which has a single value column.
    pub deltas: Vec<T>,
    /// `table[i][j]`: value at `dims[i]`, `deltas[j]`.
    pub table: Vec<Vec<Option<T>>>,
    pub headline: Option<T>,
    /// Least-squares slope of value against `ln n`, per column.
    pub trend: Vec<Option<T>>,
}

impl<T: Real> SeminormEstimate<T> {
    pub fn value(&self, n: usize, delta_idx: usize) -> Option<T> {
        let i = self.dims.iter().position(|&d| d == n)?;
        self.table[i].get(delta_idx).copied().flatten()
    }

    pub fn column(&self, delta_idx: usize) -> Vec<Option<T>> {
        self.table.iter().map(|row| row[delta_idx]).collect()
    }

    fn finish(kind: EstimateKind<T>, dims: Vec<usize>, deltas: Vec<T>, table: Vec<Vec<Option<T>>>) -> Self {
        let cols = table.first().map_or(0, |r| r.len());
        let trend = (0..cols)
            .map(|j| {
                let pts: Vec<(usize, T)> =
                    dims.iter().zip(&table).filter_map(|(&n, row)| row[j].map(|v| (n, v))).collect();
                log_slope(&pts)
            })
            .collect();
        let headline = match kind {
            EstimateKind::PAcs => top_half(&table)
                .iter()
                .filter_map(|row| row[0])
                .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v)))),
            _ => {
                let j = smallest_index(&deltas);
                table.last().and_then(|row| j.and_then(|j| row[j]))
            }
        };
        Self { kind, dims, deltas, table, headline, trend }
    }
}

fn smallest_index<T: Real>(xs: &[T]) -> Option<usize> {
    (0..xs.len()).min_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite"))
}

impl<T: Real> PlotData for SeminormEstimate<T> {
    fn header(&self) -> &'static str {
        "kind,n,delta,value"
    }

    fn rows(&self) -> Vec<String> {
        let kind = self.kind.name();
        let mut rows = Vec::new();
        for (i, &n) in self.dims.iter().enumerate() {
            if self.deltas.is_empty() {
                rows.push(format!("{kind},{n},,{}", opt(self.table[i][0])));
            } else {
                for (j, d) in self.deltas.iter().enumerate() {
                    rows.push(format!("{kind},{n},{},{}", fmt_float(*d), opt(self.table[i][j])));
                }
            }
        }
        rows
    }
}

fn opt<T: Real>(v: Option<T>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub(crate) fn validate_dims(dims: &[usize], min: usize) -> Result<()> {
    if dims.len() < min || dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GltError::InvalidDims { min });
    }
    Ok(())
}

pub(crate) fn validate_deltas<T: Real>(deltas: &[T]) -> Result<()> {
    if deltas.is_empty() {
        return Err(GltError::Invalid("cutoff grid is empty".into()));
    }
    for &d in deltas {
        if !(d >= T::zero() && d <= T::cst(0.5)) {
            return Err(GltError::InvalidDelta(d.to_f64_lossy()));
        }
    }
    Ok(())
}

/// Profiles of `seq` at every dimension, computed in parallel, in `dims` order.
pub fn profiles<T: Real>(seq: &MatrixSeq<T>, dims: &[usize]) -> Result<Vec<SingularProfile<T>>> {
    dims.par_iter().map(|&n| svd_profile(&seq.eval(n)?)).collect()
}

/// Per-n `P(X_n)`; headline is the max over the top half of `dims`.
pub fn p_estimate<T: Real>(x: &MatrixSeq<T>, dims: &[usize]) -> Result<SeminormEstimate<T>> {
    validate_dims(dims, 1)?;
    let table = profiles(x, dims)?.iter().map(|p| vec![Some(p_of_matrix(p))]).collect();
    Ok(SeminormEstimate::finish(EstimateKind::PAcs, dims.to_vec(), Vec::new(), table))
}

/// Per-n `P(X_n - Y_n)`; headline is the max over the top half of `dims`.
pub fn dacs_estimate<T: Real>(x: &MatrixSeq<T>, y: &MatrixSeq<T>, dims: &[usize]) -> Result<SeminormEstimate<T>> {
    validate_dims(dims, 3)?;
    let table: Vec<Vec<Option<T>>> = dims
        .par_iter()
        .map(|&n| -> Result<Vec<Option<T>>> {
            let d = x.eval(n)?.sub(&y.eval(n)?)?;
            Ok(vec![Some(p_of_matrix(&svd_profile(&d)?))])
        })
        .collect::<Result<_>>()?;
    Ok(SeminormEstimate::finish(EstimateKind::PAcs, dims.to_vec(), Vec::new(), table))
}

pub fn qw_estimate<T: Real>(x: &MatrixSeq<T>, dims: &[usize], deltas: &[T]) -> Result<SeminormEstimate<T>> {
    validate_dims(dims, 1)?;
    validate_deltas(deltas)?;
    Ok(qw_from_profiles(dims, &profiles(x, dims)?, deltas))
}

pub fn qw_from_profiles<T: Real>(dims: &[usize], profs: &[SingularProfile<T>], deltas: &[T]) -> SeminormEstimate<T> {
    let table = profs.iter().map(|p| deltas.iter().map(|&d| qw_cell(p, d)).collect()).collect();
    SeminormEstimate::finish(EstimateKind::QW, dims.to_vec(), deltas.to_vec(), table)
}

pub fn qwp_estimate<T: Real>(
    x: &MatrixSeq<T>,
    dims: &[usize],
    deltas: &[T],
    p: T,
) -> Result<SeminormEstimate<T>> {
    validate_dims(dims, 1)?;
    validate_deltas(deltas)?;
    Exponent::finite(p)?;
    Ok(qwp_from_profiles(dims, &profiles(x, dims)?, deltas, p))
}

pub fn qwp_from_profiles<T: Real>(
    dims: &[usize],
    profs: &[SingularProfile<T>],
    deltas: &[T],
    p: T,
) -> SeminormEstimate<T> {
    let table = profs.iter().map(|pr| deltas.iter().map(|&d| qwp_cell(pr, d, p)).collect()).collect();
    SeminormEstimate::finish(EstimateKind::QWp { p }, dims.to_vec(), deltas.to_vec(), table)
}

/// Observed bounds of an a.c.s. splitting `A_n - B_{n,m} = R + N` over a grid,
/// using the `P`-optimal SVD split at each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcsWitness<T> {
    pub m: usize,
    /// `max_n rank(R_n)/n`.
    pub c: T,
    /// `max_n ||N_n||`.
    pub omega: T,
    /// Smallest dimension the bounds were checked from.
    pub n_m: usize,
}

impl<T: Real> AcsWitness<T> {
    pub fn from_profiles(m: usize, dims: &[usize], profs: &[SingularProfile<T>]) -> Result<Self> {
        validate_dims(dims, 1)?;
        let mut c = T::zero();
        let mut omega = T::zero();
        for p in profs {
            let (i, _) = p_split(p);
            c = c.max(T::from_usize_lossy(i) / T::from_usize_lossy(p.n));
            omega = omega.max(p.sigma_at(i + 1));
        }
        Ok(Self { m, c, omega, n_m: dims[0] })
    }
}

pub fn acs_witness<T: Real>(
    a: &MatrixSeq<T>,
    b_m: &MatrixSeq<T>,
    m: usize,
    dims: &[usize],
) -> Result<AcsWitness<T>> {
    AcsWitness::from_profiles(m, dims, &profiles(&a.sub(b_m), dims)?)
}
