//! Singular-value distribution checks `{A_n} ~σ κ` against a fixed family of
//! compactly supported test functions, and the isometry between sequence
//! seminorms and symbol norms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acs::{
    profiles, qw_from_profiles, qwp_from_profiles, validate_deltas, validate_dims, SeminormEstimate, SingularProfile,
};
use crate::matrix::MatrixSeq;
use crate::plotdata::{fmt_float, PlotData};
use crate::scalar::{phi_p_factor, Exponent, Real};
use crate::symbol::SymbolExpr;
use crate::trend::{non_increasing_per_unit, top_half};
use crate::{GltError, Result};

/// Finer than the general quadrature floor: test functions have kinks.
pub const MIN_DIST_GRID: usize = 128;
pub const MIN_TEST_FUNCS: usize = 3;
pub const MIN_DIST_DIMS: usize = 4;

/// Gaussian support half-width in units of `scale`.
const GAUSS_CUT: f64 = 6.0;

/// Continuous, compactly supported test functions on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunc<T> {
    /// Tent of height 1 at `center`, vanishing at `center ± width`.
    Hat { center: T, width: T },
    /// `exp(-u²/2) - exp(-18)` for `|u| = |t - center|/scale <= 6`, else 0.
    Gaussian { center: T, scale: T },
    /// 1 on `|t| <= radius`, `(2 - |t|/radius)^degree` up to `2·radius`, then 0.
    PolyCutoff { degree: u32, radius: T },
}

impl<T: Real> TestFunc<T> {
    pub fn hat(center: T, width: T) -> Result<Self> {
        Self::Hat { center, width }.validated()
    }

    pub fn gaussian(center: T, scale: T) -> Result<Self> {
        Self::Gaussian { center, scale }.validated()
    }

    pub fn poly_cutoff(degree: u32, radius: T) -> Result<Self> {
        Self::PolyCutoff { degree, radius }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            TestFunc::Hat { center, width } => center.is_finite() && width.is_finite() && width > T::zero(),
            TestFunc::Gaussian { center, scale } => center.is_finite() && scale.is_finite() && scale > T::zero(),
            TestFunc::PolyCutoff { degree, radius } => degree >= 1 && radius.is_finite() && radius > T::zero(),
        };
        if ok {
            Ok(self)
        } else {
            Err(GltError::Invalid(format!("test function parameters out of range: {}", self.id())))
        }
    }

    /// The three-member family used by default: one of each kind, centred in
    /// `[0, top]` so together they resolve the whole singular range.
    pub fn default_family(top: T) -> Result<Vec<Self>> {
        let half = top / T::cst(2.0);
        Ok(vec![Self::hat(half, half)?, Self::gaussian(half, top / T::cst(8.0))?, Self::poly_cutoff(2, half)?])
    }

    pub fn eval(&self, t: T) -> T {
        match *self {
            TestFunc::Hat { center, width } => (T::one() - (t - center).abs() / width).max(T::zero()),
            TestFunc::Gaussian { center, scale } => {
                let u = (t - center).abs() / scale;
                let cut = T::cst(GAUSS_CUT);
                if u > cut {
                    T::zero()
                } else {
                    (-(u * u) / T::cst(2.0)).exp() - (-(cut * cut) / T::cst(2.0)).exp()
                }
            }
            TestFunc::PolyCutoff { degree, radius } => {
                let a = t.abs();
                if a <= radius {
                    T::one()
                } else if a < radius * T::cst(2.0) {
                    (T::cst(2.0) - a / radius).powi(degree as i32)
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn sup(&self) -> T {
        match self {
            TestFunc::Gaussian { .. } => T::one() - T::cst((-GAUSS_CUT * GAUSS_CUT / 2.0).exp()),
            _ => T::one(),
        }
    }

    /// Stable identifier used in CSV output.
    pub fn id(&self) -> String {
        match self {
            TestFunc::Hat { center, width } => format!("hat(c={center};w={width})"),
            TestFunc::Gaussian { center, scale } => format!("gaussian(c={center};s={scale})"),
            TestFunc::PolyCutoff { degree, radius } => format!("poly_cutoff(d={degree};r={radius})"),
        }
    }
}

/// `(1/n) Σ f(σ_i)` for an arbitrary `f`.
pub fn profile_mean<T: Real>(prof: &SingularProfile<T>, f: impl Fn(T) -> T) -> T {
    let s = prof.sigma().iter().fold(T::zero(), |acc, &x| acc + f(x));
    s / T::from_usize_lossy(prof.n())
}

/// `(1/n) Σ F(σ_i(A_n))`.
pub fn ergodic_sum<T: Real>(prof: &SingularProfile<T>, f: &TestFunc<T>) -> T {
    profile_mean(prof, |x| f.eval(x))
}

/// `(1/2π) ∫_D f(|κ|)` by midpoint quadrature, for an arbitrary `f`.
pub fn symbol_mean<T: Real>(s: &SymbolExpr<T>, grid: usize, f: impl Fn(T) -> T + Sync) -> Result<T> {
    if grid < MIN_DIST_GRID {
        return Err(GltError::GridTooCoarse { got: grid, min: MIN_DIST_GRID });
    }
    Ok(s.integrate_modulus(grid, f)? / T::two_pi())
}

/// `(1/2π) ∫_D F(|κ(x, θ)|) dx dθ`.
pub fn symbol_integral<T: Real>(s: &SymbolExpr<T>, f: &TestFunc<T>, grid: usize) -> Result<T> {
    symbol_mean(s, grid, |v| f.eval(v))
}

#[derive(Debug, Clone, Serialize)]
pub struct DistributionReport<T> {
    pub dims: Vec<usize>,
    pub funcs: Vec<TestFunc<T>>,
    pub grid: usize,
    /// `lhs[i][k]`: ergodic sum of `funcs[k]` at `dims[i]`.
    pub lhs: Vec<Vec<T>>,
    /// Symbol side per test function (independent of `n`).
    pub rhs: Vec<T>,
    pub residual: Vec<Vec<T>>,
    /// Residual non-increasing over the top half of `dims`, per test function.
    pub verdicts: Vec<bool>,
}

impl<T: Real> DistributionReport<T> {
    pub fn residual_column(&self, k: usize) -> Vec<T> {
        self.residual.iter().map(|r| r[k]).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| *v)
    }

    /// Human-readable description of the sampled family, for output metadata.
    pub fn family(&self) -> Vec<String> {
        self.funcs.iter().map(TestFunc::id).collect()
    }
}

/// Distribution report from precomputed profiles.
pub fn distribution_from_profiles<T: Real>(
    dims: &[usize],
    profs: &[SingularProfile<T>],
    s: &SymbolExpr<T>,
    funcs: &[TestFunc<T>],
    grid: usize,
) -> Result<DistributionReport<T>> {
    validate_dims(dims, MIN_DIST_DIMS)?;
    if funcs.len() < MIN_TEST_FUNCS {
        return Err(GltError::Invalid(format!("need at least {MIN_TEST_FUNCS} test functions, got {}", funcs.len())));
    }
    if profs.len() != dims.len() {
        return Err(GltError::Invalid("profile count does not match dimension grid".into()));
    }
    let funcs: Vec<TestFunc<T>> = funcs.iter().map(|f| f.validated()).collect::<Result<_>>()?;
    let rhs: Vec<T> = funcs.par_iter().map(|f| symbol_integral(s, f, grid)).collect::<Result<_>>()?;
    let lhs: Vec<Vec<T>> = profs.iter().map(|p| funcs.iter().map(|f| ergodic_sum(p, f)).collect()).collect();
    let residual: Vec<Vec<T>> =
        lhs.iter().map(|row| row.iter().zip(&rhs).map(|(l, r)| (*l - *r).abs()).collect()).collect();
    let verdicts = (0..funcs.len())
        .map(|k| {
            let col: Vec<T> = residual.iter().map(|r| r[k]).collect();
            non_increasing_per_unit(top_half(&col), top_half(dims))
        })
        .collect();
    Ok(DistributionReport { dims: dims.to_vec(), funcs, grid, lhs, rhs, residual, verdicts })
}

pub fn distribution_check<T: Real>(
    x: &MatrixSeq<T>,
    s: &SymbolExpr<T>,
    funcs: &[TestFunc<T>],
    dims: &[usize],
    grid: usize,
) -> Result<DistributionReport<T>> {
    validate_dims(dims, MIN_DIST_DIMS)?;
    if funcs.len() < MIN_TEST_FUNCS {
        return Err(GltError::Invalid(format!("need at least {MIN_TEST_FUNCS} test functions, got {}", funcs.len())));
    }
    let profs = profiles(x, dims)?;
    distribution_from_profiles(dims, &profs, s, funcs, grid)
}

impl<T: Real> PlotData for DistributionReport<T> {
    fn header(&self) -> &'static str {
        "n,F,lhs,rhs,residual"
    }

    fn rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for (i, &n) in self.dims.iter().enumerate() {
            for (k, f) in self.funcs.iter().enumerate() {
                rows.push(format!(
                    "{n},{},{},{},{}",
                    f.id(),
                    fmt_float(self.lhs[i][k]),
                    fmt_float(self.rhs[k]),
                    fmt_float(self.residual[i][k])
                ));
            }
        }
        rows
    }
}

/// Sequence seminorm against the matching symbol norm.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryRecord<T> {
    pub p: String,
    pub headline: Option<T>,
    /// `||κ||_∞` for `p = ∞`, else `(2π)^{-1/p} ||κ||_p`.
    pub symbol_side: T,
    pub relative_gap: Option<T>,
    pub estimate: SeminormEstimate<T>,
    /// Distribution evidence on the same profiles, when the dimension grid
    /// is long enough.
    pub evidence: Option<DistributionReport<T>>,
}

pub fn symbol_side<T: Real>(s: &SymbolExpr<T>, p: Exponent<T>, grid: usize) -> Result<T> {
    let norm = s.lp_norm(p, grid)?;
    Ok(norm / phi_p_factor(p))
}

pub fn isometry_check<T: Real>(
    x: &MatrixSeq<T>,
    s: &SymbolExpr<T>,
    p: Exponent<T>,
    dims: &[usize],
    deltas: &[T],
    grid: usize,
) -> Result<IsometryRecord<T>> {
    validate_dims(dims, 1)?;
    validate_deltas(deltas)?;
    let side = symbol_side(s, p, grid)?;
    let profs = profiles(x, dims)?;
    let estimate = match p {
        Exponent::Infinity => qw_from_profiles(dims, &profs, deltas),
        Exponent::Finite(pv) => qwp_from_profiles(dims, &profs, deltas, pv),
    };
    let headline = estimate.headline;
    let relative_gap = headline.map(|h| (h - side).abs() / side.max(T::default_epsilon()));
    let evidence = if dims.len() >= MIN_DIST_DIMS {
        let top = s.grid_max_modulus(grid)?.max(T::default_epsilon());
        Some(distribution_from_profiles(dims, &profs, s, &TestFunc::default_family(top * T::cst(1.25))?, grid)?)
    } else {
        None
    };
    Ok(IsometryRecord { p: p.to_string(), headline, symbol_side: side, relative_gap, estimate, evidence })
}
