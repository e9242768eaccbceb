//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All matrices are complex; the generic parameter `T` is the underlying
//! real field (`f32` or `f64`).

use std::fmt::{Debug, Display};

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Real field usable as the base of [`crate::DenseMatrix`] entries.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Serialize + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn cst(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative threshold under which singular values count as numerical dust.
    fn dust_ratio() -> Self {
        Self::cst(1e-12).max(Self::cst(8.0) * Self::default_epsilon())
    }

    /// Tolerance (per `sqrt(n)`) on `||U*U - I||_F` for accepting `U` as unitary.
    fn unitary_tol() -> Self {
        Self::cst(1e-10).max(Self::cst(256.0) * Self::default_epsilon())
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn is_finite_c<T: Real>(z: &C<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Exponent of an `L^p` / Schatten norm: a finite `p >= 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> Exponent<T> {
    pub fn finite(p: T) -> crate::Result<Self> {
        if !(p >= T::one()) {
            return Err(crate::GltError::InvalidExponent(p.to_f64_lossy()));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl<T: Real> Display for Exponent<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// `(2π)^{1/p}` for finite `p`, `1` for `p = ∞`: the scale attached to a
/// symbol when it is read as an element of `L^p(D)`.
pub fn phi_p_factor<T: Real>(p: Exponent<T>) -> T {
    match p {
        Exponent::Infinity => T::one(),
        Exponent::Finite(p) => T::two_pi().powf(T::one() / p),
    }
}
