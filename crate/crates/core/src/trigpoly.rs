//! Trigonometric polynomials `f(θ) = Σ_k f̂_k e^{ikθ}` with finite support.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::ComplexField;

use crate::scalar::{cplx, creal, Real, C};

#[derive(Clone, PartialEq)]
pub struct TrigPoly<T: Real> {
    coeffs: BTreeMap<i64, C<T>>,
}

impl<T: Real> fmt::Debug for TrigPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

impl<T: Real> fmt::Display for TrigPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                _ => format!("({c})e^{{{k}iθ}}"),
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<T: Real> TrigPoly<T> {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    /// Builds from `(k, f̂_k)` pairs; repeated indices accumulate and exact
    /// zeros are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, C<T>)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in pairs {
            *coeffs.entry(k).or_insert_with(|| creal(T::zero())) += c;
        }
        coeffs.retain(|_, c: &mut C<T>| c.re != T::zero() || c.im != T::zero());
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self::from_pairs([(0, creal(c))])
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// `c · e^{ikθ}`.
    pub fn monomial(k: i64, c: C<T>) -> Self {
        Self::from_pairs([(k, c)])
    }

    /// `a0 + a1 cos θ`, i.e. `f̂_0 = a0`, `f̂_{±1} = a1 / 2`.
    pub fn cosine(a0: T, a1: T) -> Self {
        let h = creal(a1 / T::cst(2.0));
        Self::from_pairs([(-1, h), (0, creal(a0)), (1, h)])
    }

    #[inline]
    pub fn coeff(&self, k: i64) -> C<T> {
        self.coeffs.get(&k).copied().unwrap_or_else(|| creal(T::zero()))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, C<T>)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    pub fn is_constant_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeff(0) == creal(T::one())
    }

    pub fn eval(&self, theta: T) -> C<T> {
        self.coeffs.iter().fold(creal(T::zero()), |acc, (k, c)| {
            let phase = T::from_i64(*k).expect("index representable") * theta;
            acc + *c * cplx(phase.cos(), phase.sin())
        })
    }

    /// `max_θ |f(θ)|` bound via `Σ |f̂_k|`.
    pub fn coeff_l1(&self) -> T {
        self.coeffs.values().fold(T::zero(), |acc, c| acc + c.modulus())
    }

    /// True when `f̂_{-k} = conj(f̂_k)` for every `k` (real-valued symbol).
    pub fn is_real_valued(&self, tol: T) -> bool {
        self.coeffs.iter().all(|(k, c)| (self.coeff(-k) - c.conj()).modulus() <= tol)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_pairs(self.coeffs().chain(other.coeffs()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_pairs(
            self.coeffs().flat_map(|(j, a)| other.coeffs().map(move |(k, b)| (j + k, a * b))),
        )
    }

    /// Pointwise complex conjugate: `f̄(θ) = Σ conj(f̂_k) e^{-ikθ}`.
    pub fn conj(&self) -> Self {
        Self::from_pairs(self.coeffs().map(|(k, c)| (-k, c.conj())))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::from_pairs(self.coeffs().map(|(k, c)| (k, c * s)))
    }
}
