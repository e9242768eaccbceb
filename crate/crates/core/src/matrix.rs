//! Dense complex matrices and lazily evaluated matrix sequences.

use std::fmt;
use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix};

use crate::scalar::{creal, is_finite_c, Real, C};
use crate::{GltError, Result};

/// Square complex matrix with finite entries.
///
/// Indices are zero-based: entry `(j, k)` is row `j`, column `k`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T: Real> {
    inner: DMatrix<C<T>>,
}

impl<T: Real> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{}) {:?}", self.dim(), self.dim(), self.inner)
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { inner: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    pub fn from_diagonal(diag: &[C<T>]) -> Result<Self> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        Self::from_dmatrix(m)
    }

    pub fn from_real_diagonal(diag: &[T]) -> Result<Self> {
        let d: Vec<C<T>> = diag.iter().map(|&x| creal(x)).collect();
        Self::from_diagonal(&d)
    }

    /// Builds an `n x n` matrix entrywise; rejects non-finite entries.
    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C<T>) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(n, n, f))
    }

    /// Row-major construction from exactly `n * n` entries.
    pub fn from_row_major(n: usize, entries: &[C<T>]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(GltError::Invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn from_dmatrix(inner: DMatrix<C<T>>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(GltError::NotSquare { rows: inner.nrows(), cols: inner.ncols() });
        }
        // column-major walk
        let n = inner.nrows();
        for (idx, z) in inner.iter().enumerate() {
            if !is_finite_c(z) {
                return Err(GltError::NonFiniteEntry { row: idx % n, col: idx / n });
            }
        }
        Ok(Self { inner })
    }

    /// Block-diagonal assembly; empty blocks are skipped.
    pub fn block_diag(blocks: &[&DenseMatrix<T>]) -> Self {
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut m = DMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            let k = b.dim();
            m.view_mut((off, off), (k, k)).copy_from(&b.inner);
            off += k;
        }
        Self { inner: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> C<T> {
        self.inner[(j, k)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C<T>> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<C<T>> {
        self.inner
    }

    pub fn diagonal(&self) -> Vec<C<T>> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(GltError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_dmatrix(&self.inner + &other.inner)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_dmatrix(&self.inner - &other.inner)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_dmatrix(&self.inner * &other.inner)
    }

    pub fn scale(&self, c: C<T>) -> Result<Self> {
        Self::from_dmatrix(self.inner.map(|z| z * c))
    }

    /// `||A||_F^2`, computed from the entries.
    pub fn frobenius_sq(&self) -> T {
        self.inner.iter().fold(T::zero(), |acc, z| acc + z.modulus_squared())
    }

    pub fn frobenius(&self) -> T {
        self.frobenius_sq().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        Ok(self
            .inner
            .iter()
            .zip(other.inner.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).modulus())))
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let n = self.dim();
        (0..n).all(|j| (j..n).all(|k| (self.inner[(j, k)] - self.inner[(k, j)].conj()).modulus() <= tol))
    }

    /// `||U*U - I||_F`.
    pub fn unitarity_defect(&self) -> T {
        let g = self.inner.adjoint() * &self.inner;
        let n = self.dim();
        let mut acc = T::zero();
        for k in 0..n {
            for j in 0..n {
                let target = if j == k { C::new(T::one(), T::zero()) } else { C::new(T::zero(), T::zero()) };
                acc += (g[(j, k)] - target).modulus_squared();
            }
        }
        acc.sqrt()
    }
}

type Builder<T> = dyn Fn(usize) -> Result<DenseMatrix<T>> + Send + Sync;

/// Deterministic rule `n -> A_n` together with a label.
#[derive(Clone)]
pub struct MatrixSeq<T: Real> {
    label: String,
    builder: Arc<Builder<T>>,
}

impl<T: Real> fmt::Debug for MatrixSeq<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSeq").field("label", &self.label).finish()
    }
}

/// Pointwise-in-`n` operation on matrix sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeqOp<T> {
    Add,
    Sub,
    Mul,
    Adjoint,
    Scale(C<T>),
}

impl<T: Real> MatrixSeq<T> {
    pub fn new(
        label: impl Into<String>,
        builder: impl Fn(usize) -> Result<DenseMatrix<T>> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), builder: Arc::new(builder) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Evaluates `A_n`, checking that the builder honours the requested size.
    pub fn eval(&self, n: usize) -> Result<DenseMatrix<T>> {
        if n == 0 {
            return Err(GltError::ZeroDimension);
        }
        let m = (self.builder)(n)?;
        if m.dim() != n {
            return Err(GltError::DimensionMismatch { left: m.dim(), right: n });
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self::new("I", |n| Ok(DenseMatrix::identity(n)))
    }

    pub fn zeros() -> Self {
        Self::new("O", |n| Ok(DenseMatrix::zeros(n)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({} + {})", a.label, b.label), move |n| a.eval(n)?.add(&b.eval(n)?))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({} - {})", a.label, b.label), move |n| a.eval(n)?.sub(&b.eval(n)?))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({} * {})", a.label, b.label), move |n| a.eval(n)?.mul(&b.eval(n)?))
    }

    pub fn adjoint(&self) -> Self {
        let a = self.clone();
        Self::new(format!("{}*", a.label), move |n| Ok(a.eval(n)?.adjoint()))
    }

    pub fn scale(&self, c: C<T>) -> Self {
        let a = self.clone();
        Self::new(format!("({} {})", c, a.label), move |n| a.eval(n)?.scale(c))
    }

    /// Applies `op` to `operands`: binary ops take two, unary ops one.
    pub fn apply(op: SeqOp<T>, operands: &[&MatrixSeq<T>]) -> Result<Self> {
        let arity = match op {
            SeqOp::Add | SeqOp::Sub | SeqOp::Mul => 2,
            SeqOp::Adjoint | SeqOp::Scale(_) => 1,
        };
        if operands.len() != arity {
            return Err(GltError::Invalid(format!(
                "{op:?} expects {arity} operand(s), got {}",
                operands.len()
            )));
        }
        Ok(match op {
            SeqOp::Add => operands[0].add(operands[1]),
            SeqOp::Sub => operands[0].sub(operands[1]),
            SeqOp::Mul => operands[0].mul(operands[1]),
            SeqOp::Adjoint => operands[0].adjoint(),
            SeqOp::Scale(c) => operands[0].scale(c),
        })
    }
}
