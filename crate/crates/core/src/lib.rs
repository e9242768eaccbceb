//! Numerical toolkit for Generalized Locally Toeplitz (GLT) matrix sequences.
//!
//! * [`structured`]: Toeplitz, sampling-diagonal, locally Toeplitz and GLT builders.
//! * [`symbol`]: separable symbols on `[0,1] × [-π,π]` and their `L^p` norms.
//! * [`acs`]: `P(A_n)`, the a.c.s. pseudometric, `q_w` and `q_{w^p}` estimators.
//! * [`cluster`]: Type 2 weak/strong singular-value cluster classification.
//! * [`distribution`]: singular-value distribution checks and the `L^p` isometry.
//! * [`precond`]: unitary-algebra projections, circulant preconditioners and
//!   the Korovkin-type harness.
//!
//! Everything is generic over the real field `T: Real` (`f32` or `f64`);
//! the `*64` aliases below fix `T = f64`.

// NaN-rejecting `!(x <= y)` guards are intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acs;
pub mod cluster;
pub mod distribution;
mod error;
pub mod expr;
pub mod matrix;
pub mod plotdata;
pub mod precond;
pub mod scalar;
pub mod structured;
pub mod symbol;
pub mod trend;
pub mod trigpoly;

pub use error::{GltError, Result};
pub use expr::ScalarFunc;
pub use matrix::{DenseMatrix, MatrixSeq, SeqOp};
pub use scalar::{phi_p_factor, Exponent, Real, C};
pub use symbol::{SymbolExpr, SymbolOp};
pub use trigpoly::TrigPoly;

pub type DenseMatrix64 = DenseMatrix<f64>;
pub type DenseMatrix32 = DenseMatrix<f32>;
pub type MatrixSeq64 = MatrixSeq<f64>;
pub type MatrixSeq32 = MatrixSeq<f32>;
pub type TrigPoly64 = TrigPoly<f64>;
pub type SymbolExpr64 = SymbolExpr<f64>;
pub type SingularProfile64 = acs::SingularProfile<f64>;
pub type SeminormEstimate64 = acs::SeminormEstimate<f64>;
pub type ClusterReport64 = cluster::ClusterReport<f64>;
pub type DistributionReport64 = distribution::DistributionReport<f64>;
pub type PrecondReport64 = precond::PrecondReport<f64>;
pub type Complex64 = C<f64>;
