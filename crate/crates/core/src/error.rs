use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GltError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("non-finite value {value} from `{what}` at {location}")]
    NonFiniteValue { what: String, location: String, value: String },
    #[error("n = {n} is smaller than the block count m = {m}")]
    NoCompleteBlock { n: usize, m: usize },
    #[error("block count m must be at least 1")]
    ZeroBlockCount,
    #[error("empty term list")]
    EmptyTerms,
    #[error("exponent p = {0} must satisfy p >= 1")]
    InvalidExponent(f64),
    #[error("quadrature grid {got} below minimum {min}")]
    GridTooCoarse { got: usize, min: usize },
    #[error("dimension grid must be strictly increasing with at least {min} entries")]
    InvalidDims { min: usize },
    #[error("cutoff fraction {0} outside [0, 1/2]")]
    InvalidDelta(f64),
    #[error("threshold {0} must be positive")]
    InvalidEps(f64),
    #[error("matrix is not unitary: ||U*U - I||_F = {residual}")]
    NotUnitary { residual: f64 },
    #[error("singular value decomposition did not converge (n = {n})")]
    SvdNonConvergence { n: usize },
    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid symbol description: {0}")]
    SymbolJson(String),
    #[error("generator `{name}` is not norm bounded: max spectral norm {observed} exceeds declared bound {bound} (Korovkin-type conclusions need not hold for unbounded sequences)")]
    Unbounded { name: String, observed: f64, bound: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = GltError> = std::result::Result<T, E>;
