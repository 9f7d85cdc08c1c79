use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("admissibility violation: {value} would occur {count} times, order is {k}")]
    Admissibility { value: f64, count: usize, k: usize },
    #[error("point {0} lies outside the domain")]
    OutOfDomain(f64),
    #[error("index {index} outside {lo}..{hi}")]
    IndexOutOfRange { index: isize, lo: isize, hi: isize },
    #[error("invalid order k = {0}")]
    InvalidOrder(usize),
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),
    #[error("operands live on different partitions")]
    PartitionMismatch,
    #[error("periodic moduli differ: {0} vs {1}")]
    ModulusMismatch(usize, usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("factorization failed at pivot {0}")]
    Factorization(usize),
    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("chain is not nested at position {0}")]
    NotNested(usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("orthogonality loss {0:e} exceeds tolerance")]
    OrthogonalityLoss(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
