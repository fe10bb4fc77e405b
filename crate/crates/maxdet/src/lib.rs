//! Lower bounds for maximal determinants of {±1} matrices.
//!
//! The library borders a Hadamard matrix of order `h` with `d` random rows
//! and columns, controls the Schur complement of the border probabilistically,
//! and evaluates the resulting closed-form lower bounds on the normalized
//! maximal determinant `Dbar(n) = D(n)/n^{n/2}`.
//!
//! Modules:
//! - [`exactmath`]: big-integer binomials and the exact moment formulas.
//! - [`hadamard`]: Paley/Sylvester/Kronecker constructions and the order registry.
//! - [`construction`]: the randomized bordering construction with exact determinants.
//! - [`bounds`]: the closed-form lower bounds and parameter optimization.
//! - [`verify`]: enumeration and Monte Carlo oracles for the formulas above.

pub mod bounds;
pub mod construction;
pub mod exactmath;
pub mod hadamard;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("h must be a multiple of 4 with h >= 4, got {0}")]
    InvalidHadamardOrder(u64),
    #[error("range too small: {0}")]
    RangeTooSmall(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("imported order {0} is not 1, 2, or a multiple of 4")]
    BadImportedOrder(u64),
    #[error("registry horizon too small: no order above {0}")]
    RegistryHorizon(f64),
    #[error("order {0} is not in the registry")]
    UnknownOrder(u64),
    #[error("order {0} is imported and has no construction chain")]
    NoConstruction(u64),
    #[error("border width d = {0} out of range {1}")]
    BadBorderWidth(usize, &'static str),
    #[error("lambda must lie in (0, 1), got {0}")]
    BadLambda(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration cap exceeded: h = {0} > {1}")]
    EnumerationCap(u64, u64),
    #[error("matrix parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
