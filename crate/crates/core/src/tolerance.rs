//! Numerical tolerances used across the crate, kept in one place so tests and
//! implementations agree on what "equal" and "physical" mean.

/// Maximum allowed relative asymmetry of a covariance matrix.
pub const SYMMETRY: f64 = 1e-12;

/// A covariance matrix is physical when every symplectic eigenvalue is at
/// least `1 - PHYSICALITY`.
pub const PHYSICALITY: f64 = 1e-9;

/// A state is pure when every symplectic eigenvalue is within `PURITY` of 1.
pub const PURITY: f64 = 1e-9;

/// Detection weights must satisfy `sum(lambda_i^2) = 1` to this tolerance.
pub const WEIGHT_NORMALIZATION: f64 = 1e-12;

/// Paired moduli of the symplectic spectrum may differ by at most this much.
pub const EIGENVALUE_PAIRING: f64 = 1e-9;

/// Arguments of the bosonic entropic function below this cutoff evaluate to 0
/// (the continuous x -> 0 limit).
pub const ENTROPY_ARGUMENT_CUTOFF: f64 = 1e-12;
