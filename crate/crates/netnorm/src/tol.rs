//! Numeric tolerances shared across the crate, in `f64`; generic code
//! converts through `Scalar::c`. Written for `f64` precision.

/// Max allowed deviation from conjugate symmetry on input matrices.
pub const HERM: f64 = 1e-10;
/// Eigenvalue floor for PSD checks (absolute).
pub const PSD_FLOOR: f64 = -1e-9;
/// Allowed deviation of a density-matrix trace from 1.
pub const TRACE: f64 = 1e-9;
/// POVM-sum slack: largest eigenvalue of ΣX may exceed 1 by this much.
pub const POVM_SUM: f64 = 1e-8;
/// Both-sided slack for exact-POVM checks (ΣX = I).
pub const POVM_EQ: f64 = 1e-8;
/// Operator norms below this count as the zero operator.
pub const Y_ZERO: f64 = 1e-12;
/// Allowed drift when a decomposition is rewritten (normalization).
pub const REBUILD: f64 = 1e-9;
/// Witness re-evaluation must match the reported value this closely.
pub const WITNESS_CERT: f64 = 1e-8;
