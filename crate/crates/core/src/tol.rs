//! Numerical tolerances shared by the library and its tests.
//!
//! Every threshold the crate checks against lives here so that validation
//! code and test assertions cannot drift apart.

/// Maximum entrywise deviation `|m - m†|` accepted for a Hermitian matrix.
pub const HERMITIAN: f64 = 1e-10;

/// Maximum `|Tr ρ - 1|` accepted for a density matrix.
pub const UNIT_TRACE: f64 = 1e-10;

/// Most negative eigenvalue accepted for a positive semidefinite matrix.
pub const PSD_FLOOR: f64 = -1e-9;

/// Moment-matching tolerance for eigenvalue sums (`Σλ = Tr m`, `Σλ² = Tr m²`).
pub const EIG_MOMENTS: f64 = 1e-8;

/// Jacobi sweeps stop once the off-diagonal Frobenius mass drops below this
/// (scaled by `max(1, ‖m‖_F)`).
pub const JACOBI_OFF_DIAG: f64 = 1e-14;

/// Hard cap on cyclic Jacobi sweeps. Small Hermitian matrices converge in
/// fewer than ten.
pub const JACOBI_MAX_SWEEPS: usize = 64;

/// Completeness `‖Σ K†K - I‖_max` of a Kraus set.
pub const KRAUS_COMPLETENESS: f64 = 1e-10;

/// Unitarity `‖U†U - I‖_max` of the mixing transform.
pub const UNITARITY: f64 = 1e-12;

/// Below this `q` the two decay channels are degenerate and the mixing
/// transform is the identity.
pub const DEGENERATE_Q: f64 = 1e-12;

/// `G±` is evaluated through series expansions of `cosh x` and `sinh x / x`
/// when `|x| = |d± t / 2|` falls below this.
pub const SERIES_SWITCH: f64 = 1e-4;

/// Below this value of `1 - G²` the derivative of `sqrt(1 - G²)` is replaced
/// by its small-time limit.
pub const SQRT_GUARD: f64 = 1e-12;

/// Minimum PPT eigenvalue treated as non-negative.
pub const PPT_FLOOR: f64 = -1e-10;

/// `X(τ)` below this is treated as "no evolution" and the QSL time is zero.
pub const QSL_SPEED_FLOOR: f64 = 1e-12;

/// Relative change between successive Simpson refinements accepted as
/// converged.
pub const QUADRATURE_REL: f64 = 1e-6;

/// Absolute floor for the Simpson convergence test, so identically zero
/// integrands terminate.
pub const QUADRATURE_ABS: f64 = 1e-14;

/// Maximum number of Simpson intervals before giving up.
pub const QUADRATURE_MAX_INTERVALS: usize = 1 << 14;

/// Minimum number of Simpson intervals accepted.
pub const QUADRATURE_MIN_INTERVALS: usize = 32;

/// Bound-validity slack: `τ_QSL ≤ τ + QSL_BOUND_SLACK`.
pub const QSL_BOUND_SLACK: f64 = 1e-9;

/// Largest RK4 step used by the amplitude oracle.
pub const ODE_MAX_STEP: f64 = 1e-3;
