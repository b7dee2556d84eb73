//! Shared numerical tolerances.

/// Structural validation of states and channels (Hermiticity, PSD, trace).
pub const TOL_STRUCT: f64 = 1e-9;

/// Accuracy target of eigen-decompositions.
pub const TOL_EIG: f64 = 1e-10;

/// Eigenvalues below this are treated as exact zeros (supports, pseudo-inverses).
pub const TOL_RANK: f64 = 1e-12;

/// Regularization added before inverting possibly singular operators.
pub const REGULARIZATION: f64 = 1e-10;
