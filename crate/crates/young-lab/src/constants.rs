//! Recorded empirical constants.
//!
//! The recovery contracts are existence statements with unspecified
//! constants; the implementation records the constants it actually achieves
//! on standard instances. Tests treat a regression beyond 2x the recorded
//! value as a failure.

/// Residual threshold factor C(d) for linear recovery: the reported
/// residual test is `|f(x) − L(x)| > C(d)·τ`. Index by dimension − 1.
pub const LINEAR_RESIDUAL_FACTOR: [f64; 3] = [8.0, 8.0, 8.0];

/// Residual threshold factor for character recovery,
/// `|f(x) e^{−L(x)} − 1| > C·τ`.
pub const CHARACTER_RESIDUAL_FACTOR: f64 = 8.0;

/// Quadruple cancellation constant: for rich x₁−x₂+x₃−x₄ = 0 inside the
/// eighth-ball, `|f(x₁)−f(x₂)+f(x₃)−f(x₄)| ≤ QUADRUPLE_FACTOR·τ`.
pub const QUADRUPLE_FACTOR: f64 = 50.0;

/// Superlevel-measure comparison constant: if ‖f^⋆ − G‖_p ≤ δ for a
/// Gaussian reference G, then sup_s ||F_s| − |G_s|| ≤ C·δ^{p/(p+1)} over
/// compact threshold ranges. Recorded on the standard perturbed-Gaussian
/// instance.
pub const LEVEL_MEASURE_FACTOR: f64 = 4.0;
