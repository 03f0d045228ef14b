//! # young-lab
//!
//! A numerical laboratory for the sharp form of Young's convolution
//! inequality on ℝᵈ,
//!
//! ```text
//! |⟨f*g, h⟩| ≤ A_{p,q,r}^d ‖f‖_p ‖g‖_q ‖h‖_r,   1/p + 1/q + 1/r = 2,
//! ```
//!
//! whose extremizers are compatible Gaussian triples. The crate computes the
//! sharp constants, evaluates deficits of sampled triples, performs symmetric
//! decreasing rearrangement and level-set interval fitting, recovers linear
//! structure from approximate homomorphisms, and assembles these pieces into
//! an extremizer-recovery pipeline that turns a near-extremizing triple into
//! a fitted Gaussian triple plus distance diagnostics.
//!
//! Start with [`exponents::validate_triple`] and [`grid::deficit`], or read
//! the guide chapters under [`guide`] (the same text builds as an mdbook from
//! `book/`).

pub mod constants;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod homomorphism;
pub mod interval;
pub mod normalization;
pub mod oracles;
pub mod rearrangement;

pub use error::{Error, Result};
pub use exponents::{validate_triple, ExponentTriple};
pub use grid::{convolve, deficit, lp_norm, trilinear_form, Grid, SampledFunction, ValueKind};
