//! Exact and numerical laboratory for the hungry periodic discrete Toda
//! lattice.
//!
//! The crate evolves the lattice in exact rational arithmetic, builds the
//! associated Lax matrices and spectral polynomial, verifies the conserved
//! structure, evaluates eigenvector ratios on the spectral curve in floating
//! point, reconstructs genus-1 trajectories through Riemann theta functions,
//! and runs the depth-reduction experiments that embed the depth-(M-1) system
//! inside the depth-M one.
//!
//! Organization:
//! - [`exact`]: rationals, Laurent polynomials, bivariate polynomials,
//!   Laurent matrices, exact determinants.
//! - [`lattice`]: the state type and its exact time evolution.
//! - [`spectral`]: Lax matrices, conjugation maps, the spectral polynomial
//!   and its special points, invariant reports, the depth-2 diagnostics.
//! - [`curve`]: floating-point work on the spectral curve (fibers,
//!   eigenvector chains, boundary limits, divisor extraction for N = 2).
//! - [`theta`]: genus-1 periods, Abel maps, Riemann theta, tau grids, and
//!   trajectory reconstruction for N = 2, M = 1.
//! - [`reduction`]: depth-reduction (zeta) experiments.
//! - [`state_io`]: the JSON state-file format.

pub mod curve;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod reduction;
pub mod spectral;
pub mod state_io;
pub mod theta;

pub use error::{
    AlgebraError, CurveError, LatticeError, ReductionError, SpectralError, StateFileError,
    ThetaError, Violation,
};
pub use lattice::{evolve, TodaState};
