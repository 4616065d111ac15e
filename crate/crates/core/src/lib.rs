//! Numerical laboratory for the parabolic Anderson model on `Z^d` whose
//! potential is a single randomly moving catalyst (`gamma > 0`) or trap
//! (`gamma < 0`).
//!
//! The crate is organised by method:
//!
//! * [`lattice`] evaluates transition probabilities, Green's functions and
//!   resolvent kernels of continuous-time lattice walks.
//! * [`trap`] holds closed-form limits and asymptotes for the trap regime.
//! * [`mc`] estimates annealed moments from Feynman-Kac path functionals.
//! * [`evolver`] integrates the moment equations on truncated boxes.
//! * [`spectral`] computes Lyapunov exponents and principal eigenfunctions.
//! * [`verify`] reproduces the acceptance table used by the CLI and tests.

pub mod error;
pub mod evolver;
pub mod lattice;
pub mod mc;
pub mod model;
pub mod quad;
pub mod spectral;
pub mod trap;
pub mod verify;

pub use error::{PamError, Result};
pub use lattice::{KernelAccuracy, LatticePoint, WalkParams};
pub use model::ModelParams;

pub(crate) mod par;
