//! Deterministic integration of the moment equations `m' = H^p m` on
//! truncated boxes of `Z^{pd}` with absorbing boundary.

mod domain;
mod generator;
pub mod io;
mod moments;
mod rk;

pub use domain::{Boundary, BoxDomain, Field, MAX_PRODUCT_DIM, SITE_BUDGET};
pub use generator::{apply_hamiltonian, Padded, Stencil};
pub use moments::{
    catalyst_interior_radius, catalyst_margin, catalyst_moment_at, catalyst_moment_field,
    catalyst_moment_series, default_radius, evolve_field, evolve_series, growth_rate_estimate,
    homogeneous_mass_series, localized_mass_series, localized_total_mass, EvolveReport,
    LEAK_SHELLS, LEAK_THRESHOLD,
};
pub use rk::{integrate, max_step, LinearFlow, StepStats};
