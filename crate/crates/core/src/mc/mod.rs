//! Feynman-Kac Monte Carlo for annealed moments.
//!
//! Every estimator averages an exponential of a path functional (a local time
//! or a collision time) over independent replicas, replica `k` drawing from
//! stream `k` of the generator keyed by the seed.

mod estimators;
mod path;
mod rng;

pub use estimators::{
    estimate_catalyst_moment, estimate_catalyst_moment_with, estimate_homogeneous_mass,
    estimate_localized_mass, McEstimate, CATALYST_CAP, MIN_ESS,
};
pub use path::{local_time_at, pair_occupation_time, sample_path, PathSample};
pub use rng::RngStream;
