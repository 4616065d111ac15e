//! Lyapunov exponents `lambda_p` and principal eigenfunctions of `H^p`, by
//! three routes that check each other: the scalar resolvent root (`p = 1`),
//! the resolvent operator `T_lambda` (`p = 2`) and power iteration on boxes.

mod asymptotics;
mod duality;
mod power;

pub use asymptotics::{asymptotics_check, central_sites, t_star, AsymptoticsReport};
pub use duality::{
    lambda1_root, lambda2_via_duality, merged_green_at_origin, t2_operator_top, t_operator_top, LAMBDA_TOL,
    ROOT_KERNEL_TOL,
};
pub use power::{potential_support_indicator, top_eigenpair, top_eigenpair_from, SpectralRegime, SpectralSolution};
