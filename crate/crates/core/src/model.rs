use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::lattice::WalkParams;

/// Parameters of the model: lattice dimension, diffusion constant of the
/// reactant, jump rate of the catalyst, coupling constant and moment order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub kappa: f64,
    pub rho: f64,
    pub gamma: f64,
    pub p: usize,
}

impl ModelParams {
    pub fn new(d: usize, kappa: f64, rho: f64, gamma: f64, p: usize) -> Result<Self> {
        let params = Self {
            d,
            kappa,
            rho,
            gamma,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(PamError::Domain("dimension d must be at least 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(PamError::Domain(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(PamError::Domain(format!("rho must be positive, got {}", self.rho)));
        }
        // the hard trap gamma = -inf is a limit, not a parameter
        if !self.gamma.is_finite() {
            return Err(PamError::Domain(format!("gamma must be finite, got {}", self.gamma)));
        }
        if self.p == 0 {
            return Err(PamError::Domain("moment order p must be at least 1".into()));
        }
        Ok(())
    }

    /// Ratio `a = kappa / rho`.
    pub fn a(&self) -> f64 {
        self.kappa / self.rho
    }

    pub fn merged_rate(&self) -> f64 {
        self.kappa + self.rho
    }

    /// Walk with generator `(kappa + rho) Delta`: the difference of reactant and trap.
    pub fn merged_walk(&self) -> WalkParams {
        WalkParams {
            d: self.d,
            kappa: self.merged_rate(),
        }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }

    pub fn with_p(&self, p: usize) -> Self {
        Self { p, ..*self }
    }

    /// `4d(kappa p + rho)`: bound on the spectral radius of the generator `A^p`.
    pub fn generator_bound(&self) -> f64 {
        4.0 * self.d as f64 * (self.kappa * self.p as f64 + self.rho)
    }
}
