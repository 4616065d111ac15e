use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};

/// Default cap on the number of sites of a box.
pub const SITE_BUDGET: usize = 1 << 24;
/// Default cap on the product dimension `p d` of a full field.
pub const MAX_PRODUCT_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Absorbing,
}

/// The cube `{-R..R}^{pd}`; sites are stored row-major, last coordinate fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub p: usize,
    pub d: usize,
    pub radius: usize,
    pub boundary: Boundary,
}

impl BoxDomain {
    pub fn new(p: usize, d: usize, radius: usize) -> Result<Self> {
        Self::with_budget(p, d, radius, SITE_BUDGET, MAX_PRODUCT_DIM)
    }

    pub fn with_budget(p: usize, d: usize, radius: usize, budget: usize, max_dim: usize) -> Result<Self> {
        if p == 0 || d == 0 {
            return Err(PamError::Domain("p and d must be at least 1".into()));
        }
        if radius == 0 {
            return Err(PamError::Domain("box radius must be positive".into()));
        }
        if p * d > max_dim {
            return Err(PamError::Dimension(format!(
                "product dimension p d = {} exceeds the cap {max_dim}",
                p * d
            )));
        }
        let side = 2 * radius + 1;
        let sites = (side as f64).powi((p * d) as i32);
        if sites > budget as f64 {
            return Err(PamError::Budget {
                sites: sites.min(usize::MAX as f64) as usize,
                budget,
            });
        }
        Ok(Self {
            p,
            d,
            radius,
            boundary: Boundary::Absorbing,
        })
    }

    /// Number of coordinates, `p d`.
    pub fn dims(&self) -> usize {
        self.p * self.d
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dims() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index stride of coordinate `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.side().pow((self.dims() - 1 - axis) as u32)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.iter().all(|c| c.unsigned_abs() as usize <= self.radius)
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.dims() || !self.contains(x) {
            return None;
        }
        let r = self.radius as i64;
        let side = self.side();
        Some(x.iter().fold(0usize, |acc, &c| acc * side + (c + r) as usize))
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut x = vec![0i64; self.dims()];
        for a in (0..self.dims()).rev() {
            x[a] = (idx % side) as i64 - self.radius as i64;
            idx /= side;
        }
        x
    }

    /// Index of the all-zero site.
    pub fn origin_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    /// Sup-distance of a site from the boundary layer (0 on the outer shell).
    pub fn depth(&self, x: &[i64]) -> usize {
        let m = x.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0);
        self.radius - m
    }

    /// Same box with another radius.
    pub fn resized(&self, radius: usize) -> Result<Self> {
        Self::new(self.p, self.d, radius)
    }
}

/// A real function on a [`BoxDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub domain: BoxDomain,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(domain: BoxDomain) -> Self {
        Self::constant(domain, 0.0)
    }

    pub fn constant(domain: BoxDomain, c: f64) -> Self {
        Self {
            domain,
            values: vec![c; domain.len()],
        }
    }

    pub fn delta(domain: BoxDomain, x: &[i64]) -> Result<Self> {
        let idx = domain
            .index(x)
            .ok_or_else(|| PamError::Domain(format!("site {x:?} is outside the box")))?;
        let mut f = Self::zeros(domain);
        f.values[idx] = 1.0;
        Ok(f)
    }

    pub fn from_fn(domain: BoxDomain, f: impl Fn(&[i64]) -> f64) -> Self {
        let values = (0..domain.len()).map(|i| f(&domain.coords(i))).collect();
        Self { domain, values }
    }

    pub fn from_values(domain: BoxDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(PamError::Dimension(format!(
                "{} values for a box of {} sites",
                values.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn get(&self, x: &[i64]) -> Option<f64> {
        self.domain.index(x).map(|i| self.values[i])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn dot(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Copy onto another box, dropping sites outside it and padding with zeros.
    pub fn embed(&self, domain: BoxDomain) -> Result<Field> {
        if domain.p != self.domain.p || domain.d != self.domain.d {
            return Err(PamError::Dimension("boxes differ in p or d".into()));
        }
        let mut out = Field::zeros(domain);
        for (i, &v) in self.values.iter().enumerate() {
            if let Some(j) = domain.index(&self.domain.coords(i)) {
                out.values[j] = v;
            }
        }
        Ok(out)
    }

    /// Mass within `shells` layers of the boundary divided by total mass.
    pub fn boundary_fraction(&self, shells: usize) -> f64 {
        let total: f64 = self.values.iter().map(|v| v.abs()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            if *v != 0.0 && self.domain.depth(&self.domain.coords(i)) < shells {
                edge += v.abs();
            }
        }
        edge / total
    }
}
