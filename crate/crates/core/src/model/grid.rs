use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform radial grid `r_min, r_min + h, ..., r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min >= 0.0 && r_min.is_finite()) {
            return Err(Error::Domain(format!("grid r_min = {r_min} must be >= 0")));
        }
        if !(r_max > r_min && r_max.is_finite()) {
            return Err(Error::Domain(format!(
                "grid r_max = {r_max} must exceed r_min"
            )));
        }
        if n_points < 2 {
            return Err(Error::Domain("grid needs at least 2 points".into()));
        }
        Ok(GridSpec {
            r_min,
            r_max,
            n_points,
        })
    }

    /// Grid starting at the origin with step `h`, extended to cover `r_max`.
    pub fn from_step(r_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("step h = {h} must be > 0")));
        }
        let steps = (r_max / h).round().max(1.0) as usize;
        GridSpec::new(0.0, steps as f64 * h, steps + 1)
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.r_max
        } else {
            self.r_min + i as f64 * self.spacing()
        }
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.radius(i))
    }

    /// Indices of grid points within `delta` of a zero `nπ/k` of `sin(kr)`.
    pub fn near_nodes(&self, k: f64, delta: f64) -> Vec<usize> {
        (0..self.n_points)
            .filter(|&i| node_distance(k, self.radius(i)) < delta)
            .collect()
    }
}

/// Distance from `r` to the nearest zero of `sin(kr)` (including `r = 0`).
pub fn node_distance(k: f64, r: f64) -> f64 {
    let spacing = PI / k;
    (r - (r / spacing).round() * spacing).abs()
}

/// Which quantity a [`SampledFunction`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Potential,
    Modulation,
    Chi,
    LogDerivative,
    /// `|χ″ + (k² − V)χ| / max(k²|χ|, |χ″|)`.
    Residual,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::Potential => "V",
            Quantity::Modulation => "f",
            Quantity::Chi => "chi",
            Quantity::LogDerivative => "C",
            Quantity::Residual => "residual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub quantity: Quantity,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, quantity: Quantity, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Domain(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n_points
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "{} at grid point {i}",
                quantity.label()
            )));
        }
        Ok(SampledFunction {
            grid,
            quantity,
            values,
        })
    }

    pub fn radii(&self) -> Vec<f64> {
        self.grid.radii().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
