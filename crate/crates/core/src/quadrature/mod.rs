//! Integration over a homogeneous group against Haar measure, which is
//! Lebesgue measure in the global chart.
//!
//! Every integral is taken in polar form around the origin. A point is
//! written `x = D_{r/|w|}(w)` with `w` a Euclidean unit vector and `r = |x|`;
//! then `dx = r^{Q-1} dr J(w) dS(w)` with `dS` the Euclidean surface
//! measure and `J(w) = (sum nu_i w_i^2) |w|^{-Q}`.

mod cartesian;
mod directions;
pub mod radial;
pub mod rules;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Origin, Result};

pub use cartesian::{
    integrate_cartesian, polar_consistency_check, sphere_measure, Envelope, PolarConsistency,
};
pub use directions::{sphere_integral, unit_sphere_area};
pub(crate) use directions::DirectionRule;
pub use radial::{integrate_radial, integrate_radial_with, RadialIntegral, RadialOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    MonteCarlo,
    TensorGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Monte Carlo sample count (directions, or direction pairs for double
    /// integrals).
    pub samples: usize,
    /// Angular resolution of the tensor grid.
    pub nodes_per_axis: usize,
    /// Truncation radius; chosen from the envelope when absent.
    pub r_max: Option<f64>,
    pub inner_cutoff: f64,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            scheme: Scheme::MonteCarlo,
            samples: 16_384,
            nodes_per_axis: 16,
            r_max: None,
            inner_cutoff: 0.0,
            seed: 20_240_601,
        }
    }
}

impl QuadratureSpec {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn tensor_grid(nodes_per_axis: usize) -> Self {
        Self {
            scheme: Scheme::TensorGrid,
            nodes_per_axis,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let origin = Origin::new("quadrature", "QuadratureSpec");
        if self.samples < 1 {
            return Err(Error::parameter(origin, "samples must be at least 1"));
        }
        if self.nodes_per_axis < 2 {
            return Err(Error::parameter(origin, "nodes_per_axis must be at least 2"));
        }
        if !(self.inner_cutoff >= 0.0) || !self.inner_cutoff.is_finite() {
            return Err(Error::parameter(
                origin,
                format!("inner_cutoff must be finite and >= 0, got {}", self.inner_cutoff),
            ));
        }
        if let Some(r) = self.r_max {
            if !(r > self.inner_cutoff) {
                return Err(Error::parameter(
                    origin,
                    format!("r_max = {r} must exceed inner_cutoff = {}", self.inner_cutoff),
                ));
            }
        }
        Ok(())
    }

    /// Stable text key used for caches.
    pub(crate) fn cache_key(&self) -> String {
        format!(
            "{:?}/{}/{}/{:?}/{:e}/{}",
            self.scheme,
            self.samples,
            self.nodes_per_axis,
            self.r_max.map(f64::to_bits),
            self.inner_cutoff,
            self.seed
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub stderr: f64,
    pub samples_used: usize,
}

impl IntegralResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            samples_used: 0,
        }
    }
}
