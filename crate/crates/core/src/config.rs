//! Numerical tolerances. Every report embeds the block it was produced with.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute and relative tolerance of the Runge–Kutta integrator.
    pub ode_atol: f64,
    pub ode_rtol: f64,
    /// Frobenius truncation: number of terms and admissible tail.
    pub series_terms: usize,
    pub series_tail: f64,
    /// Cap on the z-jet order.
    pub max_jet_order: usize,
    /// Absolute eigenvalue tolerance, scaled by `1 + |lambda|`.
    pub root_tol: f64,
    /// Allowed `|W(theta, phi) - 1|` before normalization is declared failed.
    pub wronskian_tol: f64,
    /// Pole exclusion radius factor: `r = factor * (1 + |lambda|)`.
    pub pole_exclusion: f64,
    /// L² ladder: levels `eps = b 2^-m`, divergence exponent and stabilization.
    pub ladder_levels: usize,
    pub divergent_exponent: f64,
    pub ladder_stabilization: f64,
    /// Half-width of the band around the critical moment exponent `-1`.
    pub moment_margin: f64,
    /// Ceiling for the weighted L¹ norm of the perturbation.
    pub weighted_ceiling: f64,
    /// Pass/fail thresholds for identity checks run from the command line.
    pub identity_tol: f64,
    pub trace_tol: f64,
    pub kernel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_atol: 1e-12,
            ode_rtol: 1e-10,
            series_terms: 40,
            series_tail: 1e-12,
            max_jet_order: 6,
            root_tol: 1e-12,
            wronskian_tol: 1e-6,
            pole_exclusion: 1e-4,
            ladder_levels: 40,
            divergent_exponent: 0.1,
            ladder_stabilization: 1e-6,
            moment_margin: 0.25,
            weighted_ceiling: crate::problem::DEFAULT_WEIGHTED_CEILING,
            identity_tol: 1e-5,
            trace_tol: 1e-4,
            kernel_tol: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))
    }
}
