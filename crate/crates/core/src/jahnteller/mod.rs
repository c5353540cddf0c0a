//! Linear + quadratic E⊗ε Jahn-Teller model.
//!
//! The electronic part is `Δ𝓔 (cos α σ_z + sin α σ_x)` in the diabatic basis
//! `{|0⟩, |1⟩}`, with
//!
//! ```text
//! Δ𝓔 e^{iα} = kr e^{iθ} + ½ g r² e^{−2iθ}
//! ```
//!
//! so that `|+(α)⟩ = (cos α/2, sin α/2)` and `|−(α)⟩ = (−sin α/2, cos α/2)`
//! are its exact eigenvectors and `U = exp(−iασ_y/2)` diagonalizes it.

mod model;
mod nodal;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::{
    coupling, coupling_at, dalpha_dr, dalpha_dtheta, degeneracy_points, jt_eigenvectors,
    jt_electronic_hamiltonian, jt_point_data, node_angles_analytic, Chart, DegeneracyPoint, JTPointData,
    JahnTellerField, ALPHA_UNDEFINED_TOL,
};
pub use nodal::{nodal_map, ring_loop, NodalMap, NodalRow, NodeSource, RingLoop, CIRCLE_CLEARANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JtError {
    #[error("InvalidParams: k = {k}, g = {g}; need k >= 0, g >= 0, not both zero")]
    InvalidParams { k: f64, g: f64 },
    #[error("InvalidRadius: r = {r}")]
    InvalidRadius { r: f64 },
    #[error("AlphaUndefined: delta_E = {delta_e:e} at (r = {r}, theta = {theta})")]
    AlphaUndefined { r: f64, theta: f64, delta_e: f64 },
    #[error("OnDegeneracyCircle: r = {r} lies on r = 2k/g = {circle} (k = {k}, g = {g})")]
    OnDegeneracyCircle { r: f64, circle: f64, k: f64, g: f64 },
    #[error("AnalyticMismatch: r = {r}, numeric nodes {numeric:?} vs analytic {analytic:?}")]
    AnalyticMismatch {
        r: f64,
        numeric: Vec<f64>,
        analytic: Vec<f64>,
    },
    #[error("EmptyGrid: {what}")]
    EmptyGrid { what: &'static str },
}

/// Linear (`k`) and quadratic (`g`) vibronic couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JTParams {
    k: f64,
    g: f64,
}

impl JTParams {
    pub fn new(k: f64, g: f64) -> Result<Self, JtError> {
        if !(k.is_finite() && g.is_finite() && k >= 0.0 && g >= 0.0) || (k == 0.0 && g == 0.0) {
            return Err(JtError::InvalidParams { k, g });
        }
        Ok(Self { k, g })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `2k/g` when both couplings are present.
    pub fn degeneracy_circle(&self) -> Option<f64> {
        (self.k > 0.0 && self.g > 0.0).then(|| 2.0 * self.k / self.g)
    }
}

impl fmt::Display for JTParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k = {}, g = {}", self.k, self.g)
    }
}

/// The two Born-Oppenheimer sheets `E_∓ = ½r² ∓ Δ𝓔`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Lower,
    Upper,
}

impl Band {
    pub fn index(self) -> usize {
        match self {
            Band::Lower => 0,
            Band::Upper => 1,
        }
    }

    /// Sign of `Δ𝓔` in the band energy.
    pub fn sign(self) -> f64 {
        match self {
            Band::Lower => -1.0,
            Band::Upper => 1.0,
        }
    }
}
