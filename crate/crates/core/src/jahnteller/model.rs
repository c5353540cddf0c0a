use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{JTParams, JtError};
use crate::angle::principal_arg;
use crate::eigenpath::{HamiltonianField, ParameterPoint};

/// `Δ𝓔` at or below this leaves the mixing angle undefined.
pub const ALPHA_UNDEFINED_TOL: f64 = 1e-14;

// Radii this close to 2k/g count as on the degeneracy circle.
const CIRCLE_TOL: f64 = 1e-10;

/// `Δ𝓔 e^{iα} = kr e^{iθ} + ½ g r² e^{−2iθ}`.
pub fn coupling(p: &JTParams, r: f64, theta: f64) -> Complex64 {
    let half_g_r2 = 0.5 * p.g() * r * r;
    Complex64::new(
        p.k() * r * theta.cos() + half_g_r2 * (2.0 * theta).cos(),
        p.k() * r * theta.sin() - half_g_r2 * (2.0 * theta).sin(),
    )
}

/// Same coupling at the Cartesian point `z = x + iy`: `k z + ½ g z̄²`.
pub fn coupling_at(p: &JTParams, z: Complex64) -> Complex64 {
    z * p.k() + z.conj() * z.conj() * (0.5 * p.g())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JTPointData {
    /// Half gap `Δ𝓔 ≥ 0`.
    pub delta_e: f64,
    /// Mixing angle in `(−π, π]`.
    pub alpha: f64,
    /// `(E₋, E₊)` with `E_± = ½r² ± Δ𝓔`.
    pub energies: (f64, f64),
}

pub fn jt_point_data(p: &JTParams, r: f64, theta: f64) -> Result<JTPointData, JtError> {
    if !(r >= 0.0) || !theta.is_finite() {
        return Err(JtError::InvalidRadius { r });
    }
    let f = coupling(p, r, theta);
    let delta_e = f.norm();
    if delta_e <= ALPHA_UNDEFINED_TOL {
        return Err(JtError::AlphaUndefined { r, theta, delta_e });
    }
    let base = 0.5 * r * r;
    Ok(JTPointData {
        delta_e,
        alpha: principal_arg(f.im, f.re),
        energies: (base - delta_e, base + delta_e),
    })
}

/// Electronic Hamiltonian `Δ𝓔 (cos α σ_z + sin α σ_x)`; traceless with
/// eigenvalues `±Δ𝓔`.
pub fn jt_electronic_hamiltonian(p: &JTParams, r: f64, theta: f64) -> Matrix2<f64> {
    hamiltonian_from_coupling(coupling(p, r, theta))
}

fn hamiltonian_from_coupling(f: Complex64) -> Matrix2<f64> {
    Matrix2::new(f.re, f.im, f.im, -f.re)
}

/// `(|−(α)⟩, |+(α)⟩)` in the diabatic basis.
pub fn jt_eigenvectors(alpha: f64) -> (Vector2<f64>, Vector2<f64>) {
    let (s, c) = (0.5 * alpha).sin_cos();
    (Vector2::new(-s, c), Vector2::new(c, s))
}

/// `∂_θ α` at fixed `r`.
pub fn dalpha_dtheta(p: &JTParams, r: f64, theta: f64) -> Result<f64, JtError> {
    let f = coupling(p, r, theta);
    let e1 = Complex64::from_polar(1.0, theta);
    let e2 = Complex64::from_polar(1.0, -2.0 * theta);
    let df = Complex64::i() * (e1 * (p.k() * r) - e2 * (p.g() * r * r));
    log_derivative(f, df, r, theta)
}

/// `∂_r α` at fixed `θ`.
pub fn dalpha_dr(p: &JTParams, r: f64, theta: f64) -> Result<f64, JtError> {
    let f = coupling(p, r, theta);
    let e1 = Complex64::from_polar(1.0, theta);
    let e2 = Complex64::from_polar(1.0, -2.0 * theta);
    let df = e1 * p.k() + e2 * (p.g() * r);
    log_derivative(f, df, r, theta)
}

fn log_derivative(f: Complex64, df: Complex64, r: f64, theta: f64) -> Result<f64, JtError> {
    let n2 = f.norm_sqr();
    if f.norm() <= ALPHA_UNDEFINED_TOL {
        return Err(JtError::AlphaUndefined {
            r,
            theta,
            delta_e: f.norm(),
        });
    }
    Ok((df * f.conj()).im / n2)
}

/// A point of electronic degeneracy; the origin carries no angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyPoint {
    pub r: f64,
    pub theta: Option<f64>,
}

impl DegeneracyPoint {
    pub fn cartesian(&self) -> (f64, f64) {
        match self.theta {
            None => (0.0, 0.0),
            Some(t) => (self.r * t.cos(), self.r * t.sin()),
        }
    }
}

pub fn degeneracy_points(p: &JTParams) -> Vec<DegeneracyPoint> {
    let mut points = vec![DegeneracyPoint { r: 0.0, theta: None }];
    if let Some(rc) = p.degeneracy_circle() {
        points.extend(
            [FRAC_PI_3, PI, 5.0 * FRAC_PI_3]
                .into_iter()
                .map(|t| DegeneracyPoint {
                    r: rc,
                    theta: Some(t),
                }),
        );
    }
    points
}

/// Closed-form angles in `[0, 2π)` where `α = π` on the circle of radius `r`,
/// i.e. where the anchor overlap `cos(α/2)` (anchor `θ₀ = 0`) vanishes.
pub fn node_angles_analytic(p: &JTParams, r: f64) -> Result<Vec<f64>, JtError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(JtError::InvalidRadius { r });
    }
    if p.g() == 0.0 {
        return Ok(vec![PI]);
    }
    if p.k() == 0.0 {
        return Ok(vec![FRAC_PI_2, 3.0 * FRAC_PI_2]);
    }
    let circle = p.degeneracy_circle().expect("k, g > 0");
    if (r - circle).abs() <= CIRCLE_TOL {
        return Err(JtError::OnDegeneracyCircle {
            r,
            circle,
            k: p.k(),
            g: p.g(),
        });
    }
    if r < circle {
        Ok(vec![PI])
    } else {
        let a = (p.k() / (p.g() * r)).acos();
        Ok(vec![a, TAU - a])
    }
}

/// Coordinate chart a [`JahnTellerField`] reads its points in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// `(r, θ)`
    Polar,
    /// `(x, y) = (r cos θ, r sin θ)`
    Cartesian,
}

impl Chart {
    pub fn to_complex(self, point: &ParameterPoint) -> Complex64 {
        let (a, b) = (point.coords[0], point.coords[1]);
        match self {
            Chart::Polar => Complex64::from_polar(a, b),
            Chart::Cartesian => Complex64::new(a, b),
        }
    }

    /// `(r, θ)` of a point; `θ` is the raw coordinate on the polar chart.
    pub fn to_polar(self, point: &ParameterPoint) -> (f64, f64) {
        match self {
            Chart::Polar => (point.coords[0], point.coords[1]),
            Chart::Cartesian => {
                let z = Complex64::new(point.coords[0], point.coords[1]);
                (z.norm(), z.arg())
            }
        }
    }
}

/// The E⊗ε electronic Hamiltonian as a [`HamiltonianField`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JahnTellerField {
    pub params: JTParams,
    pub chart: Chart,
}

impl JahnTellerField {
    pub fn new(params: JTParams, chart: Chart) -> Self {
        Self { params, chart }
    }

    pub fn coupling(&self, point: &ParameterPoint) -> Complex64 {
        match self.chart {
            Chart::Polar => coupling(&self.params, point.coords[0], point.coords[1]),
            Chart::Cartesian => coupling_at(&self.params, Complex64::new(point.coords[0], point.coords[1])),
        }
    }
}

impl HamiltonianField for JahnTellerField {
    fn dimension(&self) -> usize {
        2
    }

    fn evaluate(&self, point: &ParameterPoint) -> DMatrix<f64> {
        let h = hamiltonian_from_coupling(self.coupling(point));
        DMatrix::from_iterator(2, 2, h.iter().copied())
    }
}
