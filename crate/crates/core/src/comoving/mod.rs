//! Electronic spin dynamics along prescribed nuclear paths.
//!
//! In the frame that follows the adiabatic eigenvectors, `ψ = U(α) ψ′` with
//! `U = exp(−iασ_y/2)`, the electronic Hamiltonian becomes
//!
//! ```text
//! H′ = Δ𝓔 σ_z − ½ α̇ σ_y
//! ```
//!
//! The second term is the torque of an effective field
//! `B = −∂_θα θ̇ e_y + 2Δ𝓔 e_z`; around a closed loop it produces half the
//! winding of `α` as a phase, the same bookkeeping as a charged line
//! threading the loop.
//!
//! The nuclear coordinates are a given classical trajectory, not dynamical
//! variables.

mod propagate;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{canonical_phase, unwrap};
use crate::eigenpath::DiscretizedPath;
use crate::jahnteller::{self, Band, JTParams, JahnTellerField, JtError};

pub use propagate::{
    adiabatic_transport, frame_equivalence_fidelity, frame_rotations, integrate_spin, SpinEvolution,
    TransportPhases, MAX_PHASE_PER_STEP,
};

/// `Δ𝓔` at or below this counts as hitting a degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComovingError {
    #[error("InvalidTrajectory: {reason}")]
    InvalidTrajectory { reason: String },
    #[error(
        "StepTooLarge: dt = {dt:e} at step {index}, dt * max(2 delta_E, |alpha_dot|) = {product} >= {limit}"
    )]
    StepTooLarge {
        index: usize,
        dt: f64,
        product: f64,
        limit: f64,
    },
    #[error(
        "TrajectoryThroughDegeneracy: delta_E = {delta_e:e} at sample {index} (r = {r}, theta = {theta})"
    )]
    TrajectoryThroughDegeneracy {
        index: usize,
        r: f64,
        theta: f64,
        delta_e: f64,
    },
    #[error("LoopThroughDegeneracy: delta_E = {delta_e:e} at loop sample {index}")]
    LoopThroughDegeneracy { index: usize, delta_e: f64 },
    #[error("LoopNotClosed: winding needs a closed loop")]
    LoopNotClosed,
    #[error("UnresolvedWinding: alpha jumps by more than pi/2 after loop sample {index}; refine the loop")]
    UnresolvedWinding { index: usize },
    #[error("InvalidCouplingScale: {scale}")]
    InvalidCouplingScale { scale: f64 },
    #[error("InvalidState: norm {norm}")]
    InvalidState { norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    Comoving,
}

/// Normalized two-level state, tagged with the frame its amplitudes refer to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    pub amplitudes: Vector2<Complex64>,
    pub frame: Frame,
}

impl SpinState {
    /// Normalizes `(a, b)`; fails for the zero vector or non-finite input.
    pub fn new(a: Complex64, b: Complex64, frame: Frame) -> Result<Self, ComovingError> {
        let v = Vector2::new(a, b);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(ComovingError::InvalidState { norm });
        }
        Ok(Self {
            amplitudes: v / Complex64::new(norm, 0.0),
            frame,
        })
    }

    pub fn up(frame: Frame) -> Self {
        Self {
            amplitudes: Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            frame,
        }
    }

    pub fn down(frame: Frame) -> Self {
        Self {
            amplitudes: Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            frame,
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`
    pub fn expectations(&self) -> [f64; 3] {
        let (a, b) = (self.amplitudes[0], self.amplitudes[1]);
        let cross = a.conj() * b;
        [2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()]
    }

    pub fn overlap(&self, other: &SpinState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Sampled nuclear path `(r(t), θ(t))`, linear between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearTrajectory {
    times: Vec<f64>,
    r: Vec<f64>,
    theta: Vec<f64>,
}

impl NuclearTrajectory {
    pub fn new(times: Vec<f64>, r: Vec<f64>, theta: Vec<f64>) -> Result<Self, ComovingError> {
        let invalid = |reason: &str| {
            Err(ComovingError::InvalidTrajectory {
                reason: reason.to_string(),
            })
        };
        if times.len() < 2 {
            return invalid("need at least two samples");
        }
        if r.len() != times.len() || theta.len() != times.len() {
            return invalid("times, r and theta differ in length");
        }
        if times.iter().chain(&r).chain(&theta).any(|v| !v.is_finite()) {
            return invalid("non-finite sample");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("times must be strictly increasing");
        }
        if r.iter().any(|&r| r <= 0.0) {
            return invalid("r must be positive");
        }
        Ok(Self { times, r, theta })
    }

    /// Uniform rotation `θ(t) = θ₀ + ωt` at fixed radius, `steps` intervals.
    pub fn circular(
        r: f64,
        theta0: f64,
        omega: f64,
        duration: f64,
        steps: usize,
    ) -> Result<Self, ComovingError> {
        if steps == 0 || !(duration > 0.0) {
            return Err(ComovingError::InvalidTrajectory {
                reason: format!("{steps} steps over duration {duration}"),
            });
        }
        let times: Vec<f64> = (0..=steps).map(|j| duration * j as f64 / steps as f64).collect();
        let theta = times.iter().map(|t| theta0 + omega * t).collect();
        Self::new(times, vec![r; steps + 1], theta)
    }

    /// One counter-clockwise revolution of radius `r` in time `period`.
    pub fn revolution(r: f64, period: f64, steps: usize) -> Result<Self, ComovingError> {
        Self::circular(r, 0.0, std::f64::consts::TAU / period, period, steps)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `θ̇` by central differences, one-sided at the ends.
    pub fn theta_dot(&self) -> Vec<f64> {
        derivative(&self.times, &self.theta)
    }

    pub fn r_dot(&self) -> Vec<f64> {
        derivative(&self.times, &self.r)
    }
}

fn derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|j| {
            let (a, b) = (j.saturating_sub(1), (j + 1).min(n - 1));
            (y[b] - y[a]) / (t[b] - t[a])
        })
        .collect()
}

fn check_gap(p: &JTParams, index: usize, r: f64, theta: f64) -> Result<f64, ComovingError> {
    let delta_e = jahnteller::coupling(p, r, theta).norm();
    if delta_e <= DEGENERACY_TOL {
        return Err(ComovingError::TrajectoryThroughDegeneracy {
            index,
            r,
            theta,
            delta_e,
        });
    }
    Ok(delta_e)
}

/// `U(α)` and `H′ = U†H_eU = Δ𝓔 σ_z` at one configuration.
pub fn comoving_transform(p: &JTParams, r: f64, theta: f64) -> Result<(Matrix2<f64>, Matrix2<f64>), JtError> {
    let data = jahnteller::jt_point_data(p, r, theta)?;
    let u = rotation(data.alpha);
    let h = jahnteller::jt_electronic_hamiltonian(p, r, theta);
    Ok((u, u.transpose() * h * u))
}

/// `exp(−iασ_y/2) = [[cos α/2, −sin α/2], [sin α/2, cos α/2]]`.
pub fn rotation(alpha: f64) -> Matrix2<f64> {
    let (s, c) = (0.5 * alpha).sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// `Δ𝓔 σ_z − ½ α̇ σ_y`.
pub fn comoving_hamiltonian(delta_e: f64, alpha_dot: f64) -> Matrix2<Complex64> {
    let half = Complex64::new(0.0, 0.5 * alpha_dot);
    Matrix2::new(
        Complex64::new(delta_e, 0.0),
        half,
        -half,
        Complex64::new(-delta_e, 0.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveFields {
    /// `(0, −∂_θα θ̇, 2Δ𝓔)`
    pub b_eff: [f64; 3],
    /// `∂_θα / 2r`
    pub e_eff_radial: f64,
    /// Not available in closed form.
    pub e_eff_theta: Option<f64>,
}

pub fn effective_fields(
    p: &JTParams,
    r: f64,
    theta: f64,
    theta_dot: f64,
) -> Result<EffectiveFields, JtError> {
    let data = jahnteller::jt_point_data(p, r, theta)?;
    let da = jahnteller::dalpha_dtheta(p, r, theta)?;
    Ok(EffectiveFields {
        b_eff: [0.0, -da * theta_dot, 2.0 * data.delta_e],
        e_eff_radial: da / (2.0 * r),
        e_eff_theta: None,
    })
}

/// Largest `|∂_θα θ̇| / Δ𝓔` along the trajectory; small means adiabatic.
pub fn adiabaticity_ratio(p: &JTParams, traj: &NuclearTrajectory) -> Result<f64, ComovingError> {
    let theta_dot = traj.theta_dot();
    let mut worst = 0.0f64;
    for (j, (&r, &theta)) in traj.r.iter().zip(&traj.theta).enumerate() {
        let delta_e = check_gap(p, j, r, theta)?;
        let da = jahnteller::dalpha_dtheta(p, r, theta).expect("gap checked");
        worst = worst.max((da * theta_dot[j]).abs() / delta_e);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ACConfig {
    /// Overall strength of the line-charge coupling in model units.
    pub coupling_scale: f64,
}

impl Default for ACConfig {
    fn default() -> Self {
        Self { coupling_scale: 1.0 }
    }
}

impl ACConfig {
    pub fn new(coupling_scale: f64) -> Result<Self, ComovingError> {
        if !(coupling_scale > 0.0) || !coupling_scale.is_finite() {
            return Err(ComovingError::InvalidCouplingScale {
                scale: coupling_scale,
            });
        }
        Ok(Self { coupling_scale })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ACPhase {
    /// Net change of the continuously followed `α` around the loop.
    pub alpha_winding: f64,
    /// `alpha_winding / 2π`, rounded.
    pub winding_number: i64,
    /// `coupling_scale · ½ · winding` in `(−π, π]`.
    pub phase: f64,
}

/// Phase collected around a closed loop from half the winding of `α`.
pub fn ac_loop_phase(
    field: &JahnTellerField,
    path: &DiscretizedPath,
    cfg: &ACConfig,
) -> Result<ACPhase, ComovingError> {
    if !path.is_closed() {
        return Err(ComovingError::LoopNotClosed);
    }
    let mut alphas = Vec::with_capacity(path.len());
    for (index, point) in path.points().iter().enumerate() {
        let f = field.coupling(point);
        if f.norm() <= DEGENERACY_TOL {
            return Err(ComovingError::LoopThroughDegeneracy {
                index,
                delta_e: f.norm(),
            });
        }
        alphas.push(f.arg());
    }
    let unwrapped =
        unwrap(&alphas, MAX_PHASE_PER_STEP).map_err(|index| ComovingError::UnresolvedWinding { index })?;
    let alpha_winding = unwrapped[unwrapped.len() - 1] - unwrapped[0];
    let winding_number = (alpha_winding / std::f64::consts::TAU).round() as i64;
    let phase = canonical_phase(cfg.coupling_scale * std::f64::consts::PI * winding_number as f64);
    Ok(ACPhase {
        alpha_winding,
        winding_number,
        phase,
    })
}

/// Co-moving basis state of an adiabatic band: `|+⟩ ↦ (1, 0)`, `|−⟩ ↦ (0, 1)`.
pub fn band_state(band: Band) -> SpinState {
    match band {
        Band::Upper => SpinState::up(Frame::Comoving),
        Band::Lower => SpinState::down(Frame::Comoving),
    }
}
