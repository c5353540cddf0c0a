use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{band_state, check_gap, comoving_hamiltonian, rotation, ComovingError, Frame};
use super::{NuclearTrajectory, SpinState};
use crate::angle::{canonical_phase, unwrap};
use crate::jahnteller::{self, Band, JTParams};

/// Largest `α` change accepted between neighboring samples when following it
/// continuously.
pub const MAX_PHASE_PER_STEP: f64 = std::f64::consts::FRAC_PI_2;

// dt · max(2Δ𝓔, |α̇|) must stay below this.
const STEP_LIMIT: f64 = 0.1;

/// Time series produced by [`integrate_spin`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEvolution {
    pub frame: Frame,
    pub times: Vec<f64>,
    pub states: Vec<SpinState>,
    /// `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` per sample.
    pub expectations: Vec<[f64; 3]>,
    pub norms: Vec<f64>,
    /// `⟨σ_y²⟩ − ⟨σ_y⟩²`
    pub sigma_y_variance: Vec<f64>,
}

struct Step {
    hamiltonian: Matrix2<Complex64>,
    dt: f64,
}

fn step(p: &JTParams, traj: &NuclearTrajectory, j: usize, frame: Frame) -> Result<Step, ComovingError> {
    let (t, r, theta) = (traj.times(), traj.r(), traj.theta());
    check_gap(p, j, r[j], theta[j])?;
    check_gap(p, j + 1, r[j + 1], theta[j + 1])?;
    let dt = t[j + 1] - t[j];
    let (rm, tm) = (0.5 * (r[j] + r[j + 1]), 0.5 * (theta[j] + theta[j + 1]));
    let delta_e = check_gap(p, j, rm, tm)?;
    let theta_dot = (theta[j + 1] - theta[j]) / dt;
    let r_dot = (r[j + 1] - r[j]) / dt;
    let alpha_dot = jahnteller::dalpha_dtheta(p, rm, tm).expect("gap checked") * theta_dot
        + jahnteller::dalpha_dr(p, rm, tm).expect("gap checked") * r_dot;
    let product = dt * (2.0 * delta_e).max(alpha_dot.abs());
    if product >= STEP_LIMIT {
        return Err(ComovingError::StepTooLarge {
            index: j,
            dt,
            product,
            limit: STEP_LIMIT,
        });
    }
    let hamiltonian = match frame {
        Frame::Comoving => comoving_hamiltonian(delta_e, alpha_dot),
        Frame::Lab => jahnteller::jt_electronic_hamiltonian(p, rm, tm).map(|v| Complex64::new(v, 0.0)),
    };
    Ok(Step { hamiltonian, dt })
}

/// `exp(−iH dt)` for Hermitian 2×2 `H`, from its Pauli decomposition.
pub(crate) fn propagator(h: &Matrix2<Complex64>, dt: f64) -> Matrix2<Complex64> {
    let h0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let hz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let (hx, hy) = (h[(0, 1)].re, -h[(0, 1)].im);
    let omega = (hx * hx + hy * hy + hz * hz).sqrt();
    let (c, s) = (
        (omega * dt).cos(),
        if omega > 0.0 {
            (omega * dt).sin() / omega
        } else {
            dt
        },
    );
    let i = Complex64::i();
    let traceless = Matrix2::new(
        Complex64::new(hz, 0.0),
        Complex64::new(hx, -hy),
        Complex64::new(hx, hy),
        Complex64::new(-hz, 0.0),
    );
    let u = Matrix2::identity().map(|v: Complex64| v * c) - traceless.map(|v| i * v * s);
    u.map(|v| v * Complex64::from_polar(1.0, -h0 * dt))
}

/// `U(α̃(t_j))` at every sample, with `α̃` followed continuously from its
/// principal value at the first sample.
pub fn frame_rotations(p: &JTParams, traj: &NuclearTrajectory) -> Result<Vec<Matrix2<f64>>, ComovingError> {
    let alphas = traj
        .r()
        .iter()
        .zip(traj.theta())
        .enumerate()
        .map(|(j, (&r, &theta))| {
            check_gap(p, j, r, theta)?;
            Ok(jahnteller::coupling(p, r, theta).arg())
        })
        .collect::<Result<Vec<f64>, ComovingError>>()?;
    let unwrapped =
        unwrap(&alphas, MAX_PHASE_PER_STEP).map_err(|index| ComovingError::UnresolvedWinding { index })?;
    Ok(unwrapped.into_iter().map(rotation).collect())
}

fn apply(u: &Matrix2<f64>, v: &Vector2<Complex64>, transpose: bool) -> Vector2<Complex64> {
    let u = if transpose { u.transpose() } else { *u };
    u.map(|x| Complex64::new(x, 0.0)) * v
}

fn into_frame(state: SpinState, u: &Matrix2<f64>, frame: Frame) -> SpinState {
    let amplitudes = match (state.frame, frame) {
        (a, b) if a == b => state.amplitudes,
        (Frame::Lab, _) => apply(u, &state.amplitudes, true),
        (Frame::Comoving, _) => apply(u, &state.amplitudes, false),
    };
    SpinState { amplitudes, frame }
}

/// Propagate `psi0` along `traj` with one exact exponential of the midpoint
/// Hamiltonian per step, in the requested frame. An initial state given in
/// the other frame is converted first.
pub fn integrate_spin(
    p: &JTParams,
    traj: &NuclearTrajectory,
    psi0: SpinState,
    frame: Frame,
) -> Result<SpinEvolution, ComovingError> {
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(ComovingError::InvalidState { norm });
    }
    let start = if psi0.frame == frame {
        psi0
    } else {
        let r = traj.r()[0];
        let theta = traj.theta()[0];
        check_gap(p, 0, r, theta)?;
        into_frame(psi0, &rotation(jahnteller::coupling(p, r, theta).arg()), frame)
    };

    let n = traj.len();
    let mut evolution = SpinEvolution {
        frame,
        times: traj.times().to_vec(),
        states: Vec::with_capacity(n),
        expectations: Vec::with_capacity(n),
        norms: Vec::with_capacity(n),
        sigma_y_variance: Vec::with_capacity(n),
    };
    let mut record = |s: SpinState| {
        let e = s.expectations();
        evolution.expectations.push(e);
        evolution.norms.push(s.norm());
        evolution.sigma_y_variance.push(s.norm().powi(2) - e[1] * e[1]);
        evolution.states.push(s);
    };
    record(start);
    let mut state = start;
    for j in 0..n - 1 {
        let s = step(p, traj, j, frame)?;
        state.amplitudes = propagator(&s.hamiltonian, s.dt) * state.amplitudes;
        record(state);
    }
    Ok(evolution)
}

/// Phases picked up by an adiabatic band state carried around `traj`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportPhases {
    /// `arg⟨ψ(0)|ψ(T)⟩` in the lab frame.
    pub total: f64,
    /// `−∫E dt` with `E = ∓Δ𝓔`.
    pub dynamical: f64,
    /// `total − dynamical` in `(−π, π]`.
    pub geometric: f64,
    /// `|⟨ψ(0)|ψ(T)⟩|`
    pub survival: f64,
}

/// Start in `band` at the first sample, propagate in the co-moving frame and
/// compare the final lab-frame state with the initial one.
pub fn adiabatic_transport(
    p: &JTParams,
    traj: &NuclearTrajectory,
    band: Band,
) -> Result<TransportPhases, ComovingError> {
    let rotations = frame_rotations(p, traj)?;
    let start = band_state(band);
    let evolution = integrate_spin(p, traj, start, Frame::Comoving)?;
    let last = evolution.states.last().expect("trajectory has samples");
    let initial = apply(&rotations[0], &start.amplitudes, false);
    let fin = apply(rotations.last().expect("nonempty"), &last.amplitudes, false);
    let overlap = initial.dotc(&fin);

    let mut dynamical = 0.0;
    for j in 0..traj.len() - 1 {
        let (r, theta, t) = (traj.r(), traj.theta(), traj.times());
        let (rm, tm) = (0.5 * (r[j] + r[j + 1]), 0.5 * (theta[j] + theta[j + 1]));
        let delta_e = jahnteller::coupling(p, rm, tm).norm();
        dynamical -= band.sign() * delta_e * (t[j + 1] - t[j]);
    }
    let total = overlap.arg();
    Ok(TransportPhases {
        total,
        dynamical,
        geometric: canonical_phase(total - dynamical),
        survival: overlap.norm(),
    })
}

/// `|⟨ψ_lab(T)|U(T)ψ′(T)⟩|²` for the same initial lab state propagated in
/// both frames.
pub fn frame_equivalence_fidelity(
    p: &JTParams,
    traj: &NuclearTrajectory,
    psi0: SpinState,
) -> Result<f64, ComovingError> {
    let rotations = frame_rotations(p, traj)?;
    let lab_start = into_frame(psi0, &rotations[0], Frame::Lab);
    let lab = integrate_spin(p, traj, lab_start, Frame::Lab)?;
    let co = integrate_spin(
        p,
        traj,
        into_frame(lab_start, &rotations[0], Frame::Comoving),
        Frame::Comoving,
    )?;
    let a = lab.states.last().expect("nonempty").amplitudes;
    let b = apply(
        rotations.last().expect("nonempty"),
        &co.states.last().expect("nonempty").amplitudes,
        false,
    );
    Ok(a.dotc(&b).norm_sqr())
}
