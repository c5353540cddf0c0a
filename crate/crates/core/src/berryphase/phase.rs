use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PhaseError, OVERLAP_FLOOR};
use crate::angle::{canonical_phase, principal_arg};

/// Normalized Hilbert-space representative.
pub type State = DVector<Complex64>;

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &State, b: &State) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Real vectors as phase-0 complex states.
pub fn embed_real(vectors: &[DVector<f64>]) -> Vec<State> {
    vectors
        .iter()
        .map(|v| v.map(|x| Complex64::new(x, 0.0)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryPhaseResult {
    /// `arg⟨ψ(s₀)|ψ(s₁)⟩`.
    pub total_phase: f64,
    /// `Σ_j arg⟨ψ_j|ψ_{j+1}⟩`, the discrete integrated connection.
    pub local_accumulation: f64,
    /// `total − local` reduced to `(−π, π]`.
    pub geometric_phase: f64,
}

/// Open-path Berry phase of a discretized state path: global phase minus the
/// accumulated local phase changes. Consecutive overlaps enter through
/// their argument only, so per-state phase factors cancel exactly.
pub fn open_path_berry_phase(states: &[State]) -> Result<BerryPhaseResult, PhaseError> {
    if states.len() < 2 {
        return Err(PhaseError::TooFewStates { len: states.len() });
    }
    let dim = states[0].len();
    if let Some((index, s)) = states.iter().enumerate().find(|(_, s)| s.len() != dim) {
        return Err(PhaseError::DimensionMismatch {
            index,
            expected: dim,
            got: s.len(),
        });
    }
    let mut local = 0.0;
    for (index, w) in states.windows(2).enumerate() {
        let z = inner(&w[0], &w[1]);
        if z.norm() <= OVERLAP_FLOOR {
            return Err(PhaseError::VanishingStepOverlap {
                index,
                overlap: z.norm(),
            });
        }
        local += principal_arg(z.im, z.re);
    }
    let global = inner(&states[0], &states[states.len() - 1]);
    if global.norm() <= OVERLAP_FLOOR {
        return Err(PhaseError::OrthogonalEndpoints {
            overlap: global.norm(),
        });
    }
    let total = principal_arg(global.im, global.re);
    Ok(BerryPhaseResult {
        total_phase: total,
        local_accumulation: local,
        geometric_phase: canonical_phase(total - local),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    use super::*;

    // Spin-½ coherent state at polar angle beta, azimuth phi.
    fn coherent(beta: f64, phi: f64) -> State {
        DVector::from_vec(vec![
            Complex64::new((beta / 2.0).cos(), 0.0),
            Complex64::from_polar((beta / 2.0).sin(), phi),
        ])
    }

    #[test]
    fn constant_states_have_zero_phase() {
        let s = coherent(0.7, 0.3);
        let r = open_path_berry_phase(&vec![s; 10]).unwrap();
        assert_eq!(r.geometric_phase, 0.0);
    }

    #[test]
    fn latitude_loop_matches_half_solid_angle() {
        // oracle: -π(1 - cos β) for the cyclic spin-½ phase
        let beta = 1.1;
        let n = 4096;
        let states: Vec<State> = (0..=n)
            .map(|j| coherent(beta, TAU * j as f64 / n as f64))
            .collect();
        let r = open_path_berry_phase(&states).unwrap();
        let exact = canonical_phase(-PI * (1.0 - beta.cos()));
        assert!((r.geometric_phase - exact).abs() < 1e-5);
    }

    #[test]
    fn per_state_phases_cancel() {
        let mut rng = StdRng::seed_from_u64(11);
        let states: Vec<State> = (0..200)
            .map(|j| coherent(0.4 + 0.01 * j as f64, 0.02 * j as f64))
            .collect();
        let base = open_path_berry_phase(&states).unwrap();
        let dressed: Vec<State> = states
            .iter()
            .map(|s| s * Complex64::from_polar(1.0, rng.gen_range(-PI..PI)))
            .collect();
        let d = open_path_berry_phase(&dressed).unwrap();
        assert!(canonical_phase(d.geometric_phase - base.geometric_phase).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_endpoints_rejected() {
        let states = vec![coherent(0.0, 0.0), coherent(PI / 2.0, 0.0), coherent(PI, 0.0)];
        assert!(matches!(
            open_path_berry_phase(&states),
            Err(PhaseError::OrthogonalEndpoints { .. })
        ));
    }

    #[test]
    fn vanishing_step_rejected() {
        let states = vec![coherent(0.0, 0.0), coherent(PI, 0.0), coherent(0.0, 0.0)];
        assert!(matches!(
            open_path_berry_phase(&states),
            Err(PhaseError::VanishingStepOverlap { index: 0, .. })
        ));
    }

    #[test]
    fn too_few_states() {
        assert!(matches!(
            open_path_berry_phase(&[coherent(0.1, 0.0)]),
            Err(PhaseError::TooFewStates { len: 1 })
        ));
    }
}
