//! Phase and angle bookkeeping shared by the phase-computing modules.

use std::f64::consts::{PI, TAU};

/// Values this close to `-π` are reported as `+π`.
pub const BRANCH_CUT_TOL: f64 = 1e-9;

/// Reduce a phase to the interval `(-π, π]`.
pub fn canonical_phase(phase: f64) -> f64 {
    let mut x = phase.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    if x <= -PI + BRANCH_CUT_TOL {
        x = PI;
    }
    x
}

/// Two-argument arctangent mapped onto `(-π, π]`.
pub fn principal_arg(y: f64, x: f64) -> f64 {
    let a = y.atan2(x);
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Difference `to - from` reduced to `(-π, π]`.
pub fn wrapped_difference(from: f64, to: f64) -> f64 {
    canonical_phase(to - from)
}

/// Unwrap a sequence of principal-branch angles by accumulating increments.
///
/// Returns the index of the first step whose principal increment exceeds
/// `max_step` in magnitude.
pub fn unwrap(angles: &[f64], max_step: f64) -> Result<Vec<f64>, usize> {
    let mut out = Vec::with_capacity(angles.len());
    let Some(&first) = angles.first() else {
        return Ok(out);
    };
    out.push(first);
    let mut acc = first;
    for (i, w) in angles.windows(2).enumerate() {
        let step = wrapped_difference(w[0], w[1]);
        if step.abs() >= max_step {
            return Err(i + 1);
        }
        acc += step;
        out.push(acc);
    }
    Ok(out)
}

/// Whether two phases agree modulo 2π within `tol`.
pub fn phases_agree(a: f64, b: f64, tol: f64) -> bool {
    canonical_phase(a - b).abs() <= tol
}
