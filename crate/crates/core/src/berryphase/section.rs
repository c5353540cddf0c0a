use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{inner, NodeSet, PhaseError, State, OVERLAP_FLOOR};
use crate::eigenpath::EigenBranch;

/// Reference section of a real branch: the branch vectors with a sign flip
/// at every node, so the anchor overlap never turns negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSection {
    pub vectors: Vec<DVector<f64>>,
    pub nodes: NodeSet,
}

pub fn reference_section(branch: &EigenBranch, nodes: &NodeSet) -> Result<ReferenceSection, PhaseError> {
    if nodes.anchor >= branch.len() {
        return Err(PhaseError::AnchorOutOfRange {
            anchor: nodes.anchor,
            len: branch.len(),
        });
    }
    let anchor = &branch.vectors[nodes.anchor];
    let mut vectors = Vec::with_capacity(branch.len());
    for (j, v) in branch.vectors.iter().enumerate() {
        let phi = if nodes.nodes_between_anchor_and(j) % 2 == 1 {
            -v
        } else {
            v.clone()
        };
        if anchor.dot(&phi) < -OVERLAP_FLOOR {
            return Err(PhaseError::SectionMismatch { index: j });
        }
        vectors.push(phi);
    }
    Ok(ReferenceSection {
        vectors,
        nodes: nodes.clone(),
    })
}

/// General (complex) gauge-invariant section
/// `|φ(s)⟩ = exp(−i arg⟨ψ(s₀)|ψ(s)⟩) |ψ(s)⟩`.
///
/// The remaining freedom, the phase of the anchor representative itself, is
/// fixed by making the anchor's leading component real and positive. The
/// result is then independent of any per-state phase dressing.
pub fn gauge_invariant_section(states: &[State], anchor: usize) -> Result<Vec<State>, PhaseError> {
    if anchor >= states.len() {
        return Err(PhaseError::AnchorOutOfRange {
            anchor,
            len: states.len(),
        });
    }
    let a = &states[anchor];
    let largest = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = a
        .iter()
        .find(|c| c.norm() >= largest * (1.0 - 1e-6))
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let fix = Complex64::from_polar(1.0, -lead.arg());
    states
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let z = inner(a, s);
            if z.norm() <= OVERLAP_FLOOR {
                return Err(PhaseError::OrthogonalToAnchor { index });
            }
            Ok(s * (Complex64::from_polar(1.0, -z.arg()) * fix))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub angle: f64,
    pub weight: f64,
}

/// `𝒜(θ; θ₀) = −π Σ_k δ(θ − θ_k)`. One spike per node, no 2π offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferredVectorPotential {
    pub spikes: Vec<Spike>,
    pub loop_integral: f64,
}

pub fn preferred_vector_potential(nodes: &NodeSet) -> PreferredVectorPotential {
    PreferredVectorPotential {
        spikes: nodes
            .angles
            .iter()
            .map(|&angle| Spike { angle, weight: -PI })
            .collect(),
        loop_integral: -PI * nodes.count() as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MabClass {
    Trivial,
    Nontrivial,
}

/// Nontrivial molecular Aharonov-Bohm effect iff the node count is odd.
pub fn classify_mab(nodes: &NodeSet) -> MabClass {
    if nodes.parity() == 1 {
        MabClass::Nontrivial
    } else {
        MabClass::Trivial
    }
}
