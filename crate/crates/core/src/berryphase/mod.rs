//! Overlap traces, node detection, open-path Berry phases, gauge-invariant
//! reference sections, the delta-spike preferred vector potential and MAB
//! classification.
//!
//! For a real eigenvector branch `|n(θ)⟩` and anchor `θ₀`, the open-path
//! phase reduces to `arg⟨n(θ₀)|n(θ)⟩`, which jumps by π wherever the real
//! overlap changes sign. Those sign changes (nodes) fix the reference
//! section `exp(iπ Σ h(θ − θ_k)) |n(θ)⟩` and the potential
//! `−π Σ δ(θ − θ_k)`, whose loop integral is `−Kπ`.

mod phase;
mod section;
mod trace;

use thiserror::Error;

use crate::eigenpath::{self, DiscretizedPath, EigenBranch, HamiltonianField};

pub use phase::{embed_real, inner, open_path_berry_phase, BerryPhaseResult, State};
pub use section::{
    classify_mab, gauge_invariant_section, preferred_vector_potential, reference_section, MabClass,
    PreferredVectorPotential, ReferenceSection, Spike,
};
pub use trace::{
    detect_nodes, overlap_trace, refine_nodes, NodeSet, OverlapTrace, DEFAULT_REFINE_TOL, DEFAULT_ZERO_TOL,
};

/// Magnitude below which an overlap is treated as zero.
pub const OVERLAP_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("TooFewStates: {len} states, need at least 2")]
    TooFewStates { len: usize },
    #[error("DimensionMismatch: state {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("AnchorOutOfRange: anchor {anchor} for {len} samples")]
    AnchorOutOfRange { anchor: usize, len: usize },
    #[error("SampleOnNode: overlap {value:e} at sample {index} is within tolerance of zero; shift the grid")]
    SampleOnNode { index: usize, value: f64 },
    #[error("OrthogonalEndpoints: |<psi(s0)|psi(s1)>| = {overlap:e}, global phase undefined")]
    OrthogonalEndpoints { overlap: f64 },
    #[error("VanishingStepOverlap: |<psi_j|psi_j+1>| = {overlap:e} at step {index}")]
    VanishingStepOverlap { index: usize, overlap: f64 },
    #[error("OrthogonalToAnchor: state {index} is orthogonal to the anchor state")]
    OrthogonalToAnchor { index: usize },
    #[error("SectionMismatch: node set does not match the branch sign pattern at sample {index}")]
    SectionMismatch { index: usize },
}

/// Everything computed for one closed loop and band.
#[derive(Debug, Clone)]
pub struct LoopAnalysis {
    pub branch: EigenBranch,
    pub trace: OverlapTrace,
    pub nodes: NodeSet,
    pub holonomy: i8,
    pub berry: BerryPhaseResult,
}

impl LoopAnalysis {
    pub fn mab_class(&self) -> MabClass {
        classify_mab(&self.nodes)
    }
}

/// Track `band` around a closed `path`, anchor the overlap trace at sample 0,
/// locate its nodes and evaluate the cyclic Berry phase.
pub fn analyze_loop<F: HamiltonianField + ?Sized>(
    field: &F,
    path: &DiscretizedPath,
    band: usize,
    gap_tol: f64,
    zero_tol: f64,
) -> crate::Result<LoopAnalysis> {
    let branch = eigenpath::track_branch(field, path, band, gap_tol)?;
    let holonomy = eigenpath::holonomy_sign(&branch)?;
    let trace = overlap_trace(&branch, 0)?;
    let nodes = detect_nodes(&trace, zero_tol)?;
    let berry = open_path_berry_phase(&embed_real(&branch.vectors))?;
    Ok(LoopAnalysis {
        branch,
        trace,
        nodes,
        holonomy,
        berry,
    })
}
