//! Geometric-phase toolkit for real parameterized Hamiltonians.
//!
//! The crate is organised bottom-up:
//!
//! - [`eigenpath`]: dense real-symmetric eigensolver and sign-continuous
//!   eigenvector branches along discretized parameter paths.
//! - [`berryphase`]: anchor overlap traces, node detection, open-path Berry
//!   phases, gauge-invariant reference sections and the delta-spike preferred
//!   vector potential, plus molecular Aharonov-Bohm (MAB) classification.
//! - [`jahnteller`]: the linear + quadratic E⊗ε Jahn-Teller model with closed
//!   form energies, mixing angle, eigenvectors, degeneracies and node lines.
//! - [`cilocate`]: conical-intersection search by loop sign and quadtree
//!   subdivision.
//! - [`ringspectrum`]: pseudorotational ring spectra with periodic,
//!   antiperiodic and Dirichlet (barrier) boundary conditions.
//! - [`comoving`]: co-moving frame, driven spin dynamics, effective fields and
//!   the Aharonov-Casher loop phase.

pub mod angle;
pub mod berryphase;
pub mod cilocate;
pub mod comoving;
pub mod eigenpath;
pub mod error;
pub mod jahnteller;
pub mod ringspectrum;

pub use error::{Error, Result};

pub use berryphase::{
    BerryPhaseResult, MabClass, NodeSet, OverlapTrace, PreferredVectorPotential, ReferenceSection,
};
pub use cilocate::{CIResult, CiOptions, SearchRect};
pub use comoving::{ACConfig, EffectiveFields, Frame, NuclearTrajectory, SpinState};
pub use eigenpath::{DiscretizedPath, EigenBranch, Eigensystem, FnField, HamiltonianField, ParameterPoint};
pub use jahnteller::{Chart, JTParams, JTPointData, JahnTellerField, NodalMap};
pub use ringspectrum::{FluxParity, RingProblem, SpectrumResult};
