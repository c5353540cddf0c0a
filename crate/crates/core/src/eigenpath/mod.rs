//! Real symmetric eigendecomposition and sign-continuous eigenvector branches
//! along discretized parameter paths.

mod branch;
mod jacobi;
mod path;

use nalgebra::DMatrix;
use thiserror::Error;

pub use branch::{holonomy_sign, track_branch, EigenBranch, DEFAULT_GAP_TOL, MIN_STEP_OVERLAP};
pub use jacobi::{eig_real_symmetric, symmetrized, Eigensystem, SYMMETRY_TOL};
pub use path::{DiscretizedPath, ParameterPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("NotSquare: matrix is {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("NonFinite: entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("NonSymmetric: max |M_ij - M_ji| = {asymmetry:e} exceeds tolerance")]
    NonSymmetric { asymmetry: f64 },
    #[error("DimensionMismatch: field declared dimension {expected}, evaluated {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("BandOutOfRange: band {band} for dimension {dimension}")]
    BandOutOfRange { band: usize, dimension: usize },
    #[error("InvalidPath: {reason}")]
    InvalidPath { reason: String },
    #[error("ClosureMismatch: closed path endpoints differ by {deviation:e} in the Hamiltonian")]
    ClosureMismatch { deviation: f64 },
    #[error("DegeneracyOnPath: adjacent-band gap {gap:e} <= {gap_tol:e} at point {index}")]
    DegeneracyOnPath { index: usize, gap: f64, gap_tol: f64 },
    #[error("AmbiguousContinuation: |overlap| = {overlap:.3} between points {} and {index}; refine the path", index - 1)]
    AmbiguousContinuation { index: usize, overlap: f64 },
    #[error("OpenPath: holonomy requires a closed path")]
    OpenPath,
}

/// Real symmetric matrix-valued function on parameter space.
///
/// Implementations must be pure: the same point always yields the same
/// matrix.
pub trait HamiltonianField: Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, point: &ParameterPoint) -> DMatrix<f64>;

    /// Evaluate, then check dimension, finiteness and symmetry.
    fn checked(&self, point: &ParameterPoint) -> Result<DMatrix<f64>, EigenError> {
        let m = self.evaluate(point);
        if m.nrows() != self.dimension() || m.ncols() != self.dimension() {
            return Err(EigenError::DimensionMismatch {
                expected: self.dimension(),
                got: m.nrows(),
            });
        }
        symmetrized(&m)
    }

    fn eigensystem(&self, point: &ParameterPoint) -> Result<Eigensystem, EigenError> {
        eig_real_symmetric(&self.checked(point)?)
    }
}

impl<T: HamiltonianField + ?Sized> HamiltonianField for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn evaluate(&self, point: &ParameterPoint) -> DMatrix<f64> {
        (**self).evaluate(point)
    }
}

/// Field backed by a closure.
pub struct FnField<F> {
    dimension: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&ParameterPoint) -> DMatrix<f64> + Sync,
{
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F> HamiltonianField for FnField<F>
where
    F: Fn(&ParameterPoint) -> DMatrix<f64> + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, point: &ParameterPoint) -> DMatrix<f64> {
        (self.f)(point)
    }
}

/// Parameter-independent Hamiltonian.
#[derive(Debug, Clone)]
pub struct ConstantField(pub DMatrix<f64>);

impl HamiltonianField for ConstantField {
    fn dimension(&self) -> usize {
        self.0.nrows()
    }

    fn evaluate(&self, _point: &ParameterPoint) -> DMatrix<f64> {
        self.0.clone()
    }
}
