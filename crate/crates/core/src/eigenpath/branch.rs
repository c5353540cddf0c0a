use nalgebra::DVector;

use super::{DiscretizedPath, EigenError, HamiltonianField};

/// Default minimum adjacent-band gap along a tracked path.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Consecutive eigenvectors must overlap at least this much in magnitude.
/// Below it a sign flip cannot be told apart from band mixing.
pub const MIN_STEP_OVERLAP: f64 = 0.5;

// Relative tolerance for matching the Hamiltonian at both ends of a loop.
const CLOSURE_TOL: f64 = 1e-12;

/// One band followed along a path with sign-continuous eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBranch {
    pub band: usize,
    pub energies: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
    pub gaps: Vec<f64>,
    pub path: DiscretizedPath,
}

impl EigenBranch {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.path.is_closed()
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Follow `band` along `path`, flipping eigenvector signs so that consecutive
/// overlaps are positive.
pub fn track_branch<F: HamiltonianField + ?Sized>(
    field: &F,
    path: &DiscretizedPath,
    band: usize,
    gap_tol: f64,
) -> Result<EigenBranch, EigenError> {
    let dimension = field.dimension();
    if band >= dimension {
        return Err(EigenError::BandOutOfRange { band, dimension });
    }
    let n = path.len();
    let mut energies = Vec::with_capacity(n);
    let mut vectors: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut gaps = Vec::with_capacity(n);
    let mut first_matrix = None;

    for (index, point) in path.points().iter().enumerate() {
        let h = field.checked(point)?;
        if path.is_closed() {
            if index == 0 {
                first_matrix = Some(h.clone());
            } else if index == n - 1 {
                let h0 = first_matrix.as_ref().expect("first matrix recorded");
                let deviation = (&h - h0).amax();
                if deviation > CLOSURE_TOL * h0.amax().max(1.0) {
                    return Err(EigenError::ClosureMismatch { deviation });
                }
            }
        }
        let es = super::eig_real_symmetric(&h)?;
        let gap = es.adjacent_gap(band);
        if gap <= gap_tol {
            return Err(EigenError::DegeneracyOnPath { index, gap, gap_tol });
        }
        let mut v = es.vector(band);
        if let Some(prev) = vectors.last() {
            let overlap = prev.dot(&v);
            if overlap.abs() < MIN_STEP_OVERLAP {
                return Err(EigenError::AmbiguousContinuation { index, overlap });
            }
            if overlap < 0.0 {
                v.neg_mut();
            }
        }
        energies.push(es.values[band]);
        vectors.push(v);
        gaps.push(gap);
    }

    Ok(EigenBranch {
        band,
        energies,
        vectors,
        gaps,
        path: path.clone(),
    })
}

/// Sign picked up by the transported eigenvector after one traversal of a
/// closed path.
pub fn holonomy_sign(branch: &EigenBranch) -> Result<i8, EigenError> {
    if !branch.is_closed() {
        return Err(EigenError::OpenPath);
    }
    let first = &branch.vectors[0];
    let last = &branch.vectors[branch.len() - 1];
    Ok(if first.dot(last) < 0.0 { -1 } else { 1 })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::DMatrix;

    use super::*;
    use crate::eigenpath::{ConstantField, FnField, ParameterPoint};

    // (k=1, g=0) linear E⊗ε electronic Hamiltonian on the polar chart.
    fn linear_jt() -> impl HamiltonianField {
        FnField::new(2, |p: &ParameterPoint| {
            let (r, t) = (p.coords[0], p.coords[1]);
            let (re, im) = (r * t.cos(), r * t.sin());
            DMatrix::from_row_slice(2, 2, &[re, im, im, -re])
        })
    }

    #[test]
    fn constant_field_branch_is_flat() {
        let field = ConstantField(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -1.0]));
        let path = DiscretizedPath::polar_circle(1.0, 32).unwrap();
        let branch = track_branch(&field, &path, 0, DEFAULT_GAP_TOL).unwrap();
        for v in &branch.vectors {
            assert_eq!(v, &branch.vectors[0]);
        }
        assert_eq!(holonomy_sign(&branch).unwrap(), 1);
    }

    #[test]
    fn linear_jt_loop_flips_sign() {
        let path = DiscretizedPath::polar_circle(1.0, 512).unwrap();
        let branch = track_branch(&linear_jt(), &path, 0, DEFAULT_GAP_TOL).unwrap();
        let end = branch.vectors[0].dot(&branch.vectors[512]);
        assert!((end + 1.0).abs() < 1e-12);
        assert_eq!(holonomy_sign(&branch).unwrap(), -1);
        for w in branch.vectors.windows(2) {
            assert!(w[0].dot(&w[1]) > 0.0);
        }
    }

    #[test]
    fn degeneracy_is_reported_with_index() {
        let path = DiscretizedPath::from_points(
            vec![
                ParameterPoint::polar(1.0, 0.0),
                ParameterPoint::polar(0.0, 0.0),
                ParameterPoint::polar(1.0, PI),
            ],
            false,
        )
        .unwrap();
        let err = track_branch(&linear_jt(), &path, 0, DEFAULT_GAP_TOL).unwrap_err();
        assert!(matches!(err, EigenError::DegeneracyOnPath { index: 1, .. }));
    }

    #[test]
    fn coarse_path_is_ambiguous() {
        // a half turn per step rotates the eigenvector by π/2
        let path = DiscretizedPath::polar_circle(1.0, 2).unwrap();
        let err = track_branch(&linear_jt(), &path, 0, DEFAULT_GAP_TOL).unwrap_err();
        assert!(matches!(err, EigenError::AmbiguousContinuation { index: 1, .. }));
    }

    #[test]
    fn open_path_has_no_holonomy() {
        let path = DiscretizedPath::from_points(
            (0..5)
                .map(|j| ParameterPoint::polar(1.0, 0.1 * j as f64))
                .collect(),
            false,
        )
        .unwrap();
        let branch = track_branch(&linear_jt(), &path, 1, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(holonomy_sign(&branch), Err(EigenError::OpenPath));
    }

    #[test]
    fn band_out_of_range() {
        let path = DiscretizedPath::polar_circle(1.0, 8).unwrap();
        assert!(matches!(
            track_branch(&linear_jt(), &path, 2, DEFAULT_GAP_TOL),
            Err(EigenError::BandOutOfRange {
                band: 2,
                dimension: 2
            })
        ));
    }

    #[test]
    fn closure_mismatch_detected() {
        let path = DiscretizedPath::from_points(
            vec![
                ParameterPoint::polar(1.0, 0.0),
                ParameterPoint::polar(1.0, 0.5),
                ParameterPoint::polar(1.0, 1.0),
            ],
            true,
        )
        .unwrap();
        assert!(matches!(
            track_branch(&linear_jt(), &path, 0, DEFAULT_GAP_TOL),
            Err(EigenError::ClosureMismatch { .. })
        ));
    }
}
