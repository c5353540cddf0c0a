use serde::{Deserialize, Serialize};

use super::PhaseError;
use crate::eigenpath::{DiscretizedPath, EigenBranch, EigenError, HamiltonianField};

/// Samples closer to zero than this are rejected by [`detect_nodes`].
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Default parameter resolution of [`refine_nodes`].
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

/// `values[j] = ⟨n(θ_anchor)|n(θ_j)⟩` along a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTrace {
    pub anchor: usize,
    pub values: Vec<f64>,
    pub path: DiscretizedPath,
}

/// Sign changes of an anchor overlap trace.
///
/// `positions` are fractional sample indices; `angles` are the matching path
/// parameter values, ordered along one traversal starting at the anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub anchor: usize,
    pub positions: Vec<f64>,
    pub angles: Vec<f64>,
}

impl NodeSet {
    pub fn empty(anchor: usize) -> Self {
        Self {
            anchor,
            positions: Vec::new(),
            angles: Vec::new(),
        }
    }

    /// Node count `K`.
    pub fn count(&self) -> usize {
        self.angles.len()
    }

    pub fn parity(&self) -> usize {
        self.count() % 2
    }

    /// Number of nodes strictly between the anchor and sample `index`.
    pub fn nodes_between_anchor_and(&self, index: usize) -> usize {
        let (lo, hi) = if index >= self.anchor {
            (self.anchor as f64, index as f64)
        } else {
            (index as f64, self.anchor as f64)
        };
        self.positions.iter().filter(|&&p| p > lo && p < hi).count()
    }

    fn from_positions(anchor: usize, positions: Vec<f64>, path: &DiscretizedPath) -> Self {
        let param = path.parameter();
        let period = path.period();
        let mut nodes: Vec<(f64, f64)> = positions
            .into_iter()
            .map(|pos| {
                let j = (pos.floor() as usize).min(param.len() - 2);
                let t = pos - j as f64;
                let mut angle = param[j] + t * (param[j + 1] - param[j]);
                if path.is_closed() && pos < anchor as f64 {
                    angle += period;
                }
                (pos, angle)
            })
            .collect();
        nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
        Self {
            anchor,
            positions: nodes.iter().map(|n| n.0).collect(),
            angles: nodes.iter().map(|n| n.1).collect(),
        }
    }
}

pub fn overlap_trace(branch: &EigenBranch, anchor: usize) -> Result<OverlapTrace, PhaseError> {
    if anchor >= branch.len() {
        return Err(PhaseError::AnchorOutOfRange {
            anchor,
            len: branch.len(),
        });
    }
    let a = &branch.vectors[anchor];
    Ok(OverlapTrace {
        anchor,
        values: branch.vectors.iter().map(|v| a.dot(v)).collect(),
        path: branch.path.clone(),
    })
}

/// Locate sign changes of the trace by linear interpolation between
/// adjacent samples of opposite sign.
pub fn detect_nodes(trace: &OverlapTrace, zero_tol: f64) -> Result<NodeSet, PhaseError> {
    if let Some((index, &value)) = trace.values.iter().enumerate().find(|(_, v)| v.abs() <= zero_tol) {
        return Err(PhaseError::SampleOnNode { index, value });
    }
    let positions = trace
        .values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] < 0.0) != (w[1] < 0.0))
        .map(|(j, w)| j as f64 + w[0] / (w[0] - w[1]))
        .collect();
    Ok(NodeSet::from_positions(trace.anchor, positions, &trace.path))
}

/// Sharpen node positions by bisection on the continuous field between the
/// bracketing samples, until the parameter bracket is below `tol`.
pub fn refine_nodes<F: HamiltonianField + ?Sized>(
    field: &F,
    branch: &EigenBranch,
    nodes: &NodeSet,
    tol: f64,
) -> Result<NodeSet, EigenError> {
    let anchor = &branch.vectors[nodes.anchor];
    let points = branch.path.points();
    let param = branch.path.parameter();
    let mut refined = Vec::with_capacity(nodes.positions.len());
    for &pos in &nodes.positions {
        let j = (pos.floor() as usize).min(points.len() - 2);
        let span = param[j + 1] - param[j];
        let reference = &branch.vectors[j];
        let lo_negative = anchor.dot(reference) < 0.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut best = pos - j as f64;
        while (hi - lo) * span > tol {
            let mid = 0.5 * (lo + hi);
            let point = points[j].lerp(&points[j + 1], mid);
            let v = field.eigensystem(&point)?.vector(branch.band);
            let aligned = if reference.dot(&v) < 0.0 {
                -anchor.dot(&v)
            } else {
                anchor.dot(&v)
            };
            if aligned == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (aligned < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
            best = 0.5 * (lo + hi);
        }
        if hi == lo {
            best = lo;
        }
        refined.push(j as f64 + best);
    }
    Ok(NodeSet::from_positions(nodes.anchor, refined, &branch.path))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::eigenpath::ParameterPoint;

    fn trace_of(values: Vec<f64>) -> OverlapTrace {
        let n = values.len();
        let path = DiscretizedPath::from_points(
            (0..n).map(|j| ParameterPoint::cartesian(j as f64, 0.0)).collect(),
            false,
        )
        .unwrap();
        OverlapTrace {
            anchor: 0,
            values,
            path,
        }
    }

    #[test]
    fn no_sign_change_no_nodes() {
        let nodes = detect_nodes(&trace_of(vec![1.0, 0.5, 0.1, 0.4, 0.9]), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(nodes.count(), 0);
        assert_eq!(nodes.parity(), 0);
    }

    #[test]
    fn interpolated_crossings() {
        let nodes = detect_nodes(&trace_of(vec![1.0, 0.5, -0.5, -1.0, 1.0]), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(nodes.count(), 2);
        assert!((nodes.angles[0] - 1.5).abs() < 1e-15);
        assert!((nodes.angles[1] - 3.5).abs() < 1e-15);
    }

    #[test]
    fn touching_zero_is_rejected_not_counted() {
        let err = detect_nodes(&trace_of(vec![1.0, 0.0, 1.0]), DEFAULT_ZERO_TOL).unwrap_err();
        assert!(matches!(err, PhaseError::SampleOnNode { index: 1, .. }));
        let nodes = detect_nodes(&trace_of(vec![1.0, 1e-6, 1.0]), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(nodes.count(), 0);
    }

    #[test]
    fn anchor_inside_closed_loop_orders_from_anchor() {
        let n = 8;
        let path = DiscretizedPath::polar_circle(1.0, n).unwrap();
        let values = vec![-0.5, 0.5, 1.0, 0.5, -0.5, -1.0, -0.7, -0.5, 0.5];
        let trace = OverlapTrace {
            anchor: 2,
            values,
            path,
        };
        let nodes = detect_nodes(&trace, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(nodes.count(), 3);
        // crossings at 0.5, 3.5 and 7.5 samples; the first wraps past 2π
        let h = 2.0 * PI / n as f64;
        assert!((nodes.angles[0] - 3.5 * h).abs() < 1e-12);
        assert!((nodes.angles[1] - 7.5 * h).abs() < 1e-12);
        assert!((nodes.angles[2] - (0.5 * h + 2.0 * PI)).abs() < 1e-12);
        assert_eq!(nodes.nodes_between_anchor_and(0), 1);
        assert_eq!(nodes.nodes_between_anchor_and(5), 1);
        assert_eq!(nodes.nodes_between_anchor_and(8), 2);
    }
}
