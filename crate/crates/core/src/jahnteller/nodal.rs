use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{degeneracy_points, node_angles_analytic, Band, Chart, DegeneracyPoint, JTParams};
use super::{JahnTellerField, JtError};
use crate::berryphase::{self, LoopAnalysis, NodeSet, PhaseError};
use crate::eigenpath::{DiscretizedPath, DEFAULT_GAP_TOL};
use crate::Error;

/// Radii closer than this to `2k/g` are refused by [`nodal_map`].
pub const CIRCLE_CLEARANCE: f64 = 1e-6;

/// Numeric and analytic node angles must agree to this.
const ANALYTIC_TOL: f64 = 1e-4;

const REFINE_TOL: f64 = 1e-12;

/// A circle of fixed radius about the origin, analyzed with anchor `θ₀ = 0`.
#[derive(Debug, Clone)]
pub struct RingLoop {
    pub radius: f64,
    pub analysis: LoopAnalysis,
    /// Node angles sharpened by bisection on the field.
    pub refined: NodeSet,
    /// Whether the interior samples had to be moved off a node.
    pub half_shifted: bool,
}

/// Track `band` around the circle of radius `r` with `samples` steps and
/// locate the sign changes of the anchor overlap.
///
/// If a sample lands exactly on a node the circle is resampled at the
/// half-step points, keeping the anchor at `θ = 0`.
pub fn ring_loop(p: &JTParams, r: f64, samples: usize, band: Band) -> crate::Result<RingLoop> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(JtError::InvalidRadius { r }.into());
    }
    let field = JahnTellerField::new(*p, Chart::Polar);
    let run = |path: DiscretizedPath| {
        berryphase::analyze_loop(
            &field,
            &path,
            band.index(),
            DEFAULT_GAP_TOL,
            berryphase::DEFAULT_ZERO_TOL,
        )
    };
    let (analysis, half_shifted) = match run(DiscretizedPath::polar_circle(r, samples)?) {
        Err(Error::Phase(PhaseError::SampleOnNode { .. })) => (
            run(DiscretizedPath::polar_circle_half_shifted(r, samples)?)?,
            true,
        ),
        other => (other?, false),
    };
    let refined = berryphase::refine_nodes(&field, &analysis.branch, &analysis.nodes, REFINE_TOL)?;
    Ok(RingLoop {
        radius: r,
        analysis,
        refined,
        half_shifted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSource {
    Analytic,
    Numeric,
}

impl NodeSource {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeSource::Analytic => "analytic",
            NodeSource::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalRow {
    pub r: f64,
    pub theta_node: f64,
    pub source: NodeSource,
}

/// Node lines of the anchor overlap over a set of radii, with the
/// degeneracy points they terminate on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalMap {
    pub params: JTParams,
    pub r_grid: Vec<f64>,
    pub theta_samples: usize,
    /// Numeric rows followed by analytic rows for each radius, radii in grid order.
    pub rows: Vec<NodalRow>,
    pub degeneracies: Vec<DegeneracyPoint>,
}

impl NodalMap {
    pub fn node_points(&self, source: NodeSource) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rows
            .iter()
            .filter(move |row| row.source == source)
            .map(|row| (row.r, row.theta_node))
    }

    /// Numeric node count at radius `r`.
    pub fn count_at(&self, r: f64) -> usize {
        self.rows
            .iter()
            .filter(|row| row.source == NodeSource::Numeric && row.r == r)
            .count()
    }
}

/// Run the numeric node pipeline on every radius and check it against the
/// closed-form node angles.
pub fn nodal_map(p: &JTParams, r_grid: &[f64], theta_samples: usize) -> crate::Result<NodalMap> {
    if r_grid.is_empty() {
        return Err(JtError::EmptyGrid { what: "r grid" }.into());
    }
    if theta_samples < 3 {
        return Err(JtError::EmptyGrid { what: "theta grid" }.into());
    }
    for &r in r_grid {
        if !(r > 0.0) || !r.is_finite() {
            return Err(JtError::InvalidRadius { r }.into());
        }
        if let Some(circle) = p.degeneracy_circle() {
            if (r - circle).abs() < CIRCLE_CLEARANCE {
                return Err(JtError::OnDegeneracyCircle {
                    r,
                    circle,
                    k: p.k(),
                    g: p.g(),
                }
                .into());
            }
        }
    }

    let per_radius: Vec<Vec<NodalRow>> = r_grid
        .par_iter()
        .map(|&r| radius_rows(p, r, theta_samples))
        .collect::<crate::Result<_>>()?;

    Ok(NodalMap {
        params: *p,
        r_grid: r_grid.to_vec(),
        theta_samples,
        rows: per_radius.into_iter().flatten().collect(),
        degeneracies: degeneracy_points(p),
    })
}

fn radius_rows(p: &JTParams, r: f64, samples: usize) -> crate::Result<Vec<NodalRow>> {
    let numeric = ring_loop(p, r, samples, Band::Lower)?.refined.angles;
    let analytic = node_angles_analytic(p, r)?;
    let agree = numeric.len() == analytic.len()
        && numeric
            .iter()
            .zip(&analytic)
            .all(|(a, b)| (a - b).abs() <= ANALYTIC_TOL);
    if !agree {
        return Err(JtError::AnalyticMismatch { r, numeric, analytic }.into());
    }
    let row = |source| {
        move |theta_node| NodalRow {
            r,
            theta_node,
            source,
        }
    };
    Ok(numeric
        .into_iter()
        .map(row(NodeSource::Numeric))
        .chain(analytic.into_iter().map(row(NodeSource::Analytic)))
        .collect())
}
