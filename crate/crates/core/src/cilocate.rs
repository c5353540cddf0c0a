//! Conical-intersection search over a parameter rectangle.
//!
//! A closed loop along which a real eigenvector changes sign must enclose a
//! degeneracy. Cells with sign −1 are split until they are small, then the
//! adjacent-band gap is minimized inside them. Two intersections in one cell
//! cancel, so every cell is split down to `min_depth` before `+1` cells are
//! dropped; this makes the search likely, not certain, to separate close
//! pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigenpath::{self, DiscretizedPath, EigenError, HamiltonianField, ParameterPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CiError {
    #[error("InvalidRect: [{x_min}, {x_max}] x [{y_min}, {y_max}]")]
    InvalidRect {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    #[error("InvalidOptions: {reason}")]
    InvalidOptions { reason: String },
    #[error("DegeneracyOnBoundary: cell [{x_min}, {x_max}] x [{y_min}, {y_max}] after {attempts} attempts")]
    DegeneracyOnBoundary {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        attempts: usize,
    },
    #[error("MaxDepthExceeded: cell diameter {diameter:e} still above spatial_tol {spatial_tol:e} at depth {max_depth}")]
    MaxDepthExceeded {
        max_depth: usize,
        diameter: f64,
        spatial_tol: f64,
    },
    #[error("RefinementStalled: gap {gap:e} at ({x}, {y}) exceeds gap_tol {gap_tol:e}")]
    RefinementStalled { x: f64, y: f64, gap: f64, gap_tol: f64 },
}

/// Axis-aligned search region and the band whose sign is tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub band: usize,
}

impl SearchRect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, band: usize) -> Result<Self, CiError> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(CiError::InvalidRect {
                x_min,
                x_max,
                y_min,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            band,
        })
    }

    fn cell(&self) -> Cell {
        Cell {
            x0: self.x_min,
            x1: self.x_max,
            y0: self.y_min,
            y1: self.y_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiOptions {
    /// Spacing below which a band is considered degenerate.
    pub gap_tol: f64,
    /// Cells are split until their diagonal is at most this.
    pub spatial_tol: f64,
    pub max_depth: usize,
    /// Depth reached by every cell before `+1` cells are discarded.
    pub min_depth: usize,
    pub samples_per_edge: usize,
    /// Extra split attempts with a shifted split point when a child boundary
    /// runs through a degeneracy.
    pub max_retries: usize,
}

impl Default for CiOptions {
    fn default() -> Self {
        Self {
            gap_tol: eigenpath::DEFAULT_GAP_TOL,
            spatial_tol: 1e-3,
            max_depth: 24,
            min_depth: 4,
            samples_per_edge: 16,
            max_retries: 5,
        }
    }
}

impl CiOptions {
    fn validate(&self) -> Result<(), CiError> {
        let reason = if !(self.gap_tol > 0.0) {
            "gap_tol must be positive"
        } else if !(self.spatial_tol > 0.0) {
            "spatial_tol must be positive"
        } else if self.samples_per_edge < 2 {
            "samples_per_edge must be at least 2"
        } else if self.min_depth > self.max_depth {
            "min_depth exceeds max_depth"
        } else {
            return Ok(());
        };
        Err(CiError::InvalidOptions {
            reason: reason.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CIResult {
    pub points: Vec<(f64, f64)>,
    pub min_gap_at_points: Vec<f64>,
    /// `(x_min, x_max, y_min, y_max)` of the `−1` leaf cell each point came from.
    pub cells: Vec<(f64, f64, f64, f64)>,
    /// Number of loop-sign evaluations.
    pub cells_evaluated: usize,
    /// Loop-sign evaluations per depth, root at index 0.
    pub depth_histogram: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Cell {
    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x0, self.y0),
            (self.x1, self.y0),
            (self.x1, self.y1),
            (self.x0, self.y1),
        ]
    }

    fn boundary_error(&self, attempts: usize) -> CiError {
        CiError::DegeneracyOnBoundary {
            x_min: self.x0,
            x_max: self.x1,
            y_min: self.y0,
            y_max: self.y1,
            attempts,
        }
    }

    /// Four children around the split point `(sx, sy)`, counter-clockwise from
    /// the lower left.
    fn split(&self, sx: f64, sy: f64) -> [Cell; 4] {
        [
            Cell {
                x0: self.x0,
                x1: sx,
                y0: self.y0,
                y1: sy,
            },
            Cell {
                x0: sx,
                x1: self.x1,
                y0: self.y0,
                y1: sy,
            },
            Cell {
                x0: sx,
                x1: self.x1,
                y0: sy,
                y1: self.y1,
            },
            Cell {
                x0: self.x0,
                x1: sx,
                y0: sy,
                y1: self.y1,
            },
        ]
    }
}

// Split-point offsets as fractions of the cell size; the first is the center.
const SPLIT_OFFSETS: [(f64, f64); 6] = [
    (0.0, 0.0),
    (0.1, 0.1),
    (-0.1, 0.07),
    (0.07, -0.1),
    (-0.07, -0.07),
    (0.1, -0.03),
];

fn boundary_loop(cell: &Cell, samples_per_edge: usize) -> Result<DiscretizedPath, EigenError> {
    DiscretizedPath::polygon(&cell.corners(), samples_per_edge)
}

fn sign_of(
    field: &(impl HamiltonianField + ?Sized),
    cell: &Cell,
    band: usize,
    opts: &CiOptions,
) -> crate::Result<Option<i8>> {
    let path = boundary_loop(cell, opts.samples_per_edge)?;
    match eigenpath::track_branch(field, &path, band, opts.gap_tol) {
        Ok(branch) => Ok(Some(eigenpath::holonomy_sign(&branch)?)),
        Err(EigenError::DegeneracyOnPath { .. } | EigenError::AmbiguousContinuation { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Holonomy sign of `band` around the boundary of `rect`, traversed
/// counter-clockwise from `(x_min, y_min)`.
pub fn loop_sign<F: HamiltonianField + ?Sized>(
    field: &F,
    rect: &SearchRect,
    samples_per_edge: usize,
    gap_tol: f64,
) -> crate::Result<i8> {
    let opts = CiOptions {
        gap_tol,
        samples_per_edge,
        ..CiOptions::default()
    };
    check_band(field, rect.band)?;
    let cell = rect.cell();
    sign_of(field, &cell, rect.band, &opts)?.ok_or_else(|| cell.boundary_error(1).into())
}

fn check_band<F: HamiltonianField + ?Sized>(field: &F, band: usize) -> Result<(), EigenError> {
    let dimension = field.dimension();
    if dimension < 2 || band >= dimension {
        return Err(EigenError::BandOutOfRange { band, dimension });
    }
    Ok(())
}

enum Outcome {
    Drop,
    Leaf,
    Split(Vec<(Cell, i8)>),
}

/// Quadtree search for degeneracies of `rect.band` with its neighbors.
pub fn locate_ci<F: HamiltonianField + ?Sized>(
    field: &F,
    rect: &SearchRect,
    opts: &CiOptions,
) -> crate::Result<CIResult> {
    opts.validate()?;
    check_band(field, rect.band)?;
    let band = rect.band;
    let root = rect.cell();
    let root_sign = sign_of(field, &root, band, opts)?.ok_or_else(|| root.boundary_error(1))?;

    let mut histogram = vec![1usize];
    let mut level = vec![(root, root_sign)];
    let mut leaves = Vec::new();
    let mut depth = 0usize;

    while !level.is_empty() {
        let outcomes: Vec<Outcome> = level
            .par_iter()
            .map(|&(cell, sign)| process(field, cell, sign, depth, band, opts))
            .collect::<crate::Result<_>>()?;
        let mut next = Vec::new();
        for ((cell, _), outcome) in level.iter().zip(outcomes) {
            match outcome {
                Outcome::Drop => {}
                Outcome::Leaf => leaves.push(*cell),
                Outcome::Split(children) => next.extend(children),
            }
        }
        depth += 1;
        if !next.is_empty() {
            histogram.push(next.len());
        }
        level = next;
    }

    let refined: Vec<((f64, f64), f64)> = leaves
        .par_iter()
        .map(|cell| refine(field, cell, band, opts))
        .collect::<crate::Result<_>>()?;

    let mut result = CIResult {
        points: Vec::new(),
        min_gap_at_points: Vec::new(),
        cells: Vec::new(),
        cells_evaluated: histogram.iter().sum(),
        depth_histogram: histogram,
    };
    for (cell, (point, gap)) in leaves.iter().zip(refined) {
        let duplicate = result
            .points
            .iter()
            .position(|p| (p.0 - point.0).hypot(p.1 - point.1) <= opts.spatial_tol);
        match duplicate {
            Some(i) if result.min_gap_at_points[i] <= gap => {}
            Some(i) => {
                result.points[i] = point;
                result.min_gap_at_points[i] = gap;
                result.cells[i] = (cell.x0, cell.x1, cell.y0, cell.y1);
            }
            None => {
                result.points.push(point);
                result.min_gap_at_points.push(gap);
                result.cells.push((cell.x0, cell.x1, cell.y0, cell.y1));
            }
        }
    }
    Ok(result)
}

fn process<F: HamiltonianField + ?Sized>(
    field: &F,
    cell: Cell,
    sign: i8,
    depth: usize,
    band: usize,
    opts: &CiOptions,
) -> crate::Result<Outcome> {
    if sign > 0 && depth >= opts.min_depth {
        return Ok(Outcome::Drop);
    }
    if sign < 0 && cell.diameter() <= opts.spatial_tol && depth >= opts.min_depth {
        return Ok(Outcome::Leaf);
    }
    if depth >= opts.max_depth {
        return Err(CiError::MaxDepthExceeded {
            max_depth: opts.max_depth,
            diameter: cell.diameter(),
            spatial_tol: opts.spatial_tol,
        }
        .into());
    }
    let (w, h) = (cell.x1 - cell.x0, cell.y1 - cell.y0);
    let (cx, cy) = (0.5 * (cell.x0 + cell.x1), 0.5 * (cell.y0 + cell.y1));
    let attempts = opts.max_retries.min(SPLIT_OFFSETS.len() - 1) + 1;
    for &(ox, oy) in &SPLIT_OFFSETS[..attempts] {
        let children = cell.split(cx + ox * w, cy + oy * h);
        let mut signed = Vec::with_capacity(4);
        for child in children {
            match sign_of(field, &child, band, opts)? {
                Some(s) => signed.push((child, s)),
                None => break,
            }
        }
        if signed.len() == 4 && signed.iter().map(|c| c.1).product::<i8>() == sign {
            return Ok(Outcome::Split(signed));
        }
    }
    Err(cell.boundary_error(attempts).into())
}

fn gap_at<F: HamiltonianField + ?Sized>(field: &F, band: usize, x: f64, y: f64) -> crate::Result<f64> {
    Ok(field
        .eigensystem(&ParameterPoint::cartesian(x, y))?
        .adjacent_gap(band))
}

const GOLDEN_ITERATIONS: usize = 20;
const POLISH_ITERATIONS: usize = 24;

fn golden_section(
    mut f: impl FnMut(f64) -> crate::Result<f64>,
    mut a: f64,
    mut b: f64,
) -> crate::Result<f64> {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_ITERATIONS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Minimize the gap inside a leaf cell: golden-section along each axis, then
/// Newton steps on a local quadratic fit of `gap²`, which is smooth at a
/// conical point where the gap itself is not.
fn refine<F: HamiltonianField + ?Sized>(
    field: &F,
    cell: &Cell,
    band: usize,
    opts: &CiOptions,
) -> crate::Result<((f64, f64), f64)> {
    let cy = 0.5 * (cell.y0 + cell.y1);
    let x = golden_section(|x| gap_at(field, band, x, cy), cell.x0, cell.x1)?;
    let y = golden_section(|y| gap_at(field, band, x, y), cell.y0, cell.y1)?;

    let mut p = (x, y);
    let mut gap = gap_at(field, band, x, y)?;
    let mut step = cell.diameter();
    let f2 = |x: f64, y: f64| gap_at(field, band, x, y).map(|g| g * g);
    for _ in 0..POLISH_ITERATIONS {
        if gap <= 1e-3 * opts.gap_tol {
            break;
        }
        let h = step.max(1e-12);
        let f0 = gap * gap;
        let (fxp, fxm) = (f2(p.0 + h, p.1)?, f2(p.0 - h, p.1)?);
        let (fyp, fym) = (f2(p.0, p.1 + h)?, f2(p.0, p.1 - h)?);
        let fpp = f2(p.0 + h, p.1 + h)?;
        let fmm = f2(p.0 - h, p.1 - h)?;
        let fpm = f2(p.0 + h, p.1 - h)?;
        let fmp = f2(p.0 - h, p.1 + h)?;
        let gx = (fxp - fxm) / (2.0 * h);
        let gy = (fyp - fym) / (2.0 * h);
        let hxx = (fxp - 2.0 * f0 + fxm) / (h * h);
        let hyy = (fyp - 2.0 * f0 + fym) / (h * h);
        let hxy = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        let det = hxx * hyy - hxy * hxy;
        if !(det > 0.0 && hxx > 0.0) {
            step = 0.1 * h;
            continue;
        }
        let dx = -(hyy * gx - hxy * gy) / det;
        let dy = -(hxx * gy - hxy * gx) / det;
        let candidate = (p.0 + dx, p.1 + dy);
        let far = (candidate.0 - 0.5 * (cell.x0 + cell.x1)).abs() > cell.x1 - cell.x0
            || (candidate.1 - cy).abs() > cell.y1 - cell.y0;
        if far {
            step = 0.1 * h;
            continue;
        }
        let g = gap_at(field, band, candidate.0, candidate.1)?;
        if !(g < gap) {
            // the stencil was too wide for the local quadratic model
            step = 0.1 * h;
            continue;
        }
        step = dx.hypot(dy);
        p = candidate;
        gap = g;
    }
    if gap > opts.gap_tol {
        return Err(CiError::RefinementStalled {
            x: p.0,
            y: p.1,
            gap,
            gap_tol: opts.gap_tol,
        }
        .into());
    }
    Ok((p, gap))
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::eigenpath::{ConstantField, FnField};
    use crate::jahnteller::{Chart, JTParams, JahnTellerField};
    use crate::Error;

    fn jt(k: f64, g: f64) -> JahnTellerField {
        JahnTellerField::new(JTParams::new(k, g).unwrap(), Chart::Cartesian)
    }

    fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> SearchRect {
        SearchRect::new(x0, x1, y0, y1, 0).unwrap()
    }

    #[test]
    fn loop_sign_examples() {
        let f = jt(1.0, 1.0);
        assert_eq!(loop_sign(&f, &rect(-0.5, 0.5, -0.5, 0.5), 16, 1e-8).unwrap(), -1);
        assert_eq!(loop_sign(&f, &rect(5.0, 6.0, 5.0, 6.0), 16, 1e-8).unwrap(), 1);
        let c = ConstantField(DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, -1.0]));
        assert_eq!(loop_sign(&c, &rect(-1.0, 1.0, -1.0, 1.0), 16, 1e-8).unwrap(), 1);
    }

    #[test]
    fn loop_through_degeneracy_is_reported() {
        let f = jt(1.0, 0.0);
        assert!(matches!(
            loop_sign(&f, &rect(0.0, 1.0, 0.0, 1.0), 16, 1e-8),
            Err(Error::ConicalSearch(CiError::DegeneracyOnBoundary { .. }))
        ));
    }

    #[test]
    fn invalid_inputs() {
        assert!(SearchRect::new(1.0, 0.0, 0.0, 1.0, 0).is_err());
        assert!(SearchRect::new(0.0, 1.0, 0.0, f64::NAN, 0).is_err());
        let f = jt(1.0, 1.0);
        let bad = SearchRect {
            band: 2,
            ..rect(-1.0, 1.0, -1.0, 1.0)
        };
        assert!(locate_ci(&f, &bad, &CiOptions::default()).is_err());
        let opts = CiOptions {
            spatial_tol: 0.0,
            ..CiOptions::default()
        };
        assert!(locate_ci(&f, &rect(-1.0, 1.0, -1.0, 1.0), &opts).is_err());
    }

    #[test]
    fn linear_model_has_only_the_origin() {
        let res = locate_ci(&jt(1.0, 0.0), &rect(-3.0, 3.0, -3.0, 3.0), &CiOptions::default()).unwrap();
        assert_eq!(res.points.len(), 1);
        let (x, y) = res.points[0];
        assert!(x.hypot(y) < 1e-6);
        assert!(res.min_gap_at_points[0] <= 1e-8);
    }

    #[test]
    fn constant_field_has_none() {
        let c = ConstantField(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let res = locate_ci(&c, &rect(-1.0, 1.0, -1.0, 1.0), &CiOptions::default()).unwrap();
        assert!(res.points.is_empty());
        // the root plus four full levels of children
        assert_eq!(res.depth_histogram, vec![1, 4, 16, 64, 256]);
        assert_eq!(res.cells_evaluated, 341);
    }

    #[test]
    fn off_grid_intersection() {
        let (px, py) = (0.3141, -0.2718);
        let f = FnField::new(2, move |p: &ParameterPoint| {
            let (a, b) = (p.coords[0] - px, 2.0 * (p.coords[1] - py));
            DMatrix::from_row_slice(2, 2, &[a, b, b, -a])
        });
        let res = locate_ci(&f, &rect(-1.0, 1.0, -1.0, 1.0), &CiOptions::default()).unwrap();
        assert_eq!(res.points.len(), 1);
        let (x, y) = res.points[0];
        assert!((x - px).abs() < 1e-8 && (y - py).abs() < 1e-8);
    }

    #[test]
    fn max_depth_is_enforced() {
        let opts = CiOptions {
            max_depth: 5,
            ..CiOptions::default()
        };
        assert!(matches!(
            locate_ci(&jt(1.0, 0.0), &rect(-3.0, 3.0, -3.0, 3.0), &opts),
            Err(Error::ConicalSearch(CiError::MaxDepthExceeded { .. }))
        ));
    }
}
