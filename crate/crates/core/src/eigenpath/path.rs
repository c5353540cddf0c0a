use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::EigenError;

/// A point in parameter space. Ring paths use the polar pair `(r, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub coords: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Self::new(vec![r, theta])
    }

    pub fn cartesian(x: f64, y: f64) -> Self {
        Self::new(vec![x, y])
    }

    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Ordered samples of a path together with a strictly increasing scalar
/// label (`θ` for rings, arc length for polygons) used to report node
/// positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedPath {
    points: Vec<ParameterPoint>,
    parameter: Vec<f64>,
    closed: bool,
}

impl DiscretizedPath {
    pub fn new(points: Vec<ParameterPoint>, parameter: Vec<f64>, closed: bool) -> Result<Self, EigenError> {
        let invalid = |reason: String| EigenError::InvalidPath { reason };
        if points.len() < 3 {
            return Err(invalid(format!("{} points, need at least 3", points.len())));
        }
        if parameter.len() != points.len() {
            return Err(invalid(format!(
                "{} parameter labels for {} points",
                parameter.len(),
                points.len()
            )));
        }
        let dim = points[0].coords.len();
        for (i, p) in points.iter().enumerate() {
            if p.coords.len() != dim || p.coords.iter().any(|c| !c.is_finite()) {
                return Err(invalid(format!("point {i} is malformed or not finite")));
            }
        }
        for i in 1..points.len() {
            if points[i] == points[i - 1] {
                return Err(invalid(format!("points {} and {i} coincide", i - 1)));
            }
            if !(parameter[i] > parameter[i - 1]) {
                return Err(invalid(format!("parameter not increasing at {i}")));
            }
        }
        Ok(Self {
            points,
            parameter,
            closed,
        })
    }

    /// Path labelled by cumulative Euclidean length in coordinate space.
    pub fn from_points(points: Vec<ParameterPoint>, closed: bool) -> Result<Self, EigenError> {
        let mut parameter = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                s += p.distance(&points[i - 1]);
            }
            parameter.push(s);
        }
        Self::new(points, parameter, closed)
    }

    /// Closed circle of radius `r` in polar coordinates, `θ_j = 2πj/n`,
    /// `j = 0..=n`.
    pub fn polar_circle(r: f64, samples: usize) -> Result<Self, EigenError> {
        let thetas = (0..=samples).map(|j| TAU * j as f64 / samples as f64);
        Self::polar_loop(r, thetas.collect())
    }

    /// Same circle with interior samples moved to the half-step points
    /// `(j + ½)h`; the anchor `θ = 0` and closure `θ = 2π` are kept.
    pub fn polar_circle_half_shifted(r: f64, samples: usize) -> Result<Self, EigenError> {
        let h = TAU / samples as f64;
        let mut thetas = Vec::with_capacity(samples + 2);
        thetas.push(0.0);
        thetas.extend((0..samples).map(|j| (j as f64 + 0.5) * h));
        thetas.push(TAU);
        Self::polar_loop(r, thetas)
    }

    fn polar_loop(r: f64, thetas: Vec<f64>) -> Result<Self, EigenError> {
        if !(r >= 0.0) {
            return Err(EigenError::InvalidPath {
                reason: format!("negative radius {r}"),
            });
        }
        let points = thetas.iter().map(|&t| ParameterPoint::polar(r, t)).collect();
        Self::new(points, thetas, true)
    }

    /// Closed Cartesian circle starting at polar angle `start` about `center`.
    pub fn cartesian_circle(
        center: (f64, f64),
        radius: f64,
        samples: usize,
        start: f64,
    ) -> Result<Self, EigenError> {
        let thetas: Vec<f64> = (0..=samples)
            .map(|j| start + TAU * j as f64 / samples as f64)
            .collect();
        let mut points: Vec<ParameterPoint> = thetas
            .iter()
            .map(|t| ParameterPoint::cartesian(center.0 + radius * t.cos(), center.1 + radius * t.sin()))
            .collect();
        // exact closure
        points[samples] = points[0].clone();
        Self::new(points, thetas, true)
    }

    /// Closed polygon through `vertices`, each edge split into
    /// `samples_per_edge` segments.
    pub fn polygon(vertices: &[(f64, f64)], samples_per_edge: usize) -> Result<Self, EigenError> {
        let n = vertices.len();
        let mut points = Vec::with_capacity(n * samples_per_edge + 1);
        for e in 0..n {
            let (x0, y0) = vertices[e];
            let (x1, y1) = vertices[(e + 1) % n];
            for s in 0..samples_per_edge {
                let t = s as f64 / samples_per_edge as f64;
                points.push(ParameterPoint::cartesian(x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
            }
        }
        points.push(points[0].clone());
        Self::from_points(points, true)
    }

    pub fn points(&self) -> &[ParameterPoint] {
        &self.points
    }

    pub fn parameter(&self) -> &[f64] {
        &self.parameter
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parameter span of one traversal.
    pub fn period(&self) -> f64 {
        self.parameter[self.parameter.len() - 1] - self.parameter[0]
    }

    /// Start a closed path at sample `shift` instead of sample 0.
    pub fn rotated(&self, shift: usize) -> Result<Self, EigenError> {
        if !self.closed {
            return Err(EigenError::OpenPath);
        }
        let n = self.points.len() - 1;
        let shift = shift % n;
        let period = self.period();
        let mut points = Vec::with_capacity(n + 1);
        let mut parameter = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let src = shift + j;
            if src <= n {
                points.push(self.points[src].clone());
                parameter.push(self.parameter[src]);
            } else {
                points.push(self.points[src - n].clone());
                parameter.push(self.parameter[src - n] + period);
            }
        }
        Self::new(points, parameter, true)
    }

    /// Insert one extra sample inside every segment at the given fraction.
    pub fn subdivided(&self, fractions: &[f64]) -> Result<Self, EigenError> {
        let segments = self.points.len() - 1;
        if fractions.len() != segments {
            return Err(EigenError::InvalidPath {
                reason: format!("{} fractions for {segments} segments", fractions.len()),
            });
        }
        let mut points = Vec::with_capacity(2 * segments + 1);
        let mut parameter = Vec::with_capacity(2 * segments + 1);
        for (j, &t) in fractions.iter().enumerate().take(segments) {
            points.push(self.points[j].clone());
            parameter.push(self.parameter[j]);
            points.push(self.points[j].lerp(&self.points[j + 1], t));
            parameter.push(self.parameter[j] + t * (self.parameter[j + 1] - self.parameter[j]));
        }
        points.push(self.points[segments].clone());
        parameter.push(self.parameter[segments]);
        Self::new(points, parameter, self.closed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_repeated() {
        let p = |x: f64| ParameterPoint::cartesian(x, 0.0);
        assert!(DiscretizedPath::from_points(vec![p(0.0), p(1.0)], false).is_err());
        assert!(DiscretizedPath::from_points(vec![p(0.0), p(1.0), p(1.0)], false).is_err());
        assert!(DiscretizedPath::from_points(vec![p(0.0), p(1.0), p(2.0)], false).is_ok());
    }

    #[test]
    fn half_shift_keeps_anchor() {
        let path = DiscretizedPath::polar_circle_half_shifted(1.0, 8).unwrap();
        assert_eq!(path.len(), 10);
        assert_eq!(path.parameter()[0], 0.0);
        assert_eq!(path.parameter()[9], TAU);
        assert!((path.parameter()[1] - TAU / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_is_cyclic() {
        let path = DiscretizedPath::polar_circle(1.0, 8).unwrap();
        let rot = path.rotated(3).unwrap();
        assert_eq!(rot.len(), 9);
        assert_eq!(rot.points()[0], path.points()[3]);
        assert_eq!(rot.points()[5], path.points()[8]);
        assert_eq!(rot.points()[6], path.points()[1]);
        assert!((rot.period() - TAU).abs() < 1e-12);
    }

    #[test]
    fn polygon_closes_exactly() {
        let path = DiscretizedPath::polygon(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], 4).unwrap();
        assert_eq!(path.len(), 13);
        assert_eq!(path.points()[0], path.points()[12]);
        assert!((path.period() - (2.0 + 2f64.sqrt())).abs() < 1e-12);
    }
}
