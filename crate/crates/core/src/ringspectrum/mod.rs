//! Pseudorotational levels on a ring of fixed radius.
//!
//! `H = (1/2r₀²) p_θ² + E(θ)` is discretized on `M` points with a
//! second-order stencil. The half-integer flux of an odd node count is
//! carried entirely by the boundary condition: the bond across the seam
//! `θ = 2π ≡ 0` changes sign, making the wavefunction antiperiodic. An
//! infinite barrier removes its grid points and cuts the ring open, after
//! which the seam sign can be gauged away and both parities coincide.

mod sturm;

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jahnteller::{self, Band, JTParams, JtError};

/// Smallest accepted grid.
pub const MIN_GRID: usize = 64;

/// Relative spacing below which neighboring levels are flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

// Grid points within this of a barrier edge count as inside.
const EDGE_TOL: f64 = 1e-12;

// Parity is always read off a circle at least this finely sampled.
const PARITY_SAMPLES: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RingError {
    #[error("InvalidRadius: r0 = {r0}")]
    InvalidRadius { r0: f64 },
    #[error("GridTooCoarse: M = {m}, need at least {min}")]
    GridTooCoarse { m: usize, min: usize },
    #[error("BarrierTooWide: width {width} leaves {remaining} grid points")]
    BarrierTooWide { width: f64, remaining: usize },
    #[error("InvalidBarrier: start {start}, width {width}")]
    InvalidBarrier { start: f64, width: f64 },
    #[error("NonFinitePotential: {value} at grid point {index}")]
    NonFinitePotential { index: usize, value: f64 },
}

/// Parity of the node count `K` of the overlap trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxParity {
    Even,
    Odd,
}

impl FluxParity {
    pub fn from_node_count(k: usize) -> Self {
        if k.is_multiple_of(2) {
            FluxParity::Even
        } else {
            FluxParity::Odd
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FluxParity::Even => "even",
            FluxParity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Antiperiodic,
    Dirichlet,
}

/// Infinite wall on `[start, start + width]` (mod 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub start: f64,
    pub width: f64,
}

impl Barrier {
    pub fn new(start: f64, width: f64) -> Result<Self, RingError> {
        if !(start.is_finite() && width.is_finite()) || width <= 0.0 {
            return Err(RingError::InvalidBarrier { start, width });
        }
        if width >= TAU {
            return Err(RingError::BarrierTooWide { width, remaining: 0 });
        }
        Ok(Self { start, width })
    }

    fn covers(&self, theta: f64) -> bool {
        let offset = (theta - self.start).rem_euclid(TAU);
        offset <= self.width + EDGE_TOL || offset >= TAU - EDGE_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingProblem {
    pub radius: f64,
    /// `E(θ_j)` at `θ_j = 2πj/M`.
    pub potential: Vec<f64>,
    pub flux_parity: FluxParity,
    pub barrier: Option<Barrier>,
}

impl RingProblem {
    pub fn new(
        radius: f64,
        potential: Vec<f64>,
        flux_parity: FluxParity,
        barrier: Option<Barrier>,
    ) -> Result<Self, RingError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(RingError::InvalidRadius { r0: radius });
        }
        if potential.len() < MIN_GRID {
            return Err(RingError::GridTooCoarse {
                m: potential.len(),
                min: MIN_GRID,
            });
        }
        let problem = Self {
            radius,
            potential,
            flux_parity,
            barrier,
        };
        for (index, &value) in problem.potential.iter().enumerate() {
            if !value.is_finite() && !problem.blocked(index) {
                return Err(RingError::NonFinitePotential { index, value });
            }
        }
        Ok(problem)
    }

    /// Constant potential `value` on `m` points.
    pub fn flat(
        radius: f64,
        value: f64,
        m: usize,
        flux_parity: FluxParity,
        barrier: Option<Barrier>,
    ) -> Result<Self, RingError> {
        Self::new(radius, vec![value; m], flux_parity, barrier)
    }

    pub fn grid_size(&self) -> usize {
        self.potential.len()
    }

    pub fn step(&self) -> f64 {
        TAU / self.grid_size() as f64
    }

    pub fn boundary(&self) -> Boundary {
        match (self.barrier, self.flux_parity) {
            (Some(_), _) => Boundary::Dirichlet,
            (None, FluxParity::Even) => Boundary::Periodic,
            (None, FluxParity::Odd) => Boundary::Antiperiodic,
        }
    }

    fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.grid_size() as f64
    }

    fn blocked(&self, j: usize) -> bool {
        self.barrier.is_some_and(|b| b.covers(self.theta(j)))
    }
}

/// Hermitian (periodic-)tridiagonal matrix on the retained grid points.
///
/// `bonds[i]` is the `(i, i+1)` entry; on a closed ring the last bond is the
/// `(n−1, 0)` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMatrix {
    pub theta: Vec<f64>,
    pub diagonal: Vec<f64>,
    pub bonds: Vec<Complex64>,
    pub closed: bool,
}

impl RingMatrix {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dimension();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            self.diagonal.iter().map(|&d| Complex64::new(d, 0.0)),
        ));
        for (i, &b) in self.bonds.iter().enumerate() {
            let j = (i + 1) % n;
            m[(i, j)] += b;
            m[(j, i)] += b.conj();
        }
        m
    }

    /// Multiply every bond by `e^{iφ_j}`. With `Σφ_j = 0` this is a pure gauge
    /// transformation and leaves the spectrum unchanged.
    pub fn twisted(&self, phases: &[f64]) -> Self {
        let mut out = self.clone();
        for (b, &phi) in out.bonds.iter_mut().zip(phases) {
            *b *= Complex64::from_polar(1.0, phi);
        }
        out
    }

    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        sturm::lowest_eigenvalues(&self.diagonal, &self.bonds, self.closed, count)
    }
}

pub fn build_ring_hamiltonian(p: &RingProblem) -> Result<RingMatrix, RingError> {
    let m = p.grid_size();
    if m < MIN_GRID {
        return Err(RingError::GridTooCoarse { m, min: MIN_GRID });
    }
    let h = p.step();
    let scale = 1.0 / (p.radius * p.radius * h * h);
    let hop = -0.5 * scale;
    let seam = match p.flux_parity {
        FluxParity::Even => hop,
        FluxParity::Odd => -hop,
    };
    let bond_after = |j: usize| if j + 1 == m { seam } else { hop };

    let Some(barrier) = p.barrier else {
        return Ok(RingMatrix {
            theta: (0..m).map(|j| p.theta(j)).collect(),
            diagonal: p.potential.iter().map(|v| v + scale).collect(),
            bonds: (0..m).map(|j| Complex64::new(bond_after(j), 0.0)).collect(),
            closed: true,
        });
    };

    // open chain starting just past the barrier and wrapping through the seam
    let blocked: Vec<bool> = (0..m).map(|j| p.blocked(j)).collect();
    let remaining = blocked.iter().filter(|b| !**b).count();
    if remaining < 2 {
        return Err(RingError::BarrierTooWide {
            width: barrier.width,
            remaining,
        });
    }
    let first = (0..m)
        .find(|&j| blocked[(j + m - 1) % m] && !blocked[j])
        .expect("a barrier leaves a free site after a blocked one");
    let sites: Vec<usize> = (0..remaining).map(|i| (first + i) % m).collect();
    Ok(RingMatrix {
        theta: sites.iter().map(|&j| p.theta(j)).collect(),
        diagonal: sites.iter().map(|&j| p.potential[j] + scale).collect(),
        bonds: sites[..remaining - 1]
            .iter()
            .map(|&j| Complex64::new(bond_after(j), 0.0))
            .collect(),
        closed: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub levels: Vec<f64>,
    pub boundary: Boundary,
    pub parity: FluxParity,
    /// `true` where a level lies within tolerance of a neighbor.
    pub degeneracy_flags: Vec<bool>,
    /// Size of the discretized operator.
    pub dimension: usize,
}

/// Lowest `n_levels` eigenvalues (fewer if the grid is smaller).
pub fn spectrum(p: &RingProblem, n_levels: usize) -> Result<SpectrumResult, RingError> {
    let matrix = build_ring_hamiltonian(p)?;
    let levels = matrix.lowest_eigenvalues(n_levels);
    let close = |a: f64, b: f64| (a - b).abs() <= DEGENERACY_TOL * a.abs().max(1.0);
    let degeneracy_flags = (0..levels.len())
        .map(|i| {
            (i > 0 && close(levels[i], levels[i - 1]))
                || (i + 1 < levels.len() && close(levels[i], levels[i + 1]))
        })
        .collect();
    Ok(SpectrumResult {
        levels,
        boundary: p.boundary(),
        parity: p.flux_parity,
        degeneracy_flags,
        dimension: matrix.dimension(),
    })
}

/// Ring problem for one adiabatic sheet of the Jahn-Teller model at radius
/// `r0`, with the flux parity taken from the node count on that circle.
pub fn jt_ring_problem(
    p: &JTParams,
    r0: f64,
    band: Band,
    m: usize,
    barrier: Option<Barrier>,
) -> crate::Result<RingProblem> {
    if m < MIN_GRID {
        return Err(RingError::GridTooCoarse { m, min: MIN_GRID }.into());
    }
    if let Some(circle) = p.degeneracy_circle() {
        if (r0 - circle).abs() < jahnteller::CIRCLE_CLEARANCE {
            return Err(JtError::OnDegeneracyCircle {
                r: r0,
                circle,
                k: p.k(),
                g: p.g(),
            }
            .into());
        }
    }
    let ring = jahnteller::ring_loop(p, r0, m.max(PARITY_SAMPLES), band)?;
    let potential = (0..m)
        .map(|j| {
            let d = jahnteller::jt_point_data(p, r0, TAU * j as f64 / m as f64)?;
            Ok(match band {
                Band::Lower => d.energies.0,
                Band::Upper => d.energies.1,
            })
        })
        .collect::<Result<Vec<f64>, JtError>>()?;
    Ok(RingProblem::new(
        r0,
        potential,
        FluxParity::from_node_count(ring.refined.count()),
        barrier,
    )?)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::eigenpath::eig_real_symmetric;

    /// Eigenvalues of a Hermitian matrix through its real `2n × 2n` embedding;
    /// every eigenvalue appears twice there.
    fn dense_oracle(h: &DMatrix<Complex64>) -> Vec<f64> {
        let n = h.nrows();
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = h[(i, j)];
                big[(i, j)] = z.re;
                big[(i + n, j + n)] = z.re;
                big[(i, j + n)] = -z.im;
                big[(i + n, j)] = z.im;
            }
        }
        let values = eig_real_symmetric(&big).unwrap().values;
        values.iter().step_by(2).copied().collect()
    }

    fn bumpy(m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| {
                let t = TAU * j as f64 / m as f64;
                0.3 * (3.0 * t).cos() - 0.1 * t.sin()
            })
            .collect()
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(
            RingProblem::flat(1.0, 0.0, 8, FluxParity::Even, None),
            Err(RingError::GridTooCoarse { m: 8, .. })
        ));
        assert!(RingProblem::flat(0.0, 0.0, 64, FluxParity::Even, None).is_err());
        assert!(matches!(
            Barrier::new(0.0, TAU),
            Err(RingError::BarrierTooWide { .. })
        ));
        assert!(Barrier::new(0.0, -1.0).is_err());
    }

    #[test]
    fn flat_even_matrix_is_circulant() {
        let p = RingProblem::flat(1.0, 0.0, 64, FluxParity::Even, None).unwrap();
        let h = build_ring_hamiltonian(&p).unwrap().to_dense();
        let step = p.step();
        let (d, o) = (1.0 / (step * step), -0.5 / (step * step));
        for i in 0..64 {
            for j in 0..64 {
                let expected = match (i as i64 - j as i64).rem_euclid(64) {
                    0 => d,
                    1 | 63 => o,
                    _ => 0.0,
                };
                assert_eq!(h[(i, j)], Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn odd_parity_negates_only_the_wrap() {
        let even = RingProblem::new(1.3, bumpy(64), FluxParity::Even, None).unwrap();
        let odd = RingProblem {
            flux_parity: FluxParity::Odd,
            ..even.clone()
        };
        let a = build_ring_hamiltonian(&even).unwrap().to_dense();
        let b = build_ring_hamiltonian(&odd).unwrap().to_dense();
        for i in 0..64 {
            for j in 0..64 {
                let wrap = (i, j) == (0, 63) || (i, j) == (63, 0);
                let expected = if wrap { -a[(i, j)] } else { a[(i, j)] };
                assert_eq!(b[(i, j)], expected);
            }
        }
    }

    #[test]
    fn barrier_removes_points() {
        let barrier = Barrier::new(FRAC_PI_2, FRAC_PI_2).unwrap();
        let p = RingProblem::flat(1.0, 0.0, 64, FluxParity::Even, Some(barrier)).unwrap();
        let h = build_ring_hamiltonian(&p).unwrap();
        // θ_j = jπ/32 in [π/2, π] for j = 16..=32
        assert_eq!(h.dimension(), 64 - 17);
        assert!(!h.closed);
        assert!((h.theta[0] - 33.0 * PI / 32.0).abs() < 1e-15);
        assert!((h.theta.last().unwrap() - 15.0 * PI / 32.0).abs() < 1e-15);
    }

    #[test]
    fn wrapping_barrier() {
        let barrier = Barrier::new(1.5 * PI, PI).unwrap();
        let p = RingProblem::flat(1.0, 0.0, 64, FluxParity::Odd, Some(barrier)).unwrap();
        let h = build_ring_hamiltonian(&p).unwrap();
        assert_eq!(h.dimension(), 64 - 33);
        assert!((h.theta[0] - 17.0 * PI / 32.0).abs() < 1e-15);
    }

    #[test]
    fn bisection_matches_dense_oracle() {
        for parity in [FluxParity::Even, FluxParity::Odd] {
            let p = RingProblem::new(0.8, bumpy(64), parity, None).unwrap();
            let h = build_ring_hamiltonian(&p).unwrap();
            let got = h.lowest_eigenvalues(64);
            let oracle = dense_oracle(&h.to_dense());
            for (a, b) in got.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn twisted_ring_matches_dense_oracle() {
        let p = RingProblem::new(1.0, bumpy(64), FluxParity::Odd, None).unwrap();
        let phases: Vec<f64> = (0..64).map(|j| 0.3 * (j as f64).sin()).collect();
        let h = build_ring_hamiltonian(&p).unwrap().twisted(&phases);
        let got = h.lowest_eigenvalues(20);
        let oracle = dense_oracle(&h.to_dense());
        for (a, b) in got.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn free_ring_levels() {
        let even = spectrum(
            &RingProblem::flat(1.0, 0.0, 1024, FluxParity::Even, None).unwrap(),
            5,
        )
        .unwrap();
        for (e, m) in even.levels.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0]) {
            assert!((e - 0.5 * m * m).abs() < 1e-4);
        }
        assert_eq!(even.degeneracy_flags, vec![false, true, true, true, true]);
        assert_eq!(even.boundary, Boundary::Periodic);
        let odd = spectrum(
            &RingProblem::flat(1.0, 0.0, 1024, FluxParity::Odd, None).unwrap(),
            6,
        )
        .unwrap();
        for (e, m) in odd.levels.iter().zip([0.5, 0.5, 1.5, 1.5, 2.5, 2.5]) {
            assert!((e - 0.5 * m * m).abs() < 1e-4);
        }
        assert!(odd.degeneracy_flags.iter().all(|&f| f));
        assert_eq!(odd.boundary, Boundary::Antiperiodic);
    }

    #[test]
    fn barrier_parities_agree() {
        let barrier = Barrier::new(2.0, 0.4).unwrap();
        let even = RingProblem::new(1.0, bumpy(256), FluxParity::Even, Some(barrier)).unwrap();
        let odd = RingProblem {
            flux_parity: FluxParity::Odd,
            ..even.clone()
        };
        let a = spectrum(&even, 12).unwrap();
        let b = spectrum(&odd, 12).unwrap();
        assert_eq!(a.boundary, Boundary::Dirichlet);
        for (x, y) in a.levels.iter().zip(&b.levels) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn levels_clamped_to_dimension() {
        let barrier = Barrier::new(0.5, 5.5).unwrap();
        let p = RingProblem::flat(1.0, 0.0, 64, FluxParity::Even, Some(barrier)).unwrap();
        let s = spectrum(&p, 100).unwrap();
        assert_eq!(s.levels.len(), s.dimension);
        assert!(s.levels.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn potential_inside_barrier_may_be_infinite() {
        let mut v = vec![0.0; 64];
        v[20] = f64::INFINITY;
        assert!(RingProblem::new(1.0, v.clone(), FluxParity::Even, None).is_err());
        let barrier = Barrier::new(1.9, 0.2).unwrap();
        assert!(RingProblem::new(1.0, v, FluxParity::Even, Some(barrier)).is_ok());
    }

    #[test]
    fn jt_problems() {
        let p = JTParams::new(1.0, 1.0).unwrap();
        let inner = jt_ring_problem(&p, 1.0, Band::Lower, 256, None).unwrap();
        assert_eq!(inner.flux_parity, FluxParity::Odd);
        let (min_index, _) = inner
            .potential
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(min_index, 0);
        let outer = jt_ring_problem(&p, 3.0, Band::Lower, 256, None).unwrap();
        assert_eq!(outer.flux_parity, FluxParity::Even);
        let linear = jt_ring_problem(&JTParams::new(1.0, 0.0).unwrap(), 1.0, Band::Lower, 64, None).unwrap();
        assert_eq!(linear.flux_parity, FluxParity::Odd);
        assert!(linear.potential.iter().all(|v| (v + 0.5).abs() < 1e-14));
        assert!(jt_ring_problem(&p, 2.0, Band::Lower, 256, None).is_err());
    }
}
