use std::f64::consts::TAU;

use berryline::jahnteller::Band;
use berryline::ringspectrum::{build_ring_hamiltonian, jt_ring_problem, spectrum, Barrier, Boundary};
use berryline::{FluxParity, JTParams, RingProblem};
use proptest::prelude::*;

fn parity() -> impl Strategy<Value = FluxParity> {
    prop_oneof![Just(FluxParity::Even), Just(FluxParity::Odd)]
}

/// Smooth periodic potential from a few random Fourier modes.
fn potential(m: usize, coeffs: &[f64]) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * ((n + 1) as f64 * t + 0.3 * n as f64).cos())
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_flux_twist_is_pure_gauge(
        parity in parity(),
        coeffs in prop::collection::vec(-2.0..2.0f64, 1..4),
        raw in prop::collection::vec(-3.0..3.0f64, 256),
    ) {
        let p = RingProblem::new(1.3, potential(256, &coeffs), parity, None).unwrap();
        let h = build_ring_hamiltonian(&p).unwrap();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let phases: Vec<f64> = raw.iter().map(|x| x - mean).collect();
        let a = h.lowest_eigenvalues(16);
        let b = h.twisted(&phases).lowest_eigenvalues(16);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10, "{} vs {}", x, y);
        }
    }

    #[test]
    fn any_barrier_erases_parity(
        coeffs in prop::collection::vec(-2.0..2.0f64, 1..4),
        start in 0.0..TAU,
        width in 0.02..3.0f64,
        m in 64usize..600,
    ) {
        let barrier = Some(Barrier::new(start, width).unwrap());
        let even = RingProblem::new(1.0, potential(m, &coeffs), FluxParity::Even, barrier).unwrap();
        let odd = RingProblem { flux_parity: FluxParity::Odd, ..even.clone() };
        let (a, b) = (spectrum(&even, 10).unwrap(), spectrum(&odd, 10).unwrap());
        prop_assert_eq!(a.boundary, Boundary::Dirichlet);
        for (x, y) in a.levels.iter().zip(&b.levels) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn flat_levels_pair_up(parity in parity(), r0 in 0.5..3.0f64, m in 64usize..1024) {
        let levels = spectrum(&RingProblem::flat(r0, 0.0, m, parity, None).unwrap(), 12).unwrap().levels;
        let tol = 1e-9 * levels.last().unwrap().max(1.0);
        let nonzero: Vec<f64> = match parity {
            FluxParity::Even => {
                prop_assert!(levels[0].abs() < tol);
                levels[1..11].to_vec()
            }
            FluxParity::Odd => levels[..12].to_vec(),
        };
        for pair in nonzero.chunks(2) {
            prop_assert!((pair[0] - pair[1]).abs() < tol, "{:?}", pair);
        }
        prop_assert!(levels.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn flat_ring_converges_at_second_order() {
    let exact = |m: f64| 0.5 * m * m;
    for (parity, ms) in [
        (FluxParity::Odd, [0.5, 0.5, 1.5, 1.5, 2.5, 2.5]),
        (FluxParity::Even, [1.0, 1.0, 2.0, 2.0, 3.0, 3.0]),
    ] {
        let skip = usize::from(parity == FluxParity::Even);
        let at = |m| {
            spectrum(&RingProblem::flat(1.0, 0.0, m, parity, None).unwrap(), 7)
                .unwrap()
                .levels
        };
        let (coarse, fine) = (at(1024), at(2048));
        for (j, &mq) in ms.iter().enumerate() {
            let e = exact(mq);
            let ratio = (coarse[j + skip] - e) / (fine[j + skip] - e);
            assert!((3.5..=4.5).contains(&ratio), "{parity:?} m={mq}: ratio {ratio}");
            assert!((coarse[j + skip] - e).abs() / e <= 1e-4);
        }
    }
}

#[test]
fn kinetic_prefactor_scales_with_radius() {
    let at = |r0| {
        spectrum(
            &RingProblem::flat(r0, 0.0, 2048, FluxParity::Odd, None).unwrap(),
            1,
        )
        .unwrap()
        .levels[0]
    };
    let (one, two) = (at(1.0), at(2.0));
    assert!((one / two - 4.0).abs() < 1e-12);
    assert!((one - 0.125).abs() / 0.125 < 1e-5);
}

#[test]
fn jahn_teller_sheets_pick_parity_from_nodes() {
    let p = JTParams::new(1.0, 1.0).unwrap();
    let inside = jt_ring_problem(&p, 1.0, Band::Lower, 258, None).unwrap();
    let outside = jt_ring_problem(&p, 3.0, Band::Lower, 256, None).unwrap();
    assert_eq!(inside.flux_parity, FluxParity::Odd);
    assert_eq!(outside.flux_parity, FluxParity::Even);
    assert_eq!(inside.boundary(), Boundary::Antiperiodic);
    // the sheet potential has period 2π/3
    let v = &inside.potential;
    for j in 0..v.len() {
        assert!((v[j] - v[(j + 86) % 258]).abs() < 1e-12);
    }
    assert!(jt_ring_problem(&p, 2.0, Band::Upper, 256, None).is_err());
}
