//! Cyclic Jacobi eigensolver for small dense real symmetric matrices.
//!
//! Rotations are applied in a fixed row-major sweep order, so identical input
//! produces bit-identical output.

use nalgebra::{DMatrix, DVector};

use super::EigenError;

/// Asymmetry accepted before a matrix is rejected, relative to `max(1, max|M|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Column `band` of the eigenvector matrix.
    pub fn vector(&self, band: usize) -> DVector<f64> {
        self.vectors.column(band).into_owned()
    }

    /// Distance from `values[band]` to the nearest other eigenvalue.
    pub fn adjacent_gap(&self, band: usize) -> f64 {
        let n = self.values.len();
        let mut gap = f64::INFINITY;
        if band > 0 {
            gap = gap.min(self.values[band] - self.values[band - 1]);
        }
        if band + 1 < n {
            gap = gap.min(self.values[band + 1] - self.values[band]);
        }
        gap
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

/// Validate a candidate Hamiltonian and return its symmetrized copy.
pub fn symmetrized(m: &DMatrix<f64>) -> Result<DMatrix<f64>, EigenError> {
    if !m.is_square() {
        return Err(EigenError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if let Some((i, j)) = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .find(|&(i, j)| !m[(i, j)].is_finite())
    {
        return Err(EigenError::NonFinite { row: i, col: j });
    }
    let scale = m.amax().max(1.0);
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL * scale {
        return Err(EigenError::NonSymmetric { asymmetry: worst });
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Eigendecomposition `M V = V diag(λ)` of a real symmetric matrix, with λ
/// ascending.
pub fn eig_real_symmetric(m: &DMatrix<f64>) -> Result<Eigensystem, EigenError> {
    let mut a = symmetrized(m)?;
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(Eigensystem { values, vectors })
}

// One Jacobi rotation annihilating a[p][q] (Rutishauser's formulation).
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);
    let n = a.nrows();

    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[(r, p)];
            let arq = a[(r, q)];
            let new_p = arp - s * (arq + tau * arp);
            let new_q = arq + s * (arp - tau * arq);
            a[(r, p)] = new_p;
            a[(p, r)] = new_p;
            a[(r, q)] = new_q;
            a[(q, r)] = new_q;
        }
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp - s * (vrq + tau * vrp);
        v[(r, q)] = vrq + s * (vrp - tau * vrq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_symmetric(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&m + m.transpose()) * 0.5
    }

    fn check_contract(m: &DMatrix<f64>, es: &Eigensystem) {
        let n = m.nrows();
        for k in 0..n {
            let v = es.vector(k);
            let res = (m * &v - &v * es.values[k]).amax();
            assert!(res <= 1e-10, "residual {res}");
        }
        let gram = es.vectors.transpose() * &es.vectors;
        assert!((gram - DMatrix::identity(n, n)).amax() <= 1e-10);
        for k in 1..n {
            assert!(es.values[k - 1] <= es.values[k]);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let es = eig_real_symmetric(&m).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-15);
        assert!((es.values[1] - 1.0).abs() < 1e-15);
        check_contract(&m, &es);
    }

    #[test]
    fn diagonal_is_untouched() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 5.0]);
        let es = eig_real_symmetric(&m).unwrap();
        assert_eq!(es.values.as_slice(), &[2.0, 5.0]);
        assert_eq!(es.vectors, DMatrix::identity(2, 2));
    }

    #[test]
    fn sorted_when_diagonal_is_descending() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let es = eig_real_symmetric(&m).unwrap();
        assert_eq!(es.values.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(es.vector(0)[1], 1.0);
    }

    #[test]
    fn random_4x4_reconstruct_100_seeds() {
        for seed in 0..100 {
            let mut rng = StdRng::seed_from_u64(seed);
            let m = random_symmetric(&mut rng, 4);
            let es = eig_real_symmetric(&m).unwrap();
            check_contract(&m, &es);
            assert!((es.reconstruct() - &m).amax() <= 1e-9);
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let es = eig_real_symmetric(&m).unwrap();
        check_contract(&m, &es);
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0]);
        let es = eig_real_symmetric(&m).unwrap();
        check_contract(&m, &es);
        assert!((es.values[0] - 1.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
        assert!((es.values[2] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0 + 1e-9, 0.0]);
        assert!(matches!(
            eig_real_symmetric(&m),
            Err(EigenError::NonSymmetric { .. })
        ));
    }

    #[test]
    fn tolerates_rounding_asymmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0 + 1e-15, 0.0]);
        assert!(eig_real_symmetric(&m).is_ok());
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[f64::NAN, 0.0, 0.0, 1.0]);
        assert!(matches!(
            eig_real_symmetric(&m),
            Err(EigenError::NonFinite { row: 0, col: 0 })
        ));
    }

    #[test]
    fn permutation_leaves_eigenvalues() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_symmetric(&mut rng, 6);
            let perm = [3usize, 0, 5, 1, 4, 2];
            let pm = DMatrix::from_fn(6, 6, |i, j| m[(perm[i], perm[j])]);
            let a = eig_real_symmetric(&m).unwrap();
            let b = eig_real_symmetric(&pm).unwrap();
            assert!((a.values - b.values).amax() <= 1e-12);
        }
    }
}
