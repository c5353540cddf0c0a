//! Eigenvalues of Hermitian tridiagonal and periodic-tridiagonal matrices by
//! bisection on inertia counts.

use num_complex::Complex64;

/// Number of eigenvalues strictly below `x` of the open chain with the
/// given diagonal and off-diagonal moduli squared.
fn chain_count(diagonal: &[f64], bond_sq: &[f64], x: f64, pivmin: f64) -> usize {
    let mut negatives = 0;
    let mut d = diagonal[0] - x;
    for i in 0..diagonal.len() {
        if i > 0 {
            d = diagonal[i] - x - bond_sq[i - 1] / d;
        }
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            negatives += 1;
        }
    }
    negatives
}

/// Lower band of a Hermitian matrix, entries `(i, j)` with `0 ≤ i − j ≤ 3`.
struct HermitianBand {
    n: usize,
    lower: Vec<[Complex64; 4]>,
}

impl HermitianBand {
    fn get(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            if i - j < 4 {
                self.lower[j][i - j]
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            self.get(j, i).conj()
        }
    }

    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        if i >= j {
            self.lower[j][i - j] = v;
        } else {
            self.lower[i][j - i] = v.conj();
        }
    }

    /// `A ← G A G*` with `G = [[c, s], [−s̄, c]]` acting on `(p, p + 1)`,
    /// `s` chosen so that the new `(p + 1, col)` entry vanishes.
    fn rotate_out(&mut self, p: usize, col: usize) {
        let q = p + 1;
        let x = self.get(p, col);
        let y = self.get(q, col);
        if y.norm() == 0.0 {
            return;
        }
        let r = x.norm().hypot(y.norm());
        let (c, s) = if x.norm() == 0.0 {
            (0.0, Complex64::new(1.0, 0.0))
        } else {
            let c = x.norm() / r;
            (c, (x / x.norm()) * y.conj() / r)
        };
        // band of half-width two plus the bulge being chased
        let lo = p.saturating_sub(2);
        let hi = (p + 3).min(self.n - 1);
        for k in lo..=hi {
            if k == p || k == q {
                continue;
            }
            let (ap, aq) = (self.get(p, k), self.get(q, k));
            self.set(p, k, ap * c + s * aq);
            self.set(q, k, -s.conj() * ap + aq * c);
        }
        let (app, aqq, apq) = (self.get(p, p).re, self.get(q, q).re, self.get(p, q));
        // G B G* for the 2×2 block B
        let new_pp = c * c * app + (s * s.conj()).re * aqq + 2.0 * c * (s * apq.conj()).re;
        let new_qq = (s * s.conj()).re * app + c * c * aqq - 2.0 * c * (s * apq.conj()).re;
        let new_pq = -c * s * app + c * c * apq - s * s * apq.conj() + c * s * aqq;
        self.set(p, p, Complex64::new(new_pp, 0.0));
        self.set(q, q, Complex64::new(new_qq, 0.0));
        self.set(p, q, new_pq);
        self.set(q, col, Complex64::new(0.0, 0.0));
    }
}

/// Diagonal and squared off-diagonal moduli of a tridiagonal matrix unitarily
/// similar to the closed ring.
///
/// Visiting the sites in the order `0, 1, n−1, 2, n−2, …` puts every ring
/// bond within distance two of the diagonal; Givens rotations then remove
/// the outer band, chasing each bulge off the end.
fn ring_to_tridiagonal(diagonal: &[f64], bonds: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let n = diagonal.len();
    let mut order = Vec::with_capacity(n);
    order.push(0);
    let (mut up, mut down) = (1, n - 1);
    while up <= down {
        order.push(up);
        if down != up {
            order.push(down);
        }
        up += 1;
        down -= 1;
    }
    let mut position = vec![0; n];
    for (pos, &site) in order.iter().enumerate() {
        position[site] = pos;
    }
    let mut band = HermitianBand {
        n,
        lower: vec![[Complex64::new(0.0, 0.0); 4]; n],
    };
    for (site, &d) in diagonal.iter().enumerate() {
        band.set(position[site], position[site], Complex64::new(d, 0.0));
    }
    for (site, &b) in bonds.iter().enumerate() {
        let (i, j) = (position[site], position[(site + 1) % n]);
        band.set(i, j, band.get(i, j) + b);
    }

    for j in 0..n.saturating_sub(2) {
        band.rotate_out(j + 1, j);
        let mut col = j + 1;
        while col + 3 < n {
            band.rotate_out(col + 2, col);
            col += 2;
        }
    }
    let diag = (0..n).map(|i| band.get(i, i).re).collect();
    let off = (0..n - 1).map(|i| band.get(i + 1, i).norm_sqr()).collect();
    (diag, off)
}

/// Lowest `count` eigenvalues, ascending.
pub(super) fn lowest_eigenvalues(
    diagonal: &[f64],
    bonds: &[Complex64],
    closed: bool,
    count: usize,
) -> Vec<f64> {
    let n = diagonal.len();
    let count = count.min(n);
    if n == 1 {
        return diagonal[..count].to_vec();
    }
    let bond_sq: Vec<f64> = bonds.iter().map(|b| b.norm_sqr()).collect();
    let max_bond_sq = bond_sq.iter().copied().fold(0.0, f64::max);
    let pivmin = f64::MIN_POSITIVE * max_bond_sq.max(1.0);

    // Gershgorin enclosure
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 || closed {
            bonds[(i + n - 1) % n].norm()
        } else {
            0.0
        };
        let right = if i + 1 < n || closed {
            bonds[i % bonds.len()].norm()
        } else {
            0.0
        };
        lo = lo.min(diagonal[i] - left - right);
        hi = hi.max(diagonal[i] + left + right);
    }
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) * n as f64;
    lo -= pad;
    hi += pad;

    let (diagonal, bond_sq) = if closed {
        ring_to_tridiagonal(diagonal, bonds)
    } else {
        (diagonal.to_vec(), bond_sq)
    };
    let below = |x: f64| chain_count(&diagonal, &bond_sq, x, pivmin);

    (0..count)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            loop {
                let mid = 0.5 * (a + b);
                let tol = 2.0 * f64::EPSILON * a.abs().max(b.abs()) + pivmin;
                if b - a <= tol || mid <= a || mid >= b {
                    break 0.5 * (a + b);
                }
                if below(mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
        })
        .collect()
}
