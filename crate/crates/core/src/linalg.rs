//! Dense complex LU with partial pivoting.
//!
//! Zero multipliers are skipped during elimination, so matrices that are
//! upper triangular apart from a few subdiagonals factor in `O(k n^2)`.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    /// Row-major; unit lower factor below the diagonal, upper factor on and above.
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &Array2<Complex64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut lu: Vec<Complex64> = a.iter().copied().collect();
        let mut perm: Vec<usize> = (0..n).collect();
        // |re| + |im| is plenty for pivot selection and much cheaper than hypot
        let scale = lu.iter().map(|c| c.l1_norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        // reach[k]: last row that can hold a nonzero in column k at step k.
        // Row swaps stay inside k..=reach[k], so the bound survives pivoting.
        let mut reach: Vec<usize> = (0..n).collect();
        for i in 0..n {
            if let Some(first) = lu[i * n..(i + 1) * n].iter().position(|c| *c != ZERO) {
                reach[first] = reach[first].max(i);
            }
        }
        for k in 1..n {
            reach[k] = reach[k].max(reach[k - 1]);
        }
        for k in 0..n {
            let last = reach[k].max(k);
            let (piv_row, piv_abs) = (k..=last)
                .map(|i| (i, lu[i * n + k].l1_norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs <= scale * 1e-15 {
                return Err(Error::Singular { column: k, pivot: piv_abs });
            }
            if piv_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv_row * n + j);
                }
                perm.swap(k, piv_row);
            }
            let pivot = lu[k * n + k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let prow = &head[k * n + k + 1..k * n + n];
            for i in 0..last - k {
                let row = &mut tail[i * n..(i + 1) * n];
                if row[k] == ZERO {
                    continue;
                }
                let f = row[k] / pivot;
                row[k] = f;
                for (x, &p) in row[k + 1..].iter_mut().zip(prow) {
                    *x -= f * p;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

/// `a * v` for a dense matrix.
pub fn matvec(a: &Array2<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    a.dot(&ArrayView1::from(v)).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pivoting_system() {
        let c = |r: f64, i: f64| Complex64::new(r, i);
        let a = Array2::from_shape_vec(
            (3, 3),
            vec![
                c(0.0, 0.0),
                c(2.0, 1.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(3.0, -1.0),
                c(4.0, 0.0),
                c(1.0, 1.0),
                c(0.0, 2.0),
            ],
        )
        .unwrap();
        let x = vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.0)];
        let b = matvec(&a, &x);
        let got = DenseLu::factor(&a).unwrap().solve(&b);
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Array2::from_elem((2, 2), Complex64::new(1.0, 0.0));
        assert!(matches!(DenseLu::factor(&a), Err(Error::Singular { column: 1, .. })));
    }
}
