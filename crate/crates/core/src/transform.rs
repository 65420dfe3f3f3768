//! Discrete Volterra transform `w = (I - U) u` with `(U u)(x) = int_x^L kappa(x, y) u(y) dy`
//! discretized by the composite trapezoid rule.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, StateVector};
use crate::kernelgen::{Kernel, KernelRole};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct TransformMatrix {
    entries: Array2<Complex64>,
    role: Option<KernelRole>,
    grid: Grid,
}

impl TransformMatrix {
    /// Row `i` is `h [k(x_i,x_i)/2, k(x_i,x_{i+1}), ..., k(x_i,x_M)/2]` on columns `i..M`.
    pub fn build(kernel: &Kernel, grid: &Grid) -> Result<Self> {
        if (kernel.length() - grid.length()).abs() > 1e-12 * grid.length() {
            return Err(Error::GridMismatch(format!(
                "kernel on [0, {}] but grid on [0, {}]",
                kernel.length(),
                grid.length()
            )));
        }
        let m = grid.nodes();
        let h = grid.spacing();
        let xs = grid.xs();
        let mut entries = Array2::from_elem((m, m), ZERO);
        for i in 0..m - 1 {
            for j in i..m {
                let w = if j == i || j == m - 1 { 0.5 * h } else { h };
                entries[[i, j]] = kernel.eval_unchecked(xs[i], xs[j], 0, 0) * w;
            }
        }
        Ok(Self {
            entries,
            role: Some(kernel.role()),
            grid: *grid,
        })
    }

    /// The transform of the zero kernel.
    pub fn identity(grid: &Grid) -> Self {
        let m = grid.nodes();
        Self {
            entries: Array2::from_elem((m, m), ZERO),
            role: None,
            grid: *grid,
        }
    }

    /// Build from explicit samples `kappa(x_i, x_j)`; used for quadrature checks.
    pub fn from_samples(grid: &Grid, kappa: impl Fn(f64, f64) -> Complex64) -> Self {
        let m = grid.nodes();
        let h = grid.spacing();
        let xs = grid.xs();
        let mut entries = Array2::from_elem((m, m), ZERO);
        for i in 0..m - 1 {
            for j in i..m {
                let w = if j == i || j == m - 1 { 0.5 * h } else { h };
                entries[[i, j]] = kappa(xs[i], xs[j]) * w;
            }
        }
        Self {
            entries,
            role: None,
            grid: *grid,
        }
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn role(&self) -> Option<KernelRole> {
        self.role
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `U v`.
    pub fn apply_upsilon(&self, v: &[Complex64]) -> Vec<Complex64> {
        let m = v.len();
        let e = self.entries.as_slice().expect("standard layout");
        (0..m)
            .map(|i| e[i * m + i..(i + 1) * m].iter().zip(&v[i..]).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `(I - U) v` on a raw vector.
    pub fn forward_values(&self, v: &[Complex64]) -> Vec<Complex64> {
        let uv = self.apply_upsilon(v);
        v.iter().zip(uv).map(|(a, b)| a - b).collect()
    }

    /// Back substitution for `(I - U) u = w`.
    pub fn invert_values(&self, w: &[Complex64]) -> Vec<Complex64> {
        let m = w.len();
        let mut u = vec![ZERO; m];
        let e = self.entries.as_slice().expect("standard layout");
        for i in (0..m).rev() {
            let row = &e[i * m..(i + 1) * m];
            let acc: Complex64 = row[i + 1..].iter().zip(&u[i + 1..]).map(|(a, b)| a * b).sum();
            u[i] = (w[i] + acc) / (Complex64::new(1.0, 0.0) - row[i]);
        }
        u
    }

    pub fn forward(&self, u: &StateVector) -> Result<StateVector> {
        self.check(u)?;
        StateVector::new(self.forward_values(u.values()), *u.grid(), u.family())
    }

    pub fn invert(&self, w: &StateVector) -> Result<StateVector> {
        self.check(w)?;
        StateVector::new(self.invert_values(w.values()), *w.grid(), w.family())
    }

    /// The recursion `v <- U (v + w)`, `u = w + v`. `U` is strictly upper
    /// triangular so this terminates after at most `M` sweeps.
    pub fn invert_fixed_point(&self, w: &[Complex64], tol: f64, max_iter: usize) -> Result<(Vec<Complex64>, usize)> {
        let mut v = vec![ZERO; w.len()];
        for it in 1..=max_iter {
            let sum: Vec<Complex64> = v.iter().zip(w).map(|(a, b)| a + b).collect();
            let next = self.apply_upsilon(&sum);
            let change = next.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            v = next;
            if change <= tol {
                return Ok((w.iter().zip(&v).map(|(a, b)| a + b).collect(), it));
            }
        }
        Err(Error::InnerNonConvergence {
            step: 0,
            iterations: max_iter,
            correction: f64::NAN,
        })
    }

    fn check(&self, s: &StateVector) -> Result<()> {
        if s.grid() != &self.grid {
            return Err(Error::GridMismatch("state and transform live on different grids".into()));
        }
        Ok(())
    }

    /// `h max_i sum_j |U_ij| / h`-style row-sum bound on the operator norm.
    pub fn row_sum_bound(&self) -> f64 {
        self.entries
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|c| c.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Estimate of `||(I - U)^{-1}||` in the discrete L2 norm, by power
    /// iteration on `(I - U)^{-H} (I - U)^{-1}`.
    pub fn inverse_norm_estimate(&self, iterations: usize) -> f64 {
        let m = self.grid.nodes();
        // a deterministic start with every mode present
        let mut v: Vec<Complex64> = (0..m).map(|i| Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.0)).collect();
        let mut sigma2 = 0.0;
        for _ in 0..iterations {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            let y = self.invert_values(&v);
            let z = self.invert_adjoint(&y);
            sigma2 = z.iter().zip(&v).map(|(a, b)| (a * b.conj()).re).sum::<f64>();
            v = z;
        }
        sigma2.max(0.0).sqrt()
    }

    /// Solve `(I - U)^H x = y` (lower triangular).
    fn invert_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let m = y.len();
        let mut x = vec![ZERO; m];
        for i in 0..m {
            let mut acc = y[i];
            for j in 0..i {
                acc += self.entries[[j, i]].conj() * x[j];
            }
            x[i] = acc / (Complex64::new(1.0, 0.0) - self.entries[[i, i]].conj());
        }
        x
    }
}

/// `g0 = int_0^L kappa(0, y) u(y) dy` by the trapezoid rule.
pub fn control_signal(kernel: &Kernel, state: &StateVector) -> Complex64 {
    let g = state.grid();
    let m = g.nodes();
    let h = g.spacing();
    state
        .values()
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let w = if j == 0 || j == m - 1 { 0.5 * h } else { h };
            kernel.eval_unchecked(0.0, g.x(j), 0, 0) * *u * w
        })
        .sum()
}

/// `||kappa||` in `L2` of the triangle, by the trapezoid rule on the grid.
pub fn kernel_l2_norm(kernel: &Kernel, grid: &Grid) -> f64 {
    let m = grid.nodes();
    let h = grid.spacing();
    let xs = grid.xs();
    let w = |j: usize| if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
    let mut acc = 0.0;
    for i in 0..m {
        for j in i..m {
            // the diagonal carries half weight in the triangle
            let wd = if i == j { 0.5 } else { 1.0 };
            acc += w(i) * w(j) * wd * kernel.eval_unchecked(xs[i], xs[j], 0, 0).norm_sqr();
        }
    }
    (acc * h * h).sqrt()
}

/// Decay-transfer constant `c_k = ||(I - U)^{-1}|| (1 + ||k||)`.
pub fn decay_constant(transform: &TransformMatrix, kernel: &Kernel) -> f64 {
    transform.inverse_norm_estimate(100) * (1.0 + kernel_l2_norm(kernel, transform.grid()))
}
