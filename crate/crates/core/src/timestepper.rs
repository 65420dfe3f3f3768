//! Crank–Nicolson integration of `w_t + A w = f` (linear target) and of the
//! nonlinear target `w_t + A w = i (I - U) N((I - U)^{-1} w)`,
//! `N(u) = |u|^p u`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{l2_norm, SpatialOperator, StateVector};
use crate::linalg::DenseLu;
use crate::params::PhysicsParams;
use crate::record::{Linearization, NonlinearSolveReport, RunRecord, Snapshot};
use crate::transform::TransformMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Regularization of `|z|^{p-1}` inside the Jacobian.
const JACOBIAN_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    steps: usize,
    t_final: f64,
    dt: f64,
}

impl TimeGrid {
    /// `steps` time levels including `t = 0`, so `dt = T / (steps - 1)`.
    pub fn new(steps: usize, t_final: f64) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Config(format!("need at least 2 time levels, got {steps}")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Config("final time must be positive".into()));
        }
        Ok(Self {
            steps,
            t_final,
            dt: t_final / (steps - 1) as f64,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t(&self, n: usize) -> f64 {
        if n + 1 == self.steps {
            self.t_final
        } else {
            n as f64 * self.dt
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.steps).map(|n| self.t(n)).collect()
    }

    /// Index of the level closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.steps - 1)
    }
}

type SparseRows = Vec<Vec<(usize, Complex64)>>;

fn sparse_rows(a: &Array2<Complex64>) -> SparseRows {
    a.rows()
        .into_iter()
        .map(|r| r.iter().enumerate().filter(|(_, c)| **c != ZERO).map(|(j, c)| (j, *c)).collect())
        .collect()
}

fn sparse_mul(rows: &SparseRows, v: &[Complex64]) -> Vec<Complex64> {
    rows.iter().map(|r| r.iter().map(|&(j, c)| c * v[j]).sum()).collect()
}

/// Factored `(I + dt/2 A)` and sparse `(I - dt/2 A)`, constraint rows kept
/// as-is on the left and zeroed on the right.
#[derive(Clone, Debug)]
pub struct LinearStepper {
    lhs: Array2<Complex64>,
    lu: DenseLu,
    rhs: SparseRows,
    interior: Vec<bool>,
    dt: f64,
}

impl LinearStepper {
    pub fn new(op: &SpatialOperator, dt: f64) -> Result<Self> {
        Self::assemble(op, dt, None)
    }

    /// Stepper for `w_t + (A + a b^T) w = f`, the rank-one term acting on
    /// interior rows only. Used for trace-injection feedback.
    pub fn with_rank_one(op: &SpatialOperator, dt: f64, a: &[Complex64], b: &[(usize, f64)]) -> Result<Self> {
        Self::assemble(op, dt, Some((a, b)))
    }

    fn assemble(op: &SpatialOperator, dt: f64, rank_one: Option<(&[Complex64], &[(usize, f64)])>) -> Result<Self> {
        let m = op.matrix.nrows();
        let interior: Vec<bool> = (0..m).map(|i| !op.is_constraint_row(i)).collect();
        let mut a = op.matrix.clone();
        if let Some((col, row)) = rank_one {
            for i in (0..m).filter(|&i| interior[i]) {
                for &(j, w) in row {
                    a[[i, j]] += col[i] * w;
                }
            }
        }
        let half = Complex64::new(0.5 * dt, 0.0);
        let mut lhs = a.clone();
        let mut rhs = Array2::from_elem((m, m), ZERO);
        for i in 0..m {
            if !interior[i] {
                continue;
            }
            for j in 0..m {
                let aij = a[[i, j]];
                let id = if i == j { ONE } else { ZERO };
                lhs[[i, j]] = id + half * aij;
                rhs[[i, j]] = id - half * aij;
            }
        }
        let lu = DenseLu::factor(&lhs)?;
        Ok(Self {
            lhs,
            lu,
            rhs: sparse_rows(&rhs),
            interior,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn rhs(&self, w: &[Complex64], forcing: Option<(&[Complex64], &[Complex64])>) -> Vec<Complex64> {
        let mut b = sparse_mul(&self.rhs, w);
        if let Some((f0, f1)) = forcing {
            for i in (0..b.len()).filter(|&i| self.interior[i]) {
                b[i] += (f0[i] + f1[i]) * (0.5 * self.dt);
            }
        }
        b
    }

    /// One step of `(I + dt/2 A) w1 = (I - dt/2 A) w0 + dt/2 (f0 + f1)`.
    pub fn step(&self, w: &[Complex64], forcing: Option<(&[Complex64], &[Complex64])>) -> Vec<Complex64> {
        self.lu.solve(&self.rhs(w, forcing))
    }

    /// Max-norm residual of the discrete equation for a computed step.
    pub fn residual(&self, w0: &[Complex64], w1: &[Complex64], forcing: Option<(&[Complex64], &[Complex64])>) -> f64 {
        let b = self.rhs(w0, forcing);
        let lw = crate::linalg::matvec(&self.lhs, w1);
        lw.iter().zip(&b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Inner-iteration settings for the nonlinear step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerSolve {
    pub scheme: Linearization,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerSolve {
    fn default() -> Self {
        Self {
            scheme: Linearization::Taylor,
            tol: 1e-10,
            max_iter: 25,
        }
    }
}

/// Crank–Nicolson for the nonlinear target system.
///
/// Each inner iteration solves for the correction in plant variables,
/// `du = (I - U)^{-1} dw`. With that substitution the system matrix
/// `(I + dt/2 A)(I - U) - i dt/2 (I - U) D` has only one or two subdiagonals,
/// which keeps the per-iteration factorization at `O(M^2)`.
pub struct NonlinearStepper<'a> {
    transform: &'a TransformMatrix,
    lhs: SparseRows,
    lhs_t: Array2<Complex64>,
    rhs: SparseRows,
    interior: Vec<bool>,
    power: f64,
    solve: InnerSolve,
    dt: f64,
    h: f64,
}

impl<'a> NonlinearStepper<'a> {
    pub fn new(op: &SpatialOperator, transform: &'a TransformMatrix, power: f64, dt: f64, solve: InnerSolve) -> Result<Self> {
        if !(power > 0.0 && power <= 4.0) {
            return Err(Error::Config(format!("nonlinearity exponent must lie in (0, 4], got {power}")));
        }
        if solve.scheme == Linearization::Taylor && power < 1.0 {
            log::warn!("Taylor linearization with p = {power} < 1; Picard is the intended scheme");
        }
        let lin = LinearStepper::new(op, dt)?;
        let lhs = sparse_rows(&lin.lhs);
        let t = transform.entries();
        let m = t.nrows();
        // (I + dt/2 A)(I - U), row by row through the sparse left factor
        let mut lhs_t = Array2::from_elem((m, m), ZERO);
        for (i, row) in lhs.iter().enumerate() {
            for &(k, c) in row {
                lhs_t[[i, k]] += c;
                for j in k..m {
                    lhs_t[[i, j]] -= c * t[[k, j]];
                }
            }
        }
        Ok(Self {
            transform,
            lhs,
            lhs_t,
            rhs: lin.rhs,
            interior: lin.interior,
            power,
            solve,
            dt,
            h: transform.grid().spacing(),
        })
    }

    fn nonlinearity(&self, u: &[Complex64]) -> Vec<Complex64> {
        u.iter().map(|z| *z * z.norm().powf(self.power)).collect()
    }

    fn jacobian_diag(&self, u: &[Complex64]) -> Vec<Complex64> {
        let p = self.power;
        u.iter()
            .map(|z| {
                let frozen = Complex64::new(z.norm().powf(p), 0.0);
                match self.solve.scheme {
                    Linearization::Picard => frozen,
                    Linearization::Taylor => {
                        frozen + *z * (p * (z.norm_sqr() + JACOBIAN_EPS).powf(0.5 * (p - 1.0)))
                    }
                }
            })
            .collect()
    }

    /// Advance one step. Returns the new state, the inner iteration count and
    /// the size of the last correction.
    pub fn step(&self, w: &[Complex64], step: usize) -> Result<(Vec<Complex64>, usize, f64)> {
        let m = w.len();
        let c = Complex64::new(0.0, 0.5 * self.dt);
        let t = self.transform.entries();
        let u0 = self.transform.invert_values(w);
        let n0 = self.transform.forward_values(&self.nonlinearity(&u0));
        let mut base = sparse_mul(&self.rhs, w);
        for i in (0..m).filter(|&i| self.interior[i]) {
            base[i] += c * n0[i];
        }

        let mut wk = w.to_vec();
        let mut uk = u0;
        let mut correction = f64::INFINITY;
        for k in 1..=self.solve.max_iter {
            let nk = self.transform.forward_values(&self.nonlinearity(&uk));
            let pw = sparse_mul(&self.lhs, &wk);
            let res: Vec<Complex64> = (0..m)
                .map(|i| if self.interior[i] { base[i] + c * nk[i] - pw[i] } else { -pw[i] })
                .collect();
            let d = self.jacobian_diag(&uk);
            let mut s = self.lhs_t.clone();
            for i in (0..m).filter(|&i| self.interior[i]) {
                // row i of (I - U) D, upper triangular
                s[[i, i]] -= c * (ONE - t[[i, i]]) * d[i];
                for j in i + 1..m {
                    s[[i, j]] += c * t[[i, j]] * d[j];
                }
            }
            let du = DenseLu::factor(&s)?.solve(&res);
            let dw = self.transform.forward_values(&du);
            for i in 0..m {
                wk[i] += dw[i];
                uk[i] += du[i];
            }
            correction = l2_norm(&dw, self.h);
            if !correction.is_finite() {
                return Err(Error::NonFinite { step });
            }
            if correction <= self.solve.tol {
                return Ok((wk, k, correction));
            }
        }
        Err(Error::InnerNonConvergence {
            step,
            iterations: self.solve.max_iter,
            correction,
        })
    }
}

/// Options for [`run_target`].
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// `None` for the linear equation.
    pub nonlinear: Option<InnerSolve>,
    pub snapshot_times: Vec<f64>,
}

/// Final states of a target run alongside the record.
#[derive(Clone, Debug)]
pub struct TargetRun {
    pub record: RunRecord,
    pub w_final: Vec<Complex64>,
    pub u_final: Vec<Complex64>,
}

/// Forcing `f(t_n)` on the grid, for the linear target only.
pub type Forcing<'a> = &'a dyn Fn(usize) -> Vec<Complex64>;

/// Integrate the target system from `w0` and record `||w||`, `||u||` with
/// `u = (I - U)^{-1} w`, and the boundary feedback `|g0| = |(U u)(0)|`.
pub fn run_target(
    w0: &StateVector,
    params: &PhysicsParams,
    time: &TimeGrid,
    transform: &TransformMatrix,
    opts: &RunOptions,
    forcing: Option<Forcing<'_>>,
) -> Result<TargetRun> {
    let grid = *w0.grid();
    if transform.grid() != &grid {
        return Err(Error::GridMismatch("initial state and transform grids differ".into()));
    }
    let op = crate::grid::build_operator(&grid, params, true)?;
    let h = grid.spacing();
    let mut rec = RunRecord::with_columns(time.times(), &["l2_u", "l2_w", "abs_g0"]);
    let snap_steps: Vec<(usize, f64)> = opts
        .snapshot_times
        .iter()
        .map(|&t| (time.nearest(t), t))
        .collect();

    let mut w = w0.values().to_vec();
    let mut u = transform.invert_values(&w);
    let record = |n: usize, w: &[Complex64], u: &[Complex64], rec: &mut RunRecord| {
        rec.columns[0].1.push(l2_norm(u, h));
        rec.columns[1].1.push(l2_norm(w, h));
        rec.columns[2].1.push((u[0] - w[0]).norm());
        for &(s, t) in &snap_steps {
            if s == n {
                rec.snapshots.push(Snapshot {
                    field: "u".into(),
                    t,
                    values: u.to_vec(),
                });
                rec.snapshots.push(Snapshot {
                    field: "w".into(),
                    t,
                    values: w.to_vec(),
                });
            }
        }
    };
    record(0, &w, &u, &mut rec);

    match (opts.nonlinear, params.power) {
        (Some(solve), Some(power)) => {
            if forcing.is_some() {
                return Err(Error::Config("forcing is only supported for the linear target".into()));
            }
            let stepper = NonlinearStepper::new(&op, transform, power, time.dt(), solve)?;
            let mut report = NonlinearSolveReport {
                scheme: solve.scheme,
                iterations: Vec::with_capacity(time.steps()),
                corrections: Vec::with_capacity(time.steps()),
            };
            for n in 1..time.steps() {
                let (next, iters, corr) = stepper.step(&w, n)?;
                w = next;
                u = transform.invert_values(&w);
                report.iterations.push(iters);
                report.corrections.push(corr);
                record(n, &w, &u, &mut rec);
            }
            rec.nonlinear = Some(report);
        }
        (None, _) | (_, None) => {
            let stepper = LinearStepper::new(&op, time.dt())?;
            let mut f_prev = forcing.map(|f| f(0));
            for n in 1..time.steps() {
                let f_next = forcing.map(|f| f(n));
                let pair = f_prev.as_deref().zip(f_next.as_deref());
                w = stepper.step(&w, pair);
                if w.iter().any(|z| !z.is_finite()) {
                    return Err(Error::NonFinite { step: n });
                }
                u = transform.invert_values(&w);
                record(n, &w, &u, &mut rec);
                f_prev = f_next;
            }
        }
    }
    Ok(TargetRun {
        record: rec,
        w_final: w,
        u_final: u,
    })
}
