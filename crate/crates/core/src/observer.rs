//! Output-feedback co-simulation: error system, observer target, and the
//! reconstructed plant `u = u_hat + u_tilde`.
//!
//! Sign convention: `u_tilde = u - u_hat`. With `tau` the measured trace
//! (`u_xx(L)` for family A, `u(L)` for family B) the error obeys
//! `i u~_t + L u~ + p1 tau(u~) = 0` and the observer target
//! `i w^_t + L w^ + i r w^ - q tau(u~) = 0`, `q = (I - U_k) p1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{build_operator, l2_norm, trace_uxx_l_weights, Grid, StateVector};
use crate::kernelgen::{observer_kernel, solve_kernel, Kernel, SolveOptions};
use crate::params::{BcFamily, PhysicsParams};
use crate::record::{RunRecord, Snapshot};
use crate::timestepper::{run_target, LinearStepper, RunOptions, TimeGrid};
use crate::transform::TransformMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Weights of the measured trace on the grid.
pub fn trace_weights(family: BcFamily, grid: &Grid) -> Vec<(usize, f64)> {
    match family {
        BcFamily::A => trace_uxx_l_weights(grid.nodes(), grid.spacing()).to_vec(),
        BcFamily::B => vec![(grid.nodes() - 1, 1.0)],
    }
}

fn apply_weights(w: &[(usize, f64)], v: &[Complex64]) -> Complex64 {
    w.iter().map(|&(j, c)| v[j] * c).sum()
}

#[derive(Clone, Debug)]
pub struct ErrorRun {
    pub record: RunRecord,
    /// Measured trace of `u_tilde` at every time level.
    pub traces: Vec<Complex64>,
    /// Full states, kept only on request.
    pub states: Option<Vec<Vec<Complex64>>>,
}

/// Crank–Nicolson for the error system with the trace injection folded into
/// the implicit matrix as a rank-one term, `u~_t + (A0 - i p1 tau^T) u~ = 0`.
pub fn run_error(
    u_tilde0: &StateVector,
    params: &PhysicsParams,
    time: &TimeGrid,
    gain: &[Complex64],
    keep_states: bool,
) -> Result<ErrorRun> {
    let grid = *u_tilde0.grid();
    grid.check_len(gain.len())?;
    let op = build_operator(&grid, params, false)?;
    let weights = trace_weights(params.family, &grid);
    let a: Vec<Complex64> = gain.iter().map(|g| -I * g).collect();
    let stepper = LinearStepper::with_rank_one(&op, time.dt(), &a, &weights)?;
    let h = grid.spacing();

    let mut rec = RunRecord::with_columns(time.times(), &["l2_utilde"]);
    let mut v = u_tilde0.values().to_vec();
    let mut traces = Vec::with_capacity(time.steps());
    let mut states = keep_states.then(|| Vec::with_capacity(time.steps()));
    for n in 0..time.steps() {
        if n > 0 {
            v = stepper.step(&v, None);
            if v.iter().any(|z| !z.is_finite()) {
                return Err(Error::NonFinite { step: n });
            }
        }
        rec.columns[0].1.push(l2_norm(&v, h));
        traces.push(apply_weights(&weights, &v));
        if let Some(s) = states.as_mut() {
            s.push(v.clone());
        }
    }
    Ok(ErrorRun { record: rec, traces, states })
}

/// The error computed through its own target: `w~` evolves under the damped
/// target and `u~ = (I - U_p) w~`. Only exact for family A; for family B the
/// reflected kernel cannot meet every boundary condition of the observer
/// kernel problem, so this serves as a cross-check there.
pub fn run_error_target_route(
    u_tilde0: &StateVector,
    params: &PhysicsParams,
    time: &TimeGrid,
    p_transform: &TransformMatrix,
) -> Result<RunRecord> {
    let w0 = p_transform.invert(u_tilde0)?;
    let h = u_tilde0.grid().spacing();
    let op = build_operator(u_tilde0.grid(), params, true)?;
    let stepper = LinearStepper::new(&op, time.dt())?;
    let mut rec = RunRecord::with_columns(time.times(), &["l2_utilde", "l2_wtilde"]);
    let mut w = w0.values().to_vec();
    for n in 0..time.steps() {
        if n > 0 {
            w = stepper.step(&w, None);
        }
        let u = p_transform.forward_values(&w);
        rec.columns[0].1.push(l2_norm(&u, h));
        rec.columns[1].1.push(l2_norm(&w, h));
    }
    Ok(rec)
}

/// Observer target driven by the stored trace series; the record's `l2_u`
/// column is `||u_hat||` and `l2_w` is `||w_hat||`.
pub fn run_observer_target(
    w_hat0: &StateVector,
    traces: &[Complex64],
    gain_transformed: &[Complex64],
    params: &PhysicsParams,
    time: &TimeGrid,
    control: &TransformMatrix,
    opts: &RunOptions,
) -> Result<crate::timestepper::TargetRun> {
    if traces.len() != time.steps() {
        return Err(Error::GridMismatch(format!(
            "{} trace samples for {} time levels",
            traces.len(),
            time.steps()
        )));
    }
    w_hat0.grid().check_len(gain_transformed.len())?;
    let forcing = |n: usize| -> Vec<Complex64> { gain_transformed.iter().map(|q| -I * q * traces[n]).collect() };
    run_target(w_hat0, params, time, control, opts, Some(&forcing))
}

#[derive(Clone, Debug)]
pub struct ObserverRun {
    /// Columns `l2_u`, `l2_uhat`, `l2_utilde`, `l2_what`, `abs_g0`, `re_trace`, `im_trace`.
    pub record: RunRecord,
    pub gain: Vec<Complex64>,
    pub gain_transformed: Vec<Complex64>,
    pub control: Kernel,
    pub observer: Kernel,
    /// Largest `| ||u - u_hat|| - ||u_tilde|| |` over all levels.
    pub split_defect: f64,
}

/// Build both kernels, run the error system, then the observer target, and
/// assemble `u = u_hat + u_tilde`.
pub fn run_plant_observer(
    u0: &StateVector,
    u_hat0: &StateVector,
    params: &PhysicsParams,
    time: &TimeGrid,
    kernel_opts: &SolveOptions,
    snapshot_times: &[f64],
) -> Result<ObserverRun> {
    let control = solve_kernel(params, kernel_opts)?;
    let observer = observer_kernel(params, kernel_opts)?;
    run_plant_observer_with(u0, u_hat0, params, time, control, observer, snapshot_times)
}

/// As [`run_plant_observer`] with prebuilt kernels.
pub fn run_plant_observer_with(
    u0: &StateVector,
    u_hat0: &StateVector,
    params: &PhysicsParams,
    time: &TimeGrid,
    control: Kernel,
    observer: Kernel,
    snapshot_times: &[f64],
) -> Result<ObserverRun> {
    let grid = *u0.grid();
    if u_hat0.grid() != &grid {
        return Err(Error::GridMismatch("plant and observer initial states differ in grid".into()));
    }
    let h = grid.spacing();
    let u_tilde0: Vec<Complex64> = u0.values().iter().zip(u_hat0.values()).map(|(a, b)| a - b).collect();
    let u_tilde0 = StateVector::new(u_tilde0, grid, params.family)?;

    let gain = observer.observer_gain(&grid.xs())?;
    let t_control = TransformMatrix::build(&control, &grid)?;
    let gain_transformed = t_control.forward_values(&gain);

    let err = run_error(&u_tilde0, params, time, &gain, true)?;
    let w_hat0 = t_control.forward(u_hat0)?;
    // Same stepping as run_observer_target, done in lockstep with the stored
    // error states so u = u_hat + u_tilde is available at every level.
    let states = err.states.as_ref().expect("error states kept");
    let op = build_operator(&grid, params, true)?;
    let stepper = LinearStepper::new(&op, time.dt())?;
    let forcing = |n: usize| -> Vec<Complex64> { gain_transformed.iter().map(|q| -I * q * err.traces[n]).collect() };

    let mut rec = RunRecord::with_columns(
        time.times(),
        &["l2_u", "l2_uhat", "l2_utilde", "l2_what", "abs_g0", "re_trace", "im_trace"],
    );
    let snaps: Vec<(usize, f64)> = snapshot_times.iter().map(|&t| (time.nearest(t), t)).collect();
    let mut w_hat = w_hat0.values().to_vec();
    let mut f_prev = forcing(0);
    let mut split_defect = 0f64;
    for n in 0..time.steps() {
        if n > 0 {
            let f_next = forcing(n);
            w_hat = stepper.step(&w_hat, Some((&f_prev, &f_next)));
            f_prev = f_next;
        }
        let u_hat = t_control.invert_values(&w_hat);
        let u_tilde = &states[n];
        let u: Vec<Complex64> = u_hat.iter().zip(u_tilde).map(|(a, b)| a + b).collect();
        let diff: Vec<Complex64> = u.iter().zip(&u_hat).map(|(a, b)| a - b).collect();
        let l2_ut = l2_norm(u_tilde, h);
        split_defect = split_defect.max((l2_norm(&diff, h) - l2_ut).abs());
        let vals = [
            l2_norm(&u, h),
            l2_norm(&u_hat, h),
            l2_ut,
            l2_norm(&w_hat, h),
            (u_hat[0] - w_hat[0]).norm(),
            err.traces[n].re,
            err.traces[n].im,
        ];
        for (col, v) in rec.columns.iter_mut().zip(vals) {
            col.1.push(v);
        }
        for &(s, t) in &snaps {
            if s == n {
                for (field, values) in [("u", &u), ("uhat", &u_hat), ("utilde", u_tilde)] {
                    rec.snapshots.push(Snapshot {
                        field: field.into(),
                        t,
                        values: values.clone(),
                    });
                }
            }
        }
    }
    Ok(ObserverRun {
        record: rec,
        gain,
        gain_transformed,
        control,
        observer,
        split_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_error_stays_zero() {
        let p = PhysicsParams::new(0.5, 1.0, 0.5, 0.2, PI, BcFamily::A).unwrap();
        let g = Grid::new(41, PI).unwrap();
        let t = TimeGrid::new(20, 1.0).unwrap();
        let gain = vec![Complex64::new(1.0, 2.0); 41];
        let run = run_error(&StateVector::zeros(g, BcFamily::A), &p, &t, &gain, false).unwrap();
        assert!(run.record.column("l2_utilde").unwrap().iter().all(|v| *v == 0.0));
    }
}
