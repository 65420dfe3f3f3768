use std::f64::consts::PI;

use backstep::grid::{build_operator, constraint_rows, l2_norm, Grid, StateVector};
use backstep::record::Linearization;
use backstep::timestepper::{run_target, InnerSolve, LinearStepper, RunOptions, TimeGrid};
use backstep::transform::TransformMatrix;
use backstep::{solve_kernel, BcFamily, Error, PhysicsParams};
use num_complex::Complex64 as C;

fn stationary(x: f64) -> C {
    C::new(3.0, 0.0) - C::new(0.0, 4.0 * x).exp() - C::new(0.0, -2.0 * x).exp() * 2.0
}

fn sech_packet(x: f64) -> C {
    C::new(0.0, 4.0 * (x - PI / 2.0)).exp() / (8.0 * (x - PI / 2.0).powi(2)).cosh()
}

fn setup(params: &PhysicsParams, m: usize, u0: fn(f64) -> C) -> (TransformMatrix, StateVector) {
    let k = solve_kernel(params, &Default::default()).unwrap();
    let g = Grid::new(m, params.length).unwrap();
    let t = TransformMatrix::build(&k, &g).unwrap();
    let w0 = t.forward(&StateVector::from_fn(g, params.family, u0)).unwrap();
    (t, w0)
}

#[test]
fn runs_are_deterministic() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, BcFamily::A).unwrap();
    let (t, w0) = setup(&p, 81, stationary);
    let time = TimeGrid::new(200, 1.0).unwrap();
    let a = run_target(&w0, &p, &time, &t, &RunOptions::default(), None).unwrap();
    let b = run_target(&w0, &p, &time, &t, &RunOptions::default(), None).unwrap();
    assert_eq!(a.record.columns, b.record.columns);
    assert_eq!(a.w_final, b.w_final);
}

#[test]
fn crank_nicolson_solve_satisfies_its_equation_and_constraints() {
    for (family, u0) in [(BcFamily::A, stationary as fn(f64) -> C), (BcFamily::B, sech_packet)] {
        let p = PhysicsParams::new(1.0, 1.0, 2.0, 1.0, PI, family).unwrap();
        let (_, w0) = setup(&p, 201, u0);
        let g = *w0.grid();
        let op = build_operator(&g, &p, true).unwrap();
        let stepper = LinearStepper::new(&op, 1e-3).unwrap();
        let rows = constraint_rows(family, g.nodes(), g.spacing());
        let mut w = w0.values().to_vec();
        for _ in 0..50 {
            let next = stepper.step(&w, None);
            assert!(stepper.residual(&w, &next, None) <= 1e-10);
            for (_, row) in &rows {
                // same bar as the equation residual: the solve is only exact to rounding
                let v: C = row.iter().map(|&(j, c)| next[j] * c).sum();
                assert!(v.norm() <= 1e-10, "{family}: {v}");
            }
            w = next;
        }
    }
}

#[test]
fn target_norm_never_grows_when_damped() {
    for (family, u0) in [(BcFamily::A, stationary as fn(f64) -> C), (BcFamily::B, sech_packet)] {
        let p = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, family).unwrap();
        let (t, w0) = setup(&p, 201, u0);
        let time = TimeGrid::new(400, 2.0).unwrap();
        let run = run_target(&w0, &p, &time, &t, &RunOptions::default(), None).unwrap();
        let lw = run.record.column("l2_w").unwrap();
        for n in 2..lw.len() {
            assert!(lw[n] <= lw[n - 1] * (1.0 + 1e-13), "{family} step {n}: {} -> {}", lw[n - 1], lw[n]);
        }
    }
}

#[test]
fn two_level_run_is_valid() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, BcFamily::A).unwrap();
    let (t, w0) = setup(&p, 21, stationary);
    let run = run_target(&w0, &p, &TimeGrid::new(2, 0.1).unwrap(), &t, &RunOptions::default(), None).unwrap();
    assert_eq!(run.record.len(), 2);
    assert!(TimeGrid::new(1, 0.1).is_err());
}

#[test]
fn nonlinear_corrections_end_below_tolerance() {
    for scheme in [Linearization::Taylor, Linearization::Picard] {
        let p = PhysicsParams::new(1.0, 2.0, 8.0, 5.0, PI, BcFamily::A)
            .unwrap()
            .with_power(Some(1.0))
            .unwrap();
        let (t, w0) = setup(&p, 81, stationary);
        let solve = InnerSolve {
            scheme,
            ..Default::default()
        };
        let opts = RunOptions {
            nonlinear: Some(solve),
            snapshot_times: vec![],
        };
        let run = run_target(&w0, &p, &TimeGrid::new(100, 0.5).unwrap(), &t, &opts, None).unwrap();
        let rep = run.record.nonlinear.unwrap();
        assert_eq!(rep.iterations.len(), 99);
        assert!(rep.corrections.iter().all(|c| *c <= solve.tol));
    }
}

#[test]
fn stalled_inner_solve_is_a_solver_failure() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 8.0, PI, BcFamily::A)
        .unwrap()
        .with_power(Some(2.0))
        .unwrap();
    let (t, w0) = setup(&p, 41, stationary);
    let opts = RunOptions {
        nonlinear: Some(InnerSolve {
            max_iter: 1,
            ..Default::default()
        }),
        snapshot_times: vec![],
    };
    let err = run_target(&w0, &p, &TimeGrid::new(20, 0.1).unwrap(), &t, &opts, None).unwrap_err();
    assert!(matches!(err, Error::InnerNonConvergence { step: 1, .. }), "{err}");
    assert_eq!(err.exit_code(), 4);
}

/// The controlled plant stepped directly: same interior rows, but row 0 is
/// the feedback law `u(0) = int_0^L k(0, y) u(y) dy` instead of the transform.
#[test]
fn direct_plant_simulation_agrees_with_target_route() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, BcFamily::A).unwrap();
    let k = solve_kernel(&p, &Default::default()).unwrap();
    let gap = |m: usize, n: usize| {
        let g = Grid::new(m, PI).unwrap();
        let h = g.spacing();
        let t = TransformMatrix::build(&k, &g).unwrap();
        let u0 = StateVector::from_fn(g, BcFamily::A, stationary);
        let time = TimeGrid::new(n, 1.0).unwrap();
        let route = run_target(&t.forward(&u0).unwrap(), &p, &time, &t, &RunOptions::default(), None).unwrap();

        let mut op = build_operator(&g, &p.with_rate(0.0), false).unwrap();
        op.matrix.row_mut(0).fill(C::new(0.0, 0.0));
        for j in 0..m {
            let wt = if j == 0 || j == m - 1 { 0.5 * h } else { h };
            op.matrix[[0, j]] -= k.eval(0.0, g.x(j), 0, 0).unwrap() * wt;
        }
        op.matrix[[0, 0]] += C::new(1.0, 0.0);
        let stepper = LinearStepper::new(&op, time.dt()).unwrap();
        let mut u = u0.values().to_vec();
        for _ in 1..n {
            u = stepper.step(&u, None);
        }
        let diff: Vec<C> = u.iter().zip(&route.u_final).map(|(a, b)| a - b).collect();
        l2_norm(&diff, h) / l2_norm(&route.u_final, h)
    };
    let coarse = gap(201, 1000);
    let fine = gap(401, 1999);
    eprintln!("direct vs target route, relative L2 gap at T = 1: {coarse:.3e} (M = 201), {fine:.3e} (M = 401)");
    // first order, like the third-difference stencil both routes share
    assert!(coarse / fine > 1.8, "{coarse} -> {fine}");
    assert!(fine < 1e-2, "{fine}");
}

#[test]
fn target_decays_at_the_design_rate() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, BcFamily::A).unwrap();
    let (t, w0) = setup(&p, 201, stationary);
    let time = TimeGrid::new(1000, 2.0).unwrap();
    let run = run_target(&w0, &p, &time, &t, &RunOptions::default(), None).unwrap();
    let lw = run.record.column("l2_w").unwrap();
    // 0.9: slack for the scheme's own damping error
    for (tn, w) in run.record.times.iter().zip(lw) {
        assert!(*w <= lw[0] * (-0.9 * p.rate * tn).exp() * (1.0 + 1e-12), "t = {tn}: {w}");
    }
}
