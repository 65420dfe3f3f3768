//! Acceptance criteria 1-10, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use backstep::experiment::{run_experiment, ExperimentConfig, ExperimentOutcome};
use backstep::fit::fit_decay;
use backstep::observer::run_plant_observer_with;
use backstep::grid::{build_operator, l2_norm, Grid, StateVector};
use backstep::kernelgen::{kernel_residual, KernelResidual, LATTICE};
use backstep::record::Linearization;
use backstep::timestepper::{InnerSolve, NonlinearStepper};
use backstep::transform::TransformMatrix;
use backstep::{observer_kernel, solve_kernel, BcFamily, Kernel, PhysicsParams};
use num_complex::Complex64 as C;

fn report(n: u32, ok: bool, details: String) {
    // straight to the handle: the harness only captures the print macros
    let _ = writeln!(std::io::stderr().lock(), "criterion {n}: {} {details}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} failed");
}

fn run(cfg: &ExperimentConfig) -> ExperimentOutcome {
    run_experiment(cfg, None).unwrap()
}

fn preset(name: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(name).unwrap();
    cfg.snapshot_times.clear();
    cfg
}

fn stationary(x: f64) -> C {
    C::new(3.0, 0.0) - C::new(0.0, 4.0 * x).exp() - C::new(0.0, -2.0 * x).exp() * 2.0
}

/// `6^n M^n L^(3n+2) / (n+1)!` with `M = max(1, |a~|, |d~|, |r~|)`.
fn factorial_bound(p: &PhysicsParams, n: u32) -> f64 {
    let m = [1.0, p.alpha_scaled().abs(), p.delta_scaled().abs(), p.rate_scaled().abs()]
        .into_iter()
        .fold(0.0, f64::max);
    let fact: f64 = (1..=n + 1).map(f64::from).product();
    (6.0 * m).powi(n as i32) * p.length.powi(3 * n as i32 + 2) / fact
}

#[test]
fn criterion_1_kernel_convergence_bound() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, BcFamily::A).unwrap();
    let start = Instant::now();
    let k = solve_kernel(&p, &Default::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let r3 = p.rate_scaled() / 3.0;
    // increment n is sup |G^{n+1} - G^n| = (r~/3) sup |H^n|
    let worst = k
        .increments()
        .iter()
        .enumerate()
        .map(|(i, inc)| inc / r3 / factorial_bound(&p, i as u32 + 1))
        .fold(0.0, f64::max);
    let ok = worst <= 1.0 && k.iterations() <= 60 && k.last_increment() <= 1e-12 && secs < 5.0;
    report(
        1,
        ok,
        format!(
            "iterations {} (<= 60), last increment {:.2e}, max |H^n| / bound {worst:.2e} (<= 1), {secs:.2} s (< 5 s)",
            k.iterations(),
            k.last_increment()
        ),
    );
}

/// Sup over the diagonal of the condition `d/dx p_x(x,x) = -(r~/3)(L - x)`
/// in its opposite-sign form, for the family-B observer problem.
fn opposite_pobc_diagonal(pk: &Kernel) -> f64 {
    let l = pk.length();
    let r = pk.params().rate_scaled();
    (0..LATTICE)
        .map(|i| {
            let x = i as f64 * l / (LATTICE - 1) as f64;
            let d = pk.eval(x, x, 2, 0).unwrap() + pk.eval(x, x, 1, 1).unwrap();
            (d + r * (l - x) / 3.0).norm()
        })
        .fold(0.0, f64::max)
}

/// Sup over the diagonal of `l_x(x,x) = -(r~/3)(L - x)`, the opposite-sign form.
fn opposite_ell_diagonal(l: &Kernel) -> f64 {
    let len = l.length();
    let r = l.params().rate_scaled();
    (0..LATTICE)
        .map(|i| {
            let x = i as f64 * len / (LATTICE - 1) as f64;
            (l.eval(x, x, 1, 0).unwrap() + r * (len - x) / 3.0).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_2_kernel_residuals() {
    let start = Instant::now();
    let a = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, BcFamily::A).unwrap();
    let b = PhysicsParams::new(1.0, 1.0, 2.0, 1.0, PI, BcFamily::B).unwrap();
    let obs_a = PhysicsParams::new(0.5, 1.0, 0.5, 0.2, PI, BcFamily::A).unwrap();
    let obs_b = PhysicsParams { family: BcFamily::B, ..obs_a };
    let k = solve_kernel(&a, &Default::default()).unwrap();
    let ell = solve_kernel(&b, &Default::default()).unwrap();
    let p = observer_kernel(&obs_a, &Default::default()).unwrap();
    let p_obc = observer_kernel(&obs_b, &Default::default()).unwrap();
    let res: Vec<(&str, KernelResidual)> = vec![
        ("k", kernel_residual(&k)),
        ("l", kernel_residual(&ell)),
        ("p", kernel_residual(&p)),
        ("p_obc", kernel_residual(&p_obc)),
    ];
    let secs = start.elapsed().as_secs_f64();
    let ok = res.iter().all(|(_, r)| r.bc_sup <= 1e-10 && r.pde_sup <= 1e-6) && secs < 10.0;
    let parts: Vec<String> = res
        .iter()
        .map(|(n, r)| format!("{n}: bc {:.1e} pde {:.1e}", r.bc_sup, r.pde_sup))
        .collect();
    // the opposite-sign family-B diagonal conditions contradict the integral
    // equations they come from; shown for the record, not gated (see ledger)
    let _ = writeln!(
        std::io::stderr().lock(),
        "  diagnostic: opposite-sign l_x(x,x) = -r~(L-x)/3 residual {:.2e}; opposite-sign p_obc diagonal residual {:.2e}",
        opposite_ell_diagonal(&ell),
        opposite_pobc_diagonal(&p_obc)
    );
    report(2, ok, format!("{} ; {secs:.2} s (< 10 s)", parts.join(", ")));
}

#[test]
fn criterion_3_observer_reflection_identity() {
    let p = PhysicsParams::new(0.5, 1.0, 0.5, 0.2, PI, BcFamily::A).unwrap();
    let pk = observer_kernel(&p, &Default::default()).unwrap();
    let k_neg = solve_kernel(&p.with_rate(-p.rate), &Default::default()).unwrap();
    let k_pos = solve_kernel(&p, &Default::default()).unwrap();
    let (mut neg, mut pos) = (0f64, 0f64);
    for i in 0..LATTICE {
        for j in i..LATTICE {
            let x = PI * i as f64 / (LATTICE - 1) as f64;
            let y = PI * j as f64 / (LATTICE - 1) as f64;
            let v = pk.eval(x, y, 0, 0).unwrap();
            neg = neg.max((v - k_neg.eval(PI - y, PI - x, 0, 0).unwrap()).norm());
            pos = pos.max((v - k_pos.eval(PI - y, PI - x, 0, 0).unwrap()).norm());
        }
    }
    let pde = kernel_residual(&pk).pde_sup;
    report(
        3,
        neg <= 1e-13,
        format!(
            "max |p(x,y) - k_(-r)(L-y,L-x)| = {neg:.3e} (<= 1e-13); with k_(+r): {pos:.1e}; p's own PDE residual {pde:.1e}"
        ),
    );
}

#[test]
fn criterion_4_transform_exactness() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 1.0, PI, BcFamily::A).unwrap();
    let k = solve_kernel(&p, &Default::default()).unwrap();
    let g = Grid::new(201, PI).unwrap();
    let t = TransformMatrix::build(&k, &g).unwrap();
    let e = t.entries();
    let diag = (0..201).map(|i| e[[i, i]].norm()).fold(0.0, f64::max);
    let lower = (0..201).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| e[[i, j]].norm()).fold(0.0, f64::max);
    // deterministic pseudo-random vectors
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut round = 0f64;
    let mut fixed = 0f64;
    for _ in 0..20 {
        let u: Vec<C> = (0..201).map(|_| C::new(next(), next())).collect();
        let back = t.invert_values(&t.forward_values(&u));
        round = round.max(back.iter().zip(&u).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        let direct = t.invert_values(&u);
        let (fp, _) = t.invert_fixed_point(&u, 1e-15, 500).unwrap();
        fixed = fixed.max(direct.iter().zip(&fp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    let ok = diag <= 1e-14 && lower == 0.0 && round <= 1e-12 && fixed <= 1e-10;
    report(
        4,
        ok,
        format!("max |U_ii| {diag:.1e}, below-diagonal {lower:.0e}, round trip {round:.2e} (<= 1e-12), back substitution vs fixed point {fixed:.2e} (<= 1e-10)"),
    );
}

fn uncontrolled_drift(m: usize, n: usize) -> f64 {
    let mut cfg = preset("exp1_uncontrolled");
    cfg.nodes = m;
    cfg.steps = n;
    run(&cfg).summary.relative_drift
}

#[test]
fn criterion_5_stationary_solution() {
    let coarse = uncontrolled_drift(201, 1000);
    // h and dt both halved: dt = T / (N - 1)
    let fine = uncontrolled_drift(401, 1999);
    let ratio = coarse / fine;
    let ok = coarse <= 0.02 && (3.0..=5.0).contains(&ratio);
    report(
        5,
        ok,
        format!("relative drift over T=1: {coarse:.4} at M=201,N=1000 (<= 0.02); {fine:.4} at M=401,N=1999; ratio {ratio:.2} (expected ~4, accepted [3, 5])"),
    );
}

#[test]
fn criterion_6_linear_decay() {
    let mut gammas = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let mut cfg = preset("exp1_linear");
        cfg.params.rate = r;
        gammas.push(run(&cfg).summary.fits["l2_u"].rate);
    }
    let g1 = gammas[1];
    let ok = (0.8..=1.5).contains(&g1) && gammas.windows(2).all(|w| w[1] > w[0]);
    report(
        6,
        ok,
        format!(
            "gamma(r=1) = {g1:.3} in [0.8, 1.5] on [1,4]; gamma(0.5, 1, 2) = {:.3}, {:.3}, {:.3} increasing",
            gammas[0], gammas[1], gammas[2]
        ),
    );
}

#[test]
fn criterion_7_nonlinear_decay() {
    let e2 = run(&preset("exp2_nonlinear"));
    let norms = e2.record.column("l2_u").unwrap();
    let i1 = e2.record.times.iter().position(|t| *t >= 1.0 - 1e-12).unwrap();
    let frac = norms[i1] / norms[0];
    let nl = e2.summary.nonlinear.as_ref().unwrap();
    let e3 = run(&preset("exp3_nonlinear"));
    let g3 = e3.summary.fits["l2_u"].rate;
    let ok = frac < 0.05 && nl.max_iterations <= 3 && g3 >= 0.5 && e3.summary.nonlinear.as_ref().unwrap().scheme == Linearization::Picard;
    report(
        7,
        ok,
        format!(
            "exp2: ||u(1)||/||u0|| = {frac:.2e} (< 0.05), Taylor inner iterations max {} mean {:.2} (max <= 3) at dt = {:.2e}; exp3 (Picard): gamma = {g3:.3} (>= 0.5)",
            nl.max_iterations, nl.mean_iterations, e2.summary.dt
        ),
    );
}

#[test]
fn criterion_8_taylor_picard_agree_at_p1() {
    let p = PhysicsParams::new(1.0, 2.0, 8.0, 8.0, PI, BcFamily::A)
        .unwrap()
        .with_power(Some(1.0))
        .unwrap();
    let k = solve_kernel(&p, &Default::default()).unwrap();
    let g = Grid::new(201, PI).unwrap();
    let h = g.spacing();
    let t = TransformMatrix::build(&k, &g).unwrap();
    let op = build_operator(&g, &p, true).unwrap();
    let dt = 2.0 / 1999.0;
    let stepper = |scheme| {
        NonlinearStepper::new(&op, &t, 1.0, dt, InnerSolve { scheme, ..Default::default() }).unwrap()
    };
    let (taylor, picard) = (stepper(Linearization::Taylor), stepper(Linearization::Picard));
    let w0 = t.forward(&StateVector::from_fn(g, BcFamily::A, stationary)).unwrap();
    let (mut wt, mut wp) = (w0.values().to_vec(), w0.values().to_vec());
    let mut worst = 0f64;
    for n in 1..1000 {
        wt = taylor.step(&wt, n).unwrap().0;
        wp = picard.step(&wp, n).unwrap().0;
        let (ut, up) = (t.invert_values(&wt), t.invert_values(&wp));
        let d: Vec<C> = ut.iter().zip(&up).map(|(a, b)| a - b).collect();
        worst = worst.max(l2_norm(&d, h));
    }
    report(8, worst <= 1e-7, format!("max_n ||u_taylor - u_picard|| = {worst:.2e} (<= 1e-7) over 999 steps, M=201, dt={dt:.2e}"));
}

#[test]
fn criterion_9_observer_convergence() {
    let cfg = preset("exp4_observer");
    let grid = cfg.grid().unwrap();
    let u0 = cfg.initial.sample(grid, cfg.params.family);
    let uh0 = cfg.observer_initial.sample(grid, cfg.params.family);
    let k = solve_kernel(&cfg.params, &Default::default()).unwrap();
    let pk = observer_kernel(&cfg.params, &Default::default()).unwrap();
    let run = run_plant_observer_with(&u0, &uh0, &cfg.params, &cfg.time().unwrap(), k, pk, &[]).unwrap();
    let rec = &run.record;
    let window = cfg.fit_window.unwrap();
    let rate = |c: &str| fit_decay(&rec.times, rec.column(c).unwrap(), window).unwrap().rate;
    let (u, uh, ut) = (rec.column("l2_u").unwrap(), rec.column("l2_uhat").unwrap(), rec.column("l2_utilde").unwrap());
    let err_rate = rate("l2_utilde");
    let peak_hat = uh.iter().cloned().fold(0.0, f64::max);
    let peak_at = uh.iter().position(|v| *v == peak_hat).unwrap();
    let n = u.len() - 1;
    // estimate starts at zero, is driven up by injection, then decays with the plant
    let shape = uh[0] == 0.0 && peak_at > 0 && uh[n] < 0.1 * peak_hat && u[n] < 0.1 * u[0] && ut[n] < 0.1 * ut[0];
    let ok = err_rate >= 0.8 * cfg.params.rate && run.split_defect <= 1e-12 && shape;
    report(
        9,
        ok,
        format!(
            "error rate {err_rate:.3} on [{}, {}] (>= {:.2}); max | ||u - u_hat|| - ||u_tilde|| | = {:.1e}; ||u_hat|| rises from 0 to {peak_hat:.3} at t={:.2} then decays to {:.1e}; rates u {:.3}, u_hat {:.3}",
            window.0,
            window.1,
            0.8 * cfg.params.rate,
            run.split_defect,
            rec.times[peak_at],
            uh[n],
            rate("l2_u"),
            rate("l2_uhat")
        ),
    );
}

#[test]
fn criterion_10_family_b_suite() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, r) in [("bcb_exp1_linear", 1.0), ("bcb_exp2_nonlinear", 1.5), ("bcb_exp3_nonlinear", 1.5)] {
        let out = run(&preset(name));
        let gamma = out.summary.fits["l2_u"].rate;
        ok &= gamma >= 0.6 * r;
        lines.push(format!("{name}: gamma {gamma:.3} (>= {:.2})", 0.6 * r));
    }
    let free = run(&preset("bcb_uncontrolled"));
    let norms = free.record.column("l2_u").unwrap();
    let rise = norms.windows(2).map(|w| (w[1] - w[0]) / norms[0]).fold(f64::NEG_INFINITY, f64::max);
    // rounding only: the implicit solve is exact to ~1e-15 relative
    ok &= rise <= 1e-12;
    lines.push(format!("bcb_uncontrolled: largest relative one-step rise {rise:.1e} (<= 1e-12)"));
    report(10, ok, lines.join("; "));
}
