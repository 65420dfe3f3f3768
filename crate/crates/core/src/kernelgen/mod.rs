//! Backstepping kernels by successive approximation.
//!
//! With `s = y - x`, `t = L - y` the kernel PDE on the triangle becomes an
//! integral equation `G = G1 + P G` on `[0, L]^2`, where `P` is a sum of six
//! "differentiate, then integrate" pieces. For polynomial input every piece is
//! exact, so `G^{n+1} = G1 + P G^n` is carried out symbolically on [`Poly2`].

mod io;
mod residual;

pub use io::{read_kernel, write_kernel};
pub use residual::{kernel_residual, KernelResidual, LATTICE};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{BcFamily, PhysicsParams};
use crate::poly2::{Axis, Poly2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelRole {
    /// Control kernel for boundary family A.
    ControlK,
    /// Control kernel for boundary family B.
    ControlEll,
    /// Observer kernel `p`, obtained by reflecting a family-A kernel.
    ObserverP,
}

impl KernelRole {
    pub fn name(self) -> &'static str {
        match self {
            KernelRole::ControlK => "control_k",
            KernelRole::ControlEll => "control_ell",
            KernelRole::ObserverP => "observer_p",
        }
    }

    pub fn control_for(family: BcFamily) -> Self {
        match family {
            BcFamily::A => KernelRole::ControlK,
            BcFamily::B => KernelRole::ControlEll,
        }
    }
}

/// The six pieces of `P`, named by the derivative of `G` they integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitTerm {
    Ttt,
    Tts,
    Tt,
    Ts,
    T,
    Id,
}

impl SplitTerm {
    pub const ALL: [SplitTerm; 6] = [
        SplitTerm::Ttt,
        SplitTerm::Tts,
        SplitTerm::Tt,
        SplitTerm::Ts,
        SplitTerm::T,
        SplitTerm::Id,
    ];

    fn derivative(self, f: &Poly2) -> Poly2 {
        match self {
            SplitTerm::Ttt => f.diff_n(Axis::T, 3),
            SplitTerm::Tts => f.diff_n(Axis::T, 2).diff(Axis::S),
            SplitTerm::Tt => f.diff_n(Axis::T, 2),
            SplitTerm::Ts => f.diff(Axis::T).diff(Axis::S),
            SplitTerm::T => f.diff(Axis::T),
            SplitTerm::Id => f.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to `4 * max_iter + 4`.
    pub degree_cap: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
            degree_cap: None,
        }
    }
}

impl SolveOptions {
    fn cap(&self) -> usize {
        self.degree_cap.unwrap_or(4 * self.max_iter + 4)
    }
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn im(v: f64) -> Complex64 {
    Complex64::new(0.0, v)
}

/// Integrate twice in `s` (from 0) and once in `t` (from 0).
fn triple(f: &Poly2) -> Poly2 {
    f.integrate(Axis::S).integrate(Axis::S).integrate(Axis::T)
}

/// `G1 = -(r / 3 beta) s t`.
pub fn first_iterate(params: &PhysicsParams) -> Poly2 {
    Poly2::monomial(1, 1, re(-params.rate_scaled() / 3.0))
}

/// One split piece of `P` applied to `f`.
pub fn apply_split(term: SplitTerm, f: &Poly2, params: &PhysicsParams, family: BcFamily) -> Poly2 {
    let a = params.alpha_scaled();
    let d = params.delta_scaled();
    let r = params.rate_scaled();
    let df = term.derivative(f);
    match family {
        BcFamily::A => {
            let c = match term {
                SplitTerm::Ttt => re(-1.0 / 3.0),
                SplitTerm::Tts => re(1.0),
                SplitTerm::Tt => im(a / 3.0),
                SplitTerm::Ts => im(-2.0 * a / 3.0),
                SplitTerm::T => re(-d / 3.0),
                SplitTerm::Id => re(r / 3.0),
            };
            triple(&df).scale(c)
        }
        BcFamily::B => {
            // Triple integral plus a correction that only integrates in s.
            let s1 = |p: &Poly2| p.integrate(Axis::S);
            let s2 = |p: &Poly2| p.integrate(Axis::S).integrate(Axis::S);
            match term {
                SplitTerm::Ttt => {
                    let ftt = f.diff_n(Axis::T, 2);
                    &triple(&df).scale(re(2.0 / 3.0)) - &s2(&ftt)
                }
                SplitTerm::Tts => {
                    let ft = f.diff(Axis::T);
                    &s1(&ft).scale(re(2.0)) - &triple(&df)
                }
                SplitTerm::Tt => {
                    let ft = f.diff(Axis::T);
                    &triple(&df).scale(im(-2.0 * a / 3.0)) + &s2(&ft).scale(im(a))
                }
                SplitTerm::Ts => &triple(&df).scale(im(a / 3.0)) + &s1(f).scale(im(-a)),
                SplitTerm::T => &triple(&df).scale(re(2.0 * d / 3.0)) + &s2(f).scale(re(-d)),
                SplitTerm::Id => triple(&df).scale(re(r / 3.0)),
            }
        }
    }
}

/// The full integral operator `P`, with the pieces sharing a triple integral
/// combined before integrating.
pub fn apply_p(g: &Poly2, params: &PhysicsParams, family: BcFamily) -> Poly2 {
    let a = params.alpha_scaled();
    let d = params.delta_scaled();
    let r = params.rate_scaled();
    let gt = g.diff(Axis::T);
    let gtt = gt.diff(Axis::T);
    let gttt = gtt.diff(Axis::T);
    let gts = gt.diff(Axis::S);
    let gtts = gtt.diff(Axis::S);
    let mut inner = Poly2::zero();
    match family {
        BcFamily::A => {
            inner += &gttt.scale(re(-1.0 / 3.0));
            inner += &gtts;
            inner += &gtt.scale(im(a / 3.0));
            inner += &gts.scale(im(-2.0 * a / 3.0));
            inner += &gt.scale(re(-d / 3.0));
            inner += &g.scale(re(r / 3.0));
            triple(&inner)
        }
        BcFamily::B => {
            inner += &gttt.scale(re(2.0 / 3.0));
            inner += &gtts.scale(re(-1.0));
            inner += &gtt.scale(im(-2.0 * a / 3.0));
            inner += &gts.scale(im(a / 3.0));
            inner += &gt.scale(re(2.0 * d / 3.0));
            inner += &g.scale(re(r / 3.0));
            let mut twice = gtt.scale(re(-1.0));
            twice += &gt.scale(im(a));
            twice += &g.scale(re(-d));
            let mut once = gt.scale(re(2.0));
            once += &g.scale(im(-a));
            let mut out = triple(&inner);
            out += &twice.integrate(Axis::S).integrate(Axis::S);
            out += &once.integrate(Axis::S);
            out
        }
    }
}

/// A converged kernel together with its iteration record.
#[derive(Clone, Debug)]
pub struct Kernel {
    role: KernelRole,
    params: PhysicsParams,
    generator: PhysicsParams,
    g: Poly2,
    iterations: usize,
    increments: Vec<f64>,
    /// `d_s^a d_t^b G` for `a + b <= 3`, indexed by [`deriv_index`].
    derivs: Vec<Poly2>,
}

fn deriv_index(a: usize, b: usize) -> usize {
    // (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) (3,0) (2,1) (1,2) (0,3)
    let n = a + b;
    n * (n + 1) / 2 + b
}

fn derivative_table(g: &Poly2) -> Vec<Poly2> {
    let mut out = Vec::with_capacity(10);
    for n in 0..=3 {
        for b in 0..=n {
            out.push(g.diff_n(Axis::S, n - b).diff_n(Axis::T, b));
        }
    }
    out
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Kernel {
    pub(crate) fn from_parts(
        role: KernelRole,
        params: PhysicsParams,
        generator: PhysicsParams,
        g: Poly2,
        iterations: usize,
        increments: Vec<f64>,
    ) -> Self {
        let derivs = derivative_table(&g);
        Self {
            role,
            params,
            generator,
            g,
            iterations,
            increments,
            derivs,
        }
    }

    pub fn role(&self) -> KernelRole {
        self.role
    }

    /// Plant parameters the kernel was built for.
    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    /// Parameters fed to the successive approximation (differs from
    /// [`Kernel::params`] only for the observer kernel).
    pub fn generator(&self) -> &PhysicsParams {
        &self.generator
    }

    /// `G(s, t)` in the iteration variables.
    pub fn poly(&self) -> &Poly2 {
        &self.g
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `sup_bound(G^{n+1} - G^n)` for every iteration performed.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn last_increment(&self) -> f64 {
        self.increments.last().copied().unwrap_or(0.0)
    }

    pub fn length(&self) -> f64 {
        self.params.length
    }

    /// Chain-rule coefficients `(d/dx, d/dy) = (ax d_s + bx d_t, ay d_s + by d_t)`
    /// and the map `(x, y) -> (s, t)`.
    fn chart(&self) -> ([f64; 4], fn(f64, f64, f64) -> (f64, f64)) {
        match self.role {
            // s = y - x, t = L - y
            KernelRole::ControlK | KernelRole::ControlEll => ([-1.0, 0.0, 1.0, -1.0], |x, y, l| (y - x, l - y)),
            // reflected: p(x, y) = G(y - x, x)
            KernelRole::ObserverP => ([-1.0, 1.0, 1.0, 0.0], |x, y, _| (y - x, x)),
        }
    }

    /// `d_x^dx d_y^dy kappa(x, y)` on the triangle `0 <= x <= y <= L`,
    /// for `dx + dy <= 3`.
    pub fn eval(&self, x: f64, y: f64, dx: usize, dy: usize) -> Result<Complex64> {
        let l = self.length();
        let slack = 1e-12 * l.max(1.0);
        if !(x >= -slack && y <= l + slack && x <= y + slack) {
            return Err(Error::Domain { x, y, length: l });
        }
        if dx + dy > 3 {
            return Err(Error::Config(format!("derivative order {} exceeds 3", dx + dy)));
        }
        Ok(self.eval_unchecked(x, y, dx, dy))
    }

    pub(crate) fn eval_unchecked(&self, x: f64, y: f64, dx: usize, dy: usize) -> Complex64 {
        let ([ax, bx, ay, by], map) = self.chart();
        let (s, t) = map(x, y, self.length());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=dx {
            let cx = binom(dx, i) * ax.powi(i as i32) * bx.powi((dx - i) as i32);
            if cx == 0.0 {
                continue;
            }
            for j in 0..=dy {
                let cy = binom(dy, j) * ay.powi(j as i32) * by.powi((dy - j) as i32);
                if cy == 0.0 {
                    continue;
                }
                let poly = &self.derivs[deriv_index(i + j, dx - i + dy - j)];
                acc += poly.eval(s, t) * (cx * cy);
            }
        }
        acc
    }

    /// Observer output-injection gain sampled at `xs`.
    ///
    /// Family A injects through `u_xx(L)`, family B through `u(L)`.
    pub fn observer_gain(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        if self.role != KernelRole::ObserverP {
            return Err(Error::Config("observer gain needs the observer kernel".into()));
        }
        let PhysicsParams {
            beta, alpha, delta, length, ..
        } = self.params;
        xs.iter()
            .map(|&x| {
                Ok(match self.params.family {
                    BcFamily::A => im(-beta) * self.eval(x, length, 0, 0)?,
                    BcFamily::B => {
                        im(-beta) * self.eval(x, length, 0, 2)? + alpha * self.eval(x, length, 0, 1)?
                            - im(delta) * self.eval(x, length, 0, 0)?
                    }
                })
            })
            .collect()
    }
}

/// Run the successive approximation for the control kernel of `params.family`.
pub fn solve_kernel(params: &PhysicsParams, opts: &SolveOptions) -> Result<Kernel> {
    params.validate()?;
    let role = KernelRole::control_for(params.family);
    let (g, iterations, increments) = iterate(params, params.family, opts)?;
    Ok(Kernel::from_parts(role, *params, *params, g, iterations, increments))
}

/// Observer kernel `p(x, y) = k(L - y, L - x)` where `k` is the family-A
/// control kernel built with the same coefficients.
///
/// The reflection turns the differential part of the kernel PDE into its
/// negative while leaving the zeroth-order term alone, so matching the
/// observer PDE's `-r p` term needs `k` generated with rate `+r`.
pub fn observer_kernel(params: &PhysicsParams, opts: &SolveOptions) -> Result<Kernel> {
    observer_kernel_with_rate(params, params.rate, opts)
}

/// Reflected family-A kernel generated with an explicit rate. Exposed so the
/// sign of the generator rate can be checked against the observer PDE.
pub fn observer_kernel_with_rate(params: &PhysicsParams, generator_rate: f64, opts: &SolveOptions) -> Result<Kernel> {
    params.validate()?;
    let mut generator = params.with_rate(generator_rate);
    generator.family = BcFamily::A;
    let (g, iterations, increments) = iterate(&generator, BcFamily::A, opts)?;
    Ok(Kernel::from_parts(
        KernelRole::ObserverP,
        *params,
        generator,
        g,
        iterations,
        increments,
    ))
}

fn iterate(params: &PhysicsParams, family: BcFamily, opts: &SolveOptions) -> Result<(Poly2, usize, Vec<f64>)> {
    let g1 = first_iterate(params);
    if g1.is_zero() {
        log::warn!("zero decay rate: the kernel is identically zero");
        return Ok((g1, 0, Vec::new()));
    }
    let cap = opts.cap();
    let l = params.length;
    let mut g = g1.clone();
    let mut increments = Vec::new();
    for n in 1..=opts.max_iter {
        let next = &g1 + &apply_p(&g, params, family);
        if next.degree() > cap {
            return Err(Error::DegreeCap {
                degree: next.degree(),
                cap,
            });
        }
        let inc = (&next - &g).sup_bound(l);
        if !inc.is_finite() {
            return Err(Error::KernelNonConvergence {
                iterations: n,
                last_increment: inc,
            });
        }
        increments.push(inc);
        g = next.trimmed();
        if inc <= opts.tol {
            log::debug!("kernel converged in {n} iterations, degree {}", g.degree());
            return Ok((g, n, increments));
        }
    }
    Err(Error::KernelNonConvergence {
        iterations: opts.max_iter,
        last_increment: increments.last().copied().unwrap_or(f64::NAN),
    })
}

/// `6^n M^n L^(3n+2) / (n+1)!` with `M = max(1, |alpha~|, |delta~|, |r~|)`:
/// the a-priori bound on `sup |P^n (s t)|`.
pub fn increment_bound(params: &PhysicsParams, n: usize) -> f64 {
    let m = 1f64
        .max(params.alpha_scaled().abs())
        .max(params.delta_scaled().abs())
        .max(params.rate_scaled().abs());
    let l = params.length;
    // accumulate in logs; the factorial overflows long before the bound is useful
    let log = n as f64 * (6.0 * m).ln() + (3 * n + 2) as f64 * l.ln() - (2..=n + 1).map(|k| (k as f64).ln()).sum::<f64>();
    log.exp()
}
