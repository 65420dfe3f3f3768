//! Experiment configuration, the reference presets, and run orchestration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{default_window, fit_decay, DecayFit};
use crate::grid::{l2_norm, Grid, StateVector};
use crate::kernelgen::{kernel_residual, observer_kernel, read_kernel, solve_kernel, write_kernel, Kernel, KernelRole, SolveOptions};
use crate::observer::run_plant_observer_with;
use crate::params::{BcFamily, PhysicsParams};
use crate::record::{Linearization, RunRecord};
use crate::timestepper::{run_target, InnerSolve, RunOptions, TimeGrid};
use crate::transform::{decay_constant, TransformMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Controlled,
    Uncontrolled,
    Observer,
}

impl std::str::FromStr for RunKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "controlled" => Ok(RunKind::Controlled),
            "uncontrolled" => Ok(RunKind::Uncontrolled),
            "observer" => Ok(RunKind::Observer),
            other => Err(Error::Config(format!("unknown run kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `3 - e^{4ix} - 2 e^{-2ix}`, a steady state of the uncontrolled linear equation.
    Stationary,
    /// `e^{-20 (x - pi/2)^2} e^{5i (x - pi/2)}`.
    GaussianPacket,
    /// `sech(8 (x - pi/2)^2) e^{4i (x - pi/2)}`.
    SechPacket,
    /// `3 e^{-16 (x - pi/2)^2} e^{4i (x - pi/2)} + 5 e^{-16 (x - 3pi/4)^2} e^{4i (x - 3pi/4)}`.
    TwoBumps,
    Zero,
    /// Piecewise-linear interpolation of `(x, value)` samples.
    Table(Vec<(f64, Complex64)>),
}

impl InitialCondition {
    pub const NAMES: [&'static str; 5] = ["stationary", "gaussian_packet", "sech_packet", "two_bumps", "zero"];

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("table:") {
            return Self::from_table(Path::new(path.trim()));
        }
        match s {
            "stationary" => Ok(Self::Stationary),
            "gaussian_packet" => Ok(Self::GaussianPacket),
            "sech_packet" => Ok(Self::SechPacket),
            "two_bumps" => Ok(Self::TwoBumps),
            "zero" => Ok(Self::Zero),
            other => Err(Error::Config(format!(
                "unknown initial condition {other:?} (expected one of {:?} or table:<file>)",
                Self::NAMES
            ))),
        }
    }

    /// Table file: optional header, then `x,re,im` rows with increasing `x`.
    pub fn from_table(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = f.iter().map(|s| s.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 3 => rows.push((v[0], Complex64::new(v[1], v[2]))),
                Ok(_) => return Err(Error::Config(format!("table row {line:?} needs x,re,im"))),
                Err(_) if rows.is_empty() => continue, // header
                Err(e) => return Err(Error::Config(format!("table row {line:?}: {e}"))),
            }
        }
        if rows.len() < 2 || rows.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("table needs at least two rows with increasing x".into()));
        }
        Ok(Self::Table(rows))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Stationary => "stationary",
            Self::GaussianPacket => "gaussian_packet",
            Self::SechPacket => "sech_packet",
            Self::TwoBumps => "two_bumps",
            Self::Zero => "zero",
            Self::Table(_) => "table",
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let packet = |amp: f64, width: f64, centre: f64, k: f64| {
            Complex64::new(0.0, k * (x - centre)).exp() * (amp * (-width * (x - centre).powi(2)).exp())
        };
        match self {
            Self::Stationary => {
                Complex64::new(3.0, 0.0) - Complex64::new(0.0, 4.0 * x).exp() - Complex64::new(0.0, -2.0 * x).exp() * 2.0
            }
            Self::GaussianPacket => packet(1.0, 20.0, PI / 2.0, 5.0),
            Self::SechPacket => {
                let z = 8.0 * (x - PI / 2.0).powi(2);
                Complex64::new(0.0, 4.0 * (x - PI / 2.0)).exp() / z.cosh()
            }
            Self::TwoBumps => packet(3.0, 16.0, PI / 2.0, 4.0) + packet(5.0, 16.0, 3.0 * PI / 4.0, 4.0),
            Self::Zero => Complex64::new(0.0, 0.0),
            Self::Table(rows) => {
                let i = rows.partition_point(|r| r.0 <= x);
                if i == 0 {
                    rows[0].1
                } else if i == rows.len() {
                    rows[rows.len() - 1].1
                } else {
                    let (x0, v0) = rows[i - 1];
                    let (x1, v1) = rows[i];
                    v0 + (v1 - v0) * ((x - x0) / (x1 - x0))
                }
            }
        }
    }

    pub fn sample(&self, grid: Grid, family: BcFamily) -> StateVector {
        StateVector::from_fn(grid, family, |x| self.eval(x))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub params: PhysicsParams,
    pub kind: RunKind,
    pub initial: InitialCondition,
    /// Observer initial state; the plant starts from `initial`.
    pub observer_initial: InitialCondition,
    pub nodes: usize,
    pub steps: usize,
    pub t_final: f64,
    pub scheme: Linearization,
    pub kernel: SolveOptions,
    pub inner_tol: f64,
    pub max_inner: usize,
    pub fit_window: Option<(f64, f64)>,
    pub snapshot_times: Vec<f64>,
    pub output_dir: Option<PathBuf>,
}

pub const PRESETS: [&str; 11] = [
    "exp1_linear",
    "exp1_uncontrolled",
    "exp2_nonlinear",
    "exp3_nonlinear",
    "exp4_observer",
    "bcb_exp1_linear",
    "bcb_exp2_nonlinear",
    "bcb_exp3_nonlinear",
    "bcb_uncontrolled",
    "bcb_observer",
    "exp2_uncontrolled",
];

impl ExperimentConfig {
    fn base(name: &str, params: PhysicsParams, kind: RunKind, initial: InitialCondition, t_final: f64) -> Self {
        Self {
            name: name.to_string(),
            params,
            kind,
            initial,
            observer_initial: InitialCondition::Zero,
            nodes: 201,
            steps: 1000,
            t_final,
            scheme: Linearization::Taylor,
            kernel: SolveOptions::default(),
            inner_tol: 1e-10,
            max_inner: 25,
            fit_window: None,
            snapshot_times: vec![0.0, t_final / 2.0, t_final],
            output_dir: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        use BcFamily::{A, B};
        use InitialCondition as Ic;
        use RunKind::*;
        let p = |b, a, d, r, family| PhysicsParams {
            beta: b,
            alpha: a,
            delta: d,
            rate: r,
            length: PI,
            power: None,
            family,
        };
        let nl = |mut params: PhysicsParams, power: f64| {
            params.power = Some(power);
            params
        };
        let mut cfg = match name {
            "exp1_linear" => {
                let mut c = Self::base(name, p(1.0, 2.0, 8.0, 1.0, A), Controlled, Ic::Stationary, 4.0);
                c.fit_window = Some((1.0, 4.0));
                c
            }
            "exp1_uncontrolled" => Self::base(name, p(1.0, 2.0, 8.0, 1.0, A), Uncontrolled, Ic::Stationary, 1.0),
            "exp2_nonlinear" => {
                let mut c = Self::base(name, nl(p(1.0, 2.0, 8.0, 8.0, A), 2.0), Controlled, Ic::Stationary, 2.0);
                c.steps = 2000;
                c
            }
            "exp2_uncontrolled" => {
                let mut c = Self::base(name, nl(p(1.0, 2.0, 8.0, 8.0, A), 2.0), Uncontrolled, Ic::Stationary, 1.0);
                c.steps = 1000;
                c
            }
            "exp3_nonlinear" => {
                let mut c = Self::base(name, nl(p(1.0, 2.0, 8.0, 5.0, A), 0.5), Controlled, Ic::Stationary, 2.0);
                c.steps = 2000;
                c.scheme = Linearization::Picard;
                c
            }
            "exp4_observer" => {
                let mut c = Self::base(name, p(0.5, 1.0, 0.5, 0.2, A), Observer, Ic::GaussianPacket, 25.0);
                c.steps = 2501;
                c.fit_window = Some((5.0, 25.0));
                c
            }
            "bcb_exp1_linear" => Self::base(name, p(1.0, 1.0, 2.0, 1.0, B), Controlled, Ic::SechPacket, 4.0),
            "bcb_exp2_nonlinear" => {
                let mut c = Self::base(name, nl(p(0.5, 1.0, 2.0, 1.5, B), 3.5), Controlled, Ic::TwoBumps, 2.0);
                c.steps = 4000;
                c
            }
            "bcb_exp3_nonlinear" => {
                let mut c = Self::base(name, nl(p(1.0, 1.0, 2.0, 1.5, B), 0.25), Controlled, Ic::SechPacket, 4.0);
                c.steps = 2000;
                c.scheme = Linearization::Picard;
                c
            }
            "bcb_uncontrolled" => Self::base(name, p(1.0, 1.0, 2.0, 1.0, B), Uncontrolled, Ic::SechPacket, 4.0),
            "bcb_observer" => {
                let mut c = Self::base(name, p(0.5, 1.0, 0.5, 0.2, B), Observer, Ic::GaussianPacket, 25.0);
                c.steps = 2501;
                c.fit_window = Some((5.0, 25.0));
                c
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?}; available: {}",
                    PRESETS.join(", ")
                )))
            }
        };
        cfg.params.validate()?;
        cfg.snapshot_times = vec![0.0, cfg.t_final / 2.0, cfg.t_final];
        Ok(cfg)
    }

    /// Switch to the reference resolution: 1001 nodes, 5000 time steps.
    pub fn paper_scale(mut self) -> Self {
        self.nodes = 1001;
        self.steps = 5000;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        Grid::new(self.nodes, self.params.length)?;
        TimeGrid::new(self.steps, self.t_final)?;
        if let Some((a, b)) = self.fit_window {
            if !(a < b && a >= 0.0 && b <= self.t_final + 1e-12) {
                return Err(Error::Config(format!("fit window [{a}, {b}] outside [0, {}]", self.t_final)));
            }
        }
        if self.kind == RunKind::Observer && self.params.power.is_some() {
            return Err(Error::Config("the observer is only available for the linear equation".into()));
        }
        Ok(())
    }

    /// Parse flat `key = value` text. A `preset` key, wherever it appears,
    /// is applied first and the remaining keys override it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = match pairs.iter().find(|(k, _)| k == "preset") {
            Some((_, v)) => Self::preset(v)?,
            None => Self::preset("exp1_linear")?,
        };
        let mut paper = false;
        for (k, v) in pairs.iter().filter(|(k, _)| k != "preset") {
            if k == "paper_scale" {
                paper = parse_bool(v)?;
            } else {
                cfg.set(k, v)?;
            }
        }
        if paper {
            cfg = cfg.paper_scale();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> { v.parse::<f64>().map_err(|_| Error::Config(format!("{key}: not a number: {v:?}"))) };
        let int = |v: &str| -> Result<usize> { v.parse::<usize>().map_err(|_| Error::Config(format!("{key}: not an integer: {v:?}"))) };
        let list = |v: &str| -> Result<Vec<f64>> { v.split(',').map(|s| num(s.trim())).collect() };
        match key {
            "name" => self.name = value.to_string(),
            "family" => self.params.family = value.parse()?,
            "beta" => self.params.beta = num(value)?,
            "alpha" => self.params.alpha = num(value)?,
            "delta" => self.params.delta = num(value)?,
            "r" | "rate" => self.params.rate = num(value)?,
            "length" => self.params.length = num(value)?,
            "p" | "power" => {
                self.params.power = match value {
                    "none" | "linear" => None,
                    v => Some(num(v)?),
                }
            }
            "kind" => self.kind = value.parse()?,
            "initial" => self.initial = InitialCondition::parse(value)?,
            "observer_initial" => self.observer_initial = InitialCondition::parse(value)?,
            "m" | "nodes" => self.nodes = int(value)?,
            "n" | "steps" => self.steps = int(value)?,
            "t" | "t_final" => {
                self.t_final = num(value)?;
                self.snapshot_times = vec![0.0, self.t_final / 2.0, self.t_final];
            }
            "scheme" => self.scheme = value.parse()?,
            "kernel_tol" => self.kernel.tol = num(value)?,
            "max_iter" => self.kernel.max_iter = int(value)?,
            "inner_tol" => self.inner_tol = num(value)?,
            "max_inner" => self.max_inner = int(value)?,
            "fit_window" => {
                let v = list(value)?;
                if v.len() != 2 {
                    return Err(Error::Config("fit_window needs two numbers".into()));
                }
                self.fit_window = Some((v[0], v[1]));
            }
            "snapshot_times" => self.snapshot_times = list(value)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nodes, self.params.length)
    }

    pub fn time(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.steps, self.t_final)
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("not a boolean: {other:?}"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelSummary {
    pub role: &'static str,
    pub iterations: usize,
    pub last_increment: f64,
    pub degree: usize,
    pub pde_residual: f64,
    pub bc_residual: f64,
}

impl KernelSummary {
    pub fn of(kernel: &Kernel) -> Self {
        let res = kernel_residual(kernel);
        Self {
            role: kernel.role().name(),
            iterations: kernel.iterations(),
            last_increment: kernel.last_increment(),
            degree: kernel.poly().degree(),
            pde_residual: res.pde_sup,
            bc_residual: res.bc_sup,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NonlinearSummary {
    pub scheme: Linearization,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    pub max_final_correction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub name: String,
    pub kind: RunKind,
    pub params: PhysicsParams,
    pub initial: &'static str,
    pub nodes: usize,
    pub steps: usize,
    pub t_final: f64,
    pub dt: f64,
    pub fits: BTreeMap<String, DecayFit>,
    /// `||(I - U)^{-1}|| (1 + ||k||)` for the control transform.
    pub decay_constant: Option<f64>,
    pub control_kernel: Option<KernelSummary>,
    pub observer_kernel: Option<KernelSummary>,
    pub nonlinear: Option<NonlinearSummary>,
    /// `||u(T) - u(0)|| / ||u(0)||`.
    pub relative_drift: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub record: RunRecord,
    pub summary: Summary,
    pub xs: Vec<f64>,
}

/// File name for a cached kernel: every input that affects the polynomial,
/// as exact bit patterns.
fn cache_name(role: KernelRole, params: &PhysicsParams, opts: &SolveOptions) -> String {
    let bits = [params.beta, params.alpha, params.delta, params.rate, params.length, opts.tol]
        .iter()
        .map(|v| format!("{:016x}", v.to_bits()))
        .collect::<Vec<_>>()
        .join("-");
    format!("{}-{}-{}-{}.kernel", role.name(), params.family, bits, opts.max_iter)
}

/// Build a kernel, or load it from `cache` when an identical build exists.
pub fn cached_kernel(role: KernelRole, params: &PhysicsParams, opts: &SolveOptions, cache: Option<&Path>) -> Result<Kernel> {
    let build = || match role {
        KernelRole::ObserverP => observer_kernel(params, opts),
        _ => solve_kernel(params, opts),
    };
    let Some(dir) = cache else { return build() };
    let path = dir.join(cache_name(role, params, opts));
    if path.exists() {
        log::info!("kernel cache hit: {}", path.display());
        return read_kernel(BufReader::new(fs::File::open(&path)?));
    }
    let kernel = build()?;
    fs::create_dir_all(dir)?;
    write_kernel(&kernel, BufWriter::new(fs::File::create(&path)?))?;
    Ok(kernel)
}

pub fn run_experiment(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let time = cfg.time()?;
    let params = cfg.params;
    let u0 = cfg.initial.sample(grid, params.family);
    let h = grid.spacing();
    let inner = InnerSolve {
        scheme: cfg.scheme,
        tol: cfg.inner_tol,
        max_iter: cfg.max_inner,
    };
    let run_opts = RunOptions {
        nonlinear: params.power.map(|_| inner),
        snapshot_times: cfg.snapshot_times.clone(),
    };

    let mut control_summary = None;
    let mut observer_summary = None;
    let mut ck = None;
    let (record, fit_columns, u_final): (RunRecord, Vec<&str>, Vec<Complex64>) = match cfg.kind {
        RunKind::Uncontrolled => {
            let free = params.with_rate(0.0);
            let id = TransformMatrix::identity(&grid);
            let run = run_target(&u0, &free, &time, &id, &run_opts, None)?;
            (run.record, vec!["l2_u"], run.u_final)
        }
        RunKind::Controlled => {
            let kernel = cached_kernel(KernelRole::control_for(params.family), &params, &cfg.kernel, cache)?;
            let t = TransformMatrix::build(&kernel, &grid)?;
            ck = Some(decay_constant(&t, &kernel));
            control_summary = Some(KernelSummary::of(&kernel));
            let w0 = t.forward(&u0)?;
            let run = run_target(&w0, &params, &time, &t, &run_opts, None)?;
            (run.record, vec!["l2_u", "l2_w"], run.u_final)
        }
        RunKind::Observer => {
            let control = cached_kernel(KernelRole::control_for(params.family), &params, &cfg.kernel, cache)?;
            let observer = cached_kernel(KernelRole::ObserverP, &params, &cfg.kernel, cache)?;
            let t = TransformMatrix::build(&control, &grid)?;
            ck = Some(decay_constant(&t, &control));
            control_summary = Some(KernelSummary::of(&control));
            observer_summary = Some(KernelSummary::of(&observer));
            let u_hat0 = cfg.observer_initial.sample(grid, params.family);
            let run = run_plant_observer_with(&u0, &u_hat0, &params, &time, control, observer, &cfg.snapshot_times)?;
            let last = run
                .record
                .snapshots
                .iter()
                .rev()
                .find(|s| s.field == "u")
                .map(|s| s.values.clone())
                .unwrap_or_default();
            (run.record, vec!["l2_u", "l2_uhat", "l2_utilde"], last)
        }
    };

    let window = cfg.fit_window.unwrap_or_else(|| default_window(&record.times));
    let mut fits = BTreeMap::new();
    for col in fit_columns {
        if let Some(v) = record.column(col) {
            match fit_decay(&record.times, v, window) {
                Ok(f) => {
                    fits.insert(col.to_string(), f);
                }
                Err(e) => log::warn!("no decay fit for {col}: {e}"),
            }
        }
    }
    let norms = record.column("l2_u").unwrap_or(&[]);
    let initial_norm = norms.first().copied().unwrap_or(0.0);
    let final_norm = norms.last().copied().unwrap_or(0.0);
    let relative_drift = if u_final.len() == u0.values().len() && initial_norm > 0.0 {
        let d: Vec<Complex64> = u_final.iter().zip(u0.values()).map(|(a, b)| a - b).collect();
        l2_norm(&d, h) / initial_norm
    } else {
        f64::NAN
    };
    let nonlinear = record.nonlinear.as_ref().map(|r| NonlinearSummary {
        scheme: r.scheme,
        max_iterations: r.max_iterations(),
        mean_iterations: r.mean_iterations(),
        max_final_correction: r.corrections.iter().copied().fold(0.0, f64::max),
    });
    let summary = Summary {
        name: cfg.name.clone(),
        kind: cfg.kind,
        params,
        initial: cfg.initial.name(),
        nodes: cfg.nodes,
        steps: cfg.steps,
        t_final: cfg.t_final,
        dt: time.dt(),
        fits,
        decay_constant: ck,
        control_kernel: control_summary,
        observer_kernel: observer_summary,
        nonlinear,
        relative_drift,
        initial_norm,
        final_norm,
    };
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        record,
        summary,
        xs: grid.xs(),
    })
}

/// Write `norms.csv`, `snapshots.csv`, `plot.py` and `summary.json` into `dir`.
pub fn write_artifacts(outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    outcome.record.write_csv(BufWriter::new(fs::File::create(dir.join("norms.csv"))?))?;
    outcome
        .record
        .write_snapshots_csv(&outcome.xs, BufWriter::new(fs::File::create(dir.join("snapshots.csv"))?))?;
    let json = serde_json::to_string_pretty(&outcome.summary).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    fs::write(dir.join("plot.py"), plot_script(&outcome.summary.name))?;
    Ok(())
}

fn plot_script(title: &str) -> String {
    format!(
        r#"# Plots the run in this directory: L2 norms on a log scale and |field| snapshots.
import csv
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(here, name)) as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    return head, [[float(v) for v in r] for r in body]


head, rows = read("norms.csv")
t = [r[0] for r in rows]
fig, ax = plt.subplots(1, 2, figsize=(11, 4))
for j, name in enumerate(head[1:], start=1):
    if name.startswith("l2_"):
        ax[0].semilogy(t, [max(r[j], 1e-300) for r in rows], label=name)
ax[0].set_xlabel("t")
ax[0].set_ylabel("L2 norm")
ax[0].legend()

head, rows = read("snapshots.csv")
x = [r[0] for r in rows]
for j in range(1, len(head), 2):
    label = head[j][3:]
    ax[1].plot(x, [(r[j] ** 2 + r[j + 1] ** 2) ** 0.5 for r in rows], label=label)
ax[1].set_xlabel("x")
ax[1].set_ylabel("modulus")
ax[1].legend(fontsize="small")
fig.suptitle("{title}")
fig.tight_layout()
fig.savefig(os.path.join(here, "{title}.png"), dpi=150)
"#
    )
}
