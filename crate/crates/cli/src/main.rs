//! `backstep` command line: kernel export, experiment runs, decay fits, rate sweeps.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use backstep::experiment::{cached_kernel, run_experiment, write_artifacts, ExperimentConfig, KernelSummary, PRESETS};
use backstep::fit::{default_window, fit_decay};
use backstep::record::RunRecord;
use backstep::{BcFamily, Error, KernelRole, PhysicsParams, SolveOptions};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "backstep", version, about = "Backstepping kernels and boundary-control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Role {
    Control,
    Observer,
}

#[derive(Subcommand)]
enum Command {
    /// Build a kernel and export its coefficient table.
    Kernel {
        #[arg(long, default_value = "A")]
        family: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 8.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        length: f64,
        #[arg(long, value_enum, default_value = "control")]
        role: Role,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Coefficient table destination; summary only when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a preset or a config file.
    Run {
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra `key=value` overrides, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        paper_scale: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Directory for cached kernels.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Fit an exponential decay rate to a column of a norms CSV.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value = "l2_u")]
        column: String,
        /// `a,b`; the middle half of the horizon by default.
        #[arg(long)]
        window: Option<String>,
    },
    /// Run a preset for several decay rates, one output directory each.
    Sweep {
        #[arg(long, default_value = "exp1_linear")]
        preset: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        rates: Vec<f64>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, short, default_value = "sweep")]
        out: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Worker threads; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the available presets.
    Presets,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, overrides: &[String]) -> backstep::Result<()> {
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {kv:?} is not key=value")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()
}

fn dispatch(cmd: Command) -> backstep::Result<()> {
    match cmd {
        Command::Kernel {
            family,
            beta,
            alpha,
            delta,
            r,
            length,
            role,
            tol,
            max_iter,
            out,
        } => {
            let family: BcFamily = family.parse()?;
            let params = PhysicsParams::new(beta, alpha, delta, r, length, family)?;
            let opts = SolveOptions {
                tol,
                max_iter,
                ..Default::default()
            };
            let role = match role {
                Role::Control => KernelRole::control_for(family),
                Role::Observer => KernelRole::ObserverP,
            };
            let kernel = cached_kernel(role, &params, &opts, None)?;
            if let Some(path) = out {
                backstep::kernelgen::write_kernel(&kernel, BufWriter::new(fs::File::create(&path)?))?;
            }
            print_json(&KernelSummary::of(&kernel))
        }
        Command::Run {
            preset,
            config,
            overrides,
            paper_scale,
            out,
            cache,
        } => {
            let mut cfg = match (&preset, &config) {
                (_, Some(path)) => ExperimentConfig::parse(&fs::read_to_string(path)?)?,
                (Some(name), None) => ExperimentConfig::preset(name)?,
                (None, None) => return Err(Error::Config("run needs --preset or --config".into())),
            };
            apply_overrides(&mut cfg, &overrides)?;
            if paper_scale {
                cfg = cfg.paper_scale();
            }
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(&cfg.name));
            let outcome = run_experiment(&cfg, cache.as_deref())?;
            write_artifacts(&outcome, &dir)?;
            log::info!("wrote {}", dir.display());
            print_json(&outcome.summary)
        }
        Command::Fit { csv, column, window } => {
            let rec = RunRecord::read_csv(BufReader::new(fs::File::open(&csv)?))?;
            let values = rec
                .column(&column)
                .ok_or_else(|| Error::Config(format!("no column {column:?} in {}", csv.display())))?;
            let window = match window {
                Some(w) => parse_window(&w)?,
                None if rec.times.is_empty() => return Err(Error::Config("CSV has no rows".into())),
                None => default_window(&rec.times),
            };
            print_json(&fit_decay(&rec.times, values, window)?)
        }
        Command::Sweep {
            preset,
            rates,
            overrides,
            out,
            cache,
            jobs,
        } => sweep(&preset, &rates, &overrides, &out, cache.as_deref(), jobs),
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(())
        }
    }
}

fn parse_window(s: &str) -> backstep::Result<(f64, f64)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Config(format!("window {s:?}: {e}")))?;
    match parts[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::Config(format!("window {s:?} needs two numbers"))),
    }
}

fn sweep(
    preset: &str,
    rates: &[f64],
    overrides: &[String],
    out: &Path,
    cache: Option<&Path>,
    jobs: Option<usize>,
) -> backstep::Result<()> {
    let mut base = ExperimentConfig::preset(preset)?;
    apply_overrides(&mut base, overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<backstep::Result<(f64, Option<f64>, Option<f64>)>> = pool.install(|| {
        rates
            .par_iter()
            .map(|&r| {
                let mut cfg = base.clone();
                cfg.params.rate = r;
                cfg.name = format!("{}_r{r}", base.name);
                cfg.validate()?;
                let outcome = run_experiment(&cfg, cache)?;
                write_artifacts(&outcome, &out.join(format!("r_{r}")))?;
                let gamma = outcome.summary.fits.get("l2_u").map(|f| f.rate);
                Ok((r, gamma, outcome.summary.decay_constant))
            })
            .collect()
    });
    fs::create_dir_all(out)?;
    let mut table = BufWriter::new(fs::File::create(out.join("sweep.csv"))?);
    writeln!(table, "r,gamma,c_k")?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |v| format!("{v:.16e}"));
    for res in results {
        let (r, gamma, ck) = res?;
        writeln!(table, "{r:.16e},{},{}", fmt(gamma), fmt(ck))?;
        println!("r = {r}: gamma = {}, c_k = {}", fmt(gamma), fmt(ck));
    }
    table.flush()?;
    Ok(())
}

fn print_json<T: serde::Serialize>(v: &T) -> backstep::Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?;
    println!("{s}");
    Ok(())
}
