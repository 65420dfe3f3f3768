//! Exponential decay rates from norm time series.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    /// `gamma` in `||u(t)|| ~ amplitude * exp(-gamma t)`.
    pub rate: f64,
    pub amplitude: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub samples: usize,
}

/// Middle half of `[t0, t1]`.
pub fn default_window(times: &[f64]) -> (f64, f64) {
    let (a, b) = (times[0], times[times.len() - 1]);
    let span = b - a;
    (a + 0.25 * span, a + 0.75 * span)
}

/// Least-squares line through `(t, ln y)` over `window` (inclusive).
pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::Config("times and values differ in length".into()));
    }
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::Config(format!("empty fit window [{a}, {b}]")));
    }
    // a little slack so window ends computed from dt products are not lost to rounding
    let eps = 1e-9 * (b - a);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= a - eps && **t <= b + eps)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "{} samples in window [{a}, {b}], need at least {MIN_SAMPLES}",
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Config(format!("non-positive norm {v} at t = {t}; exact zero data?")));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, v) in &pts {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (v.ln() - ym);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let residual = (pts
        .iter()
        .map(|&(t, v)| (v.ln() - intercept - slope * t).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        window,
        rate: -slope,
        amplitude: intercept.exp(),
        residual,
        samples: pts.len(),
    })
}
