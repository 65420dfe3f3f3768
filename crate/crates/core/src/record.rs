//! Time series produced by a run, and their CSV form.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Linearization {
    Taylor,
    Picard,
}

impl std::str::FromStr for Linearization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "taylor" => Ok(Linearization::Taylor),
            "picard" => Ok(Linearization::Picard),
            other => Err(Error::Config(format!("unknown linearization {other:?}"))),
        }
    }
}

/// Inner-iteration statistics of a nonlinear run, one entry per time step.
#[derive(Clone, Debug, Serialize)]
pub struct NonlinearSolveReport {
    pub scheme: Linearization,
    pub iterations: Vec<usize>,
    pub corrections: Vec<f64>,
}

impl NonlinearSolveReport {
    pub fn max_iterations(&self) -> usize {
        self.iterations.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: String,
    pub t: f64,
    pub values: Vec<Complex64>,
}

#[derive(Clone, Debug, Default)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub snapshots: Vec<Snapshot>,
    pub nonlinear: Option<NonlinearSolveReport>,
}

impl RunRecord {
    pub fn with_columns(times: Vec<f64>, names: &[&str]) -> Self {
        Self {
            times,
            columns: names.iter().map(|n| (n.to_string(), Vec::new())).collect(),
            snapshots: Vec::new(),
            nonlinear: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn column_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        self.columns.iter_mut().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push((name.to_string(), values));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        writeln!(out, "{}", header.join(","))?;
        for (i, t) in self.times.iter().enumerate() {
            write!(out, "{t:.16e}")?;
            for (_, col) in &self.columns {
                write!(out, ",{:.16e}", col[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Inverse of [`RunRecord::write_csv`]; snapshots and reports are not part of the CSV.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))??;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if names.first().map(String::as_str) != Some("t") {
            return Err(Error::Parse("first CSV column must be t".into()));
        }
        let mut rec = RunRecord::default();
        for n in &names[1..] {
            rec.columns.push((n.clone(), Vec::new()));
        }
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != names.len() {
                return Err(Error::Parse(format!("row has {} fields, header has {}", vals.len(), names.len())));
            }
            rec.times.push(vals[0]);
            for (k, v) in vals[1..].iter().enumerate() {
                rec.columns[k].1.push(*v);
            }
        }
        Ok(rec)
    }

    /// Wide snapshot table: `x`, then `re_<field>@t`, `im_<field>@t` per snapshot.
    pub fn write_snapshots_csv<W: Write>(&self, xs: &[f64], mut out: W) -> Result<()> {
        let mut header = vec!["x".to_string()];
        for s in &self.snapshots {
            header.push(format!("re_{}@{}", s.field, s.t));
            header.push(format!("im_{}@{}", s.field, s.t));
        }
        writeln!(out, "{}", header.join(","))?;
        for (i, x) in xs.iter().enumerate() {
            write!(out, "{x:.16e}")?;
            for s in &self.snapshots {
                write!(out, ",{:.16e},{:.16e}", s.values[i].re, s.values[i].im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
