//! Plain-text kernel export: one JSON header line, then `i,j,re,im` rows.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Kernel, KernelRole};
use crate::error::{Error, Result};
use crate::params::PhysicsParams;
use crate::poly2::Poly2;

const FORMAT: &str = "backstep-kernel";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    role: KernelRole,
    params: PhysicsParams,
    generator: PhysicsParams,
    iterations: usize,
    increments: Vec<f64>,
    degree: usize,
}

pub fn write_kernel<W: Write>(kernel: &Kernel, mut out: W) -> Result<()> {
    let header = Header {
        format: FORMAT.into(),
        version: VERSION,
        role: kernel.role(),
        params: *kernel.params(),
        generator: *kernel.generator(),
        iterations: kernel.iterations(),
        increments: kernel.increments().to_vec(),
        degree: kernel.poly().degree(),
    };
    let json = serde_json::to_string(&header).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out, "# {json}")?;
    writeln!(out, "i,j,re,im")?;
    for (i, j, c) in kernel.poly().terms() {
        writeln!(out, "{i},{j},{:.16e},{:.16e}", c.re, c.im)?;
    }
    Ok(())
}

pub fn read_kernel<R: BufRead>(input: R) -> Result<Kernel> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty kernel file".into()))??;
    let json = first
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing kernel header".into()))?;
    let header: Header = serde_json::from_str(json.trim()).map_err(|e| Error::Parse(e.to_string()))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(Error::Parse(format!(
            "unsupported kernel format {} v{}",
            header.format, header.version
        )));
    }
    header.params.validate()?;
    let mut terms = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (n == 0 && line.starts_with('i')) {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse(format!("bad kernel row {line:?}"));
        if f.len() != 4 {
            return Err(bad());
        }
        let i: usize = f[0].parse().map_err(|_| bad())?;
        let j: usize = f[1].parse().map_err(|_| bad())?;
        let re: f64 = f[2].parse().map_err(|_| bad())?;
        let im: f64 = f[3].parse().map_err(|_| bad())?;
        if i + j > header.degree {
            return Err(bad());
        }
        terms.push((i, j, Complex64::new(re, im)));
    }
    let mut g = Poly2::from_terms(terms);
    if g.degree() < header.degree {
        // keep the stored degree so a round trip is exact
        g = &g + &Poly2::with_degree(header.degree);
    }
    Ok(Kernel::from_parts(
        header.role,
        header.params,
        header.generator,
        g,
        header.iterations,
        header.increments,
    ))
}
