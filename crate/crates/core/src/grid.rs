//! Uniform grid, difference operators and boundary-constraint rows.
//!
//! Nodes are `x_m = m h`, `m = 0..M-1` (zero-based throughout the crate).
//! The three rows nearest the boundary of the assembled operator are replaced
//! by constraint rows: Dirichlet at node 0 for both families, then
//!
//! * family A: Neumann at `M-2`, Dirichlet at `M-1`;
//! * family B: second derivative at `M-2`, Neumann at `M-1`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{BcFamily, PhysicsParams};

pub const MIN_NODES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    nodes: usize,
    length: f64,
    spacing: f64,
}

impl Grid {
    pub fn new(nodes: usize, length: f64) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::Config(format!("need at least {MIN_NODES} nodes, got {nodes}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Config("grid length must be positive".into()));
        }
        Ok(Self {
            nodes,
            length,
            spacing: length / (nodes - 1) as f64,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x(&self, m: usize) -> f64 {
        if m + 1 == self.nodes {
            self.length
        } else {
            m as f64 * self.spacing
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nodes).map(|m| self.x(m)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        (0..self.nodes).map(|m| f(self.x(m))).collect()
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len == self.nodes {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("vector of length {len} on a {}-node grid", self.nodes)))
        }
    }
}

/// Nodal values on a grid, tagged with the boundary family they obey.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    values: Vec<Complex64>,
    grid: Grid,
    family: BcFamily,
}

impl StateVector {
    pub fn new(values: Vec<Complex64>, grid: Grid, family: BcFamily) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self { values, grid, family })
    }

    pub fn from_fn(grid: Grid, family: BcFamily, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            values: grid.sample(f),
            grid,
            family,
        }
    }

    pub fn zeros(grid: Grid, family: BcFamily) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.nodes()],
            grid,
            family,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn family(&self) -> BcFamily {
        self.family
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, self.grid.spacing())
    }

    pub fn trace_uxx_l(&self) -> Complex64 {
        trace_uxx_l(&self.values, self.grid.spacing())
    }

    /// Largest absolute residual of the family's three constraint rows.
    pub fn bc_residual(&self) -> f64 {
        constraint_rows(self.family, self.grid.nodes(), self.grid.spacing())
            .iter()
            .map(|(_, row)| row.iter().map(|&(j, c)| self.values[j] * c).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }
}

/// Composite-trapezoid L2 norm.
pub fn l2_norm(v: &[Complex64], h: f64) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    let inner: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let ends = 0.5 * (v[0].norm_sqr() + v[n - 1].norm_sqr());
    (h * (inner - ends)).sqrt()
}

/// One-sided second-order approximation of `v_xx` at the right end.
pub fn trace_uxx_l(v: &[Complex64], h: f64) -> Complex64 {
    let n = v.len();
    (-v[n - 4] + v[n - 3] * 4.0 - v[n - 2] * 5.0 + v[n - 1] * 2.0) / (h * h)
}

/// Weights of [`trace_uxx_l`] as `(node, weight)` pairs.
pub fn trace_uxx_l_weights(nodes: usize, h: f64) -> [(usize, f64); 4] {
    let h2 = h * h;
    [
        (nodes - 4, -1.0 / h2),
        (nodes - 3, 4.0 / h2),
        (nodes - 2, -5.0 / h2),
        (nodes - 1, 2.0 / h2),
    ]
}

type SparseRow = Vec<(usize, f64)>;

/// The three boundary-constraint rows `(row index, [(column, coefficient)])`.
pub fn constraint_rows(family: BcFamily, nodes: usize, h: f64) -> [(usize, SparseRow); 3] {
    let m = nodes;
    let neumann = vec![(m - 3, 1.0 / (2.0 * h)), (m - 2, -4.0 / (2.0 * h)), (m - 1, 3.0 / (2.0 * h))];
    match family {
        BcFamily::A => [(0, vec![(0, 1.0)]), (m - 2, neumann), (m - 1, vec![(m - 1, 1.0)])],
        BcFamily::B => [
            (0, vec![(0, 1.0)]),
            (m - 2, trace_uxx_l_weights(m, h).to_vec()),
            (m - 1, neumann),
        ],
    }
}

/// Full-size difference matrices `(D, D2, D3)` with `D = (D+ + D-)/2`,
/// `D2 = D+ D-`, `D3 = D+ D+ D-`, filled on every row where the stencil
/// fits inside the grid (rows `1..=M-3`); other rows are left zero.
pub fn difference_matrices(grid: &Grid) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let m = grid.nodes();
    let h = grid.spacing();
    let mut d1 = Array2::zeros((m, m));
    let mut d2 = Array2::zeros((m, m));
    let mut d3 = Array2::zeros((m, m));
    for i in 1..m - 2 {
        d1[[i, i - 1]] = -0.5 / h;
        d1[[i, i + 1]] = 0.5 / h;
        d2[[i, i - 1]] = 1.0 / (h * h);
        d2[[i, i]] = -2.0 / (h * h);
        d2[[i, i + 1]] = 1.0 / (h * h);
        let h3 = h * h * h;
        d3[[i, i - 1]] = -1.0 / h3;
        d3[[i, i]] = 3.0 / h3;
        d3[[i, i + 1]] = -3.0 / h3;
        d3[[i, i + 2]] = 1.0 / h3;
    }
    (d1, d2, d3)
}

/// Forward and backward shift differences `(D+, D-)` as full matrices,
/// truncated where the stencil would leave the grid.
pub fn shift_differences(grid: &Grid) -> (Array2<f64>, Array2<f64>) {
    let m = grid.nodes();
    let h = grid.spacing();
    let mut fwd = Array2::zeros((m, m));
    let mut bwd = Array2::zeros((m, m));
    for i in 0..m {
        if i + 1 < m {
            fwd[[i, i]] = -1.0 / h;
            fwd[[i, i + 1]] = 1.0 / h;
        }
        if i > 0 {
            bwd[[i, i]] = 1.0 / h;
            bwd[[i, i - 1]] = -1.0 / h;
        }
    }
    (fwd, bwd)
}

/// Assembled spatial operator together with the rows that carry constraints.
#[derive(Clone, Debug)]
pub struct SpatialOperator {
    pub matrix: Array2<Complex64>,
    pub constraint_rows: [usize; 3],
    pub family: BcFamily,
}

impl SpatialOperator {
    pub fn is_constraint_row(&self, i: usize) -> bool {
        self.constraint_rows.contains(&i)
    }
}

/// `A = beta D3 - i alpha D2 + delta D + r I` on interior rows, constraint
/// rows for `params.family` on the boundary rows. The `r I` term is included
/// only when `include_damping` is set.
pub fn build_operator(grid: &Grid, params: &PhysicsParams, include_damping: bool) -> Result<SpatialOperator> {
    let m = grid.nodes();
    if m < MIN_NODES {
        return Err(Error::Config(format!("need at least {MIN_NODES} nodes")));
    }
    let (d1, d2, d3) = difference_matrices(grid);
    let ia = Complex64::new(0.0, params.alpha);
    let damping = if include_damping { params.rate } else { 0.0 };
    let mut a = Array2::from_elem((m, m), Complex64::new(0.0, 0.0));
    for i in 1..m - 2 {
        for j in i.saturating_sub(1)..(i + 3).min(m) {
            a[[i, j]] = params.beta * d3[[i, j]] - ia * d2[[i, j]] + params.delta * d1[[i, j]];
        }
        a[[i, i]] += damping;
    }
    let rows = constraint_rows(params.family, m, grid.spacing());
    for (i, row) in &rows {
        a.row_mut(*i).fill(Complex64::new(0.0, 0.0));
        for &(j, c) in row {
            a[[*i, j]] = Complex64::new(c, 0.0);
        }
    }
    Ok(SpatialOperator {
        matrix: a,
        constraint_rows: [rows[0].0, rows[1].0, rows[2].0],
        family: params.family,
    })
}
