use num_complex::Complex64;
use serde::Serialize;

use super::{Kernel, KernelRole};

/// Sup-norm residuals of a kernel against its PDE and boundary conditions,
/// sampled on a fixed lattice of the triangle.
#[derive(Clone, Debug, Serialize)]
pub struct KernelResidual {
    pub pde_sup: f64,
    pub bc_sup: f64,
    /// Per boundary condition, in the order they are listed for the role.
    pub bc_parts: Vec<(String, f64)>,
}

/// Samples per direction.
pub const LATTICE: usize = 51;

pub fn kernel_residual(kernel: &Kernel) -> KernelResidual {
    let p = kernel.params();
    let l = p.length;
    let (a, d, r) = (p.alpha_scaled(), p.delta_scaled(), p.rate_scaled());
    let i_a = Complex64::new(0.0, a);
    let k = |x: f64, y: f64, dx: usize, dy: usize| kernel.eval_unchecked(x, y, dx, dy);
    let zeroth = match kernel.role() {
        KernelRole::ControlK | KernelRole::ControlEll => r,
        KernelRole::ObserverP => -r,
    };

    // Interior points stay half a cell away from every edge.
    let h = l / LATTICE as f64;
    let mut pde_sup = 0f64;
    for i in 0..LATTICE {
        let x = (i as f64 + 0.5) * h;
        for j in i + 1..LATTICE {
            let y = (j as f64 + 0.5) * h;
            let res = k(x, y, 3, 0) + k(x, y, 0, 3) - i_a * (k(x, y, 2, 0) - k(x, y, 0, 2))
                + d * (k(x, y, 1, 0) + k(x, y, 0, 1))
                + zeroth * k(x, y, 0, 0);
            pde_sup = pde_sup.max(res.norm());
        }
    }

    let edge: Vec<f64> = (0..LATTICE).map(|i| i as f64 * l / (LATTICE - 1) as f64).collect();
    let sup = |f: &dyn Fn(f64) -> Complex64| edge.iter().map(|&x| f(x).norm()).fold(0.0, f64::max);
    // d/dx [k_x(x, x)] = k_xx + k_xy on the diagonal
    let diag_slope = |x: f64| k(x, x, 2, 0) + k(x, x, 1, 1);

    let bc_parts: Vec<(String, f64)> = match kernel.role() {
        KernelRole::ControlK => vec![
            ("k(x,x)".into(), sup(&|x| k(x, x, 0, 0))),
            ("k(x,L)".into(), sup(&|x| k(x, l, 0, 0))),
            ("d/dx k_x(x,x) + r/3".into(), sup(&|x| diag_slope(x) + r / 3.0)),
        ],
        KernelRole::ControlEll => vec![
            ("l(x,x)".into(), sup(&|x| k(x, x, 0, 0))),
            (
                "(l_yy + i a l_y + d l)(x,L)".into(),
                sup(&|x| k(x, l, 0, 2) + i_a * k(x, l, 0, 1) + d * k(x, l, 0, 0)),
            ),
            ("l_x(x,x) - r (L-x)/3".into(), sup(&|x| k(x, x, 1, 0) - r * (l - x) / 3.0)),
        ],
        KernelRole::ObserverP => vec![
            ("p(0,y)".into(), sup(&|y| k(0.0, y, 0, 0))),
            ("p(x,x)".into(), sup(&|x| k(x, x, 0, 0))),
            ("d/dx p_x(x,x) - r/3".into(), sup(&|x| diag_slope(x) - r / 3.0)),
        ],
    };
    let bc_sup = bc_parts.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    KernelResidual {
        pde_sup,
        bc_sup,
        bc_parts,
    }
}
