//! Boundary backstepping for the higher-order Schrödinger equation
//!
//! `i u_t + i beta u_xxx + alpha u_xx + i delta u_x + |u|^p u = 0` on `(0, L)`,
//! controlled from the left end. The crate builds the transformation kernels,
//! the discrete Volterra transform, a Crank–Nicolson solver for the target
//! system, the output-feedback observer and the experiment driver.

pub mod error;
pub mod experiment;
pub mod fit;
pub mod grid;
pub mod kernelgen;
pub mod linalg;
pub mod observer;
pub mod params;
pub mod poly2;
pub mod record;
pub mod timestepper;
pub mod transform;

pub use error::{Error, Result};
pub use kernelgen::{observer_kernel, solve_kernel, Kernel, KernelRole, SolveOptions};
pub use params::{BcFamily, PhysicsParams};
pub use poly2::{Axis, Poly2};
