//! Optimal control of the dead oil isotherm system on the unit square.
//!
//! The state `(u, p)` solves
//!
//! ```text
//! u_t − div(φ'(u)∇u) − div(g(u)∇p) = 0
//! p_t − div(d(u)∇p)                = f
//! ```
//!
//! with homogeneous Dirichlet data, and the control `f` minimizes a tracking
//! cost plus an `L^{2q0}` penalty and a time-derivative penalty. Gradients
//! come from a discrete adjoint that is consistent with the time stepper.

pub mod adjoint;
pub mod coefficients;
pub mod config;
pub mod control;
pub mod error;
pub mod forward;
pub mod io;
pub mod linalg;
pub mod linearized;
pub mod mesh;
pub mod objective;
pub mod optimizer;
pub mod problem;
pub mod profile;
pub mod random;

pub use error::{Error, Result};
pub use mesh::{Discretization, ScalarField, SpaceTimeField};
