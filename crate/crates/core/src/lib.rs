//! Numerical machinery for the degenerate Hessian product equation
//! u11*u22 = 1 on coordinate-convex functions: exact ODE-built solutions,
//! a singular three-dimensional product solution, a penalized
//! Newton-continuation Dirichlet solver, and a verification suite for the
//! equation's invariances and differential identities.

pub mod dirichlet;
pub mod error;
pub mod exact2d;
pub mod grid;
pub mod ode;
pub mod quad;
pub mod singular3d;
pub mod verify;

pub use error::{Error, Result};
