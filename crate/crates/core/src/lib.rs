//! Spectral-Galerkin solver and verification laboratory for the wave equation
//! with a nonnegative potential on an interval,
//!
//! ```text
//! u_tt - u_xx + V(x) u = f(t, x)   on (0, T) x (0, L)
//! ```
//!
//! with Dirichlet boundary values, possibly singular (point-mass) data handled
//! through mollified nets.

pub mod corpus;
pub mod energy;
pub mod error;
pub mod fd_oracle;
pub mod functions;
pub mod galerkin;
pub mod lifting;
pub mod quadrature;
pub mod singular;
pub mod spectral;
pub mod vws;

pub use error::{Result, WaveError};
