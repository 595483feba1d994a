//! Sharp pointwise gradient estimates for generalized Poisson integrals on the
//! half-space `R^{n+1}_+`.
//!
//! The crate computes the constants `C_p` in
//! `|grad u_f(x)| <= C_p x_{n+1}^{-(n+p)/p} ||f||_p` for `1 <= p <= inf`,
//! their directional variants, and checks them against brute-force oracles.

pub mod cli;
pub mod constants;
pub mod error;
pub mod oracle;
pub mod poisson;
pub mod quadrature;
pub mod serde_ext;
pub mod specfun;
pub mod verify;

pub use constants::{ConstantResult, Direction, Method, ProblemParams};
pub use error::{Error, Result};
pub use poisson::{BoundaryFunction, HalfSpacePoint};
pub use quadrature::{IntegralResult, QuadratureConfig};
