//! Euler–Poincaré regularization of the 2D Euler equations.
//!
//! - [`kernels`]: radial smoothing profiles (vortex blob, Euler-α, tabulated),
//!   the shape function `𝒢` and the regularized kernel `K_h(x) = K(x) 𝒢(|x|/ε)`.
//! - [`numerics`]: adaptive quadrature, monotone interpolation, RK4.
//! - [`measures`]: particle discretizations of vorticity measures.
//! - [`dynamics`]: direct-summation velocity, flow-map integration and the
//!   `ε → 0` convergence experiment.
//! - [`picard`]: the successive-flow-map iteration and its Cauchy gaps.

pub mod dynamics;
pub mod error;
pub mod io;
pub mod kernels;
pub mod measures;
pub mod numerics;
pub mod picard;
mod vec2;

pub use error::{Error, Result};
pub use kernels::{build_shape, GridSpec, KernelProfile, ShapeTable};
pub use measures::{DiagnosticsRecord, VortexSystem};
pub use vec2::Vec2;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
