//! Quadrature, interpolation and time stepping shared by the other modules.

pub mod interp;
pub mod ode;
pub mod quadrature;

pub use interp::RadialTable;
pub use ode::{rk4_step, Rk4};
pub use quadrature::{integrate_1d, integrate_1d_with_error, QuadratureSpec, SingularityHint};
