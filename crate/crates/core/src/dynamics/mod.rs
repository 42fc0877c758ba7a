//! Velocity evaluation, flow-map integration and the convergence experiment.

mod convergence;
mod evolve;
mod velocity;

pub use convergence::{
    convergence_experiment, fitted_order, radial_reference, tracer_ring, ConvergenceReport, ConvergenceRow,
    ConvergenceSetup, Reference,
};
pub use evolve::{evolve, evolve_with_tracers, passive_tracers, CoupledTrajectory, StepGrid, Trajectory};
pub use velocity::{
    induced_velocity, induced_velocity_into, self_induced_velocity, self_induced_velocity_into, SOURCE_BLOCK,
};
pub(crate) use velocity::sum_into;
