//! The `ε → 0` experiment: tracer trajectories under a shrinking family of
//! regularized kernels, compared against a reference flow.

use serde::{Deserialize, Serialize};

use super::evolve::{evolve_with_tracers, StepGrid, Trajectory};
use crate::error::{Error, Result};
use crate::kernels::{build_shape, GridSpec, KernelProfile, ShapeTable};
use crate::measures::VortexSystem;
use crate::vec2::Vec2;

/// How the reference tracer trajectories are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Rigid rotation about the vorticity centroid with
    /// `u_θ(r) = Γ_inside(r) / 2πr`. Valid for radially symmetric data.
    AnalyticRadial,
    /// The same particle system evolved with the singular kernel.
    ExactKernel,
    /// The last (smallest) entry of the ε list, which is then not reported.
    SmallestEpsilon,
}

#[derive(Debug, Clone)]
pub struct ConvergenceSetup {
    pub system: VortexSystem,
    pub tracers: Vec<Vec2>,
    pub profile: KernelProfile,
    pub grid: GridSpec,
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub reference: Reference,
    /// Repeat every run at `dt/2` and report the relative change of `E`.
    pub check_dt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    /// `max over samples and tracers of |η^ε − η_ref|`.
    pub error: f64,
    pub error_half_dt: Option<f64>,
    /// `|E(dt/2) − E(dt)| / E(dt)`.
    pub dt_sensitivity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub profile: String,
    pub reference: Reference,
    pub t_end: f64,
    pub dt: f64,
    pub particles: usize,
    pub tracers: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log E` against `log ε`.
    pub fitted_order: f64,
    /// `e^{−T}`, the rate exponent of the continuum estimate.
    pub theorem_exponent: f64,
    /// `E` strictly decreasing along the ε list.
    pub monotone: bool,
}

impl ConvergenceSetup {
    fn validate(&self) -> Result<()> {
        if self.tracers.is_empty() {
            return Err(Error::invalid("tracers", "need at least one tracer"));
        }
        let min_len = if self.reference == Reference::SmallestEpsilon { 3 } else { 2 };
        if self.eps_list.len() < min_len {
            return Err(Error::invalid("eps_list", format!("need at least {min_len} values")));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::invalid("eps_list", "values must be positive"));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("eps_list", "must be strictly decreasing"));
        }
        StepGrid::new(self.t_end, self.dt)?;
        Ok(())
    }
}

/// Rigid rotation of `tracers` about the vorticity centroid, each at the
/// angular speed the enclosed circulation gives a radially symmetric field.
pub fn radial_reference(system: &VortexSystem, tracers: &[Vec2], times: &[f64]) -> Result<Trajectory> {
    let total = system.total_circulation();
    if total == 0.0 {
        return Err(Error::invalid("system", "zero total circulation has no centroid"));
    }
    let mut center = Vec2::ZERO;
    for (&x, &g) in system.positions().iter().zip(system.circulations()) {
        center += g * x;
    }
    let center = center * (1.0 / total);

    let orbits: Vec<(Vec2, f64)> = tracers
        .iter()
        .map(|&p| {
            let d = p - center;
            let r = d.norm();
            if r == 0.0 {
                return (d, 0.0);
            }
            let inside: f64 = system
                .positions()
                .iter()
                .zip(system.circulations())
                .filter(|(x, _)| (**x - center).norm() < r)
                .map(|(_, g)| *g)
                .sum();
            (d, inside / (2.0 * std::f64::consts::PI * r * r))
        })
        .collect();

    let states = times
        .iter()
        .map(|&t| {
            orbits
                .iter()
                .map(|&(d, omega)| {
                    let (s, c) = (omega * t).sin_cos();
                    center + Vec2::new(c * d.x - s * d.y, s * d.x + c * d.y)
                })
                .collect()
        })
        .collect();

    Ok(Trajectory {
        times: times.to_vec(),
        states,
        system: VortexSystem::new(tracers.to_vec(), vec![0.0; tracers.len()], "reference")?,
        diagnostics: Vec::new(),
    })
}

fn tracer_run(setup: &ConvergenceSetup, shape: &ShapeTable, dt: f64, sample_every: usize) -> Result<Trajectory> {
    evolve_with_tracers(&setup.system, &setup.tracers, shape, setup.t_end, dt, sample_every).map(|c| c.tracers)
}

/// Sup-distance that tolerates a finer run sampled at a multiple of the
/// reference's rate: only the shared sample times are compared.
fn sup_error(run: &Trajectory, reference: &Trajectory) -> Result<f64> {
    if run.times.len() == reference.times.len() {
        return run.sup_distance(reference);
    }
    let mut worst: f64 = 0.0;
    let mut j = 0;
    for (t, st) in reference.times.iter().zip(&reference.states) {
        while j < run.times.len() && (run.times[j] - t).abs() > 1e-12 * t.abs().max(1.0) {
            j += 1;
        }
        let Some(other) = run.states.get(j) else {
            return Err(Error::invalid("trajectory", "sample times do not align"));
        };
        for (p, q) in st.iter().zip(other) {
            worst = worst.max((*p - *q).norm());
        }
    }
    Ok(worst)
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn convergence_experiment(setup: &ConvergenceSetup) -> Result<ConvergenceReport> {
    setup.validate()?;
    let half_every = 2 * setup.sample_every;

    let mut eps = setup.eps_list.clone();
    let (reference, reference_half) = match setup.reference {
        Reference::AnalyticRadial => {
            let grid = StepGrid::new(setup.t_end, setup.dt)?;
            let mut times: Vec<f64> = (0..=grid.steps)
                .filter(|s| s % setup.sample_every == 0)
                .map(|s| grid.time(s))
                .collect();
            if grid.steps % setup.sample_every != 0 {
                times.push(grid.time(grid.steps));
            }
            let r = radial_reference(&setup.system, &setup.tracers, &times)?;
            (r.clone(), r)
        }
        Reference::ExactKernel => {
            let exact = ShapeTable::exact();
            let r = tracer_run(setup, &exact, setup.dt, setup.sample_every)?;
            let h = if setup.check_dt {
                tracer_run(setup, &exact, setup.dt / 2.0, half_every)?
            } else {
                r.clone()
            };
            (r, h)
        }
        Reference::SmallestEpsilon => {
            let smallest = eps.pop().expect("validated length");
            let shape = build_shape(&setup.profile, &setup.grid, smallest)?;
            let r = tracer_run(setup, &shape, setup.dt, setup.sample_every)?;
            let h = if setup.check_dt {
                tracer_run(setup, &shape, setup.dt / 2.0, half_every)?
            } else {
                r.clone()
            };
            (r, h)
        }
    };

    let unit = build_shape(&setup.profile, &setup.grid, 1.0)?;
    let mut rows = Vec::with_capacity(eps.len());
    for &e in &eps {
        let shape = unit.with_epsilon(e)?;
        let run = tracer_run(setup, &shape, setup.dt, setup.sample_every)?;
        let error = sup_error(&run, &reference)?;
        let (error_half_dt, dt_sensitivity) = if setup.check_dt {
            let fine = tracer_run(setup, &shape, setup.dt / 2.0, half_every)?;
            let eh = sup_error(&fine, &reference_half)?;
            (Some(eh), Some((eh - error).abs() / error))
        } else {
            (None, None)
        };
        rows.push(ConvergenceRow {
            epsilon: e,
            error,
            error_half_dt,
            dt_sensitivity,
        });
    }

    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let order = if errors.iter().all(|e| *e > 0.0) {
        fitted_order(&eps, &errors)
    } else {
        f64::NAN
    };

    Ok(ConvergenceReport {
        profile: setup.profile.name().to_string(),
        reference: setup.reference,
        t_end: setup.t_end,
        dt: setup.dt,
        particles: setup.system.len(),
        tracers: setup.tracers.len(),
        rows,
        fitted_order: order,
        theorem_exponent: (-setup.t_end).exp(),
        monotone,
    })
}

/// `n` points evenly spaced on the circle of radius `r` about `center`.
pub fn tracer_ring(center: Vec2, r: f64, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            center + Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_exact_power_law() {
        let x = [0.4, 0.2, 0.1];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.7)).collect();
        assert!((fitted_order(&x, &y) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn radial_reference_single_vortex_orbit() {
        let s = VortexSystem::new(vec![Vec2::ZERO], vec![2.0 * std::f64::consts::PI], "one").unwrap();
        let period = 8.0 * std::f64::consts::PI;
        let r = radial_reference(&s, &[Vec2::new(2.0, 0.0)], &[0.0, period / 4.0, period]).unwrap();
        assert!((r.states[1][0] - Vec2::new(0.0, 2.0)).norm() < 1e-14);
        assert!((r.states[2][0] - Vec2::new(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn rejects_increasing_eps() {
        let s = VortexSystem::new(vec![Vec2::ZERO], vec![1.0], "one").unwrap();
        let setup = ConvergenceSetup {
            system: s,
            tracers: vec![Vec2::new(1.0, 0.0)],
            profile: KernelProfile::blob(),
            grid: GridSpec::default(),
            eps_list: vec![0.1, 0.2],
            t_end: 1.0,
            dt: 0.1,
            sample_every: 1,
            reference: Reference::AnalyticRadial,
            check_dt: false,
        };
        assert!(matches!(convergence_experiment(&setup), Err(Error::InvalidParameter { name: "eps_list", .. })));
    }
}
