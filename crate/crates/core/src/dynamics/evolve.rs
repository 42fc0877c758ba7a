use serde::{Deserialize, Serialize};

use super::velocity::{induced_velocity_into, self_induced_velocity_into};
use crate::error::{Error, Result};
use crate::kernels::ShapeTable;
use crate::measures::{diagnostics_at, DiagnosticsRecord, VortexSystem};
use crate::numerics::Rk4;
use crate::vec2::Vec2;

/// Time-sampled flow map of a particle set. Circulations are those of
/// `system` for the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Vec2>>,
    pub system: VortexSystem,
    /// One record per sample; empty for passive tracers.
    pub diagnostics: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[Vec2] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn initial_state(&self) -> &[Vec2] {
        &self.states[0]
    }

    /// `max over samples and particles of |self − other|`; both must share
    /// the time grid and particle count.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len() || self.system.len() != other.system.len() {
            return Err(Error::invalid("trajectory", "time grids or particle counts differ"));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (*p - *q).norm()))
            .fold(0.0, f64::max))
    }
}

/// Uniform step grid covering `[0, t_end]`: `n = ⌈t_end/dt⌉` steps of size
/// `t_end/n`, so the last step lands exactly on `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGrid {
    pub steps: usize,
    pub dt: f64,
}

impl StepGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::invalid("t_end", "must be positive"));
        }
        let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
        Ok(StepGrid {
            steps,
            dt: t_end / steps as f64,
        })
    }

    #[inline]
    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

fn pack(points: &[Vec2], out: &mut [f64]) {
    for (p, o) in points.iter().zip(out.chunks_exact_mut(2)) {
        o[0] = p.x;
        o[1] = p.y;
    }
}

fn unpack(flat: &[f64], out: &mut [Vec2]) {
    for (o, f) in out.iter_mut().zip(flat.chunks_exact(2)) {
        *o = Vec2::new(f[0], f[1]);
    }
}

/// Source and tracer trajectories from one coupled run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledTrajectory {
    pub sources: Trajectory,
    pub tracers: Trajectory,
}

/// Integrate the self-consistent particle flow `dxᵢ/dt = Σ_{j≠i} Γⱼ K_h(xᵢ − xⱼ)`
/// with RK4, advecting `tracers` (zero circulation) alongside.
pub fn evolve_with_tracers(
    system: &VortexSystem,
    tracers: &[Vec2],
    shape: &ShapeTable,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<CoupledTrajectory> {
    if sample_every == 0 {
        return Err(Error::invalid("sample_every", "must be at least 1"));
    }
    let grid = StepGrid::new(t_end, dt)?;
    let n_src = system.len();
    let n_all = n_src + tracers.len();
    let circulations = system.circulations();

    let mut state = vec![0.0; 2 * n_all];
    pack(system.positions(), &mut state[..2 * n_src]);
    pack(tracers, &mut state[2 * n_src..]);

    let mut points = vec![Vec2::ZERO; n_all];
    let mut vel = vec![Vec2::ZERO; n_all];
    let mut rk = Rk4::new(2 * n_all);

    let mut times = Vec::new();
    let mut src_states = Vec::new();
    let mut trc_states = Vec::new();
    let mut diagnostics = Vec::new();
    let mut record = |step: usize, state: &[f64], points: &mut [Vec2]| {
        unpack(state, points);
        let t = grid.time(step);
        times.push(t);
        src_states.push(points[..n_src].to_vec());
        trc_states.push(points[n_src..].to_vec());
        diagnostics.push(diagnostics_at(&points[..n_src], circulations, shape, t));
    };
    record(0, &state, &mut points);

    for step in 0..grid.steps {
        rk.step(&mut state, grid.time(step), grid.dt, |_t, y, dy| {
            unpack(y, &mut points);
            let (src, trc) = points.split_at(n_src);
            let (vsrc, vtrc) = vel.split_at_mut(n_src);
            self_induced_velocity_into(src, circulations, shape, vsrc)?;
            induced_velocity_into(src, circulations, trc, shape, vtrc)?;
            pack(&vel, dy);
            Ok::<(), Error>(())
        })?;
        let done = step + 1;
        if done % sample_every == 0 || done == grid.steps {
            record(done, &state, &mut points);
        }
    }

    let tracer_system = VortexSystem::new(tracers.to_vec(), vec![0.0; tracers.len()], "tracers")?;
    Ok(CoupledTrajectory {
        sources: Trajectory {
            times: times.clone(),
            states: src_states,
            system: system.clone(),
            diagnostics,
        },
        tracers: Trajectory {
            times,
            states: trc_states,
            system: tracer_system,
            diagnostics: Vec::new(),
        },
    })
}

/// Self-consistent N-body evolution of `system` under `shape`.
pub fn evolve(
    system: &VortexSystem,
    shape: &ShapeTable,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    evolve_with_tracers(system, &[], shape, t_end, dt, sample_every).map(|c| c.sources)
}

/// Passive tracers advected by the co-evolving `sources`.
pub fn passive_tracers(
    sources: &VortexSystem,
    tracers: &[Vec2],
    shape: &ShapeTable,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    evolve_with_tracers(sources, tracers, shape, t_end, dt, sample_every).map(|c| c.tracers)
}
