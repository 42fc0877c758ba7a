//! Successive flow maps: iterate `n` moves every particle in the velocity
//! field of the particles as placed by iterate `n − 1`, starting from the
//! frozen initial configuration.

use serde::{Deserialize, Serialize};

use crate::dynamics::{sum_into, StepGrid};
use crate::error::{Error, Result};
use crate::kernels::ShapeTable;
use crate::measures::VortexSystem;
use crate::numerics::Rk4;
use crate::vec2::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateStore {
    /// Shared time grid; one node per RK4 step.
    pub times: Vec<f64>,
    pub system: VortexSystem,
    /// `iterates[n][node][particle]`; `iterates[0]` is the identity map.
    pub iterates: Vec<Vec<Vec<Vec2>>>,
    /// `rho[n − 1] = max over nodes and particles of |ηⁿ − ηⁿ⁻¹|`.
    pub rho: Vec<f64>,
    pub converged: bool,
    /// Horizon actually integrated; half the requested one after a bisection.
    pub horizon: f64,
    pub requested_horizon: f64,
    pub tol: f64,
}

impl IterateStore {
    pub fn iterations(&self) -> usize {
        self.rho.len()
    }

    pub fn last(&self) -> &[Vec<Vec2>] {
        self.iterates.last().expect("identity iterate is always present")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyEntry {
    pub n: usize,
    pub rho: f64,
    /// `ρⁿ / ρⁿ⁻¹`; absent for the first iteration or after a zero gap.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub iterations: Vec<CauchyEntry>,
    pub horizon: f64,
    pub converged: bool,
}

pub fn cauchy_report(store: &IterateStore) -> CauchyReport {
    let iterations = store
        .rho
        .iter()
        .enumerate()
        .map(|(i, &rho)| CauchyEntry {
            n: i + 1,
            rho,
            ratio: match i {
                0 => None,
                _ if store.rho[i - 1] == 0.0 => None,
                _ => Some(rho / store.rho[i - 1]),
            },
        })
        .collect();
    CauchyReport {
        iterations,
        horizon: store.horizon,
        converged: store.converged,
    }
}

/// Cubic Hermite reading of a stored iterate inside step `k`.
struct PreviousIterate<'a> {
    nodes: &'a [Vec<Vec2>],
    slopes: &'a [Vec<Vec2>],
    dt: f64,
}

impl PreviousIterate<'_> {
    fn sample(&self, k: usize, tau: f64, out: &mut [Vec2]) {
        if tau == 0.0 {
            out.copy_from_slice(&self.nodes[k]);
            return;
        }
        if tau == 1.0 {
            out.copy_from_slice(&self.nodes[k + 1]);
            return;
        }
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = (t3 - 2.0 * t2 + tau) * self.dt;
        let h01 = 3.0 * t2 - 2.0 * t3;
        let h11 = (t3 - t2) * self.dt;
        let (p0, p1) = (&self.nodes[k], &self.nodes[k + 1]);
        let (m0, m1) = (&self.slopes[k], &self.slopes[k + 1]);
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * p0[i] + h10 * m0[i] + h01 * p1[i] + h11 * m1[i];
        }
    }
}

enum Outcome {
    Done(IterateStore),
    Diverged { iteration: usize, rho: f64 },
}

fn unpack(flat: &[f64], out: &mut [Vec2]) {
    for (o, f) in out.iter_mut().zip(flat.chunks_exact(2)) {
        *o = Vec2::new(f[0], f[1]);
    }
}

fn pack(points: &[Vec2], out: &mut [f64]) {
    for (p, o) in points.iter().zip(out.chunks_exact_mut(2)) {
        o[0] = p.x;
        o[1] = p.y;
    }
}

fn run(system: &VortexSystem, shape: &ShapeTable, t_end: f64, dt: f64, n_max: usize, tol: f64) -> Result<Outcome> {
    let grid = StepGrid::new(t_end, dt)?;
    let n = system.len();
    let circulations = system.circulations();
    // The j = i term of a regularized kernel is part of the convolution with
    // the previous iterate's measure; the singular kernel must drop it.
    let skip_self = shape.is_exact();

    let times: Vec<f64> = (0..=grid.steps).map(|s| grid.time(s)).collect();
    let identity = vec![system.positions().to_vec(); grid.steps + 1];
    let mut iterates = vec![identity];
    let mut slopes = vec![vec![Vec2::ZERO; n]; grid.steps + 1];
    let mut rho = Vec::new();

    let scale = system.positions().iter().map(|p| p.norm()).fold(1.0, f64::max);
    let noise_floor = 64.0 * f64::EPSILON * scale;

    let mut state = vec![0.0; 2 * n];
    let mut targets = vec![Vec2::ZERO; n];
    let mut sources = vec![Vec2::ZERO; n];
    let mut vel = vec![Vec2::ZERO; n];
    let mut rk = Rk4::new(2 * n);

    for iteration in 1..=n_max {
        let prev = PreviousIterate {
            nodes: iterates.last().expect("non-empty"),
            slopes: &slopes,
            dt: grid.dt,
        };
        let mut nodes = Vec::with_capacity(grid.steps + 1);
        let mut new_slopes = Vec::with_capacity(grid.steps + 1);
        pack(system.positions(), &mut state);
        nodes.push(system.positions().to_vec());

        let mut field = |k: usize, tau: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            unpack(y, &mut targets);
            prev.sample(k, tau, &mut sources);
            sum_into(&targets, skip_self, &sources, circulations, shape, &mut vel)?;
            pack(&vel, dy);
            Ok(())
        };

        for step in 0..grid.steps {
            let t0 = grid.time(step);
            rk.step(&mut state, t0, grid.dt, |t, y, dy| {
                let tau = if t == t0 { 0.0 } else if t == t0 + grid.dt { 1.0 } else { 0.5 };
                field(step, tau, y, dy)
            })?;
            let mut m = vec![Vec2::ZERO; n];
            unpack(rk.start_slope(), &mut m);
            new_slopes.push(m);
            let mut p = vec![Vec2::ZERO; n];
            unpack(&state, &mut p);
            nodes.push(p);
        }
        let mut end_slope = vec![0.0; 2 * n];
        field(grid.steps - 1, 1.0, &state, &mut end_slope)?;
        let mut m = vec![Vec2::ZERO; n];
        unpack(&end_slope, &mut m);
        new_slopes.push(m);

        let gap = nodes
            .iter()
            .zip(iterates.last().expect("non-empty"))
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (*p - *q).norm()))
            .fold(0.0, f64::max);
        rho.push(gap);
        iterates.push(nodes);
        slopes = new_slopes;

        if gap < tol {
            return Ok(Outcome::Done(IterateStore {
                times,
                system: system.clone(),
                iterates,
                rho,
                converged: true,
                horizon: t_end,
                requested_horizon: t_end,
                tol,
            }));
        }
        let k = rho.len();
        if k >= 3 && gap > noise_floor && rho[k - 1] >= rho[k - 2] && rho[k - 2] >= rho[k - 3] {
            return Ok(Outcome::Diverged { iteration, rho: gap });
        }
    }

    Ok(Outcome::Done(IterateStore {
        times,
        system: system.clone(),
        iterates,
        rho,
        converged: false,
        horizon: t_end,
        requested_horizon: t_end,
        tol,
    }))
}

/// Run the iteration to `rho < tol` or `n_max` iterates.
///
/// If the gaps fail to decrease over three consecutive iterates the horizon
/// is halved once and the iteration restarted; a second failure is an
/// [`Error::PicardDivergence`].
pub fn picard_iterate(
    system: &VortexSystem,
    shape: &ShapeTable,
    t_end: f64,
    dt: f64,
    n_max: usize,
    tol: f64,
) -> Result<IterateStore> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "must be at least 1"));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol", "must be non-negative"));
    }
    if system.is_empty() {
        return Err(Error::invalid("system", "no particles"));
    }
    match run(system, shape, t_end, dt, n_max, tol)? {
        Outcome::Done(store) => Ok(store),
        Outcome::Diverged { .. } => {
            let half = 0.5 * t_end;
            match run(system, shape, half, dt.min(half), n_max, tol)? {
                Outcome::Done(mut store) => {
                    store.requested_horizon = t_end;
                    Ok(store)
                }
                Outcome::Diverged { iteration, rho } => Err(Error::PicardDivergence {
                    iteration,
                    rho,
                    horizon: half,
                }),
            }
        }
    }
}
