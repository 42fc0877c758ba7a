use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::ShapeTable;
use crate::measures::VortexSystem;
use crate::vec2::Vec2;

/// Sources are summed in blocks of this size; block partials are then added
/// in index order. The order is fixed, so results are bitwise independent of
/// how targets are split across threads.
pub const SOURCE_BLOCK: usize = 256;

/// Targets handed to one rayon task.
const TARGET_CHUNK: usize = 64;

#[inline]
fn velocity_at(
    target: Vec2,
    skip: Option<usize>,
    positions: &[Vec2],
    circulations: &[f64],
    shape: &ShapeTable,
) -> std::result::Result<Vec2, usize> {
    let exact = shape.is_exact();
    let mut total = Vec2::ZERO;
    for (b, (pos, circ)) in positions
        .chunks(SOURCE_BLOCK)
        .zip(circulations.chunks(SOURCE_BLOCK))
        .enumerate()
    {
        let base = b * SOURCE_BLOCK;
        let mut block = Vec2::ZERO;
        for (k, (&x, &g)) in pos.iter().zip(circ).enumerate() {
            let j = base + k;
            if skip == Some(j) {
                continue;
            }
            let d = target - x;
            if exact && d.x == 0.0 && d.y == 0.0 {
                return Err(j);
            }
            block += g * shape.kernel(d);
        }
        total += block;
    }
    Ok(total)
}

pub(crate) fn sum_into(
    targets: &[Vec2],
    skip_self: bool,
    positions: &[Vec2],
    circulations: &[f64],
    shape: &ShapeTable,
    out: &mut [Vec2],
) -> Result<()> {
    assert_eq!(targets.len(), out.len());
    out.par_chunks_mut(TARGET_CHUNK)
        .enumerate()
        .try_for_each(|(c, chunk)| {
            for (k, slot) in chunk.iter_mut().enumerate() {
                let i = c * TARGET_CHUNK + k;
                let skip = if skip_self { Some(i) } else { None };
                *slot = velocity_at(targets[i], skip, positions, circulations, shape).map_err(|j| {
                    Error::Collision {
                        target: i,
                        source_index: j,
                    }
                })?;
            }
            Ok(())
        })
}

/// `u(yᵢ) = Σⱼ Γⱼ K_h(yᵢ − xⱼ)` at external target points.
///
/// Fails with [`Error::Collision`] if the exact kernel is evaluated at zero
/// separation.
pub fn induced_velocity(sources: &VortexSystem, targets: &[Vec2], shape: &ShapeTable) -> Result<Vec<Vec2>> {
    let mut out = vec![Vec2::ZERO; targets.len()];
    induced_velocity_into(sources.positions(), sources.circulations(), targets, shape, &mut out)?;
    Ok(out)
}

pub fn induced_velocity_into(
    positions: &[Vec2],
    circulations: &[f64],
    targets: &[Vec2],
    shape: &ShapeTable,
    out: &mut [Vec2],
) -> Result<()> {
    sum_into(targets, false, positions, circulations, shape, out)
}

/// Velocity of every particle due to all the others (`j ≠ i`).
pub fn self_induced_velocity_into(
    positions: &[Vec2],
    circulations: &[f64],
    shape: &ShapeTable,
    out: &mut [Vec2],
) -> Result<()> {
    sum_into(positions, true, positions, circulations, shape, out)
}

pub fn self_induced_velocity(system: &VortexSystem, shape: &ShapeTable) -> Result<Vec<Vec2>> {
    let mut out = vec![Vec2::ZERO; system.len()];
    self_induced_velocity_into(system.positions(), system.circulations(), shape, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_shape, GridSpec, KernelProfile};
    use std::f64::consts::PI;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn single_vortex_exact_kernel() {
        let s = VortexSystem::new(vec![Vec2::ZERO], vec![2.0 * PI], "one").unwrap();
        let u = induced_velocity(&s, &[Vec2::new(1.0, 0.0)], &ShapeTable::exact()).unwrap();
        assert!(close(u[0], Vec2::new(0.0, 1.0), 1e-15), "{:?}", u[0]);
    }

    #[test]
    fn single_vortex_blob_kernel() {
        let shape = build_shape(&KernelProfile::blob(), &GridSpec::default(), 1.0).unwrap();
        let s = VortexSystem::new(vec![Vec2::ZERO], vec![2.0 * PI], "one").unwrap();
        let u = induced_velocity(&s, &[Vec2::new(1.0, 0.0)], &shape).unwrap();
        assert!(close(u[0], Vec2::new(0.0, 0.5), 1e-9), "{:?}", u[0]);
    }

    #[test]
    fn exact_collision_is_an_error() {
        let s = VortexSystem::new(vec![Vec2::ZERO], vec![1.0], "one").unwrap();
        let r = induced_velocity(&s, &[Vec2::ZERO], &ShapeTable::exact());
        assert!(matches!(r, Err(Error::Collision { target: 0, source_index: 0 })));
    }

    #[test]
    fn self_term_is_skipped() {
        let s = VortexSystem::new(vec![Vec2::new(0.2, 0.3)], vec![1.0], "one").unwrap();
        let u = self_induced_velocity(&s, &ShapeTable::exact()).unwrap();
        assert_eq!(u[0], Vec2::ZERO);
    }

    #[test]
    fn coincident_distinct_particles_collide_under_exact_kernel() {
        let s = VortexSystem::new(vec![Vec2::ZERO, Vec2::ZERO], vec![1.0, 1.0], "dup").unwrap();
        assert!(self_induced_velocity(&s, &ShapeTable::exact()).is_err());
        let blob = build_shape(&KernelProfile::blob(), &GridSpec::default(), 0.1).unwrap();
        let u = self_induced_velocity(&s, &blob).unwrap();
        assert_eq!(u, vec![Vec2::ZERO, Vec2::ZERO]);
    }
}
