//! Particle discretizations of vorticity measures: point vortices, bounded
//! patches and sheets, plus the standard point-vortex diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ShapeTable;
use crate::vec2::Vec2;

/// Atomic vorticity measure `Σ Γᵢ δ_{xᵢ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSystem {
    positions: Vec<Vec2>,
    circulations: Vec<f64>,
    pub label: String,
}

impl VortexSystem {
    pub fn new(positions: Vec<Vec2>, circulations: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if positions.len() != circulations.len() {
            return Err(Error::LengthMismatch {
                positions: positions.len(),
                circulations: circulations.len(),
            });
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("positions"));
        }
        if circulations.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("circulations"));
        }
        Ok(VortexSystem {
            positions,
            circulations,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn circulations(&self) -> &[f64] {
        &self.circulations
    }

    pub fn total_circulation(&self) -> f64 {
        self.circulations.iter().sum()
    }

    /// `Σ |Γᵢ|`, the total variation of the measure.
    pub fn total_variation(&self) -> f64 {
        self.circulations.iter().map(|g| g.abs()).sum()
    }

    /// Same circulations at new positions.
    pub fn moved_to(&self, positions: Vec<Vec2>) -> Result<Self> {
        Self::new(positions, self.circulations.clone(), self.label.clone())
    }

    /// Concatenate two systems; `other`'s particles follow `self`'s.
    pub fn concat(&self, other: &VortexSystem) -> Self {
        let mut positions = self.positions.clone();
        positions.extend_from_slice(&other.positions);
        let mut circulations = self.circulations.clone();
        circulations.extend_from_slice(&other.circulations);
        VortexSystem {
            positions,
            circulations,
            label: format!("{}+{}", self.label, other.label),
        }
    }
}

/// Point vortices passed through unchanged.
pub fn point_vortices(positions: Vec<Vec2>, circulations: Vec<f64>) -> Result<VortexSystem> {
    VortexSystem::new(positions, circulations, "points")
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BBox {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        BBox { min, max }
    }

    /// Square `[c − h, c + h]²`.
    pub fn centered(center: Vec2, half_width: f64) -> Self {
        let d = Vec2::new(half_width, half_width);
        BBox {
            min: center - d,
            max: center + d,
        }
    }
}

/// Midpoint-rule discretization of a bounded vorticity field on a square
/// lattice of cell size `spacing` anchored at `bbox.min`.
///
/// Each cell center `xᵢ` carries `Γᵢ = ω(xᵢ) spacing²`; cells with
/// `|ω| < 1e-14 ‖ω‖_∞` are dropped.
pub fn discretize_patch<F>(omega: F, bbox: BBox, spacing: f64) -> Result<VortexSystem>
where
    F: Fn(Vec2) -> f64,
{
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::invalid("spacing", "must be positive"));
    }
    let width = bbox.max.x - bbox.min.x;
    let height = bbox.max.y - bbox.min.y;
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::EmptyRegion(format!("bbox {width} x {height}")));
    }
    let nx = (width / spacing - 1e-9).ceil() as usize;
    let ny = (height / spacing - 1e-9).ceil() as usize;
    let area = spacing * spacing;

    let mut centers = Vec::with_capacity(nx * ny);
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let c = Vec2::new(
                bbox.min.x + (i as f64 + 0.5) * spacing,
                bbox.min.y + (j as f64 + 0.5) * spacing,
            );
            let w = omega(c);
            if !w.is_finite() {
                return Err(Error::NonFinite("vorticity field"));
            }
            centers.push(c);
            values.push(w);
        }
    }
    let sup = values.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let drop = 1e-14 * sup;
    let (positions, circulations) = centers
        .into_iter()
        .zip(values)
        .filter(|&(_, w)| sup > 0.0 && w.abs() >= drop)
        .map(|(c, w)| (c, w * area))
        .unzip();
    VortexSystem::new(positions, circulations, "patch")
}

/// Uniform vorticity `omega` on the disk of `radius` about `center`.
pub fn rankine_patch(center: Vec2, radius: f64, omega: f64, spacing: f64) -> Result<VortexSystem> {
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", "must be positive"));
    }
    let r2 = radius * radius;
    let mut sys = discretize_patch(
        |x| if (x - center).norm_sq() < r2 { omega } else { 0.0 },
        BBox::centered(center, radius),
        spacing,
    )?;
    sys.label = "rankine".into();
    Ok(sys)
}

/// Uniform vorticity on a disk, discretized on `rings` concentric rings
/// of `per_ring` equally spaced particles at the annulus midradii.
///
/// Every ring has the same particle count, so the configuration keeps the
/// `per_ring`-fold symmetry; each particle carries its share of the annulus
/// circulation, so the total is exactly `omega π radius²`.
pub fn polar_rankine_patch(center: Vec2, radius: f64, omega: f64, rings: usize, per_ring: usize) -> Result<VortexSystem> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("radius", "must be positive"));
    }
    if rings == 0 || per_ring < 2 {
        return Err(Error::invalid("rings", "need at least one ring of two particles"));
    }
    let dr = radius / rings as f64;
    let mut positions = Vec::with_capacity(rings * per_ring);
    let mut circulations = Vec::with_capacity(rings * per_ring);
    for k in 0..rings {
        let (r0, r1) = (k as f64 * dr, (k + 1) as f64 * dr);
        let r = 0.5 * (r0 + r1);
        let gamma = omega * std::f64::consts::PI * (r1 * r1 - r0 * r0) / per_ring as f64;
        for j in 0..per_ring {
            let a = 2.0 * std::f64::consts::PI * j as f64 / per_ring as f64;
            positions.push(center + Vec2::new(r * a.cos(), r * a.sin()));
            circulations.push(gamma);
        }
    }
    VortexSystem::new(positions, circulations, "rankine")
}

/// Sheet along `curve(s)`, `s ∈ [s0, s1]`, split into `n` equal parameter
/// cells. Particle `i` sits at the cell midpoint `sᵢ` and carries
/// `strength(sᵢ)` times the chord length of its cell.
pub fn discretize_sheet<C, S>(curve: C, strength: S, s0: f64, s1: f64, n: usize) -> Result<VortexSystem>
where
    C: Fn(f64) -> Vec2,
    S: Fn(f64) -> f64,
{
    if n < 2 {
        return Err(Error::invalid("n", "need at least two particles"));
    }
    if !(s1 > s0) {
        return Err(Error::invalid("s1", "parameter interval is empty"));
    }
    let ds = (s1 - s0) / n as f64;
    let mut positions = Vec::with_capacity(n);
    let mut circulations = Vec::with_capacity(n);
    let mut length = 0.0;
    for i in 0..n {
        let a = s0 + i as f64 * ds;
        let mid = a + 0.5 * ds;
        let chord = (curve(a + ds) - curve(a)).norm();
        length += chord;
        positions.push(curve(mid));
        circulations.push(strength(mid) * chord);
    }
    if !(length > 0.0) {
        return Err(Error::DegenerateCurve);
    }
    VortexSystem::new(positions, circulations, "sheet")
}

/// Conserved point-vortex functionals at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `Σ Γᵢ`.
    pub circulation: f64,
    /// `Σ Γᵢ xᵢ`.
    pub impulse_x: f64,
    pub impulse_y: f64,
    /// `Σ Γᵢ |xᵢ|²`.
    pub angular_impulse: f64,
    /// `½ Σ_{i≠j} Γᵢ Γⱼ G^ε_r(|xᵢ − xⱼ|)`.
    pub hamiltonian: f64,
}

/// Diagnostics of `positions` carrying `circulations`.
///
/// Pair sums are formed per row in index order and rows are added in index
/// order, so the result does not depend on the thread count.
pub fn diagnostics_at(positions: &[Vec2], circulations: &[f64], shape: &ShapeTable, t: f64) -> DiagnosticsRecord {
    let mut circulation = 0.0;
    let mut impulse = Vec2::ZERO;
    let mut angular_impulse = 0.0;
    for (&x, &g) in positions.iter().zip(circulations) {
        circulation += g;
        impulse += g * x;
        angular_impulse += g * x.norm_sq();
    }
    let rows: Vec<f64> = (0..positions.len())
        .into_par_iter()
        .map(|i| {
            let xi = positions[i];
            let mut row = 0.0;
            for j in i + 1..positions.len() {
                row += circulations[j] * shape.stream((xi - positions[j]).norm());
            }
            circulations[i] * row
        })
        .collect();
    let hamiltonian = rows.iter().sum();
    DiagnosticsRecord {
        t,
        circulation,
        impulse_x: impulse.x,
        impulse_y: impulse.y,
        angular_impulse,
        hamiltonian,
    }
}

pub fn diagnostics(system: &VortexSystem, shape: &ShapeTable) -> DiagnosticsRecord {
    diagnostics_at(system.positions(), system.circulations(), shape, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn point_vortex_passthrough() {
        let s = point_vortices(vec![Vec2::ZERO], vec![2.0 * PI]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.total_circulation(), 2.0 * PI);
        assert!(point_vortices(vec![], vec![]).unwrap().is_empty());
        let pair = point_vortices(
            vec![Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)],
            vec![2.0 * PI, 2.0 * PI],
        )
        .unwrap();
        assert_eq!(pair.total_circulation(), 4.0 * PI);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            point_vortices(vec![Vec2::ZERO], vec![]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(point_vortices(vec![Vec2::new(f64::NAN, 0.0)], vec![1.0]).is_err());
    }

    #[test]
    fn unit_square_midpoint_cells() {
        let s = discretize_patch(|_| 1.0, BBox::new(Vec2::ZERO, Vec2::new(1.0, 1.0)), 0.5).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.circulations().iter().all(|&g| g == 0.25));
        assert_eq!(s.positions()[0], Vec2::new(0.25, 0.25));
    }

    #[test]
    fn zero_field_gives_empty_system() {
        let s = discretize_patch(|_| 0.0, BBox::centered(Vec2::ZERO, 1.0), 0.1).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn empty_bbox_rejected() {
        let r = discretize_patch(|_| 1.0, BBox::new(Vec2::ZERO, Vec2::new(0.0, 1.0)), 0.1);
        assert!(matches!(r, Err(Error::EmptyRegion(_))));
        assert!(discretize_patch(|_| 1.0, BBox::centered(Vec2::ZERO, 1.0), 0.0).is_err());
    }

    #[test]
    fn rankine_circulation_close_to_area() {
        let s = rankine_patch(Vec2::ZERO, 1.0, 1.0, 0.05).unwrap();
        assert!((s.total_circulation() - PI).abs() < 2.0 * 0.05);
    }

    #[test]
    fn flat_sheet_uniform_weights() {
        let s = discretize_sheet(|s| Vec2::new(s, 0.0), |_| 1.0, -1.0, 1.0, 4).unwrap();
        assert_eq!(s.len(), 4);
        for g in s.circulations() {
            assert!((g - 0.5).abs() < 1e-15);
        }
        let two = discretize_sheet(|s| Vec2::new(s, 0.0), |_| 1.0, -1.0, 1.0, 2).unwrap();
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn sheet_total_circulation_is_second_order() {
        let err = |n| {
            let s = discretize_sheet(|s| Vec2::new(s, 0.0), |s| s * s, -1.0, 1.0, n).unwrap();
            (s.total_circulation() - 2.0 / 3.0).abs()
        };
        let ratio = err(50) / err(100);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn degenerate_sheet_rejected() {
        let r = discretize_sheet(|_| Vec2::new(1.0, 1.0), |_| 1.0, 0.0, 1.0, 8);
        assert!(matches!(r, Err(Error::DegenerateCurve)));
        assert!(discretize_sheet(|s| Vec2::new(s, 0.0), |_| 1.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn single_vortex_has_no_pair_energy() {
        let s = point_vortices(vec![Vec2::new(0.3, 0.1)], vec![1.0]).unwrap();
        assert_eq!(diagnostics(&s, &ShapeTable::exact()).hamiltonian, 0.0);
    }

    #[test]
    fn impulse_of_opposite_pair() {
        let s = point_vortices(
            vec![Vec2::new(0.5, 0.0), Vec2::new(-0.5, 0.0)],
            vec![2.0 * PI, -2.0 * PI],
        )
        .unwrap();
        let d = diagnostics(&s, &ShapeTable::exact());
        assert!((d.impulse_x - 2.0 * PI).abs() < 1e-15);
        assert_eq!(d.impulse_y, 0.0);
        assert_eq!(d.circulation, 0.0);
    }
}
