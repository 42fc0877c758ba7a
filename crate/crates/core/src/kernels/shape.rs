use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::profile::{KernelProfile, Singularity};
use crate::error::{Error, Result};
use crate::numerics::{integrate_1d, QuadratureSpec, RadialTable};
use crate::vec2::Vec2;

const INV_2PI: f64 = 0.5 / PI;

/// Node layout and tolerances for [`build_shape`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Total node count, including `r = 0`.
    pub nodes: usize,
    /// Nodes spaced uniformly on `[0, 1]`; the rest are log-spaced on `(1, r_max]`.
    pub linear_nodes: usize,
    /// Outer radius; chosen from the profile's tail when `None`.
    pub r_max: Option<f64>,
    /// Required `∫_{r_max}^∞ k h(k) dk` when `r_max` is chosen automatically.
    pub tail_tol: f64,
    /// Allowed `|𝒢(r_max) + tail − 1|`.
    pub normalization_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nodes: 2048,
            linear_nodes: 512,
            r_max: None,
            tail_tol: 1e-10,
            normalization_tol: 1e-6,
        }
    }
}

struct Tabulated {
    profile: KernelProfile,
    /// `𝒢` at the nodes, with `𝒢′(r) = r h(r)` as slopes.
    shape: RadialTable,
    /// `G¹_r` at the nodes, with slopes `−𝒢(r)/(2πr)`.
    stream: RadialTable,
    tail_radius: f64,
    /// `∫_{tail_radius}^∞ k h(k) dk`.
    tail: f64,
    /// `∫_{tail_radius}^∞ (1 − 𝒢(r)) dr`.
    beyond_l1: f64,
    linear_nodes: usize,
    inv_log_step: f64,
}

/// `ln s` to within 1e-3, from the exponent bits and a cubic in the mantissa.
/// Only used to guess a table segment; the guess is then corrected exactly.
#[inline]
fn rough_ln(s: f64) -> f64 {
    let bits = s.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000) - 1.0;
    let log2_m = m * (1.420_864_537_430_090_3 + m * (-0.577_250_650_806_437_3 + m * 0.156_386_113_376_347));
    std::f64::consts::LN_2 * (e as f64 + log2_m)
}

#[derive(Clone)]
enum ShapeKind {
    /// `𝒢 ≡ 1`: the unregularized Biot–Savart kernel.
    Exact,
    Tabulated(Arc<Tabulated>),
}

/// Tabulated shape function `𝒢` of a radial profile together with the
/// regularization length `ε`, so that `K^ε(x) = K(x) 𝒢(|x|/ε)`.
///
/// The table lives in the scaled variable `r/ε`; [`ShapeTable::with_epsilon`]
/// re-scales without rebuilding.
#[derive(Clone)]
pub struct ShapeTable {
    epsilon: f64,
    inv_epsilon: f64,
    kind: ShapeKind,
}

impl std::fmt::Debug for ShapeTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut d = f.debug_struct("ShapeTable");
        d.field("epsilon", &self.epsilon);
        match &self.kind {
            ShapeKind::Exact => d.field("profile", &"exact"),
            ShapeKind::Tabulated(t) => d
                .field("profile", &t.profile.name())
                .field("nodes", &t.shape.len())
                .field("tail_radius", &t.tail_radius),
        };
        d.finish()
    }
}

fn default_r_max(profile: &KernelProfile, spec: &GridSpec) -> Result<f64> {
    match profile.name() {
        "blob" => return Ok(1e5),
        "alpha" => return Ok(50.0),
        _ => {}
    }
    let qs = profile.quadrature_spec();
    let mut r = 10.0;
    while r <= 1e8 {
        let tail = integrate_1d(|k| k * profile.eval(k).abs(), r, f64::INFINITY, &qs)?;
        if tail < spec.tail_tol {
            return Ok(r);
        }
        r *= 2.0;
    }
    Err(Error::invalid(
        "grid.r_max",
        "profile tail does not fall below tail_tol before r = 1e8",
    ))
}

fn grid_nodes(spec: &GridSpec, r_max: f64) -> (Vec<f64>, f64) {
    let n_lin = spec.linear_nodes;
    let n_log = spec.nodes - n_lin;
    let log_step = r_max.ln() / n_log as f64;
    let mut nodes: Vec<f64> = (0..n_lin).map(|i| i as f64 / (n_lin - 1) as f64).collect();
    nodes.extend((1..=n_log).map(|j| (j as f64 * log_step).exp()));
    nodes[spec.nodes - 1] = r_max;
    (nodes, log_step)
}

/// Tabulate `𝒢(r) = ∫₀^r k h(k) dk` and the stream function `G¹_r` for a
/// normalized profile.
pub fn build_shape(profile: &KernelProfile, grid: &GridSpec, epsilon: f64) -> Result<ShapeTable> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon", "must be positive and finite"));
    }
    if grid.linear_nodes < 3 || grid.nodes < grid.linear_nodes + 2 {
        return Err(Error::invalid("grid.nodes", "need ≥ 3 linear nodes and ≥ 2 log nodes"));
    }
    let r_max = match grid.r_max {
        Some(r) if r > 1.0 && r.is_finite() => r,
        Some(_) => return Err(Error::invalid("grid.r_max", "must exceed 1")),
        None => default_r_max(profile, grid)?,
    };
    let (nodes, log_step) = grid_nodes(grid, r_max);
    let n = nodes.len();

    let g = |k: f64| k * profile.eval(k);
    let base = profile.quadrature_spec();
    let seg_spec = base.with_tolerances(1e-15, 1e-13);
    let smooth_spec = QuadratureSpec {
        singularity_hint: Default::default(),
        ..seg_spec
    };
    let spec_for = |i: usize| if i == 0 { &seg_spec } else { &smooth_spec };

    let mut pieces = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        pieces.push(integrate_1d(g, nodes[i], nodes[i + 1], spec_for(i))?);
    }
    let tail = integrate_1d(g, r_max, f64::INFINITY, &smooth_spec)?;

    let mut values = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut comp = 0.0;
    values.push(0.0);
    for p in &pieces {
        // Kahan summation keeps 𝒢 accurate to a few ulps at the far end.
        let y = p - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        values.push(acc);
    }
    let total = acc + tail;
    if !total.is_finite() || (total - 1.0).abs() > grid.normalization_tol {
        return Err(Error::NotNormalized {
            total,
            tolerance: grid.normalization_tol,
        });
    }

    let slopes: Vec<f64> = nodes.iter().map(|&r| if r > 0.0 { g(r) } else { 0.0 }).collect();
    let shape = RadialTable::with_slopes(nodes.clone(), values.clone(), slopes)?;

    // G¹ at r_max from ∫_R^∞ (1 − 𝒢(s))/s ds = ∫_R^∞ k h(k) ln(k/R) dk, then
    // inward via ∫_a^b 𝒢(s)/s ds = 𝒢(a) ln(b/a) + ∫_a^b k h(k) ln(b/k) dk.
    let far = integrate_1d(|k| g(k) * (k / r_max).ln(), r_max, f64::INFINITY, &smooth_spec)?;
    let mut stream = vec![0.0; n];
    stream[n - 1] = -INV_2PI * (r_max.ln() + far);
    for i in (0..n - 1).rev() {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let log_part = if a > 0.0 { values[i] * (b / a).ln() } else { 0.0 };
        let inner = integrate_1d(|k| g(k) * (b / k).ln(), a, b, spec_for(i))?;
        stream[i] = stream[i + 1] + INV_2PI * (log_part + inner);
    }
    let stream_slopes: Vec<f64> = nodes
        .iter()
        .zip(&values)
        .map(|(&r, &v)| if r > 0.0 { -INV_2PI * v / r } else { 0.0 })
        .collect();
    let stream = RadialTable::with_slopes(nodes, stream, stream_slopes)?;

    let beyond_l1 = integrate_1d(|k| g(k) * (k - r_max), r_max, f64::INFINITY, &smooth_spec)?;

    Ok(ShapeTable {
        epsilon,
        inv_epsilon: 1.0 / epsilon,
        kind: ShapeKind::Tabulated(Arc::new(Tabulated {
            profile: profile.clone(),
            shape,
            stream,
            tail_radius: r_max,
            tail,
            beyond_l1,
            linear_nodes: grid.linear_nodes,
            inv_log_step: 1.0 / log_step,
        })),
    })
}

impl Tabulated {
    #[inline]
    fn segment(&self, s: f64) -> usize {
        let nodes = self.shape.nodes();
        let last = nodes.len() - 2;
        let mut i = if s < 1.0 {
            (s * (self.linear_nodes - 1) as f64) as usize
        } else {
            self.linear_nodes - 1 + (rough_ln(s) * self.inv_log_step).max(0.0) as usize
        };
        i = i.min(last);
        while i > 0 && nodes[i] > s {
            i -= 1;
        }
        while i < last && nodes[i + 1] < s {
            i += 1;
        }
        i
    }

    #[inline]
    fn value(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 0.0;
        }
        if s >= self.tail_radius {
            let q = self.tail_radius / s;
            return 1.0 - self.tail * q * q;
        }
        let i = self.segment(s);
        if i == 0 {
            return self.value_near_origin(s);
        }
        self.shape.eval_segment(i, s)
    }

    fn value_near_origin(&self, s: f64) -> f64 {
        let r1 = self.shape.nodes()[1];
        let v1 = self.shape.values()[1];
        match self.profile.singularity() {
            Singularity::Bounded => v1 * (s / r1) * (s / r1),
            Singularity::Logarithmic => {
                let spec = self.profile.quadrature_spec().with_tolerances(1e-15, 1e-12);
                integrate_1d(|k| k * self.profile.eval(k), 0.0, s, &spec)
                    .unwrap_or_else(|_| self.shape.eval_segment(0, s))
            }
        }
    }

    /// `𝒢(s)/s²`, finite at the origin for bounded profiles.
    #[inline]
    fn value_over_sq(&self, s: f64) -> f64 {
        let r1 = self.shape.nodes()[1];
        if s < r1 && self.profile.singularity() == Singularity::Bounded {
            return self.shape.values()[1] / (r1 * r1);
        }
        self.value(s) / (s * s)
    }

    fn stream(&self, s: f64) -> f64 {
        if s >= self.tail_radius {
            let q = self.tail_radius / s;
            return -INV_2PI * (s.ln() + 0.5 * self.tail * q * q);
        }
        let i = if s > 0.0 { self.segment(s) } else { 0 };
        self.stream.eval_segment(i, s.max(0.0))
    }
}

impl ShapeTable {
    /// The degenerate shape `𝒢 ≡ 1` (exact Euler kernel). Singular at the
    /// origin; callers must exclude self-interaction.
    pub fn exact() -> Self {
        ShapeTable {
            epsilon: 1.0,
            inv_epsilon: 1.0,
            kind: ShapeKind::Exact,
        }
    }

    /// Same tabulated shape at a different regularization length.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", "must be positive and finite"));
        }
        Ok(ShapeTable {
            epsilon,
            inv_epsilon: 1.0 / epsilon,
            kind: self.kind.clone(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, ShapeKind::Exact)
    }

    pub fn profile(&self) -> Option<&KernelProfile> {
        match &self.kind {
            ShapeKind::Exact => None,
            ShapeKind::Tabulated(t) => Some(&t.profile),
        }
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            ShapeKind::Exact => "exact",
            ShapeKind::Tabulated(t) => t.profile.name(),
        }
    }

    /// Node radii and `𝒢` values (scaled variable), if tabulated.
    pub fn table(&self) -> Option<&RadialTable> {
        match &self.kind {
            ShapeKind::Exact => None,
            ShapeKind::Tabulated(t) => Some(&t.shape),
        }
    }

    /// Radius (scaled) beyond which `𝒢 = 1 − tail` is modeled.
    pub fn tail_radius(&self) -> f64 {
        match &self.kind {
            ShapeKind::Exact => 0.0,
            ShapeKind::Tabulated(t) => t.tail_radius,
        }
    }

    /// `𝒢(s)` at the dimensionless radius `s = r/ε`.
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        match &self.kind {
            ShapeKind::Exact => 1.0,
            ShapeKind::Tabulated(t) => t.value(s),
        }
    }

    /// `K^ε(x) = K(x) 𝒢(|x|/ε)`; exactly zero at the origin.
    #[inline]
    pub fn kernel(&self, x: Vec2) -> Vec2 {
        let r2 = x.norm_sq();
        if r2 == 0.0 {
            return Vec2::ZERO;
        }
        let factor = match &self.kind {
            ShapeKind::Exact => INV_2PI / r2,
            ShapeKind::Tabulated(t) => {
                let inv_eps = self.inv_epsilon;
                let s = r2.sqrt() * inv_eps;
                INV_2PI * t.value_over_sq(s) * inv_eps * inv_eps
            }
        };
        Vec2::new(-x.y * factor, x.x * factor)
    }

    /// `G^ε_r(r) = G¹_r(r/ε) − log(ε)/2π`.
    pub fn stream(&self, r: f64) -> f64 {
        match &self.kind {
            ShapeKind::Exact => -INV_2PI * r.ln(),
            ShapeKind::Tabulated(t) => t.stream(r / self.epsilon) - INV_2PI * self.epsilon.ln(),
        }
    }

    /// `∫₀^∞ (1 − 𝒢(s)) ds` in the scaled variable.
    pub(crate) fn unit_l1_integral(&self) -> Result<f64> {
        let t = match &self.kind {
            ShapeKind::Exact => return Ok(0.0),
            ShapeKind::Tabulated(t) => t,
        };
        let nodes = t.shape.nodes();
        let r1 = nodes[1];
        let first = integrate_1d(
            |s| 1.0 - t.value(s),
            0.0,
            r1,
            &QuadratureSpec::default().with_tolerances(1e-15, 1e-13),
        )?;
        let mut acc = first;
        for i in 1..nodes.len() - 1 {
            let h = nodes[i + 1] - nodes[i];
            acc += h - t.shape.segment_integral(i);
        }
        Ok(acc + t.beyond_l1)
    }
}

/// `K^ε(x)` for a built shape.
pub fn kernel_eval(shape: &ShapeTable, x: Vec2) -> Vec2 {
    shape.kernel(x)
}

/// `G^ε_r(r)`, the radial stream function of the regularized kernel.
pub fn stream_eval(shape: &ShapeTable, r: f64) -> f64 {
    shape.stream(r)
}
