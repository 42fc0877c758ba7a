//! Numerical checks of the kernel estimates: boundedness, far-field decay,
//! quasi-Lipschitz continuity and the L¹ distance to the singular kernel.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::shape::ShapeTable;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// `φ(r) = r(1 − log r)` for `r < 1`, and `1` otherwise.
pub fn quasi_lipschitz_modulus(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if r < 1.0 {
        r * (1.0 - r.ln())
    } else {
        1.0
    }
}

/// Sampling parameters for [`verify_kernel_lemmas`]. Radii are in units of `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    /// Radial samples used for `sup |K_h|`.
    pub radial_samples: usize,
    /// Far-field radii for the `|x||K_h(x)| → 1/2π` check.
    pub decay_radii: Vec<f64>,
    /// Pairs drawn for the quasi-Lipschitz ratio.
    pub pairs: usize,
    /// Pair base points are drawn uniformly from the disk of this radius.
    pub pair_radius: f64,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            radial_samples: 4096,
            decay_radii: vec![10.0, 100.0, 1000.0],
            pairs: 10_000,
            pair_radius: 4.0,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    /// `|x|` (absolute length).
    pub radius: f64,
    /// `|x| |K_h(x)|`.
    pub scaled_magnitude: f64,
    /// `|scaled_magnitude − 1/2π|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiLipschitzEstimate {
    pub pairs: usize,
    /// `max |K_h(x) − K_h(x′)| / φ(|x − x′|)` over all pairs.
    pub constant: f64,
    /// The same maximum over the first half of the pairs.
    pub constant_half: f64,
    /// `|constant − constant_half| / constant`.
    pub relative_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelLemmaReport {
    pub profile: String,
    pub epsilon: f64,
    /// `K_h(0)`, which must be exactly zero.
    pub origin_value: Vec2,
    pub max_abs_kernel: f64,
    pub argmax_radius: f64,
    pub decay_limit: f64,
    pub decay: Vec<DecaySample>,
    pub quasi_lipschitz: QuasiLipschitzEstimate,
}

/// Report the empirical versions of the kernel lemmas for `shape`.
pub fn verify_kernel_lemmas(shape: &ShapeTable, spec: &SampleSpec) -> Result<KernelLemmaReport> {
    if spec.radial_samples < 2 || spec.pairs < 2 {
        return Err(Error::invalid("sample_spec", "need at least two samples and two pairs"));
    }
    let eps = shape.epsilon();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let origin_value = shape.kernel(Vec2::ZERO);

    // |K_h| is radial; scan radii log-uniformly from 1e-6 ε to 1e3 ε.
    let (lo, hi) = (1e-6f64.ln(), 1e3f64.ln());
    let mut max_abs_kernel = 0.0;
    let mut argmax_radius = 0.0;
    for i in 0..spec.radial_samples {
        let r = eps * (lo + (hi - lo) * i as f64 / (spec.radial_samples - 1) as f64).exp();
        let theta = rng.gen_range(0.0..2.0 * PI);
        let k = shape.kernel(Vec2::new(r * theta.cos(), r * theta.sin())).norm();
        if k > max_abs_kernel {
            max_abs_kernel = k;
            argmax_radius = r;
        }
    }

    let decay_limit = 0.5 / PI;
    let decay = spec
        .decay_radii
        .iter()
        .map(|&rho| {
            let r = rho * eps;
            let scaled_magnitude = r * shape.kernel(Vec2::new(r, 0.0)).norm();
            DecaySample {
                radius: r,
                scaled_magnitude,
                deviation: (scaled_magnitude - decay_limit).abs(),
            }
        })
        .collect();

    // Separations log-uniform over [1e-6 ε, max(4ε, 2)] so both branches of φ are hit.
    let d_lo = (1e-6 * eps).ln();
    let d_hi = (4.0 * eps).max(2.0).ln();
    let mut constant: f64 = 0.0;
    let mut constant_half = 0.0;
    let half = spec.pairs / 2;
    for p in 0..spec.pairs {
        let rad = spec.pair_radius * eps * rng.gen::<f64>().sqrt();
        let a = rng.gen_range(0.0..2.0 * PI);
        let x = Vec2::new(rad * a.cos(), rad * a.sin());
        let d = rng.gen_range(d_lo..d_hi).exp();
        let b = rng.gen_range(0.0..2.0 * PI);
        let xp = x + Vec2::new(d * b.cos(), d * b.sin());
        let diff = (shape.kernel(x) - shape.kernel(xp)).norm();
        let phi = quasi_lipschitz_modulus((x - xp).norm());
        if phi > 0.0 {
            constant = constant.max(diff / phi);
        }
        if p + 1 == half {
            constant_half = constant;
        }
    }
    let relative_change = if constant > 0.0 {
        (constant - constant_half).abs() / constant
    } else {
        0.0
    };

    Ok(KernelLemmaReport {
        profile: shape.name().to_string(),
        epsilon: eps,
        origin_value,
        max_abs_kernel,
        argmax_radius,
        decay_limit,
        decay,
        quasi_lipschitz: QuasiLipschitzEstimate {
            pairs: spec.pairs,
            constant,
            constant_half,
            relative_change,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Report {
    pub profile: String,
    pub epsilon: f64,
    /// `∫ |K^ε − K| dx = ε ∫₀^∞ |𝒢(r) − 1| dr`.
    pub value: f64,
    /// `ε ∫₀^∞ k² |h_r(k)| dk`.
    pub bound: f64,
    /// `value ≤ bound` up to quadrature error.
    pub within_bound: bool,
}

/// L¹ distance between the regularized kernel at scale `epsilon` and the
/// singular kernel, and the moment bound it must respect.
pub fn l1_kernel_distance(shape: &ShapeTable, epsilon: f64) -> Result<L1Report> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    let (moment, name) = match shape.profile() {
        Some(p) => (p.first_radial_moment(), p.name().to_string()),
        None => (0.0, "exact".to_string()),
    };
    if !moment.is_finite() {
        return Err(Error::NonConvergence {
            a: 0.0,
            b: f64::INFINITY,
            estimate: moment,
            error: f64::INFINITY,
        });
    }
    let value = epsilon * shape.unit_l1_integral()?;
    let bound = epsilon * moment;
    Ok(L1Report {
        profile: name,
        epsilon,
        value,
        bound,
        within_bound: value <= bound * (1.0 + 1e-8) + 1e-15,
    })
}
