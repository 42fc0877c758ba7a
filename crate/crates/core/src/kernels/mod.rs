//! Radial smoothing profiles and the regularized Biot–Savart kernels they
//! induce, `K_h(x) = K(x) 𝒢(|x|/ε)`.

mod bessel;
mod profile;
mod shape;
mod verify;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vec2::Vec2;

pub use bessel::{alpha_shape, bessel_k0, bessel_k1};
pub use profile::{KernelProfile, Singularity, NORMALIZATION_TOL};
pub use shape::{build_shape, kernel_eval, stream_eval, GridSpec, ShapeTable};
pub use verify::{
    l1_kernel_distance, quasi_lipschitz_modulus, verify_kernel_lemmas, DecaySample, KernelLemmaReport,
    L1Report, QuasiLipschitzEstimate, SampleSpec,
};

/// The singular Biot–Savart kernel `K(x) = −x⊥ / (2π|x|²)`, `x⊥ = (x₂, −x₁)`.
pub fn singular_kernel(x: Vec2) -> Result<Vec2> {
    let r2 = x.norm_sq();
    if r2 == 0.0 || !r2.is_finite() {
        return Err(Error::Domain {
            function: "K",
            value: r2.sqrt(),
        });
    }
    Ok(x.perp() * (-0.5 / (PI * r2)))
}

/// Vortex-blob shape `Ψ(r) = r²/(r²+1)`.
pub fn blob_shape(r: f64) -> f64 {
    let r2 = r * r;
    r2 / (r2 + 1.0)
}

/// Shape for a named kernel: `"exact"` or a built-in profile name.
pub fn shape_by_name(name: &str, epsilon: f64) -> Result<ShapeTable> {
    if name == "exact" {
        return Ok(ShapeTable::exact());
    }
    build_shape(&KernelProfile::by_name(name)?, &GridSpec::default(), epsilon)
}
