use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bessel;
use crate::error::{Error, Result};
use crate::numerics::{integrate_1d, QuadratureSpec, RadialTable, SingularityHint};

/// Behavior of a radial profile as `k → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Singularity {
    Bounded,
    Logarithmic,
}

/// Tolerance on `|∫₀^∞ k h(k) dk − 1|` applied when loading tabulated profiles.
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Clone)]
enum ProfileFn {
    Blob,
    Alpha,
    Tabulated(Arc<TabulatedProfile>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Sampled profile: monotone cubic between samples, zero past the last one.
struct TabulatedProfile {
    table: RadialTable,
    /// `h(k) ≈ h(k₀) + log_coeff · ln(k₀/k)` below the first sample.
    log_coeff: f64,
}

impl TabulatedProfile {
    fn eval(&self, k: f64) -> f64 {
        let nodes = self.table.nodes();
        let (first, last) = (nodes[0], nodes[nodes.len() - 1]);
        if k > last {
            0.0
        } else if k < first {
            let h0 = self.table.values()[0];
            if self.log_coeff != 0.0 {
                h0 + self.log_coeff * (first / k).ln()
            } else {
                h0
            }
        } else {
            self.table.eval(k)
        }
    }
}

/// A radial smoothing profile `h_r(k)`, normalized so that
/// `∫₀^∞ k h_r(k) dk = 1`. The planar smoothing function at scale `ε` is
/// `x ↦ h_r(|x|/ε) / (2πε²)`.
#[derive(Clone)]
pub struct KernelProfile {
    name: String,
    func: ProfileFn,
    singularity: Singularity,
    first_radial_moment: f64,
}

impl fmt::Debug for KernelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelProfile")
            .field("name", &self.name)
            .field("singularity", &self.singularity)
            .field("first_radial_moment", &self.first_radial_moment)
            .finish()
    }
}

impl KernelProfile {
    fn with_moment(name: String, func: ProfileFn, singularity: Singularity) -> Self {
        let mut p = KernelProfile {
            name,
            func,
            singularity,
            first_radial_moment: f64::NAN,
        };
        p.first_radial_moment = integrate_1d(
            |k| k * k * p.eval(k).abs(),
            0.0,
            f64::INFINITY,
            &p.quadrature_spec(),
        )
        .unwrap_or(f64::INFINITY);
        p
    }

    /// Vortex-blob profile `ψ(k) = 2/(k²+1)²`.
    pub fn blob() -> Self {
        Self::with_moment("blob".into(), ProfileFn::Blob, Singularity::Bounded)
    }

    /// Euler-α profile `K₀(k)`.
    pub fn alpha() -> Self {
        Self::with_moment("alpha".into(), ProfileFn::Alpha, Singularity::Logarithmic)
    }

    /// Built-in profile by name (`"blob"` or `"alpha"`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "blob" => Ok(Self::blob()),
            "alpha" => Ok(Self::alpha()),
            other => Err(Error::invalid("kernel.name", format!("unknown profile `{other}`"))),
        }
    }

    /// Arbitrary profile. Normalization is not checked here; [`super::build_shape`]
    /// rejects non-normalized profiles.
    pub fn custom<F>(name: impl Into<String>, singularity: Singularity, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_moment(name.into(), ProfileFn::Custom(Arc::new(f)), singularity)
    }

    /// Load a two-column `k,h` CSV (optional header line, `#` comments).
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "tabulated".into());
        Self::from_csv_str(&name, &text)
    }

    pub fn from_csv_str(name: &str, text: &str) -> Result<Self> {
        let mut ks = Vec::new();
        let mut hs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::ProfileFormat(format!("line {}: expected two columns", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(k), Ok(h)) => {
                    ks.push(k);
                    hs.push(h);
                }
                _ if ks.is_empty() => continue, // header
                _ => return Err(Error::ProfileFormat(format!("line {}: not numeric", lineno + 1))),
            }
        }
        if ks.len() < 3 {
            return Err(Error::ProfileFormat("need at least three samples".into()));
        }
        if ks[0] < 0.0 {
            return Err(Error::ProfileFormat("radii must be nonnegative".into()));
        }
        let singularity = classify_singularity(&ks, &hs);
        let log_coeff = match singularity {
            Singularity::Logarithmic => (hs[0] - hs[1]) / (ks[1] / ks[0]).ln(),
            Singularity::Bounded => 0.0,
        };
        let table = RadialTable::new(ks, hs).map_err(|e| Error::ProfileFormat(e.to_string()))?;
        let profile = Self::with_moment(
            name.to_string(),
            ProfileFn::Tabulated(Arc::new(TabulatedProfile { table, log_coeff })),
            singularity,
        );
        let total = profile.normalization()?;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                total,
                tolerance: NORMALIZATION_TOL,
            });
        }
        Ok(profile)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn singularity(&self) -> Singularity {
        self.singularity
    }

    /// `∫₀^∞ k² |h_r(k)| dk`, i.e. `‖χ₁ h‖_{L¹} / 2π`. Infinite if the
    /// quadrature did not converge.
    pub fn first_radial_moment(&self) -> f64 {
        self.first_radial_moment
    }

    /// `h_r(k)`.
    #[inline]
    pub fn eval(&self, k: f64) -> f64 {
        match &self.func {
            ProfileFn::Blob => {
                let d = k * k + 1.0;
                2.0 / (d * d)
            }
            ProfileFn::Alpha => {
                if k > 0.0 {
                    bessel::k0_unchecked(k)
                } else {
                    f64::INFINITY
                }
            }
            ProfileFn::Tabulated(t) => t.eval(k),
            ProfileFn::Custom(f) => f(k),
        }
    }

    /// Quadrature settings matched to the profile's singularity class.
    pub fn quadrature_spec(&self) -> QuadratureSpec {
        let hint = match self.singularity {
            Singularity::Bounded => SingularityHint::None,
            Singularity::Logarithmic => SingularityHint::LogAtZero,
        };
        QuadratureSpec::default().with_hint(hint)
    }

    /// `∫₀^∞ k h_r(k) dk`.
    pub fn normalization(&self) -> Result<f64> {
        integrate_1d(|k| k * self.eval(k), 0.0, f64::INFINITY, &self.quadrature_spec())
    }
}

/// Heuristic: a sampled profile is logarithmic when it starts at `k > 0`,
/// rises toward the origin, and gains a near-constant amount per e-fold of
/// `k` over the first three samples.
fn classify_singularity(ks: &[f64], hs: &[f64]) -> Singularity {
    if ks[0] <= 0.0 {
        return Singularity::Bounded;
    }
    let c1 = (hs[0] - hs[1]) / (ks[1] / ks[0]).ln();
    let c2 = (hs[1] - hs[2]) / (ks[2] / ks[1]).ln();
    let scale = hs[0].abs().max(f64::MIN_POSITIVE);
    if c1 > 1e-3 * scale && c2 > 0.0 && (c1 / c2 - 1.0).abs() < 0.25 {
        Singularity::Logarithmic
    } else {
        Singularity::Bounded
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn builtins_are_normalized() {
        for p in [KernelProfile::blob(), KernelProfile::alpha()] {
            let n = p.normalization().unwrap();
            assert!((n - 1.0).abs() < 1e-10, "{}: {n}", p.name());
        }
    }

    #[test]
    fn builtin_first_moments() {
        // ∫ 2k²/(k²+1)² dk = π/2 and ∫ k² K₀(k) dk = 2 Γ(3/2)² = π/2.
        assert!((KernelProfile::blob().first_radial_moment() - FRAC_PI_2).abs() < 1e-10);
        assert!((KernelProfile::alpha().first_radial_moment() - FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(KernelProfile::by_name("gauss").is_err());
    }

    fn blob_csv(n: usize, k_max: f64) -> String {
        let mut s = String::from("k,h\n");
        for i in 0..=n {
            let k = k_max * (i as f64 / n as f64).powi(2);
            s.push_str(&format!("{k},{}\n", 2.0 / (k * k + 1.0).powi(2)));
        }
        s
    }

    #[test]
    fn csv_profile_loads_and_classifies_bounded() {
        let p = KernelProfile::from_csv_str("tab", &blob_csv(4000, 2000.0)).unwrap();
        assert_eq!(p.singularity(), Singularity::Bounded);
        assert!((p.eval(0.5) - 2.0 / 1.25f64.powi(2)).abs() < 1e-6);
        assert_eq!(p.eval(3000.0), 0.0);
    }

    #[test]
    fn csv_profile_classifies_logarithmic() {
        let mut s = String::new();
        for i in 0..4000 {
            let k = 1e-6 * (1.0075f64).powi(i);
            s.push_str(&format!("{k},{}\n", bessel::k0_unchecked(k)));
        }
        let p = KernelProfile::from_csv_str("k0", &s).unwrap();
        assert_eq!(p.singularity(), Singularity::Logarithmic);
        let k = 1e-8;
        assert!((p.eval(k) - bessel::k0_unchecked(k)).abs() < 1e-6);
    }

    #[test]
    fn csv_rejects_unnormalized_and_malformed() {
        let s = "0,1\n1,1\n2,1\n";
        assert!(matches!(
            KernelProfile::from_csv_str("flat", s),
            Err(Error::NotNormalized { .. })
        ));
        assert!(KernelProfile::from_csv_str("bad", "0,1,2\n").is_err());
        assert!(KernelProfile::from_csv_str("short", "0,1\n1,0\n").is_err());
    }
}
