//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Power series for `x ≤ 2`; above that, Steed's continued fraction for
//! `K₁/K₀` together with the Thompson–Barnett normalization sum, which
//! stays at machine precision all the way into the exponential underflow.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
const SERIES_SWITCH: f64 = 2.0;

/// `(I₀ sum, Σ H_k t^k/(k!)²)` with `t = x²/4`.
fn k0_series_parts(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut s = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= t / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        s += harmonic * term;
        if term < f64::EPSILON * 1e-2 * i0 {
            break;
        }
    }
    (i0, s)
}

/// `(Σ t^k/(k!(k+1)!), Σ (ψ(k+1)+ψ(k+2)) t^k/(k!(k+1)!))`.
fn k1_series_parts(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let mut term = 1.0;
    let mut h_k = 0.0;
    let mut h_k1 = 1.0;
    let mut s1 = 1.0;
    let mut s2 = h_k + h_k1 - 2.0 * EULER_GAMMA;
    for k in 1..60 {
        let kf = k as f64;
        term *= t / (kf * (kf + 1.0));
        h_k += 1.0 / kf;
        h_k1 += 1.0 / (kf + 1.0);
        s1 += term;
        s2 += (h_k + h_k1 - 2.0 * EULER_GAMMA) * term;
        if term < f64::EPSILON * 1e-2 * s1 {
            break;
        }
    }
    (s1, s2)
}

/// `(K₀(x), K₁(x))` for `x > 2` by Steed's method (CF2).
fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn check_domain(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain { function, value: x })
    }
}

/// `K₀(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_domain("K0", x)?;
    Ok(k0_unchecked(x))
}

/// `K₁(x)` for `x > 0`.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_domain("K1", x)?;
    Ok(k1_unchecked(x))
}

pub(crate) fn k0_unchecked(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    if x <= SERIES_SWITCH {
        let (i0, s) = k0_series_parts(x);
        -((0.5 * x).ln() + EULER_GAMMA) * i0 + s
    } else {
        k01_continued_fraction(x).0
    }
}

pub(crate) fn k1_unchecked(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    if x <= SERIES_SWITCH {
        let (s1, s2) = k1_series_parts(x);
        1.0 / x + (0.5 * x).ln() * 0.5 * x * s1 - 0.25 * x * s2
    } else {
        k01_continued_fraction(x).1
    }
}

/// Euler-α shape `B_K(r) = 1 − r K₁(r)`, with `B_K(0) = 0`.
///
/// Below the series switch the leading `1` is cancelled analytically, so
/// the result keeps full relative precision as `r → 0`.
pub fn alpha_shape(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r.is_infinite() {
        return 1.0;
    }
    if r <= SERIES_SWITCH {
        let (s1, s2) = k1_series_parts(r);
        let r2 = r * r;
        -0.5 * r2 * (0.5 * r).ln() * s1 + 0.25 * r2 * s2
    } else {
        1.0 - r * k01_continued_fraction(r).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_errors() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
        assert!(bessel_k0(f64::NAN).is_err());
    }

    #[test]
    fn small_argument_limit_of_x_k1() {
        let x = 1e-6;
        assert!((x * bessel_k1(x).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn continuous_across_series_switch() {
        let below = SERIES_SWITCH;
        let above = f64::from_bits(SERIES_SWITCH.to_bits() + 1);
        let (k0a, k1a) = (k0_unchecked(below), k1_unchecked(below));
        let (k0b, k1b) = (k0_unchecked(above), k1_unchecked(above));
        assert!((k0a - k0b).abs() / k0a < 1e-13);
        assert!((k1a - k1b).abs() / k1a < 1e-13);
    }

    #[test]
    fn alpha_shape_limits() {
        assert_eq!(alpha_shape(0.0), 0.0);
        assert!((alpha_shape(10.0) - 1.0).abs() < 2e-4);
        assert!(alpha_shape(1e-8) > 0.0);
    }

    #[test]
    fn alpha_shape_agrees_with_direct_formula() {
        for &r in &[0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 5.0] {
            let direct = 1.0 - r * bessel_k1(r).unwrap();
            assert!((alpha_shape(r) - direct).abs() < 1e-15, "r = {r}");
        }
    }
}
