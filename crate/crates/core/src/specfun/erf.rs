//! Complementary error function.

use std::f64::consts::PI;

/// Below this the Maclaurin-type series for erf is used, above it the continued fraction.
const CF_SWITCH: f64 = 2.5;

/// erfc(z) = 2/√π ∫_z^∞ e^{-t²} dt.
pub fn erfc(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        return 2.0 - erfc(-z);
    }
    if z < CF_SWITCH {
        1.0 - erf_series(z)
    } else {
        (-z * z).exp() * erfcx_cf(z)
    }
}

/// Scaled complementary error function e^{z²} erfc(z) for z ≥ 0.
pub fn erfcx(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < CF_SWITCH {
        (z * z).exp() * (1.0 - erf_series(z))
    } else {
        erfcx_cf(z)
    }
}

/// erf(z) = (2/√π) e^{-z²} Σ (2z²)^n z / (1·3···(2n+1)); all terms positive.
fn erf_series(z: f64) -> f64 {
    let z2 = 2.0 * z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        n += 1.0;
        term *= z2 / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-z * z).exp() * sum
}

/// Lentz evaluation of 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))) / √π.
fn erfcx_cf(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = z + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = z + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (PI.sqrt() * f)
}
