//! Hermite polynomials and the isotropic kernels Y_d.

use super::bessel::bessel_j;
use crate::error::{domain, Result};

/// Probabilists' Hermite polynomial He_k(u), orthogonal under e^{-u²/2}/√(2π).
pub fn hermite(k: u32, u: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => u,
        _ => {
            let (mut prev, mut cur) = (1.0, u);
            for j in 1..k {
                let next = u * cur - j as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Y_1 = cos, Y_2 = J_0, Y_3 = sinc.
pub fn y_d(d: u32, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain("y_d", format!("argument must be non-negative, got {r}"));
    }
    match d {
        1 => Ok(r.cos()),
        2 => bessel_j(0.0, r),
        3 => Ok(if r == 0.0 { 1.0 } else { r.sin() / r }),
        _ => domain("y_d", format!("dimension must be 1, 2 or 3, got {d}")),
    }
}
