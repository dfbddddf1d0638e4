//! Green function transform and covariances of the solution and limit fields.

use std::f64::consts::PI;

use super::density::Kernel;
use super::{FrbeParams, SpectralModel};
use crate::error::{domain, Result};
use crate::quad::{Envelope, Node, Problem, QuadOptions};
use crate::specfun::ml_neg;

/// e^{-40} is far below every tolerance used with these integrands.
const LOG_CUTOFF: f64 = 40.0;

fn check_time(op: &'static str, t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(op, format!("time must be non-negative and finite, got {t}"));
    }
    Ok(())
}

/// Ĝ(t, λ) = E_β(-μ |λ|^α (1+λ²)^{γ/2} t^β).
pub fn green_hat(params: &FrbeParams, t: f64, lambda: f64) -> Result<f64> {
    params.validate()?;
    check_time("green_hat", t)?;
    Ok(transfer(params, t, lambda))
}

/// Ĝ without validation.
pub(crate) fn transfer(params: &FrbeParams, t: f64, lambda: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    ml_neg(params.beta, params.mu * params.symbol(lambda) * t.powf(params.beta))
}

/// The limit transfer function E_β(-μ t^β |λ|^α), in which γ plays no role.
pub(crate) fn limit_transfer(params: &FrbeParams, t: f64, lambda: f64) -> f64 {
    let a = lambda.abs();
    let riesz = if params.alpha == 2.0 { a * a } else { a.powf(params.alpha) };
    ml_neg(params.beta, params.mu * t.powf(params.beta) * riesz)
}

/// Cov(u(t, x), u(t2, x2)) = ∫ cos(λ(x-x2)) Ĝ(t,λ) Ĝ(t2,λ) f(λ) dλ.
pub fn cov_solution(model: &SpectralModel, params: &FrbeParams, t: f64, t2: f64, x: f64, x2: f64) -> Result<f64> {
    params.validate()?;
    check_time("cov_solution", t)?;
    check_time("cov_solution", t2)?;
    let k = Kernel::new(model)?;
    let delta = x - x2;
    let w = k.omega;

    // f itself decays like e^{-(|λ| - |w|)}
    let mut reach = w + LOG_CUTOFF;
    let order = params.alpha + params.gamma_exp;
    if params.beta == 1.0 && t + t2 > 0.0 && order > 0.0 {
        reach = reach.min((LOG_CUTOFF / (params.mu * (t + t2))).powf(1.0 / order));
    }
    let integrand = |n: Node| {
        let g = if params.beta == 1.0 {
            (-params.mu * params.symbol(n.x) * (t + t2)).exp()
        } else {
            transfer(params, t, n.x) * transfer(params, t2, n.x)
        };
        if g == 0.0 {
            return 0.0;
        }
        (delta * n.x).cos() * g * k.density(n)
    };
    let r = Problem::line(Envelope::Compact { reach })
        .singular(&[-w, w], model.kappa)
        .breaks(&[0.0])
        .oscillating(delta)
        .integrate(integrand, &QuadOptions::with_rel_tol(1e-10))?;
    Ok(r.value)
}

/// ∫ cos(λx) f(λ) dλ, which reproduces r(x).
pub fn fourier_density(model: &SpectralModel, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain("fourier_density", format!("lag must be finite, got {x}"));
    }
    let k = Kernel::new(model)?;
    let w = k.omega;
    let r = Problem::line(Envelope::Compact { reach: w + LOG_CUTOFF })
        .singular(&[-w, w], model.kappa)
        .breaks(&[0.0])
        .oscillating(x)
        .integrate(|n: Node| (x * n.x).cos() * k.density(n), &QuadOptions::with_rel_tol(1e-11))?;
    Ok(r.value)
}

fn limit_times(op: &'static str, mu: f64, t: f64, t2: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return domain(op, format!("mu must be positive, got {mu}"));
    }
    check_time(op, t)?;
    check_time(op, t2)?;
    if !(t + t2 > 0.0) {
        return domain(op, "the limit covariance needs t + t2 > 0");
    }
    Ok(())
}

/// Closed-form heat limit covariance P √π e^{-δ²/(4μT)} / (√μ √T), T = t + t2.
pub fn cov_limit_heat(model: &SpectralModel, mu: f64, t: f64, t2: f64, x: f64, x2: f64) -> Result<f64> {
    limit_times("cov_limit_heat", mu, t, t2)?;
    let p = Kernel::new(model)?.prefactor();
    let (sum, delta) = (t + t2, x - x2);
    Ok(p * PI.sqrt() * (-delta * delta / (4.0 * mu * sum)).exp() / (mu.sqrt() * sum.sqrt()))
}

/// The heat limit covariance as the spectral integral P ∫ cos(λδ) e^{-μ(t+t2)λ²} dλ.
pub fn cov_limit_heat_spectral(model: &SpectralModel, mu: f64, t: f64, t2: f64, x: f64, x2: f64) -> Result<f64> {
    limit_times("cov_limit_heat_spectral", mu, t, t2)?;
    let p = Kernel::new(model)?.prefactor();
    let (a, delta) = (mu * (t + t2), x - x2);
    let r = Problem::line(Envelope::Stretched { rate: a, power: 2.0 })
        .oscillating(delta)
        .integrate(|n: Node| (delta * n.x).cos() * (-a * n.x * n.x).exp(), &QuadOptions::with_rel_tol(1e-12))?;
    Ok(p * r.value)
}

/// ∫_ℝ cos(λδ) E_β(-μ t^β |λ|^α) E_β(-μ t2^β |λ|^α) dλ.
fn frbe_limit_integral(params: &FrbeParams, t: f64, t2: f64, delta: f64) -> Result<f64> {
    params.validate_limit()?;
    if !(t > 0.0 && t2 > 0.0) || !t.is_finite() || !t2.is_finite() {
        return domain("cov_limit_frbe", format!("times must be positive, got ({t}, {t2})"));
    }
    let FrbeParams { alpha, beta, mu, .. } = *params;
    let opts = QuadOptions::with_rel_tol(1e-10);
    let problem = if beta == 1.0 {
        Problem::line(Envelope::Stretched { rate: mu * (t + t2), power: alpha })
    } else {
        let scale = (mu * t.min(t2).powf(beta)).powf(-1.0 / alpha);
        Problem::line(Envelope::Algebraic { scale, power: 2.0 * alpha })
    };
    let r = problem.breaks(&[0.0]).oscillating(delta).integrate(
        |n: Node| {
            let g = limit_transfer(params, t, n.x) * limit_transfer(params, t2, n.x);
            if g == 0.0 {
                0.0
            } else {
                (delta * n.x).cos() * g
            }
        },
        &opts,
    )?;
    Ok(r.value)
}

/// FRBE limit covariance P ∫_ℝ cos(λδ) E_β(-μt^β|λ|^α) E_β(-μt2^β|λ|^α) dλ, α > 1.
pub fn cov_limit_frbe(model: &SpectralModel, params: &FrbeParams, t: f64, t2: f64, x: f64, x2: f64) -> Result<f64> {
    let p = Kernel::new(model)?.prefactor();
    Ok(p * frbe_limit_integral(params, t, t2, x - x2)?)
}

/// FRBE limit covariance with the constant 2c(1-θ(|w|))/|w|^{1-κ} set to one,
/// i.e. ∫_0^∞ cos(λδ) E_β(-μt^β λ^α) E_β(-μt2^β λ^α) dλ.
pub fn cov_limit_frbe_unit(params: &FrbeParams, t: f64, t2: f64, x: f64, x2: f64) -> Result<f64> {
    Ok(0.5 * frbe_limit_integral(params, t, t2, x - x2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{limit_prefactor, r_cov};

    #[test]
    fn green_hat_values() {
        let p = FrbeParams::default();
        assert_eq!(green_hat(&p, 1.3, 0.0).unwrap(), 1.0);
        assert_eq!(green_hat(&p, 0.0, 4.0).unwrap(), 1.0);
        let heat = FrbeParams::heat(0.7);
        assert!((green_hat(&heat, 2.0, 1.5).unwrap() - (-0.7f64 * 2.25 * 2.0).exp()).abs() < 1e-16);
        let half = FrbeParams { alpha: 2.0, beta: 0.5, gamma_exp: 0.0, mu: 1.0 };
        let want = 1f64.exp() * crate::specfun::erfc(1.0);
        assert!((green_hat(&half, 1.0, 1.0).unwrap() - want).abs() < 1e-15);
        assert!(green_hat(&p, -1.0, 1.0).is_err());
    }

    #[test]
    fn solution_covariance_at_time_zero_is_r() {
        let m = SpectralModel::default();
        let p = FrbeParams::heat(1.0);
        for x in [0.0, 0.5, 2.0] {
            let c = cov_solution(&m, &p, 0.0, 0.0, x, 0.0).unwrap();
            assert!((c - r_cov(&m, x)).abs() < 1e-8, "x = {x}: {c}");
        }
    }

    #[test]
    fn solution_covariance_heat_depends_on_time_sum() {
        let m = SpectralModel::default();
        let p = FrbeParams::heat(1.0);
        let a = cov_solution(&m, &p, 0.5, 1.5, 0.3, 0.0).unwrap();
        let b = cov_solution(&m, &p, 1.0, 1.0, 0.3, 0.0).unwrap();
        assert!((a - b).abs() < 1e-10);
        let shifted = cov_solution(&m, &p, 1.0, 1.0, 5.3, 5.0).unwrap();
        assert!((shifted - b).abs() < 1e-10);
    }

    #[test]
    fn heat_limit_closed_form_matches_spectral_integral() {
        let m = SpectralModel::default();
        for (t, t2, d) in [(0.5, 0.5, 0.0), (1.0, 2.0, 1.5), (0.1, 0.2, 3.0)] {
            let a = cov_limit_heat(&m, 1.0, t, t2, d, 0.0).unwrap();
            let b = cov_limit_heat_spectral(&m, 1.0, t, t2, d, 0.0).unwrap();
            assert!(((a - b) / a).abs() < 1e-10);
        }
        let p = limit_prefactor(&m).unwrap();
        let at_unit = cov_limit_heat(&m, 1.0, 0.4, 0.6, 2.0, 2.0).unwrap();
        assert!((at_unit - p * PI.sqrt()).abs() < 1e-15);
        assert!(cov_limit_heat(&m, 1.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn frbe_limit_reduces_to_heat() {
        let m = SpectralModel::default();
        let p = FrbeParams::heat(1.0);
        for d in [0.0, 1.0, 2.5] {
            let a = cov_limit_frbe(&m, &p, 1.0, 1.0, d, 0.0).unwrap();
            let b = cov_limit_heat(&m, 1.0, 1.0, 1.0, d, 0.0).unwrap();
            assert!(((a - b) / b).abs() < 1e-8, "δ = {d}");
        }
    }

    #[test]
    fn frbe_limit_rejects_small_alpha() {
        let m = SpectralModel::default();
        let p = FrbeParams { alpha: 0.9, ..FrbeParams::default() };
        assert!(cov_limit_frbe(&m, &p, 1.0, 1.0, 0.0, 0.0).is_err());
    }
}
