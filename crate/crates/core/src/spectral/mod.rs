//! The cyclic long-range dependence model and the fractional Riesz-Bessel
//! transfer function.
//!
//! The covariance of the initial condition is `r(x) = cos(wx) / (1 + x²)^{κ/2}`.
//! Its spectral density has integrable singularities `|λ ∓ w|^{κ-1}` and is
//! available in two independent forms, through `K_ν` with `ν = (κ-1)/2` and
//! through the power series `θ_κ`.

mod covariance;
mod density;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::gamma;

pub use covariance::{
    cov_limit_frbe, cov_limit_frbe_unit, cov_limit_heat, cov_limit_heat_spectral, cov_solution, fourier_density,
    green_hat,
};
pub(crate) use covariance::{limit_transfer, transfer};
pub(crate) use density::Kernel;
pub use density::{f_asymptote_w0, f_bessel, f_theta, f_w0, limit_prefactor, spectral_mass, theta};

/// Parameters (κ, w) of the covariance cos(wx)/(1+x²)^{κ/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub kappa: f64,
    pub omega: f64,
}

impl SpectralModel {
    pub fn new(kappa: f64, omega: f64) -> Result<Self> {
        let m = Self { kappa, omega };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_kappa("SpectralModel", self.kappa)?;
        if !(self.omega != 0.0 && self.omega.is_finite()) {
            return domain("SpectralModel", format!("omega must be finite and non-zero, got {}", self.omega));
        }
        Ok(())
    }

    /// Bessel order ν = (κ-1)/2.
    pub fn nu(&self) -> f64 {
        0.5 * (self.kappa - 1.0)
    }
}

impl Default for SpectralModel {
    fn default() -> Self {
        Self { kappa: 0.8, omega: 1.0 }
    }
}

/// Operator parameters of ∂^β u = -μ (I-Δ)^{γ/2} (-Δ)^{α/2} u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrbeParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_exp: f64,
    pub mu: f64,
}

impl FrbeParams {
    pub fn new(alpha: f64, beta: f64, gamma_exp: f64, mu: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma_exp, mu };
        p.validate()?;
        Ok(p)
    }

    /// The heat equation u_t = μ u_xx.
    pub fn heat(mu: f64) -> Self {
        Self { alpha: 2.0, beta: 1.0, gamma_exp: 0.0, mu }
    }

    pub fn validate(&self) -> Result<()> {
        let Self { alpha, beta, gamma_exp, mu } = *self;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return domain("FrbeParams", format!("alpha must be non-negative, got {alpha}"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return domain("FrbeParams", format!("beta must lie in (0, 1], got {beta}"));
        }
        if !(gamma_exp >= 0.0 && gamma_exp.is_finite()) {
            return domain("FrbeParams", format!("gamma_exp must be non-negative, got {gamma_exp}"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return domain("FrbeParams", format!("mu must be positive, got {mu}"));
        }
        Ok(())
    }

    /// Validation for the limit field, which needs α > 1.
    pub fn validate_limit(&self) -> Result<()> {
        self.validate()?;
        if !(self.alpha > 1.0) {
            return domain(
                "FrbeParams",
                format!(
                    "the limit field needs alpha > 1 (the variance integral diverges otherwise), got {}",
                    self.alpha
                ),
            );
        }
        Ok(())
    }

    /// Fourier symbol |λ|^α (1+λ²)^{γ/2}.
    pub fn symbol(&self, lambda: f64) -> f64 {
        let a = lambda.abs();
        let riesz = if self.alpha == 2.0 { a * a } else { a.powf(self.alpha) };
        if self.gamma_exp == 0.0 {
            riesz
        } else {
            riesz * (0.5 * self.gamma_exp * (lambda * lambda).ln_1p()).exp()
        }
    }
}

impl Default for FrbeParams {
    fn default() -> Self {
        Self { alpha: 1.5, beta: 0.5, gamma_exp: 0.0, mu: 1.0 }
    }
}

fn check_kappa(op: &'static str, kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return domain(op, format!("kappa must lie in (0, 1), got {kappa}"));
    }
    Ok(())
}

/// c₁(κ) = 2^{(1-κ)/2} / (√π Γ(κ/2)).
pub fn c1(kappa: f64) -> Result<f64> {
    check_kappa("c1", kappa)?;
    Ok(2f64.powf(0.5 * (1.0 - kappa)) / (std::f64::consts::PI.sqrt() * gamma(0.5 * kappa)))
}

/// c₂(κ) = 1 / (2 Γ(κ) cos(κπ/2)).
pub fn c2(kappa: f64) -> Result<f64> {
    check_kappa("c2", kappa)?;
    Ok(1.0 / (2.0 * gamma(kappa) * (0.5 * kappa * std::f64::consts::PI).cos()))
}

/// C(d, κ) = Γ((d-κ)/2) / (2^κ π^{d/2} Γ(κ/2)).
pub fn c_dk(d: u32, kappa: f64) -> Result<f64> {
    check_kappa("c_dk", kappa)?;
    if d == 0 {
        return domain("c_dk", "dimension must be at least 1");
    }
    let d = d as f64;
    Ok(gamma(0.5 * (d - kappa)) / (2f64.powf(kappa) * std::f64::consts::PI.powf(0.5 * d) * gamma(0.5 * kappa)))
}

/// r(x) = cos(wx) / (1+x²)^{κ/2}.
pub fn r_cov(model: &SpectralModel, x: f64) -> f64 {
    (model.omega * x).cos() * (-0.5 * model.kappa * (x * x).ln_1p()).exp()
}
