//! Spectral density of the cyclic model in its two representations.

use std::f64::consts::PI;

use super::{c1, c2, check_kappa, SpectralModel};
use crate::error::{domain, Error, Result};
use crate::quad::{Node, Problem, QuadOptions};
use crate::specfun::{bessel_k, gamma};

/// Switch from the θ power series to the K_ν identity.
const THETA_SERIES_MAX: f64 = 8.0;
const THETA_MAX_TERMS: usize = 400;

/// Precomputed constants for θ_κ and both density forms.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub kappa: f64,
    pub omega: f64,
    nu: f64,
    pub c1: f64,
    pub c2: f64,
    gamma_nu1: f64,
    a0: f64,
    b1: f64,
}

impl Kernel {
    pub fn new(model: &SpectralModel) -> Result<Self> {
        model.validate()?;
        let mut k = Self::for_kappa(model.kappa)?;
        k.omega = model.omega.abs();
        Ok(k)
    }

    fn for_kappa(kappa: f64) -> Result<Self> {
        check_kappa("spectral density", kappa)?;
        let nu = 0.5 * (kappa - 1.0);
        Ok(Self {
            kappa,
            omega: f64::NAN,
            nu,
            c1: c1(kappa)?,
            c2: c2(kappa)?,
            gamma_nu1: gamma(nu + 1.0),
            a0: 1.0 / gamma(1.0 - nu),
            b1: 1.0 / gamma(2.0 + nu),
        })
    }

    /// θ_κ(u) for u ≤ 8 from its power series.
    fn theta_series(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let h = 0.5 * u;
        let h2 = h * h;
        let nu = self.nu;
        let mut a = h.powf(-2.0 * nu) * self.a0;
        let mut b = h2 * self.b1;
        let mut sum_a = a;
        let mut sum_b = b;
        for m in 1..THETA_MAX_TERMS {
            let mf = m as f64;
            a *= h2 / (mf * (mf - nu));
            b *= h2 / ((mf + 1.0) * (mf + 1.0 + nu));
            sum_a += a;
            sum_b += b;
            if a.abs() + b.abs() < 1e-16 * (sum_a - sum_b).abs() {
                break;
            }
        }
        self.gamma_nu1 * (sum_a - sum_b)
    }

    /// 1 - θ_κ(u).
    pub fn one_minus_theta(&self, u: f64) -> f64 {
        if u <= THETA_SERIES_MAX {
            1.0 - self.theta_series(u)
        } else {
            // 1 - θ = (c1/c2) K_ν(u) u^{(1-κ)/2}
            let k = bessel_k(self.nu, u).expect("order is never an integer for kappa in (0, 1)");
            self.c1 / self.c2 * k * u.powf(-self.nu)
        }
    }

    /// (1 - θ(d)) / d^{1-κ}.
    pub fn theta_term(&self, d: f64) -> f64 {
        self.one_minus_theta(d) * d.powf(self.kappa - 1.0)
    }

    /// K_ν(d) d^ν.
    pub fn bessel_term(&self, d: f64) -> f64 {
        if d == 0.0 {
            return f64::INFINITY;
        }
        bessel_k(self.nu, d).expect("order is never an integer for kappa in (0, 1)") * d.powf(self.nu)
    }

    /// Density from the distances |λ+w| and |λ-w|, θ form.
    pub fn f_theta_dist(&self, dp: f64, dm: f64) -> f64 {
        0.5 * self.c2 * (self.theta_term(dp) + self.theta_term(dm))
    }

    /// Density from the distances |λ+w| and |λ-w|, Bessel form.
    pub fn f_bessel_dist(&self, dp: f64, dm: f64) -> f64 {
        0.5 * self.c1 * (self.bessel_term(dp) + self.bessel_term(dm))
    }

    /// f(sλ) at a quadrature node in the λ variable, singular at ±w/s.
    pub fn density_scaled(&self, node: Node, s: f64) -> f64 {
        let w = self.omega / s;
        self.f_bessel_dist(s * node.dist(-w), s * node.dist(w))
    }

    /// f(λ) at a quadrature node.
    pub fn density(&self, node: Node) -> f64 {
        self.f_bessel_dist(node.dist(-self.omega), node.dist(self.omega))
    }

    /// f(0) = c₁ K_ν(|w|) |w|^ν, which equals c₂ (1 - θ(|w|)) / |w|^{1-κ}.
    pub fn prefactor(&self) -> f64 {
        self.c1 * self.bessel_term(self.omega)
    }
}

fn at_singularity(model: &SpectralModel, lambda: f64, op: &'static str) -> Result<()> {
    if !lambda.is_finite() {
        return domain(op, format!("frequency must be finite, got {lambda}"));
    }
    if lambda.abs() == model.omega.abs() {
        return Err(Error::Singular { op, at: lambda });
    }
    Ok(())
}

/// θ_κ(u) for u ≥ 0.
pub fn theta(kappa: f64, u: f64) -> Result<f64> {
    let k = Kernel::for_kappa(kappa)?;
    if !(u >= 0.0) || !u.is_finite() {
        return domain("theta", format!("u must be non-negative and finite, got {u}"));
    }
    Ok(1.0 - k.one_minus_theta(u))
}

/// Spectral density via K_ν.
pub fn f_bessel(model: &SpectralModel, lambda: f64) -> Result<f64> {
    let k = Kernel::new(model)?;
    at_singularity(model, lambda, "f_bessel")?;
    Ok(k.f_bessel_dist((lambda + k.omega).abs(), (lambda - k.omega).abs()))
}

/// Spectral density via θ_κ.
pub fn f_theta(model: &SpectralModel, lambda: f64) -> Result<f64> {
    let k = Kernel::new(model)?;
    at_singularity(model, lambda, "f_theta")?;
    Ok(k.f_theta_dist((lambda + k.omega).abs(), (lambda - k.omega).abs()))
}

/// Density of the non-oscillating model (w = 0): c₁ K_ν(|λ|) |λ|^ν.
pub fn f_w0(kappa: f64, lambda: f64) -> Result<f64> {
    let k = Kernel::for_kappa(kappa)?;
    if lambda == 0.0 {
        return Err(Error::Singular { op: "f_w0", at: 0.0 });
    }
    Ok(k.c1 * k.bessel_term(lambda.abs()))
}

/// Large-|λ| asymptote (c₁√π/√2) |λ|^{(κ-2)/2} e^{-|λ|} of the w = 0 density.
pub fn f_asymptote_w0(kappa: f64, lambda: f64) -> Result<f64> {
    let c = c1(kappa)?;
    if lambda == 0.0 || !lambda.is_finite() {
        return domain("f_asymptote_w0", format!("frequency must be finite and non-zero, got {lambda}"));
    }
    let a = lambda.abs();
    Ok(c * (0.5 * PI).sqrt() * a.powf(0.5 * (kappa - 2.0)) * (-a).exp())
}

/// The limit-field constant c₂(κ)(1 - θ(|w|))/|w|^{1-κ}, equal to f(0).
pub fn limit_prefactor(model: &SpectralModel) -> Result<f64> {
    Ok(Kernel::new(model)?.prefactor())
}

/// ∫_a^b f(λ) dλ, integrating through the singularities at ±w.
pub fn spectral_mass(model: &SpectralModel, a: f64, b: f64) -> Result<f64> {
    let k = Kernel::new(model)?;
    if !(a < b) {
        return domain("spectral_mass", format!("need a < b, got [{a}, {b}]"));
    }
    let w = k.omega;
    let opts = QuadOptions::with_rel_tol(1e-11);
    let r = Problem::interval(a, b).singular(&[-w, w], model.kappa).integrate(|n| k.density(n), &opts)?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{Envelope, Problem};
    use crate::specfun::gamma_fn;

    fn model() -> SpectralModel {
        SpectralModel::default()
    }

    #[test]
    fn theta_at_zero_and_small_u() {
        assert_eq!(theta(0.5, 0.0).unwrap(), 0.0);
        let lead = gamma_fn(0.75).unwrap() / (2f64.sqrt() * gamma_fn(1.25).unwrap()) * 0.1;
        let t = theta(0.5, 0.01).unwrap();
        assert!(((t - lead) / lead).abs() < 0.01);
        assert!(theta(0.0, 1.0).is_err() && theta(0.5, -1.0).is_err());
    }

    #[test]
    fn theta_two_term_expansion() {
        // Γ((κ+1)/2)/(2^{1-κ}Γ((3-κ)/2)) u^{1-κ} - u²/(2(κ+1)) + o(u²)
        let kappa = 0.3f64;
        let a =
            gamma_fn(0.5 * (kappa + 1.0)).unwrap() / (2f64.powf(1.0 - kappa) * gamma_fn(0.5 * (3.0 - kappa)).unwrap());
        for u in [1e-3f64, 1e-2] {
            let two_term = a * u.powf(1.0 - kappa) - u * u / (2.0 * (kappa + 1.0));
            let t = theta(kappa, u).unwrap();
            assert!((t - two_term).abs() < u * u * 0.1, "u = {u}");
        }
    }

    #[test]
    fn theta_identity_with_bessel() {
        for kappa in [0.2, 0.5, 0.8] {
            let k = Kernel::for_kappa(kappa).unwrap();
            let mut u = 0.1f64;
            while u <= 10.0 {
                let via_k = k.c1 / k.c2 * k.bessel_term(u) * u.powf(1.0 - kappa);
                let series = 1.0 - theta(kappa, u).unwrap();
                assert!((via_k - series).abs() < 1e-7, "κ = {kappa}, u = {u}");
                u += 0.1;
            }
        }
    }

    #[test]
    fn theta_bounded_by_one() {
        for kappa in [0.1, 0.5, 0.9] {
            for i in 0..=1000 {
                let u = 0.1 * i as f64;
                let t = theta(kappa, u).unwrap();
                assert!(t <= 1.0 && 1.0 - t >= 0.0, "κ = {kappa}, u = {u}");
            }
        }
    }

    #[test]
    fn density_even_positive_and_singular() {
        let m = model();
        for l in [0.0, 0.3, 0.999, 1.001, 4.0, 25.0] {
            let f = f_bessel(&m, l).unwrap();
            assert!(f > 0.0);
            assert_eq!(f, f_bessel(&m, -l).unwrap());
        }
        assert!(matches!(f_bessel(&m, 1.0), Err(Error::Singular { .. })));
        assert!(matches!(f_theta(&m, -1.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn singularity_law() {
        // the relative correction is θ(h) ~ h^{1-κ}, so κ = 0.8 needs a much smaller h
        for (kappa, h) in [(0.2, 1e-6f64), (0.5, 1e-6), (0.8, 1e-12)] {
            let m = SpectralModel::new(kappa, 1.0).unwrap();
            let scaled = f_theta(&m, 1.0 + h).unwrap() * h.powf(1.0 - kappa);
            let want = 0.5 * c2(kappa).unwrap();
            assert!(((scaled - want) / want).abs() < 0.01);
        }
    }

    #[test]
    fn prefactor_is_density_at_zero() {
        let m = model();
        let p = limit_prefactor(&m).unwrap();
        assert!(((p - f_bessel(&m, 0.0).unwrap()) / p).abs() < 1e-12);
    }

    #[test]
    fn unit_mass() {
        let m = model();
        let k = Kernel::new(&m).unwrap();
        let r = Problem::line(Envelope::Compact { reach: 45.0 })
            .singular(&[-1.0, 1.0], m.kappa)
            .integrate(|n| k.density(n), &QuadOptions::with_rel_tol(1e-11))
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn w0_asymptote() {
        let mut prev = f64::INFINITY;
        for l in [5.0, 10.0, 20.0] {
            let ratio = f_w0(0.8, l).unwrap() / f_asymptote_w0(0.8, l).unwrap();
            assert!((ratio - 1.0).abs() < prev);
            prev = (ratio - 1.0).abs();
            if l == 10.0 {
                assert!((ratio - 1.0).abs() < 0.05);
            }
        }
        let direct = c1(0.5).unwrap() * (0.5 * PI).sqrt() * 10f64.powf(-0.75) * (-10f64).exp();
        assert_eq!(f_asymptote_w0(0.5, 10.0).unwrap(), direct);
        assert_eq!(f_asymptote_w0(0.5, -10.0).unwrap(), direct);
    }
}
