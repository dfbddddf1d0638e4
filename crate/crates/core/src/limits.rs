//! Mean-square distance between the rescaled solution and its limit, and the
//! divergent variance integral of rank-m subordinated fields.
//!
//! With s the space scaling (√ε for the heat equation, ε^{β/α} in general) and
//! Q_s(λ) = f(sλ)/f(0), the rescaled solution and the limit field share their
//! white noise, so
//!
//! ```text
//! E|U_ε - U_0|² = f(0) ∫ (E_β(-μt^β|λ|^α(1+s²λ²)^{γ/2}) √Q_s(λ) - E_β(-μt^β|λ|^α))² dλ.
//! ```
//!
//! Q_s is singular at ±w/s, which moves to infinity as ε → 0. The quadrature
//! treats those points with the power-law substitution and drops them once
//! they lie where the damping envelope is below 1e-17.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_panels, Envelope, Node, Problem, QuadOptions};
use crate::specfun::ml_neg;
use crate::spectral::{limit_transfer, FrbeParams, Kernel, SpectralModel};

const R_TOL: f64 = 1e-10;

/// Which error integral a parameter set selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// α = 2, β = 1, γ = 0.
    Heat,
    Frbe,
}

impl Equation {
    pub fn of(params: &FrbeParams) -> Self {
        if params.alpha == 2.0 && params.beta == 1.0 && params.gamma_exp == 0.0 {
            Equation::Heat
        } else {
            Equation::Frbe
        }
    }
}

fn check_eps(op: &'static str, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return domain(op, format!("eps must lie in (0, 1], got {eps}"));
    }
    Ok(())
}

fn check_t(op: &'static str, t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(op, format!("t must be positive and finite, got {t}"));
    }
    Ok(())
}

/// √q - 1 without cancellation near q = 1.
fn sqrt_minus_one(q: f64) -> f64 {
    (q - 1.0) / (q.sqrt() + 1.0)
}

fn density_ratio(model: &SpectralModel, s: f64, lambda: f64, op: &'static str) -> Result<f64> {
    let k = Kernel::new(model)?;
    if !lambda.is_finite() {
        return domain(op, format!("lambda must be finite, got {lambda}"));
    }
    let x = s * lambda;
    if x.abs() == k.omega {
        return Err(Error::Singular { op, at: lambda });
    }
    Ok(k.density(Node::plain(x)) / k.prefactor())
}

/// Q_ε(λ) = f(λ√ε) / f(0).
pub fn q_eps_heat(model: &SpectralModel, eps: f64, lambda: f64) -> Result<f64> {
    check_eps("q_eps_heat", eps)?;
    density_ratio(model, eps.sqrt(), lambda, "q_eps_heat")
}

/// E_β(-μt^β|λ|^α(1+s²λ²)^{γ/2}) / E_β(-μt^β|λ|^α) with s = ε^{β/α}.
pub fn ml_ratio(params: &FrbeParams, eps: f64, t: f64, lambda: f64) -> Result<f64> {
    params.validate_limit()?;
    check_eps("ml_ratio", eps)?;
    check_t("ml_ratio", t)?;
    Ok(ml_ratio_unchecked(params, eps.powf(params.beta / params.alpha), t, lambda))
}

fn ml_ratio_unchecked(params: &FrbeParams, s: f64, t: f64, lambda: f64) -> f64 {
    if params.gamma_exp == 0.0 {
        return 1.0;
    }
    let z = params.mu * t.powf(params.beta) * lambda.abs().powf(params.alpha);
    let boost = (0.5 * params.gamma_exp * (s * s * lambda * lambda).ln_1p()).exp();
    if params.beta == 1.0 {
        (-z * (boost - 1.0)).exp()
    } else {
        ml_neg(params.beta, z * boost) / ml_neg(params.beta, z)
    }
}

/// Q̃(λ) = ML ratio · √Q_s(λ), s = ε^{β/α}.
pub fn q_tilde_frbe(model: &SpectralModel, params: &FrbeParams, eps: f64, t: f64, lambda: f64) -> Result<f64> {
    let ratio = ml_ratio(params, eps, t, lambda)?;
    let s = eps.powf(params.beta / params.alpha);
    Ok(ratio * density_ratio(model, s, lambda, "q_tilde_frbe")?.sqrt())
}

/// R(t) = f(0) ∫ e^{-2μtλ²} (√Q_ε(λ) - 1)² dλ for the heat equation.
pub fn r_heat(model: &SpectralModel, mu: f64, t: f64, eps: f64) -> Result<f64> {
    FrbeParams::heat(mu).validate()?;
    check_eps("r_heat", eps)?;
    check_t("r_heat", t)?;
    let k = Kernel::new(model)?;
    let p = k.prefactor();
    let s = eps.sqrt();
    let w = k.omega / s;
    let a = 2.0 * mu * t;
    let r = Problem::line(Envelope::Stretched { rate: a, power: 2.0 })
        .singular(&[-w, w], model.kappa)
        .breaks(&[0.0])
        .integrate(
        |n: Node| {
            let g = (-a * n.x * n.x).exp();
            if g == 0.0 {
                return 0.0;
            }
            let d = sqrt_minus_one(k.density_scaled(n, s) / p);
            g * d * d
        },
        &QuadOptions::with_rel_tol(R_TOL),
    )?;
    Ok(p * r.value)
}

/// R(t) = f(0) ∫ (E_num √Q_s - E_den)² dλ; see the module docs.
pub fn r_frbe(model: &SpectralModel, params: &FrbeParams, t: f64, eps: f64) -> Result<f64> {
    params.validate_limit()?;
    check_eps("r_frbe", eps)?;
    check_t("r_frbe", t)?;
    let k = Kernel::new(model)?;
    let p = k.prefactor();
    let FrbeParams { alpha, beta, mu, .. } = *params;
    let s = eps.powf(beta / alpha);
    let w = k.omega / s;

    let problem = if beta == 1.0 {
        Problem::line(Envelope::Stretched { rate: 2.0 * mu * t, power: alpha })
    } else {
        // (√Q - 1)² → 1 in the tails, so the integrand decays like E_β² ~ |λ|^{-2α}
        Problem::line(Envelope::Algebraic { scale: (mu * t.powf(beta)).powf(-1.0 / alpha), power: 2.0 * alpha })
    };
    let integrand = |n: Node| {
        let den = limit_transfer(params, t, n.x);
        if den == 0.0 {
            return 0.0;
        }
        let q = k.density_scaled(n, s) / p;
        let ratio = ml_ratio_unchecked(params, s, t, n.x);
        // E_num √Q - E_den = E_den (ratio (√Q - 1) + ratio - 1)
        let d = den * (ratio * sqrt_minus_one(q) + (ratio - 1.0));
        d * d
    };
    let r = problem
        .singular(&[-w, w], model.kappa)
        .breaks(&[0.0])
        .integrate(integrand, &QuadOptions::with_rel_tol(R_TOL))?;
    Ok(p * r.value)
}

/// Whether ∫ E_β(-μt^β|λ|^α) dλ, the dominating integral of the fractional limit, is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominating {
    Finite(f64),
    Divergent,
}

/// ∫_ℝ E_β(-μt^β|λ|^α) dλ. For β < 1 the integrand decays like |λ|^{-α}.
pub fn dominating_integral(params: &FrbeParams, t: f64) -> Result<Dominating> {
    params.validate()?;
    check_t("dominating_integral", t)?;
    let FrbeParams { alpha, beta, mu, .. } = *params;
    if alpha == 0.0 || (beta < 1.0 && alpha <= 1.0) {
        return Ok(Dominating::Divergent);
    }
    let problem = if beta == 1.0 {
        Problem::line(Envelope::Stretched { rate: mu * t, power: alpha })
    } else {
        Problem::line(Envelope::Algebraic { scale: (mu * t.powf(beta)).powf(-1.0 / alpha), power: alpha })
    };
    let r = problem
        .breaks(&[0.0])
        .integrate(|n: Node| limit_transfer(params, t, n.x), &QuadOptions::with_rel_tol(R_TOL))?;
    Ok(Dominating::Finite(r.value))
}

/// R(ε) along a decreasing list of rescaling factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub equation: Equation,
    pub eps_list: Vec<f64>,
    pub r_values: Vec<f64>,
    pub t: f64,
    pub model: SpectralModel,
    pub params: FrbeParams,
    pub monotone_decreasing: bool,
    pub ratio_last_first: f64,
}

pub const DEFAULT_EPS_LIST: [f64; 5] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];

pub fn run_convergence(
    model: &SpectralModel,
    params: &FrbeParams,
    t: f64,
    eps_list: &[f64],
) -> Result<ConvergenceReport> {
    if eps_list.is_empty() {
        return domain("run_convergence", "eps_list is empty");
    }
    for &e in eps_list {
        check_eps("run_convergence", e)?;
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return domain("run_convergence", "eps_list must be strictly decreasing");
    }
    let equation = Equation::of(params);
    let r_values = eps_list
        .par_iter()
        .map(|&e| match equation {
            Equation::Heat => r_heat(model, params.mu, t, e),
            Equation::Frbe => r_frbe(model, params, t, e),
        })
        .collect::<Result<Vec<f64>>>()?;
    let monotone_decreasing = r_values.windows(2).all(|w| w[1] < w[0]);
    let ratio_last_first = r_values[r_values.len() - 1] / r_values[0];
    Ok(ConvergenceReport {
        equation,
        eps_list: eps_list.to_vec(),
        r_values,
        t,
        model: *model,
        params: *params,
        monotone_decreasing,
        ratio_last_first,
    })
}

fn check_divergence_args(mu: f64, t: f64, radius: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return domain("divergence", format!("mu must be positive, got {mu}"));
    }
    check_t("divergence", t)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return domain("divergence", format!("radius must be positive, got {radius}"));
    }
    Ok(2.0 * mu * t)
}

/// ∫_{-R}^{R} e^{-a(c + λ)²} dλ by adaptive quadrature, split at the peak.
fn ridge(a: f64, c: f64, radius: f64, opts: &QuadOptions) -> Result<f64> {
    let peak = -c;
    let f = |l: f64| (-a * (c + l) * (c + l)).exp();
    if peak > -radius && peak < radius {
        let left = integrate_panels(f, -radius, peak, 2, opts)?.value;
        let right = integrate_panels(f, peak, radius, 2, opts)?.value;
        Ok(left + right)
    } else {
        Ok(integrate_panels(f, -radius, radius, 2, opts)?.value)
    }
}

/// ∫_{[-R,R]^m} exp(-2μt(λ_1+…+λ_m)²) dλ for m ∈ {2, 3}, by iterated
/// adaptive Gauss-Kronrod quadrature.
pub fn divergence_m(m: u32, mu: f64, t: f64, radius: f64) -> Result<f64> {
    let a = check_divergence_args(mu, t, radius)?;
    if !(2..=3).contains(&m) {
        return domain("divergence_m", format!("m must be 2 or 3, got {m}"));
    }
    let inner = QuadOptions::with_rel_tol(1e-12);
    let outer = QuadOptions::with_rel_tol(1e-10);
    let r = radius;
    if m == 2 {
        // the ridge integral is flat for |λ_1| < R and falls off past ±R
        let g = |l1: f64| ridge(a, l1, r, &inner).unwrap_or(f64::NAN);
        return Ok(integrate_panels(g, -r, r, 8, &outer)?.value);
    }
    let h = |l1: f64| {
        let g = |l2: f64| ridge(a, l1 + l2, r, &inner).unwrap_or(f64::NAN);
        // kinks of the ridge integral sit where |λ_1 + λ_2| = R
        let mut edges = vec![-r, r];
        edges.extend([-r - l1, r - l1].into_iter().filter(|e| e.abs() < r));
        edges.sort_by(f64::total_cmp);
        edges.windows(2).map(|w| integrate_panels(g, w[0], w[1], 2, &inner).map(|q| q.value)).sum::<Result<f64>>()
    };
    let h = |l1: f64| h(l1).unwrap_or(f64::NAN);
    Ok(integrate_panels(h, -r, r, 8, &outer)?.value)
}

/// The rank-one control ∫_{-R}^{R} e^{-2μtλ²} dλ, which converges to √(π/(2μt)).
pub fn divergence_control(mu: f64, t: f64, radius: f64) -> Result<f64> {
    let a = check_divergence_args(mu, t, radius)?;
    ridge(a, 0.0, radius, &QuadOptions::with_rel_tol(1e-13))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub radius: f64,
    pub value: f64,
    /// value / previous value; absent on the first row.
    pub growth_ratio: Option<f64>,
    pub control: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTable {
    pub m: u32,
    pub mu: f64,
    pub t: f64,
    pub rows: Vec<DivergenceRow>,
    /// √(π/(2μt)), the finite limit of the control.
    pub control_limit: f64,
}

pub fn divergence_table(m: u32, mu: f64, t: f64, radii: &[f64]) -> Result<DivergenceTable> {
    if radii.is_empty() {
        return domain("divergence_table", "no radii given");
    }
    let values = radii
        .par_iter()
        .map(|&r| Ok((divergence_m(m, mu, t, r)?, divergence_control(mu, t, r)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, &(value, control))| DivergenceRow {
            radius: radii[i],
            value,
            growth_ratio: (i > 0).then(|| value / values[i - 1].0),
            control,
        })
        .collect();
    let control_limit = (std::f64::consts::PI / (2.0 * mu * t)).sqrt();
    Ok(DivergenceTable { m, mu, t, rows, control_limit })
}
