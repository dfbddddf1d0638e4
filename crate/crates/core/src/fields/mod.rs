//! Monte Carlo simulation of the initial condition, the solution fields, their
//! rescalings and the Gaussian limit fields.
//!
//! Every field is a folded real spectral sum over the nodes λ_j = jΔλ, j = 0..N,
//!
//! ```text
//! X(x) = Σ_j a_j (ξ_j cos(λ_j x) + ξ'_j sin(λ_j x)),
//! ```
//!
//! with independent standard normals ξ, ξ' and a_j² the spectral mass of the
//! field in the cell around λ_j, doubled to account for the mirrored node -λ_j.
//! The cell masses are integrated exactly, which also handles cells that
//! contain the singular frequencies ±w, so the simulated variance equals the
//! spectral mass inside the grid.
//! Realizations draw from ChaCha8 streams keyed by [`member_seed`], so
//! ensembles do not depend on scheduling or on the number of worker threads.

mod grid;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{Envelope, Node, Problem, QuadOptions};
use crate::specfun::erfc;
use crate::spectral::{limit_transfer, transfer, FrbeParams, Kernel, SpectralModel};

pub use grid::{SpectralGrid, TailCheck, MAX_HALF_COUNT, TAIL_TOLERANCE};
pub use stats::{estimate_cov, estimate_mean, moments, sample_cov, Estimate, Moments};

/// Basis tables larger than this many entries are evaluated on the fly.
const BASIS_TABLE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Eta,
    SolutionHeat,
    SolutionFrbe,
    Rescaled,
    LimitHeat,
    LimitFrbe,
}

impl FieldKind {
    pub fn is_limit(self) -> bool {
        matches!(self, FieldKind::LimitHeat | FieldKind::LimitFrbe)
    }
}

/// Which field to simulate, with everything but the grid and the sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "snake_case")]
pub enum FieldSpec {
    Eta {
        model: SpectralModel,
    },
    Solution {
        model: SpectralModel,
        params: FrbeParams,
        t: f64,
    },
    /// ε^{-β/(2α)} u(t/ε, x/ε^{β/α}).
    Rescaled {
        model: SpectralModel,
        params: FrbeParams,
        eps: f64,
        t: f64,
    },
    LimitHeat {
        model: SpectralModel,
        mu: f64,
        t: f64,
    },
    LimitFrbe {
        model: SpectralModel,
        params: FrbeParams,
        t: f64,
    },
}

impl FieldSpec {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldSpec::Eta { .. } => FieldKind::Eta,
            FieldSpec::Solution { params, .. } if is_heat(params) => FieldKind::SolutionHeat,
            FieldSpec::Solution { .. } => FieldKind::SolutionFrbe,
            FieldSpec::Rescaled { .. } => FieldKind::Rescaled,
            FieldSpec::LimitHeat { .. } => FieldKind::LimitHeat,
            FieldSpec::LimitFrbe { .. } => FieldKind::LimitFrbe,
        }
    }

    pub fn time(&self) -> f64 {
        match *self {
            FieldSpec::Eta { .. } => 0.0,
            FieldSpec::Solution { t, .. }
            | FieldSpec::Rescaled { t, .. }
            | FieldSpec::LimitHeat { t, .. }
            | FieldSpec::LimitFrbe { t, .. } => t,
        }
    }

    pub fn model(&self) -> &SpectralModel {
        match self {
            FieldSpec::Eta { model }
            | FieldSpec::Solution { model, .. }
            | FieldSpec::Rescaled { model, .. }
            | FieldSpec::LimitHeat { model, .. }
            | FieldSpec::LimitFrbe { model, .. } => model,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model().validate()?;
        match *self {
            FieldSpec::Eta { .. } => Ok(()),
            FieldSpec::Solution { params, t, .. } => {
                params.validate()?;
                check_time(t, false)
            }
            FieldSpec::Rescaled { params, eps, t, .. } => {
                params.validate()?;
                if !(params.alpha > 0.0) {
                    return domain("simulate_rescaled", "rescaling needs alpha > 0");
                }
                if !(eps > 0.0 && eps <= 1.0) {
                    return domain("simulate_rescaled", format!("eps must lie in (0, 1], got {eps}"));
                }
                check_time(t, true)
            }
            FieldSpec::LimitHeat { mu, t, .. } => {
                FrbeParams::heat(mu).validate()?;
                check_time(t, true)
            }
            FieldSpec::LimitFrbe { params, t, .. } => {
                params.validate_limit()?;
                check_time(t, true)
            }
        }
    }

    /// The unscaled solution field and the (amplitude, space) scaling of a rescaled spec.
    fn unscaled(&self) -> (FieldSpec, f64, f64) {
        match *self {
            FieldSpec::Rescaled { model, params, eps, t } => {
                let s = eps.powf(params.beta / params.alpha);
                let gain = eps.powf(-params.beta / (2.0 * params.alpha));
                (FieldSpec::Solution { model, params, t: t / eps }, gain, s)
            }
            other => (other, 1.0, 1.0),
        }
    }

    /// Fraction of the field's spectral mass that lies beyond the grid.
    pub fn tail_check(&self, grid: &SpectralGrid) -> Result<TailCheck> {
        self.validate()?;
        grid.validate()?;
        let (base, _, s) = self.unscaled();
        let cutoff = s * grid.lambda_max();
        let fraction = match base {
            FieldSpec::Eta { model } => solution_mass(&model, &FrbeParams::heat(1.0), 0.0, cutoff)?,
            FieldSpec::Solution { model, params, t } => {
                solution_mass(&model, &params, t, cutoff)? / solution_mass(&model, &params, t, 0.0)?
            }
            FieldSpec::LimitHeat { mu, t, .. } => erfc(cutoff * (2.0 * mu * t).sqrt()),
            FieldSpec::LimitFrbe { params, t, .. } => {
                limit_frbe_mass(&params, t, cutoff)? / limit_frbe_mass(&params, t, 0.0)?
            }
            FieldSpec::Rescaled { .. } => unreachable!("unscaled() never returns a rescaled spec"),
        };
        Ok(TailCheck::new(grid.lambda_max(), fraction.max(0.0)))
    }

    /// Exact covariance Σ_j a_j² cos(λ_j δ) of the field simulated on `grid`
    /// at lag δ, in the field's own space variable.
    pub fn discrete_covariance(&self, grid: &SpectralGrid, lag: f64) -> Result<f64> {
        let sampler = self.sampler(grid)?;
        let sum: f64 =
            sampler.nodes.iter().zip(&sampler.amps).map(|(l, a)| a * a * (l * lag * sampler.x_scale).cos()).sum();
        Ok(sampler.gain * sampler.gain * sum)
    }

    /// Node amplitudes of the folded spectral sum.
    fn sampler(&self, grid: &SpectralGrid) -> Result<Sampler> {
        self.validate()?;
        grid.validate()?;
        let (base, gain, s) = self.unscaled();
        let grid = grid.scaled(s);
        let nodes = grid.folded_nodes();
        let masses = match base {
            FieldSpec::Eta { model } => cell_masses(&grid, Some(&Kernel::new(&model)?), |_| 1.0)?,
            FieldSpec::Solution { model, params, t } => {
                cell_masses(&grid, Some(&Kernel::new(&model)?), |l| transfer(&params, t, l))?
            }
            FieldSpec::LimitHeat { model, mu, t } => {
                let p = Kernel::new(&model)?.prefactor();
                cell_masses(&grid, None, |l| (-mu * t * l * l).exp())?.into_iter().map(|m| p * m).collect()
            }
            FieldSpec::LimitFrbe { model, params, t } => {
                let p = Kernel::new(&model)?.prefactor();
                cell_masses(&grid, None, |l| limit_transfer(&params, t, l))?.into_iter().map(|m| p * m).collect()
            }
            FieldSpec::Rescaled { .. } => unreachable!("unscaled() never returns a rescaled spec"),
        };
        let amps: Vec<f64> = masses.into_iter().map(f64::sqrt).collect();
        if let Some(j) = amps.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite { at: nodes[j] });
        }
        Ok(Sampler { spec: *self, nodes, amps, gain, x_scale: 1.0 / s })
    }
}

fn is_heat(p: &FrbeParams) -> bool {
    p.alpha == 2.0 && p.beta == 1.0 && p.gamma_exp == 0.0
}

fn check_time(t: f64, strictly_positive: bool) -> Result<()> {
    let ok = if strictly_positive { t > 0.0 } else { t >= 0.0 };
    if !ok || !t.is_finite() {
        let need = if strictly_positive { "positive" } else { "non-negative" };
        return domain("fields", format!("time must be {need} and finite, got {t}"));
    }
    Ok(())
}

/// Doubled cell masses 2∫_{cell_j} g(λ)² f(λ) dλ of the folded nodes, with
/// cell_j = [λ_j - Δλ/2, λ_j + Δλ/2] clipped to [0, NΔλ]. Without a kernel f
/// is replaced by 1.
fn cell_masses<G>(grid: &SpectralGrid, kernel: Option<&Kernel>, g: G) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64 + Sync,
{
    let (h, top) = (grid.delta, grid.lambda_max());
    let opts = QuadOptions::with_rel_tol(1e-11);
    (0..=grid.n)
        .into_par_iter()
        .map(|j| {
            let l = j as f64 * h;
            let (a, b) = ((l - 0.5 * h).max(0.0), (l + 0.5 * h).min(top));
            let r = match kernel {
                Some(k) => Problem::interval(a, b).singular(&[-k.omega, k.omega], k.kappa).integrate(
                    |n: Node| {
                        let g = g(n.x);
                        if g == 0.0 {
                            0.0
                        } else {
                            g * g * k.density(n)
                        }
                    },
                    &opts,
                )?,
                None => Problem::interval(a, b).integrate(|n: Node| g(n.x).powi(2), &opts)?,
            };
            Ok(2.0 * r.value)
        })
        .collect()
}

/// ∫_{|λ| > cutoff} Ĝ(t,λ)² f(λ) dλ; the whole line when cutoff = 0.
fn solution_mass(model: &SpectralModel, params: &FrbeParams, t: f64, cutoff: f64) -> Result<f64> {
    let k = Kernel::new(model)?;
    let w = k.omega;
    let mut reach = w + 40.0;
    let order = params.alpha + params.gamma_exp;
    if params.beta == 1.0 && t > 0.0 && order > 0.0 {
        reach = reach.min((40.0 / (2.0 * params.mu * t)).powf(1.0 / order));
    }
    if cutoff >= reach.max(w + 1.0) {
        return Ok(0.0);
    }
    let mut breaks = vec![0.0];
    if cutoff > 0.0 {
        breaks.extend([-cutoff, cutoff]);
    }
    let r = Problem::line(Envelope::Compact { reach }).singular(&[-w, w], model.kappa).breaks(&breaks).integrate(
        |n: Node| {
            if n.x.abs() < cutoff {
                return 0.0;
            }
            let g = transfer(params, t, n.x);
            if g == 0.0 {
                0.0
            } else {
                g * g * k.density(n)
            }
        },
        &QuadOptions::with_rel_tol(1e-10),
    )?;
    Ok(r.value)
}

/// ∫_{|λ| > cutoff} E_β(-μt^β|λ|^α)² dλ.
fn limit_frbe_mass(params: &FrbeParams, t: f64, cutoff: f64) -> Result<f64> {
    let FrbeParams { alpha, beta, mu, .. } = *params;
    let problem = if beta == 1.0 {
        Problem::line(Envelope::Stretched { rate: 2.0 * mu * t, power: alpha })
    } else {
        Problem::line(Envelope::Algebraic { scale: (mu * t.powf(beta)).powf(-1.0 / alpha), power: 2.0 * alpha })
    };
    let mut breaks = vec![0.0];
    if cutoff > 0.0 {
        breaks.extend([-cutoff, cutoff]);
    }
    let r = problem.breaks(&breaks).integrate(
        |n: Node| {
            if n.x.abs() < cutoff {
                0.0
            } else {
                limit_transfer(params, t, n.x).powi(2)
            }
        },
        &QuadOptions::with_rel_tol(1e-10),
    )?;
    Ok(r.value)
}

/// Seed of ensemble member `index`: a SplitMix64 step, so members of one
/// ensemble never share a seed.
pub fn member_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Sampler {
    spec: FieldSpec,
    nodes: Vec<f64>,
    amps: Vec<f64>,
    gain: f64,
    x_scale: f64,
}

/// cos and sin of λ_j x for every sample point, row-major by point.
struct Basis {
    table: Option<(Vec<f64>, Vec<f64>)>,
}

impl Sampler {
    fn phase(&self, x: f64, j: usize) -> f64 {
        self.nodes[j] * (x * self.x_scale)
    }

    fn basis(&self, xs: &[f64]) -> Basis {
        let m = self.nodes.len();
        if m.saturating_mul(xs.len()) > BASIS_TABLE_LIMIT {
            return Basis { table: None };
        }
        let mut cos = Vec::with_capacity(m * xs.len());
        let mut sin = Vec::with_capacity(m * xs.len());
        for &x in xs {
            for j in 0..m {
                let (s, c) = self.phase(x, j).sin_cos();
                cos.push(c);
                sin.push(s);
            }
        }
        Basis { table: Some((cos, sin)) }
    }

    fn realize(&self, basis: &Basis, xs: &[f64], seed: u64) -> FieldRealization {
        let m = self.nodes.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for &amp in &self.amps {
            let xi: f64 = rng.sample(StandardNormal);
            let xi2: f64 = rng.sample(StandardNormal);
            a.push(amp * xi);
            b.push(amp * xi2);
        }
        let values = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let mut sum = 0.0;
                match &basis.table {
                    Some((cos, sin)) => {
                        let (cos, sin) = (&cos[k * m..(k + 1) * m], &sin[k * m..(k + 1) * m]);
                        for j in 0..m {
                            sum += a[j] * cos[j] + b[j] * sin[j];
                        }
                    }
                    None => {
                        for j in 0..m {
                            let (s, c) = self.phase(x, j).sin_cos();
                            sum += a[j] * c + b[j] * s;
                        }
                    }
                }
                self.gain * sum
            })
            .collect();
        FieldRealization { t: self.spec.time(), xs: xs.to_vec(), values, seed, kind: self.spec.kind() }
    }
}

/// One sampled path on a set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    pub t: f64,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub kind: FieldKind,
}

impl FieldRealization {
    pub fn validate(&self) -> Result<()> {
        if self.xs.len() != self.values.len() {
            return domain("FieldRealization", "values and xs differ in length");
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { at: self.xs[i] });
        }
        check_time(self.t, self.kind.is_limit())
    }
}

/// One realization of `spec` on `grid` as given (no widening).
pub fn simulate(spec: &FieldSpec, grid: &SpectralGrid, xs: &[f64], seed: u64) -> Result<FieldRealization> {
    let sampler = spec.sampler(grid)?;
    Ok(sampler.realize(&sampler.basis(xs), xs, seed))
}

/// η(x), the stationary initial condition with covariance r.
pub fn simulate_eta(model: &SpectralModel, grid: &SpectralGrid, xs: &[f64], seed: u64) -> Result<FieldRealization> {
    simulate(&FieldSpec::Eta { model: *model }, grid, xs, seed)
}

/// u(t, x); at t = 0 this reproduces `simulate_eta` with the same seed.
pub fn simulate_solution(
    model: &SpectralModel,
    params: &FrbeParams,
    grid: &SpectralGrid,
    t: f64,
    xs: &[f64],
    seed: u64,
) -> Result<FieldRealization> {
    simulate(&FieldSpec::Solution { model: *model, params: *params, t }, grid, xs, seed)
}

/// U_ε(t, x) = ε^{-β/(2α)} u(t/ε, x/ε^{β/α}), sampled on `grid` scaled by ε^{β/α}.
#[allow(clippy::too_many_arguments)]
pub fn simulate_rescaled(
    model: &SpectralModel,
    params: &FrbeParams,
    grid: &SpectralGrid,
    eps: f64,
    t: f64,
    xs: &[f64],
    seed: u64,
) -> Result<FieldRealization> {
    simulate(&FieldSpec::Rescaled { model: *model, params: *params, eps, t }, grid, xs, seed)
}

/// The heat limit field U_0(t, x).
pub fn simulate_limit_heat(
    model: &SpectralModel,
    mu: f64,
    grid: &SpectralGrid,
    t: f64,
    xs: &[f64],
    seed: u64,
) -> Result<FieldRealization> {
    simulate(&FieldSpec::LimitHeat { model: *model, mu, t }, grid, xs, seed)
}

/// The fractional limit field with transfer function E_β(-μt^β|λ|^α), α > 1.
pub fn simulate_limit_frbe(
    model: &SpectralModel,
    params: &FrbeParams,
    grid: &SpectralGrid,
    t: f64,
    xs: &[f64],
    seed: u64,
) -> Result<FieldRealization> {
    simulate(&FieldSpec::LimitFrbe { model: *model, params: *params, t }, grid, xs, seed)
}

/// Ĝ(t, ω) cos(ωx): the solution started from the single mode cos(ωy).
pub fn propagate_mode(params: &FrbeParams, t: f64, freq: f64, x: f64) -> Result<f64> {
    params.validate()?;
    check_time(t, false)?;
    Ok(transfer(params, t, freq) * (freq * x).cos())
}

/// Independent realizations sharing t and xs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub realizations: Vec<FieldRealization>,
    pub base_seed: u64,
    /// The grid actually used, after any widening.
    pub grid: SpectralGrid,
    pub tail: TailCheck,
}

impl Ensemble {
    /// `count` realizations; the grid is first widened until the tail check passes.
    pub fn simulate(spec: &FieldSpec, grid: &SpectralGrid, xs: &[f64], base_seed: u64, count: usize) -> Result<Self> {
        let (grid, _) = grid.widen_until(|g| spec.tail_check(g))?;
        Self::simulate_on(spec, &grid, xs, base_seed, count)
    }

    /// `count` realizations on `grid` as given; the tail check is recorded only.
    pub fn simulate_on(
        spec: &FieldSpec,
        grid: &SpectralGrid,
        xs: &[f64],
        base_seed: u64,
        count: usize,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::Degenerate("an ensemble needs at least one realization".into()));
        }
        let tail = spec.tail_check(grid)?;
        let sampler = spec.sampler(grid)?;
        let basis = sampler.basis(xs);
        let realizations =
            (0..count as u64).into_par_iter().map(|i| sampler.realize(&basis, xs, member_seed(base_seed, i))).collect();
        Ok(Self { realizations, base_seed, grid: *grid, tail })
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        self.realizations.first().map_or(&[], |r| &r.xs)
    }

    /// Samples at point `i` across the ensemble.
    pub fn column(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.xs().len() {
            return domain("Ensemble", format!("point index {i} out of range"));
        }
        Ok(self.realizations.iter().map(|r| r.values[i]).collect())
    }
}
