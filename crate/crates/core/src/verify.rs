//! Deterministic self-check suite.
//!
//! Each check is an independent function returning a [`Check`]. Failures of the
//! underlying numerics are reported as failed checks, never skipped. Reports
//! contain no timings, so identical inputs give identical reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{estimate_cov, estimate_mean, Ensemble, FieldSpec, SpectralGrid};
use crate::limits::{divergence_m, divergence_table, r_frbe, r_heat, run_convergence, DEFAULT_EPS_LIST};
use crate::specfun::{erfc, mittag_leffler, mittag_leffler_general, ml_bounds};
use crate::spectral::{
    cov_limit_frbe, cov_limit_heat, cov_limit_heat_spectral, f_bessel, f_theta, fourier_density, r_cov, FrbeParams,
    SpectralModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub realizations: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 20_190_401, realizations: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub detail: String,
}

impl Check {
    fn new(id: u8, name: &str) -> Self {
        Self { id, name: name.into(), passed: true, metrics: BTreeMap::new(), detail: String::new() }
    }

    fn metric(&mut self, key: impl Into<String>, value: f64) {
        let key = key.into();
        if value.is_finite() {
            self.metrics.insert(key, value);
        } else {
            self.fail(format!("{key} is not finite"));
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, why: String) {
        self.passed = false;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&why);
    }

    /// Runs `body`, turning an error into a failed check.
    fn run(mut self, body: impl FnOnce(&mut Check) -> Result<()>) -> Check {
        if let Err(e) = body(&mut self) {
            self.fail(e.to_string());
        }
        if self.passed && self.detail.is_empty() {
            self.detail = "ok".into();
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Bessel and θ forms of the density agree to 1e-6 relative on [-10, 10].
pub fn check_density_forms() -> Check {
    Check::new(1, "density forms agree").run(|c| {
        let mut worst: f64 = 0.0;
        for kappa in [0.2, 0.5, 0.8] {
            for omega in [0.5, 1.0, 2.0] {
                let m = SpectralModel::new(kappa, omega)?;
                for l in linspace(-10.0, 10.0, 4001) {
                    if (l - omega).abs() < 1e-3 || (l + omega).abs() < 1e-3 {
                        continue;
                    }
                    worst = worst.max(rel(f_theta(&m, l)?, f_bessel(&m, l)?));
                }
            }
        }
        c.metric("max_rel_gap", worst);
        c.require(worst <= 1e-6, || format!("max relative gap {worst:e} > 1e-6"));
        Ok(())
    })
}

/// ∫ cos(λx) f(λ) dλ reproduces r(x) to 1e-4.
pub fn check_bochner() -> Check {
    Check::new(2, "spectral density inverts to the covariance").run(|c| {
        let m = SpectralModel::default();
        let mut worst: f64 = 0.0;
        for x in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
            worst = worst.max((fourier_density(&m, x)? - r_cov(&m, x)).abs());
        }
        c.metric("max_abs_error", worst);
        c.require(worst <= 1e-4, || format!("max error {worst:e} > 1e-4"));
        Ok(())
    })
}

/// Two-sided bounds, E_1 = exp and the general algorithm against e^{u²} erfc(u).
pub fn check_mittag_leffler() -> Check {
    Check::new(3, "Mittag-Leffler bounds and closed forms").run(|c| {
        let grid: Vec<f64> = linspace(-3.0, 2.0, 200).into_iter().map(|e| 10f64.powf(e)).collect();
        let mut violations = 0usize;
        for beta in [0.3, 0.5, 0.8] {
            for &u in &grid {
                let b = ml_bounds(beta, u)?;
                let e = mittag_leffler(beta, -u)?;
                if !(b.lower <= e && e <= b.upper) {
                    violations += 1;
                }
            }
        }
        let mut exp_gap: f64 = 0.0;
        for &u in &grid {
            exp_gap = exp_gap.max((mittag_leffler(1.0, -u)? - (-u).exp()).abs());
        }
        let mut half_gap: f64 = 0.0;
        for u in linspace(0.0, 10.0, 201) {
            let want = (u * u).exp() * erfc(u);
            half_gap = half_gap.max(rel(mittag_leffler_general(0.5, -u)?, want));
        }
        c.metric("bound_violations", violations as f64);
        c.metric("e1_max_abs_error", exp_gap);
        c.metric("e_half_max_rel_error", half_gap);
        c.require(violations == 0, || format!("{violations} bound violations"));
        c.require(exp_gap <= 1e-12, || format!("E_1 error {exp_gap:e} > 1e-12"));
        c.require(half_gap <= 1e-8, || format!("E_1/2 error {half_gap:e} > 1e-8"));
        Ok(())
    })
}

/// The closed-form heat limit covariance equals its spectral integral.
pub fn check_heat_limit_closed_form() -> Check {
    Check::new(4, "heat limit covariance closed form").run(|c| {
        let m = SpectralModel::default();
        let mut worst: f64 = 0.0;
        for delta in linspace(0.0, 5.0, 10) {
            for sum in linspace(0.5, 5.0, 10) {
                let a = cov_limit_heat(&m, 1.0, 0.5 * sum, 0.5 * sum, delta, 0.0)?;
                let b = cov_limit_heat_spectral(&m, 1.0, 0.5 * sum, 0.5 * sum, delta, 0.0)?;
                worst = worst.max(rel(b, a));
            }
        }
        c.metric("max_rel_gap", worst);
        c.require(worst <= 1e-6, || format!("max relative gap {worst:e} > 1e-6"));
        Ok(())
    })
}

/// R(ε) of the heat equation decreases strictly and falls by 100x.
pub fn check_heat_convergence() -> Check {
    Check::new(5, "heat rescaling converges").run(|c| {
        let rep = run_convergence(&SpectralModel::default(), &FrbeParams::heat(1.0), 1.0, &DEFAULT_EPS_LIST)?;
        for (e, r) in rep.eps_list.iter().zip(&rep.r_values) {
            c.metric(format!("r[eps={e:e}]"), *r);
        }
        c.metric("ratio_last_first", rep.ratio_last_first);
        c.require(rep.monotone_decreasing, || "R is not strictly decreasing".into());
        c.require(rep.ratio_last_first < 0.01, || format!("ratio {:e} >= 0.01", rep.ratio_last_first));
        Ok(())
    })
}

/// Reduction to the heat case, fractional convergence and the α > 1 gate.
pub fn check_frbe_convergence() -> Check {
    Check::new(6, "fractional rescaling converges").run(|c| {
        let m = SpectralModel::default();
        let heat_as_frbe = FrbeParams { alpha: 2.0, beta: 1.0, gamma_exp: 0.0, mu: 1.0 };
        let mut worst: f64 = 0.0;
        for &e in &DEFAULT_EPS_LIST {
            worst = worst.max(rel(r_frbe(&m, &heat_as_frbe, 1.0, e)?, r_heat(&m, 1.0, 1.0, e)?));
        }
        c.metric("reduction_max_rel_gap", worst);
        c.require(worst <= 1e-6, || format!("reduction gap {worst:e} > 1e-6"));

        let rep = run_convergence(
            &m,
            &FrbeParams { alpha: 1.5, beta: 0.5, gamma_exp: 0.0, mu: 1.0 },
            1.0,
            &DEFAULT_EPS_LIST,
        )?;
        for (e, r) in rep.eps_list.iter().zip(&rep.r_values) {
            c.metric(format!("r[eps={e:e}]"), *r);
        }
        c.metric("ratio_last_first", rep.ratio_last_first);
        c.require(rep.monotone_decreasing, || "fractional R is not strictly decreasing".into());

        let small = FrbeParams { alpha: 0.9, beta: 0.5, gamma_exp: 0.0, mu: 1.0 };
        c.require(r_frbe(&m, &small, 1.0, 0.1).is_err(), || "alpha = 0.9 was accepted".into());
        Ok(())
    })
}

/// Compares ensemble variance and lag-1 covariance with the exact covariance.
fn mc_compare(c: &mut Check, label: &str, spec: &FieldSpec, exact: [f64; 2], opts: &VerifyOptions) -> Result<()> {
    let ens = Ensemble::simulate(spec, &SpectralGrid::default(), &[0.0, 1.0], opts.seed, opts.realizations)?;
    c.metric(format!("{label}.grid_n"), ens.grid.n as f64);
    c.metric(format!("{label}.tail_fraction"), ens.tail.tail_fraction);
    let mean = estimate_mean(&ens, 0)?;
    let estimates = [estimate_cov(&ens, 0, 0)?, estimate_cov(&ens, 0, 1)?];
    for (name, (est, want)) in ["variance", "lag1"].iter().zip(estimates.iter().zip(exact)) {
        let se = est.std_error.unwrap_or(f64::NAN);
        let z = (est.value - want) / se;
        c.metric(format!("{label}.{name}.estimate"), est.value);
        c.metric(format!("{label}.{name}.exact"), want);
        c.metric(format!("{label}.{name}.z"), z);
        c.require(z.abs() <= 4.0, || format!("{label} {name}: |z| = {:.2} > 4", z.abs()));
    }
    let zm = mean.value / mean.std_error.unwrap_or(f64::NAN);
    c.metric(format!("{label}.mean.z"), zm);
    c.require(zm.abs() <= 4.0, || format!("{label} mean: |z| = {:.2} > 4", zm.abs()));
    Ok(())
}

/// Monte Carlo covariance of both limit fields at t = 1.
pub fn check_monte_carlo(opts: &VerifyOptions) -> Check {
    Check::new(7, "limit field Monte Carlo covariance").run(|c| {
        let m = SpectralModel::default();
        let heat = FieldSpec::LimitHeat { model: m, mu: 1.0, t: 1.0 };
        let exact = [cov_limit_heat(&m, 1.0, 1.0, 1.0, 0.0, 0.0)?, cov_limit_heat(&m, 1.0, 1.0, 1.0, 1.0, 0.0)?];
        mc_compare(c, "heat", &heat, exact, opts)?;
        let p = FrbeParams::default();
        let frbe = FieldSpec::LimitFrbe { model: m, params: p, t: 1.0 };
        let exact = [cov_limit_frbe(&m, &p, 1.0, 1.0, 0.0, 0.0)?, cov_limit_frbe(&m, &p, 1.0, 1.0, 1.0, 0.0)?];
        mc_compare(c, "frbe", &frbe, exact, opts)
    })
}

/// Linear growth of the rank-two variance integral against a convergent control.
pub fn check_divergence() -> Check {
    Check::new(8, "rank-two variance integral diverges").run(|c| {
        let table = divergence_table(2, 1.0, 1.0, &[10.0, 20.0, 40.0, 80.0])?;
        for row in &table.rows {
            c.metric(format!("value[R={}]", row.radius), row.value);
            if let Some(g) = row.growth_ratio {
                c.metric(format!("growth[R={}]", row.radius), g);
                c.require((1.8..=2.2).contains(&g), || {
                    format!("growth ratio {g} at R = {} outside [1.8, 2.2]", row.radius)
                });
            }
        }
        let last = table.rows.last().expect("four radii");
        let gap = (last.control - (PI / 2.0).sqrt()).abs();
        c.metric("control_gap", gap);
        c.require(gap <= 1e-8, || format!("control misses sqrt(pi/2) by {gap:e}"));
        // m = 3 grows quadratically
        let (a, b) = (divergence_m(3, 1.0, 1.0, 5.0)?, divergence_m(3, 1.0, 1.0, 10.0)?);
        c.metric("m3_growth[R=10]", b / a);
        c.require((3.6..=4.4).contains(&(b / a)), || format!("m = 3 growth ratio {} outside [3.6, 4.4]", b / a));
        Ok(())
    })
}

/// Simulation and quadrature outputs do not depend on the worker count.
pub fn check_worker_invariance(opts: &VerifyOptions) -> Check {
    Check::new(9, "outputs independent of worker count").run(|c| {
        let m = SpectralModel::default();
        let specs = [
            FieldSpec::LimitHeat { model: m, mu: 1.0, t: 1.0 },
            FieldSpec::Solution { model: m, params: FrbeParams::default(), t: 0.5 },
        ];
        let xs = [0.0, 0.5, 1.0, 2.0];
        let run = || -> Result<Vec<u64>> {
            let mut bits = Vec::new();
            for spec in &specs {
                let ens = Ensemble::simulate(spec, &SpectralGrid::default(), &xs, opts.seed, 64)?;
                bits.extend(ens.realizations.iter().flat_map(|r| r.values.iter().map(|v| v.to_bits())));
            }
            let rep = run_convergence(&m, &FrbeParams::default(), 1.0, &DEFAULT_EPS_LIST)?;
            bits.extend(rep.r_values.iter().map(|v| v.to_bits()));
            Ok(bits)
        };
        let mut outputs = Vec::new();
        for threads in [1, 3] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| crate::Error::Degenerate(format!("thread pool: {e}")))?;
            outputs.push(pool.install(run)?);
        }
        c.metric("compared_values", outputs[0].len() as f64);
        c.require(outputs[0] == outputs[1], || "outputs differ between 1 and 3 workers".into());
        Ok(())
    })
}

/// Runs every check in order.
pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let checks = vec![
        check_density_forms(),
        check_bochner(),
        check_mittag_leffler(),
        check_heat_limit_closed_form(),
        check_heat_convergence(),
        check_frbe_convergence(),
        check_monte_carlo(opts),
        check_divergence(),
        check_worker_invariance(opts),
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    VerifyReport { options: *opts, checks, all_passed }
}
