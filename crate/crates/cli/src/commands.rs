use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use lrdspde::fields::{estimate_mean, TailCheck};
use lrdspde::spectral::{
    cov_limit_frbe, cov_limit_frbe_unit, cov_limit_heat, cov_solution, f_bessel, f_theta, limit_prefactor, r_cov,
};
use lrdspde::{
    estimate_cov, limits, verify, Ensemble, Error, Estimate, FieldKind, FieldSpec, FrbeParams, SpectralGrid,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CovMode, FieldChoice, Format, RunConfig};
use crate::output::{json, num, write_atomic, Table};

/// Whether every check of the command passed.
pub type Outcome = bool;

fn emit_table(cfg: &RunConfig, table: &Table) -> Result<()> {
    let bytes = match cfg.format {
        Format::Csv => table.render(cfg),
        Format::Json => json(
            cfg,
            TableDoc {
                columns: table.columns.iter().map(|c| c.to_string()).collect(),
                notes: table.notes.clone(),
                rows: table.records(),
            },
        )?,
    };
    write_atomic(&cfg.output_path, &bytes)
}

/// JSON form of a CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDoc {
    pub columns: Vec<String>,
    pub notes: Vec<String>,
    pub rows: Vec<serde_json::Map<String, serde_json::Value>>,
}

pub fn density(cfg: &RunConfig) -> Result<Outcome> {
    let m = &cfg.model;
    let mut table = Table::new(&["lambda", "f_bessel", "f_theta", "r_cov"]);
    let mut skipped = vec![];
    for &l in &cfg.x_values {
        let fb = match f_bessel(m, l) {
            Err(Error::Singular { .. }) => {
                skipped.push(l);
                continue;
            }
            other => other?,
        };
        table.push_numbers(&[l, fb, f_theta(m, l)?, r_cov(m, l)]);
    }
    let listed = if skipped.is_empty() {
        "none".to_string()
    } else {
        skipped.iter().map(|&l| num(l)).collect::<Vec<_>>().join(" ")
    };
    table.notes.push(format!("skipped_singular: {listed}"));
    emit_table(cfg, &table)?;
    Ok(true)
}

fn product<A: Copy + Send + Sync, B: Copy + Send + Sync>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

pub fn covariance(cfg: &RunConfig) -> Result<Outcome> {
    let (m, p) = (&cfg.model, &cfg.params);
    let xs = &cfg.x_values;
    let frbe = |params: &FrbeParams, t: f64, t2: f64, d: f64| -> Result<f64> {
        Ok(if cfg.unit {
            cov_limit_frbe_unit(params, t, t2, d, 0.0)?
        } else {
            cov_limit_frbe(m, params, t, t2, d, 0.0)?
        })
    };
    let (columns, note, rows): (_, String, Vec<Result<[f64; 3]>>) = match cfg.mode {
        CovMode::Heat => {
            // the constant P √π / √μ in front of e^{-δ²/(4μT)} / √T
            let constant = limit_prefactor(m)? * PI.sqrt() / p.mu.sqrt();
            let scale = if cfg.unit { constant } else { 1.0 };
            let rows = product(&cfg.t_values, xs)
                .into_par_iter()
                .map(|(sum, d)| Ok([d, sum, cov_limit_heat(m, p.mu, 0.5 * sum, 0.5 * sum, d, 0.0)? / scale]))
                .collect();
            (["delta", "t_sum", "value"], format!("heat limit, mu = {}", num(p.mu)), rows)
        }
        CovMode::Frbe => {
            p.validate_limit()?;
            let rows =
                product(&cfg.t_values, xs).into_par_iter().map(|(t, d)| Ok([d, t, frbe(p, t, cfg.t2, d)?])).collect();
            (["delta", "t", "value"], format!("frbe limit, t2 = {}", num(cfg.t2)), rows)
        }
        CovMode::AlphaDelta => {
            let params = alpha_sweep(p, &cfg.alpha_values)?;
            let rows = product(&params, xs)
                .into_par_iter()
                .map(|(q, d)| Ok([d, q.alpha, frbe(&q, cfg.t, cfg.t2, d)?]))
                .collect();
            (["delta", "alpha", "value"], format!("frbe limit, t = {}, t2 = {}", num(cfg.t), num(cfg.t2)), rows)
        }
        CovMode::AlphaTime => {
            let params = alpha_sweep(p, &cfg.alpha_values)?;
            let rows = product(&params, &cfg.t_values)
                .into_par_iter()
                .map(|(q, t)| Ok([t, q.alpha, frbe(&q, t, cfg.t2, 0.0)?]))
                .collect();
            (["t", "alpha", "value"], format!("frbe limit at delta = 0, t2 = {}", num(cfg.t2)), rows)
        }
    };
    let mut table = Table::new(&columns);
    table.notes.push(note);
    table.notes.push(format!("unit_constant: {}", cfg.unit));
    for r in rows {
        table.push_numbers(&r?);
    }
    emit_table(cfg, &table)?;
    Ok(true)
}

fn alpha_sweep(p: &FrbeParams, alphas: &[f64]) -> Result<Vec<FrbeParams>> {
    if alphas.is_empty() {
        bail!("no alpha values given");
    }
    alphas
        .iter()
        .map(|&alpha| {
            let q = FrbeParams { alpha, ..*p };
            q.validate_limit()?;
            Ok(q)
        })
        .collect()
}

fn field_spec(cfg: &RunConfig, t: f64) -> FieldSpec {
    let (model, params) = (cfg.model, cfg.params);
    match cfg.field {
        FieldChoice::Eta => FieldSpec::Eta { model },
        FieldChoice::Solution => FieldSpec::Solution { model, params, t },
        FieldChoice::Rescaled => FieldSpec::Rescaled { model, params, eps: cfg.eps, t },
        FieldChoice::LimitHeat => FieldSpec::LimitHeat { model, mu: params.mu, t },
        FieldChoice::LimitFrbe => FieldSpec::LimitFrbe { model, params, t },
    }
}

/// Covariance of the continuous field at lag δ and equal times.
fn exact_cov(spec: &FieldSpec, lag: f64) -> Result<f64> {
    Ok(match *spec {
        FieldSpec::Eta { model } => r_cov(&model, lag),
        FieldSpec::Solution { model, params, t } => cov_solution(&model, &params, t, t, lag, 0.0)?,
        FieldSpec::Rescaled { model, params, eps, t } => {
            let s = eps.powf(params.beta / params.alpha);
            eps.powf(-params.beta / params.alpha) * cov_solution(&model, &params, t / eps, t / eps, lag / s, 0.0)?
        }
        FieldSpec::LimitHeat { model, mu, t } => cov_limit_heat(&model, mu, t, t, lag, 0.0)?,
        FieldSpec::LimitFrbe { model, params, t } => cov_limit_frbe(&model, &params, t, t, lag, 0.0)?,
    })
}

/// Ensemble statistics at one point, paired with the first point of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub x: f64,
    pub mean: Option<Estimate>,
    /// Covariance with the value at the first point; the variance at that point itself.
    pub cov_with_first: Option<Estimate>,
    /// Covariance of the continuous field.
    pub exact: f64,
    /// Covariance of the field as discretized on the grid.
    pub discrete: f64,
    /// (estimate - exact) / standard error.
    pub z_exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSummary {
    pub t: f64,
    pub points: Vec<PointSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub kind: FieldKind,
    pub realizations: usize,
    pub base_seed: u64,
    pub member_seeds: Vec<u64>,
    pub requested_grid: SpectralGrid,
    pub grid: SpectralGrid,
    pub tail: TailCheck,
    pub times: Vec<TimeSummary>,
}

/// The tail check of the worst time on `grid`.
fn worst_tail(cfg: &RunConfig, grid: &SpectralGrid) -> lrdspde::Result<TailCheck> {
    let mut worst: Option<TailCheck> = None;
    for &t in &cfg.t_values {
        let c = field_spec(cfg, t).tail_check(grid)?;
        if worst.map_or(true, |w| c.tail_fraction > w.tail_fraction) {
            worst = Some(c);
        }
    }
    Ok(worst.expect("t_values is not empty"))
}

fn summarize(ens: &Ensemble, spec: &FieldSpec, grid: &SpectralGrid) -> Result<TimeSummary> {
    let xs = ens.xs();
    let x0 = xs[0];
    let points = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let (mean, cov) = if ens.len() >= 2 {
                (Some(estimate_mean(ens, i)?), Some(estimate_cov(ens, 0, i)?))
            } else {
                (None, None)
            };
            let exact = exact_cov(spec, x - x0)?;
            let z_exact = cov.and_then(|c| c.std_error.map(|se| (c.value - exact) / se));
            Ok(PointSummary {
                x,
                mean,
                cov_with_first: cov,
                exact,
                discrete: spec.discrete_covariance(grid, x - x0)?,
                z_exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSummary { t: spec.time(), points })
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let xs = &cfg.x_values;
    let dir = &cfg.output_path;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    // one grid for every time, so each realization is a single field over (t, x)
    let (grid, tail) = cfg.grid.widen_until(|g| worst_tail(cfg, g))?;
    let ensembles = cfg
        .t_values
        .iter()
        .map(|&t| Ensemble::simulate_on(&field_spec(cfg, t), &grid, xs, cfg.seed, cfg.realizations))
        .collect::<lrdspde::Result<Vec<_>>>()?;

    let seeds: Vec<u64> = ensembles[0].realizations.iter().map(|r| r.seed).collect();
    let width = cfg.realizations.to_string().len().max(2);
    for (i, seed) in seeds.iter().enumerate() {
        let mut table = Table::new(&["t", "x", "value"]);
        table.notes.push(format!("member_seed: {seed}"));
        table.notes.push(format!("grid: delta_lambda = {}, n = {}", num(grid.delta), grid.n));
        for ens in &ensembles {
            let r = &ens.realizations[i];
            for (x, v) in r.xs.iter().zip(&r.values) {
                table.push_numbers(&[r.t, *x, *v]);
            }
        }
        write_atomic(&dir.join(format!("realization_{i:0width$}.csv")), &table.render(cfg))?;
    }

    let times = ensembles
        .iter()
        .zip(&cfg.t_values)
        .map(|(ens, &t)| summarize(ens, &field_spec(cfg, t), &grid))
        .collect::<Result<Vec<_>>>()?;
    let summary = SimulationSummary {
        kind: field_spec(cfg, cfg.t_values[0]).kind(),
        realizations: cfg.realizations,
        base_seed: cfg.seed,
        member_seeds: seeds,
        requested_grid: cfg.grid,
        grid,
        tail,
        times,
    };
    write_atomic(&dir.join("summary.json"), &json(cfg, &summary)?)?;
    Ok(tail.ok)
}

pub fn converge(cfg: &RunConfig) -> Result<Outcome> {
    let report = limits::run_convergence(&cfg.model, &cfg.params, cfg.t, &cfg.eps_list)?;
    let bytes = match cfg.format {
        Format::Json => json(cfg, &report)?,
        Format::Csv => {
            let mut table = Table::new(&["eps", "r"]);
            table.notes.push(format!("monotone_decreasing: {}", report.monotone_decreasing));
            table.notes.push(format!("ratio_last_first: {}", num(report.ratio_last_first)));
            for (e, r) in report.eps_list.iter().zip(&report.r_values) {
                table.push_numbers(&[*e, *r]);
            }
            table.render(cfg)
        }
    };
    write_atomic(&cfg.output_path, &bytes)?;
    Ok(report.monotone_decreasing)
}

pub fn diverge(cfg: &RunConfig) -> Result<Outcome> {
    let table = limits::divergence_table(cfg.m, cfg.params.mu, cfg.t, &cfg.radii)?;
    let bytes = match cfg.format {
        Format::Json => json(cfg, &table)?,
        Format::Csv => {
            let mut t = Table::new(&["radius", "value", "growth_ratio", "control"]);
            t.notes.push(format!("m: {}", table.m));
            t.notes.push(format!("control_limit: {}", num(table.control_limit)));
            for r in &table.rows {
                t.rows.push(vec![
                    num(r.radius),
                    num(r.value),
                    r.growth_ratio.map(num).unwrap_or_default(),
                    num(r.control),
                ]);
            }
            t.render(cfg)
        }
    };
    write_atomic(&cfg.output_path, &bytes)?;
    // the variance integral must keep growing with the radius
    Ok(table.rows.windows(2).all(|w| w[1].value > w[0].value) && table.rows.iter().all(|r| r.value.is_finite()))
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let opts = verify::VerifyOptions { seed: cfg.seed, realizations: cfg.realizations };
    let report = verify::run(&opts);
    for c in &report.checks {
        eprintln!("{} {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
    }
    let bytes = match cfg.format {
        Format::Json => json(cfg, &report)?,
        Format::Csv => {
            let mut t = Table::new(&["id", "name", "passed", "detail"]);
            for c in &report.checks {
                t.rows.push(vec![
                    c.id.to_string(),
                    format!("{:?}", c.name),
                    c.passed.to_string(),
                    format!("{:?}", c.detail),
                ]);
            }
            t.render(cfg)
        }
    };
    write_atomic(&cfg.output_path, &bytes)?;
    Ok(report.all_passed)
}
