use serde::{Deserialize, Serialize};

use super::Ensemble;
use crate::error::{Error, Result};

/// A point estimate with its jackknife standard error, when one exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Sample moments of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample covariance of paired samples with a jackknife standard error.
///
/// The leave-one-out covariances come from running sums of the centred data,
/// so the whole estimate is O(n). With two samples no leave-one-out
/// covariance exists and `std_error` is `None`.
pub fn sample_cov(x: &[f64], y: &[f64]) -> Result<Estimate> {
    if x.len() != y.len() {
        return Err(Error::Degenerate("paired samples differ in length".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("need at least 2 samples, got {n}")));
    }
    let (mx, my) = (mean(x), mean(y));
    let dx: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let dy: Vec<f64> = y.iter().map(|v| v - my).collect();
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    let nf = n as f64;
    let value = sxy / (nf - 1.0);
    if n == 2 {
        return Ok(Estimate { value, std_error: None });
    }
    // the centred sums Σdx, Σdy vanish up to rounding
    let (sx, sy): (f64, f64) = (dx.iter().sum(), dy.iter().sum());
    let loo: Vec<f64> = dx
        .iter()
        .zip(&dy)
        .map(|(a, b)| {
            let (sx, sy) = (sx - a, sy - b);
            (sxy - a * b - sx * sy / (nf - 1.0)) / (nf - 2.0)
        })
        .collect();
    let loo_mean = mean(&loo);
    let spread: f64 = loo.iter().map(|c| (c - loo_mean).powi(2)).sum();
    Ok(Estimate { value, std_error: Some(((nf - 1.0) / nf * spread).sqrt()) })
}

/// Sample covariance between points `i` and `j` of an ensemble.
pub fn estimate_cov(ens: &Ensemble, i: usize, j: usize) -> Result<Estimate> {
    sample_cov(&ens.column(i)?, &ens.column(j)?)
}

/// Sample mean at point `i` with its standard error.
pub fn estimate_mean(ens: &Ensemble, i: usize) -> Result<Estimate> {
    let col = ens.column(i)?;
    if col.len() < 2 {
        return Err(Error::Degenerate("need at least 2 realizations".into()));
    }
    let var = sample_cov(&col, &col)?.value;
    Ok(Estimate { value: mean(&col), std_error: Some((var / col.len() as f64).sqrt()) })
}

pub fn moments(xs: &[f64]) -> Result<Moments> {
    let n = xs.len();
    if n < 4 {
        return Err(Error::Degenerate(format!("need at least 4 samples for moments, got {n}")));
    }
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in xs {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let nf = n as f64;
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    if m2 == 0.0 {
        return Err(Error::Degenerate("constant sample".into()));
    }
    Ok(Moments {
        mean: m,
        variance: m2 * nf / (nf - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}
