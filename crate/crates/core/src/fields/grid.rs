use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Tail fraction above which a grid is widened.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Largest half-count `adapted_to` will grow a grid to.
pub const MAX_HALF_COUNT: usize = 1 << 17;

/// Equispaced frequency grid λ_j = j·Δλ, j = -N..N-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub delta: f64,
    pub n: usize,
}

/// Outcome of the tail-mass check of a grid against a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub lambda_max: f64,
    /// Fraction of the spectral mass of the field beyond ±lambda_max.
    pub tail_fraction: f64,
    pub ok: bool,
}

impl TailCheck {
    pub(crate) fn new(lambda_max: f64, tail_fraction: f64) -> Self {
        Self { lambda_max, tail_fraction, ok: tail_fraction < TAIL_TOLERANCE }
    }
}

impl SpectralGrid {
    pub fn new(delta: f64, n: usize) -> Result<Self> {
        let g = Self { delta, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return domain("SpectralGrid", format!("delta must be positive and finite, got {}", self.delta));
        }
        if self.n == 0 {
            return domain("SpectralGrid", "the half-count n must be positive");
        }
        Ok(())
    }

    pub fn lambda_max(&self) -> f64 {
        self.n as f64 * self.delta
    }

    /// The 2N signed nodes -NΔλ, ..., (N-1)Δλ.
    pub fn signed_nodes(&self) -> Vec<f64> {
        let n = self.n as i64;
        (-n..n).map(|j| j as f64 * self.delta).collect()
    }

    /// The N+1 folded nodes 0, Δλ, ..., NΔλ.
    pub fn folded_nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| j as f64 * self.delta).collect()
    }

    /// The same node count with spacing s·Δλ.
    pub fn scaled(&self, s: f64) -> Self {
        Self { delta: self.delta * s, n: self.n }
    }

    /// Doubles N until `tail` reports an acceptable fraction or the cap is hit.
    pub fn widen_until<F>(&self, tail: F) -> Result<(Self, TailCheck)>
    where
        F: Fn(&SpectralGrid) -> Result<TailCheck>,
    {
        self.validate()?;
        let mut grid = *self;
        loop {
            let check = tail(&grid)?;
            if check.ok || grid.n * 2 > MAX_HALF_COUNT {
                return Ok((grid, check));
            }
            grid.n *= 2;
        }
    }
}

impl Default for SpectralGrid {
    fn default() -> Self {
        Self { delta: 0.05, n: 100 }
    }
}
