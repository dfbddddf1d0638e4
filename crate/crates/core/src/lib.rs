//! Numerics for fractional diffusion with cyclic long-range dependent
//! random initial conditions.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Gamma, Bessel `J`/`I`/`K`, Mittag-Leffler, `erfc`, Hermite
//!   polynomials and the isotropic kernels `Y_d`.
//! * [`quad`]: adaptive Gauss-Kronrod integration on finite intervals and on
//!   the real line, with power-law singularity removal and tail mapping.
//! * [`spectral`]: the covariance `cos(wx)/(1+x^2)^{κ/2}`, its spectral density in
//!   the Bessel and power-law forms, the Green function transform and every
//!   covariance of the solution and limit fields.
//! * [`fields`]: seeded spectral-sum simulation of the initial condition, the
//!   solution, the rescaled solution and the Gaussian limit fields.
//! * [`limits`]: the mean-square error integrals that drive the multiscaling
//!   limits, and the divergent variance integral for Hermite rank `m > 1`.
//! * [`verify`]: a deterministic self-check suite.

// `!(x > 0.0)` is how arguments are checked so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod limits;
pub mod quad;
pub mod specfun;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{estimate_cov, Ensemble, Estimate, FieldKind, FieldRealization, FieldSpec, SpectralGrid, TailCheck};
pub use limits::{ConvergenceReport, DivergenceRow, DivergenceTable, Equation};
pub use quad::{Envelope, QuadOptions, QuadratureResult};
pub use spectral::{FrbeParams, SpectralModel};
pub use verify::{VerifyOptions, VerifyReport};
