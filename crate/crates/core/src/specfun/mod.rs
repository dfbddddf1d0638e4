//! Special functions on the real line.

mod bessel;
mod erf;
mod gamma;
mod kernels;
mod mittag_leffler;

pub use bessel::{bessel_i, bessel_j, bessel_k, bessel_k_reflection, I_SWITCH, K_SWITCH};
pub use erf::{erfc, erfcx};
pub use gamma::gamma_fn;
pub use kernels::{hermite, y_d};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_general, ml_bounds, MLBounds};

pub(crate) use gamma::gamma;
pub(crate) use mittag_leffler::ml_neg;
