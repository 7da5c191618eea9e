//! Numerical laboratory for the non-Gaussianity of Gaussian channel outputs
//! and its links to causal and non-causal MMSE.
//!
//! * [`scalar`]: `Y = W + √q X`, its MMSE, non-Gaussianity `D(q)` and the
//!   low-SNR moment formulas.
//! * [`tone`]: the N-tone continuous-time channel, exact CMMSE/MMSE in
//!   terms of the per-tone divergence, Gaussian closed forms and `1/N`
//!   asymptotics.
//! * [`verify`]: independent routes (Kalman covariance recursion, Monte
//!   Carlo conditional-mean oracle, path simulation).
//! * [`cli`]: parameter sweeps emitting CSV/JSON tables.

// `!(x > 0.0)` style guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod numerics;
pub mod scalar;
pub mod sources;
pub mod tone;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{DerivativeConfig, DerivativeEstimate, QuadratureConfig};
pub use scalar::{ScalarChannel, Snr};
pub use sources::{AmplitudeLaw, ScalarSource};
pub use tone::ToneModel;
