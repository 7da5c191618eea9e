//! Independent verification routes: a time-discretized simulation of the
//! tone channel, the exact Kalman covariance recursion for Gaussian tones,
//! and a Monte Carlo oracle for the scalar MMSE.

mod kalman;
mod monte_carlo;
mod path;

pub use kalman::{
    kalman_cmmse, kalman_errors, kalman_extrapolated, kalman_mmse, KalmanErrors, KalmanSetup,
};
pub use monte_carlo::{mc_scalar_mmse, McConfig, McEstimate};
pub use path::{simulate_path, ObservationPath};
