//! Quadrature and numerical differentiation kernels shared by the channel
//! models, plus the handful of special functions they need.

mod derivative;
mod quadrature;
pub mod special;

pub use derivative::{
    central_derivative, derivative_at_zero, DerivativeConfig, DerivativeEstimate,
};
pub use quadrature::{
    gauss_legendre_composite, integrate, Domain, GaussLegendre, Integral, QuadratureConfig,
    GAUSS_LEGENDRE_20,
};

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
