//! Special functions: log-densities, the modified Bessel function `I₀`, and
//! the KL integrand kernel.

use std::f64::consts::PI;

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Log-density of `N(0, var)` at `y`.
#[inline]
pub fn ln_normal_pdf(y: f64, var: f64) -> f64 {
    -0.5 * y * y / var - 0.5 * var.ln() - LN_SQRT_2PI
}

#[inline]
pub fn normal_pdf(y: f64, var: f64) -> f64 {
    ln_normal_pdf(y, var).exp()
}

const SERIES_LIMIT: f64 = 30.0;

/// `I₀(z) - 1` by its power series; all terms are positive.
fn bessel_i0_minus_one(z: f64) -> f64 {
    let x = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        term *= x / (k * k);
        sum += term;
        if term <= f64::EPSILON * 0.25 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Large-argument asymptotic series of `e^{-z} I₀(z)`; the truncation error
/// is of order `e^{-2z}`.
fn bessel_i0e_asymptotic(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * z);
        if next.abs() >= term.abs() || next.abs() <= f64::EPSILON * 0.25 * sum {
            sum += next;
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * PI * z).sqrt()
}

/// `ln I₀(z)` for `z ≥ 0`, accurate to a few ulps in absolute terms near zero
/// and in relative terms elsewhere.
pub fn ln_bessel_i0(z: f64) -> f64 {
    let z = z.abs();
    if z < SERIES_LIMIT {
        bessel_i0_minus_one(z).ln_1p()
    } else {
        z + bessel_i0e_asymptotic(z).ln()
    }
}

/// Exponentially scaled `e^{-z} I₀(z)`.
pub fn bessel_i0e(z: f64) -> f64 {
    let z = z.abs();
    if z < SERIES_LIMIT {
        (1.0 + bessel_i0_minus_one(z)) * (-z).exp()
    } else {
        bessel_i0e_asymptotic(z)
    }
}

/// `e^u (u - 1) + 1`, i.e. `r ln r - r + 1` at `r = e^u`. Non-negative, with
/// a series branch near zero where the closed form cancels.
pub fn kl_kernel(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // sum_{n>=2} (n-1) u^n / n!
        let mut term = u; // u^n / n! at n = 1
        let mut sum = 0.0;
        for n in 2..30 {
            term *= u / n as f64;
            let c = (n - 1) as f64 * term;
            sum += c;
            if c.abs() <= f64::EPSILON * 0.1 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        u.exp_m1() * (u - 1.0) + u
    }
}
