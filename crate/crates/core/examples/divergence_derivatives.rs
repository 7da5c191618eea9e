//! Derivatives of `D(q)` at zero by Richardson-extrapolated forward
//! differences, next to the fourth-order moment formula.
//!
//! The skewed exponential shows a nonzero third derivative and a fourth
//! derivative that disagrees with the moment formula.

use nongauss::scalar::{
    d4_at_zero_from_moments, divergence_derivative_config, divergence_derivatives_at_zero,
};
use nongauss::{Result, ScalarSource};

fn main() -> Result<()> {
    let cfg = divergence_derivative_config();
    for src in ScalarSource::builtins() {
        let est = divergence_derivatives_at_zero(&src, &[1, 2, 3, 4], &cfg)?;
        println!("{src}");
        for d in est {
            println!(
                "  D^({}) (0) = {:>13.6e}  ± {:.1e}",
                d.order, d.value, d.error_estimate
            );
        }
        println!(
            "  moment formula for D^(4)(0): {}",
            d4_at_zero_from_moments(&src)
        );
    }
    Ok(())
}
