//! Riccati recursion for Gaussian tones: first-order convergence in `dt`
//! toward the closed forms, and the Richardson-extrapolated value.

use nongauss::tone::{gaussian_cmmse, gaussian_mmse_tone};
use nongauss::verify::{kalman_errors, kalman_extrapolated, KalmanSetup};
use nongauss::Result;

fn main() -> Result<()> {
    for (n, q) in [(1, 2.0), (2, 2.0), (4, 1.0)] {
        let (tc, tm) = (gaussian_cmmse(n, q), gaussian_mmse_tone(n, q));
        println!("N = {n}, q = {q}: targets cmmse {tc:.10}, mmse {tm:.10}");
        for steps in [256, 512, 1024, 2048] {
            let e = kalman_errors(&KalmanSetup::new(n, q, steps)?)?;
            println!(
                "  steps {steps:>5}  cmmse gap {:>10.3e}  mmse gap {:>10.3e}",
                e.cmmse - tc,
                e.mmse - tm
            );
        }
        let x = kalman_extrapolated(&KalmanSetup::new(n, q, 2048)?)?;
        println!(
            "  extrapolated cmmse gap {:.3e}, mmse gap {:.3e}",
            x.cmmse - tc,
            x.mmse - tm
        );
    }
    Ok(())
}
