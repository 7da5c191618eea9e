//! Exact CMMSE/MMSE of the N-tone channel with unit amplitudes against the
//! Gaussian closed forms and the 1/N asymptotics.

use nongauss::tone::{
    cmmse_asymptotic, cmmse_exact, convergence_rate_fit, gaussian_cmmse, gaussian_mmse_tone,
    mmse_asymptotic, mmse_exact, tone_d2_at_zero, tone_divergence,
};
use nongauss::{AmplitudeLaw, Result, ToneModel};

fn main() -> Result<()> {
    let law = AmplitudeLaw::Unit;
    let q = 1.0;
    let d2 = tone_d2_at_zero(&law)?;
    println!(
        "per-tone D(1) = {:.6e}, D''(0) = {:.2e} ± {:.1e}",
        tone_divergence(&law, 1.0)?,
        d2.value,
        d2.error_estimate
    );
    println!(
        "{:>4} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "N", "cmmse", "gauss", "asympt", "mmse", "gauss", "asympt"
    );
    let ns = [1, 2, 4, 8, 16, 32, 64];
    for n in ns {
        let m = ToneModel::new(n, q, law.clone())?;
        println!(
            "{n:>4} {:>11.8} {:>11.8} {:>11.8} {:>11.8} {:>11.8} {:>11.8}",
            cmmse_exact(&m)?,
            gaussian_cmmse(n, q),
            cmmse_asymptotic(n, q, d2.value),
            mmse_exact(&m)?,
            gaussian_mmse_tone(n, q),
            mmse_asymptotic(n, q, d2.value)
        );
    }
    let fit = convergence_rate_fit(&law, q, &ns[2..], d2.value)?;
    println!(
        "deficit coefficient: CMMSE {:.5} (predicted {:.5})",
        fit.cmmse.coefficient, fit.cmmse.predicted
    );
    println!(
        "                     MMSE  {:.5} (predicted {:.5})",
        fit.mmse.coefficient, fit.mmse.predicted
    );
    Ok(())
}
