//! Monte Carlo MMSE against quadrature for every built-in source.

use nongauss::verify::{mc_scalar_mmse, McConfig};
use nongauss::{Result, ScalarChannel, ScalarSource, Snr};

fn main() -> Result<()> {
    let cfg = McConfig::new(200_000, 7, true)?;
    for src in ScalarSource::builtins() {
        for q in [0.5, 2.0] {
            let est = mc_scalar_mmse(&src, q, &cfg)?;
            let quad = ScalarChannel::new(src.clone(), Snr::new(q)?).mmse()?;
            println!(
                "{src:<12} q={q:<4} mc {:.5} ± {:.5}  quadrature {quad:.5}  z = {:+.2}",
                est.mean,
                est.std_error,
                (est.mean - quad) / est.std_error
            );
        }
    }
    Ok(())
}
