//! MMSE of the scalar channel against its cubic low-SNR expansion and the
//! Gaussian bound, with the output's non-Gaussianity.

use nongauss::scalar::{gaussian_mmse, mmse_taylor3};
use nongauss::{Result, ScalarChannel, ScalarSource, Snr};

fn main() -> Result<()> {
    let src: ScalarSource = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("rademacher")
        .parse()?;
    println!(
        "source {src}: EX^3 = {}, EX^4 = {}",
        src.third_moment(),
        src.fourth_moment()
    );
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>12}",
        "q", "mmse", "taylor3", "1/(1+q)", "D(q)"
    );
    for q in [0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let ch = ScalarChannel::new(src.clone(), Snr::new(q)?);
        println!(
            "{q:>8} {:>12.8} {:>12.8} {:>12.8} {:>12.4e}",
            ch.mmse()?,
            mmse_taylor3(&src, q),
            gaussian_mmse(q),
            ch.nongaussianity()?.value
        );
    }
    Ok(())
}
