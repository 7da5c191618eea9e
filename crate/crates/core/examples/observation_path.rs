//! One simulated observation record of the tone channel, with a matched
//! filter recovering the SNR from the drawn signal.

use nongauss::verify::simulate_path;
use nongauss::{AmplitudeLaw, Result, ToneModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let model = ToneModel::new(3, 100.0, AmplitudeLaw::Unit)?;
    let path = simulate_path(&model, 100_000, &mut ChaCha8Rng::seed_from_u64(2024));
    let energy: f64 = path.signal.iter().map(|x| x * x * path.dt).sum();
    let proj: f64 = path
        .increments
        .iter()
        .zip(&path.signal)
        .map(|(d, x)| d * x)
        .sum();
    println!("phases {:?}", path.phases);
    println!("signal energy {energy:.6} (nominal 1)");
    println!(
        "sqrt(q) estimate {:.4} ± {:.4} (true 10)",
        proj / energy,
        1.0 / energy.sqrt()
    );
    Ok(())
}
