use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sources::AmplitudeLaw;
use crate::tone::ToneModel;

/// Euler-discretized observation record of the tone channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPath {
    pub dt: f64,
    pub times: Vec<f64>,
    /// `ξ(t_j)` for the drawn amplitudes and phases.
    pub signal: Vec<f64>,
    /// `Δη_j = √q ξ(t_j) dt + ΔW_j`.
    pub increments: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

fn draw_tone<R: Rng + ?Sized>(law: &AmplitudeLaw, rng: &mut R) -> (f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    match law {
        AmplitudeLaw::Unit => (1.0, rng.random_range(0.0..two_pi)),
        AmplitudeLaw::Random(src) => {
            let a = src.sample_one(rng);
            (a, rng.random_range(0.0..two_pi))
        }
        AmplitudeLaw::GaussianPair => {
            // a cos(ωt + θ) = a_c cos ωt + a_s sin ωt with a_c, a_s ~ N(0, 1/2)
            let ac: f64 = StandardNormal.sample(rng);
            let as_: f64 = StandardNormal.sample(rng);
            let (ac, as_) = (ac * 0.5f64.sqrt(), as_ * 0.5f64.sqrt());
            (ac.hypot(as_), (-as_).atan2(ac))
        }
    }
}

/// Draws one signal from the tone model and simulates `steps` increments of
/// `dη = √q ξ dt + dw` on its horizon.
pub fn simulate_path<R: Rng + ?Sized>(
    model: &ToneModel,
    steps: usize,
    rng: &mut R,
) -> ObservationPath {
    let (amplitudes, phases): (Vec<f64>, Vec<f64>) = (0..model.n())
        .map(|_| draw_tone(model.amplitude(), rng))
        .unzip();
    let dt = model.horizon() / steps as f64;
    let sq = model.q().sqrt();
    let sd = dt.sqrt();
    let times: Vec<f64> = (0..steps).map(|j| j as f64 * dt).collect();
    let signal: Vec<f64> = times
        .iter()
        .map(|&t| model.signal(&amplitudes, &phases, t))
        .collect();
    let increments = signal
        .iter()
        .map(|&x| {
            let z: f64 = StandardNormal.sample(rng);
            sq * x * dt + sd * z
        })
        .collect();
    ObservationPath {
        dt,
        times,
        signal,
        increments,
        amplitudes,
        phases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_snr_is_brownian() {
        let m = ToneModel::new(2, 0.0, AmplitudeLaw::Unit).unwrap();
        let p = simulate_path(&m, 100_000, &mut ChaCha8Rng::seed_from_u64(1));
        let var = p.increments.iter().map(|d| d * d).sum::<f64>() / p.increments.len() as f64;
        // 3σ band for a sample variance of 1e5 normals
        assert!(
            (var / p.dt - 1.0).abs() < 3.0 * (2.0f64 / 1e5).sqrt(),
            "{}",
            var / p.dt
        );
    }

    #[test]
    fn reproducible() {
        let m = ToneModel::new(3, 1.0, AmplitudeLaw::GaussianPair).unwrap();
        let a = simulate_path(&m, 500, &mut ChaCha8Rng::seed_from_u64(9));
        let b = simulate_path(&m, 500, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn increments_center_on_signal() {
        let m = ToneModel::new(1, 4.0, AmplitudeLaw::Unit).unwrap();
        let steps = 200_000;
        let p = simulate_path(&m, steps, &mut ChaCha8Rng::seed_from_u64(3));
        // project the increments on the drawn signal: E = √q ∫ξ² dt = √q
        let proj: f64 = p.increments.iter().zip(&p.signal).map(|(d, x)| d * x).sum();
        let sd = p.signal.iter().map(|x| x * x * p.dt).sum::<f64>().sqrt();
        assert!((proj - 2.0 * sd * sd).abs() < 3.0 * sd, "{proj}");
        assert_eq!(p.amplitudes, vec![1.0]);
    }

    #[test]
    fn gaussian_pair_energy() {
        let m = ToneModel::new(1, 1.0, AmplitudeLaw::GaussianPair).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let mean_a2 = (0..n)
            .map(|_| draw_tone(m.amplitude(), &mut rng).0.powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((mean_a2 - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{mean_a2}");
    }
}
