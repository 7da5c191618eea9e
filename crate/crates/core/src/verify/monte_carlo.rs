use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::ScalarChannel;
use crate::sources::{Law, ScalarSource};
use crate::Snr;

const CHUNK: usize = 1 << 16;

/// Monte Carlo settings. With `stratified`, discrete laws allocate samples
/// to atoms in proportion to their probabilities; other laws ignore it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    samples: usize,
    seed: u64,
    stratified: bool,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64, stratified: bool) -> Result<Self> {
        if samples < 10_000 {
            return Err(Error::invalid(format!(
                "need at least 10^4 samples, got {samples}"
            )));
        }
        Ok(Self {
            samples,
            seed,
            stratified,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stratified(&self) -> bool {
        self.stratified
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Running mean and centred sum of squares.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn variance(&self) -> f64 {
        if self.n > 1.0 {
            self.m2 / (self.n - 1.0)
        } else {
            0.0
        }
    }
}

/// Squared errors over `count` draws, in chunks with one ChaCha stream per
/// chunk; chunk results are merged in index order so the output does not
/// depend on the thread count.
fn run<F>(count: usize, seed: u64, stream_base: u64, draw_x: F, ch: &ScalarChannel) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let sq = ch.q().sqrt();
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                let x = draw_x(&mut rng);
                let w: f64 = StandardNormal.sample(&mut rng);
                let e = x - ch.conditional_mean(w + sq * x);
                m.push(e * e);
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Monte Carlo average of `(X - E[X|Y])²` over paired draws of `X` and `W`.
pub fn mc_scalar_mmse(src: &ScalarSource, q: f64, cfg: &McConfig) -> Result<McEstimate> {
    let ch = ScalarChannel::new(src.clone(), Snr::new(q)?);
    if let (true, Law::Atoms { values, probs }) = (cfg.stratified, src.law()) {
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut used = 0;
        for (i, (&x, &p)) in values.iter().zip(probs).enumerate() {
            let n_i = ((p * cfg.samples as f64).round() as usize).max(2);
            let m = run(n_i, cfg.seed, (i as u64) << 32, |_| x, &ch);
            mean += p * m.mean;
            var += p * p * m.variance() / m.n;
            used += n_i;
        }
        return Ok(McEstimate {
            mean,
            std_error: var.sqrt(),
            samples: used,
        });
    }
    let m = run(cfg.samples, cfg.seed, 0, |rng| src.sample_one(rng), &ch);
    Ok(McEstimate {
        mean: m.mean,
        std_error: (m.variance() / m.n).sqrt(),
        samples: cfg.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agrees(est: &McEstimate, truth: f64) -> bool {
        (est.mean - truth).abs() <= 3.0 * est.std_error
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(9_999, 1, false).is_err());
        assert!(McConfig::new(10_000, 1, false).is_ok());
    }

    #[test]
    fn gaussian_closed_form() {
        let cfg = McConfig::new(200_000, 11, false).unwrap();
        let est = mc_scalar_mmse(&ScalarSource::gaussian(), 1.0, &cfg).unwrap();
        assert!(agrees(&est, 0.5), "{est:?}");
    }

    #[test]
    fn zero_snr_is_one() {
        let cfg = McConfig::new(100_000, 2, false).unwrap();
        let est = mc_scalar_mmse(&ScalarSource::uniform(), 0.0, &cfg).unwrap();
        assert!(agrees(&est, 1.0), "{est:?}");
    }

    #[test]
    fn rademacher_matches_quadrature() {
        let truth = 0.908_659_398_795_122_1;
        for stratified in [false, true] {
            let cfg = McConfig::new(200_000, 5, stratified).unwrap();
            let est = mc_scalar_mmse(&ScalarSource::rademacher(), 0.1, &cfg).unwrap();
            assert!(agrees(&est, truth), "{est:?}");
        }
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let cfg = McConfig::new(150_000, 42, false).unwrap();
        let src = ScalarSource::shifted_exponential();
        let a = mc_scalar_mmse(&src, 1.0, &cfg).unwrap();
        let b = mc_scalar_mmse(&src, 1.0, &cfg).unwrap();
        assert_eq!(a, b);
        let c = mc_scalar_mmse(&src, 1.0, &McConfig::new(150_000, 43, false).unwrap()).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn stratification_reduces_error() {
        let src = ScalarSource::rademacher();
        let plain = mc_scalar_mmse(&src, 0.5, &McConfig::new(100_000, 7, false).unwrap()).unwrap();
        let strat = mc_scalar_mmse(&src, 0.5, &McConfig::new(100_000, 7, true).unwrap()).unwrap();
        assert!(
            strat.std_error <= plain.std_error * 1.05,
            "{plain:?} {strat:?}"
        );
    }
}
