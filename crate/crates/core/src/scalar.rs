//! The scalar channel `Y = W + √q X` with `W ~ N(0, 1)`: output density,
//! conditional-mean estimator, MMSE, non-Gaussianity `D(q)` of the output and
//! the low-SNR moment formulas.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::numerics::special::{kl_kernel, ln_normal_pdf};
use crate::numerics::{
    central_derivative, derivative_at_zero, integrate, DerivativeConfig, DerivativeEstimate,
    Domain, Integral, QuadratureConfig,
};
use crate::sources::ScalarSource;

/// Signal-to-noise ratio `q ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(f64);

impl Snr {
    pub fn new(q: f64) -> Result<Self> {
        if q >= 0.0 && q.is_finite() {
            Ok(Snr(q))
        } else {
            Err(Error::invalid(format!(
                "snr must be finite and nonnegative, got {q}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct ScalarChannel {
    source: ScalarSource,
    snr: Snr,
    quad: QuadratureConfig,
}

impl ScalarChannel {
    pub fn new(source: ScalarSource, snr: Snr) -> Self {
        Self {
            source,
            snr,
            quad: QuadratureConfig::default(),
        }
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn source(&self) -> &ScalarSource {
        &self.source
    }

    pub fn q(&self) -> f64 {
        self.snr.value()
    }

    /// `ln p_Y(y)`.
    pub fn ln_output_density(&self, y: f64) -> f64 {
        let q = self.q();
        ln_normal_pdf(y, 1.0) + self.source.tilted(q.sqrt() * y, q).ln_z
    }

    /// `p_Y(y) = E φ(y - √q X)`.
    pub fn output_density(&self, y: f64) -> f64 {
        self.ln_output_density(y).exp()
    }

    /// Bayes estimator `E[X | Y = y]`.
    pub fn conditional_mean(&self, y: f64) -> f64 {
        let q = self.q();
        if q == 0.0 {
            return 0.0;
        }
        self.source.tilted(q.sqrt() * y, q).mean
    }

    /// `ln(p_Y / φ_{1+q})` where `φ_{1+q}` is the `N(0, 1+q)` density.
    pub fn log_likelihood_ratio(&self, y: f64) -> f64 {
        let q = self.q();
        0.5 * q.ln_1p() - 0.5 * q * y * y / (1.0 + q) + self.source.tilted(q.sqrt() * y, q).ln_z
    }

    /// Truncated output domain: the hull of the Gaussian envelope of
    /// `N(0, 1+q)` and the shifted source support widened by the noise.
    fn output_domain(&self) -> Domain {
        let q = self.q();
        let tw = self.quad.tail_width;
        let (lo, hi) = self.source.support(tw);
        let sq = q.sqrt();
        let env = tw * (1.0 + q).sqrt();
        Domain::Interval {
            lo: (sq * lo - tw).min(-env),
            hi: (sq * hi + tw).max(env),
        }
    }

    /// MMSE through the second-moment form `1 - ∫ E[X|y]² p_Y(y) dy`.
    pub fn mmse(&self) -> Result<f64> {
        Ok(1.0 - self.estimator_energy()?.value)
    }

    /// `∫ E[X|y]² p_Y(y) dy` with its quadrature error bound.
    pub fn estimator_energy(&self) -> Result<Integral> {
        let q = self.q();
        if q == 0.0 {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                subdivisions: 0,
            });
        }
        let sq = q.sqrt();
        let integrand = |y: f64| {
            let t = self.source.tilted(sq * y, q);
            t.mean * t.mean * (ln_normal_pdf(y, 1.0) + t.ln_z).exp()
        };
        integrate(integrand, self.output_domain(), &self.quad)
    }

    /// Non-Gaussianity `D(q)`: KL divergence of `p_Y` from `N(0, 1+q)`.
    ///
    /// Integrated as `∫ φ_{1+q} (r ln r - r + 1)` with `r = p_Y/φ_{1+q}`,
    /// which equals the KL divergence since both densities have unit mass and
    /// has a non-negative integrand.
    pub fn nongaussianity(&self) -> Result<Integral> {
        let q = self.q();
        if q == 0.0 {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                subdivisions: 0,
            });
        }
        let integrand =
            |y: f64| kl_integrand(ln_normal_pdf(y, 1.0 + q), self.log_likelihood_ratio(y));
        integrate(integrand, self.output_domain(), &self.quad)
    }
}

/// `g (r ln r - r + 1)` from `ln g` and `u = ln r`; the `p ln(p/g)` part is
/// dropped where `p = g r` underflows below `1e-300`.
pub(crate) fn kl_integrand(ln_g: f64, u: f64) -> f64 {
    if u.abs() < 0.1 {
        return ln_g.exp() * kl_kernel(u);
    }
    let g = ln_g.exp();
    let p = (ln_g + u).exp();
    let p_log_ratio = if p < 1e-300 { 0.0 } else { p * u };
    p_log_ratio - p + g
}

/// MMSE of the Gaussian input, `1/(1+q)`.
pub fn gaussian_mmse(q: f64) -> f64 {
    1.0 / (1.0 + q)
}

/// Third-order low-SNR expansion of the MMSE in terms of `EX³`, `EX⁴`:
/// `1 - q + q² - [(EX⁴)² - 6 EX⁴ - 2 (EX³)² + 15] q³ / 6`.
///
/// Matches the quadrature MMSE to `O(q⁴)` for symmetric laws only; for
/// skewed laws the `(EX³)²` terms are incomplete (see the tests).
pub fn mmse_taylor3(src: &ScalarSource, q: f64) -> f64 {
    let (m3, m4) = (src.third_moment(), src.fourth_moment());
    let c3 = (m4 * m4 - 6.0 * m4 - 2.0 * m3 * m3 + 15.0) / 6.0;
    1.0 - q + q * q - c3 * q * q * q
}

/// Fourth derivative of `D` at zero from the moments:
/// `[(EX⁴)² - 6 EX⁴ - 2 (EX³)² + 9] / 2`.
pub fn d4_at_zero_from_moments(src: &ScalarSource) -> f64 {
    let (m3, m4) = (src.third_moment(), src.fourth_moment());
    0.5 * (m4 * m4 - 6.0 * m4 - 2.0 * m3 * m3 + 9.0)
}

/// `q ↦ D(q)` at the tight tolerance needed for high-order differencing,
/// memoized on the exact argument.
fn divergence_fn(src: &ScalarSource) -> impl Fn(f64) -> Result<f64> + '_ {
    let cache: RefCell<Vec<(u64, f64)>> = RefCell::new(Vec::new());
    move |q: f64| {
        if let Some(v) = cache
            .borrow()
            .iter()
            .find(|e| e.0 == q.to_bits())
            .map(|e| e.1)
        {
            return Ok(v);
        }
        let v = ScalarChannel::new(src.clone(), Snr::new(q)?)
            .with_quadrature(derivative_quadrature())
            .nongaussianity()?
            .value;
        cache.borrow_mut().push((q.to_bits(), v));
        Ok(v)
    }
}

/// Quadrature for divergence values fed to finite differences. The
/// log-ratio carries rounding of order `ε q` while `D` is of order `q⁴`, so
/// relative accuracy much below `1e-10` is out of reach at small `q`.
fn derivative_quadrature() -> QuadratureConfig {
    QuadratureConfig::precise()
        .with_rel_tol(1e-10)
        .with_abs_tol(1e-30)
}

/// Step schedule used for derivatives of divergence curves at zero.
pub fn divergence_derivative_config() -> DerivativeConfig {
    DerivativeConfig {
        initial_step: 0.05,
        max_levels: 7,
        abs_tol: 1e-12,
        rel_tol: 1e-7,
        value_rel_noise: 1e-9,
        value_abs_noise: 1e-30,
    }
}

/// One-sided numerical derivatives of `q ↦ D(q)` at zero.
pub fn divergence_derivatives_at_zero(
    src: &ScalarSource,
    orders: &[u32],
    cfg: &DerivativeConfig,
) -> Result<Vec<DerivativeEstimate>> {
    let d = divergence_fn(src);
    orders
        .iter()
        .map(|&k| derivative_at_zero(&d, k, cfg))
        .collect()
}

/// `dD/dq` at an interior point by central differences.
pub fn nongaussianity_slope(src: &ScalarSource, q: f64) -> Result<DerivativeEstimate> {
    if !(q > 0.0) {
        return Err(Error::invalid("slope needs q > 0"));
    }
    let cfg = DerivativeConfig {
        initial_step: (0.1 * q).min(0.05),
        max_levels: 5,
        abs_tol: 1e-13,
        rel_tol: 1e-7,
        value_rel_noise: 1e-10,
        ..divergence_derivative_config()
    };
    central_derivative(divergence_fn(src), q, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn channel(src: ScalarSource, q: f64) -> ScalarChannel {
        ScalarChannel::new(src, Snr::new(q).unwrap()).with_quadrature(QuadratureConfig::precise())
    }

    fn phi(y: f64) -> f64 {
        crate::numerics::special::normal_pdf(y, 1.0)
    }

    #[test]
    fn snr_validation() {
        assert!(Snr::new(-0.1).is_err());
        assert!(Snr::new(f64::NAN).is_err());
        assert!(Snr::new(f64::INFINITY).is_err());
        assert_eq!(Snr::new(0.0).unwrap().value(), 0.0);
    }

    #[test]
    fn output_density_examples() {
        let g = channel(ScalarSource::gaussian(), 1.0);
        assert_relative_eq!(
            g.output_density(0.0),
            1.0 / (4.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-14
        );
        let r0 = channel(ScalarSource::rademacher(), 0.0);
        for y in [-2.0, 0.3, 1.7] {
            assert_relative_eq!(r0.output_density(y), phi(y), max_relative = 1e-14);
        }
        let r1 = channel(ScalarSource::rademacher(), 1.0);
        assert_relative_eq!(r1.output_density(0.0), phi(1.0), max_relative = 1e-14);
        assert_relative_eq!(
            r1.output_density(0.0),
            0.241_970_724_519_143_37,
            max_relative = 1e-14
        );
    }

    #[test]
    fn output_density_normalizes() {
        for src in ScalarSource::builtins() {
            for q in [0.3, 4.0] {
                let ch = channel(src.clone(), q);
                let mass = integrate(
                    |y| ch.output_density(y),
                    ch.output_domain(),
                    &QuadratureConfig::precise(),
                )
                .unwrap()
                .value;
                assert!((mass - 1.0).abs() < 1e-11, "{src} q={q} mass={mass}");
            }
        }
    }

    #[test]
    fn conditional_mean_examples() {
        for q in [0.1_f64, 1.0, 3.0] {
            let r = channel(ScalarSource::rademacher(), q);
            let g = channel(ScalarSource::gaussian(), q);
            for y in [-2.5, -0.2, 0.0, 1.1, 4.0] {
                assert_relative_eq!(
                    r.conditional_mean(y),
                    (q.sqrt() * y).tanh(),
                    epsilon = 1e-15,
                    max_relative = 1e-14
                );
                assert_relative_eq!(
                    g.conditional_mean(y),
                    q.sqrt() / (1.0 + q) * y,
                    epsilon = 1e-15,
                    max_relative = 1e-14
                );
            }
        }
        for src in ScalarSource::builtins() {
            assert_eq!(channel(src, 0.0).conditional_mean(1.3), 0.0);
        }
    }

    #[test]
    fn mmse_examples() {
        assert!((channel(ScalarSource::gaussian(), 2.0).mmse().unwrap() - 1.0 / 3.0).abs() < 1e-9);
        for src in ScalarSource::builtins() {
            assert_eq!(channel(src, 0.0).mmse().unwrap(), 1.0);
        }
        // reference: 1 - E tanh²(√q Y) by 30-digit quadrature
        let r = channel(ScalarSource::rademacher(), 0.1).mmse().unwrap();
        assert!((r - 0.908_659_398_795_122_1).abs() < 1e-11, "{r}");
        let taylor = 1.0 - 0.1 + 0.01 - 5.0 / 3.0 * 0.001;
        assert!((r - taylor).abs() < 10.0 * 0.1f64.powi(4));
        let r = channel(ScalarSource::rademacher(), 1.0).mmse().unwrap();
        assert!((r - 0.449_599_509_206_672_83).abs() < 1e-11, "{r}");
    }

    #[test]
    fn gaussian_mmse_examples() {
        assert_eq!(gaussian_mmse(0.0), 1.0);
        assert_eq!(gaussian_mmse(1.0), 0.5);
        assert_eq!(gaussian_mmse(3.0), 0.25);
    }

    #[test]
    fn taylor3_examples() {
        let q: f64 = 0.3;
        assert_relative_eq!(
            mmse_taylor3(&ScalarSource::rademacher(), q),
            1.0 - q + q * q - 5.0 / 3.0 * q.powi(3),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            mmse_taylor3(&ScalarSource::gaussian(), q),
            1.0 - q + q * q - q.powi(3),
            max_relative = 1e-15
        );
        for src in ScalarSource::builtins() {
            assert_eq!(mmse_taylor3(&src, 0.0), 1.0);
        }
    }

    #[test]
    fn d4_moment_formula_examples() {
        assert_eq!(d4_at_zero_from_moments(&ScalarSource::rademacher()), 2.0);
        assert_eq!(d4_at_zero_from_moments(&ScalarSource::gaussian()), 0.0);
        assert_relative_eq!(
            d4_at_zero_from_moments(&ScalarSource::uniform()),
            0.72,
            max_relative = 1e-14
        );
    }

    #[test]
    fn nongaussianity_examples() {
        for q in [0.1, 1.0, 5.0] {
            let d = channel(ScalarSource::gaussian(), q)
                .nongaussianity()
                .unwrap()
                .value;
            assert!(d.abs() <= 1e-12, "{d}");
        }
        for src in ScalarSource::builtins() {
            assert_eq!(channel(src, 0.0).nongaussianity().unwrap().value, 0.0);
        }
        // reference: KL between ½(φ(y-1)+φ(y+1)) and N(0,2) by 30-digit quadrature
        let d = channel(ScalarSource::rademacher(), 1.0)
            .nongaussianity()
            .unwrap();
        assert_relative_eq!(d.value, 0.009_742_769_933_141_043, max_relative = 1e-10);
        let d = channel(ScalarSource::rademacher(), 0.5)
            .nongaussianity()
            .unwrap();
        assert_relative_eq!(d.value, 0.001_387_082_469_277_050_7, max_relative = 1e-10);
    }

    #[test]
    fn mmse_bounded_by_gaussian_and_monotone() {
        let grid = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0];
        for src in ScalarSource::builtins() {
            let mut prev = 1.0;
            for &q in &grid {
                let m = ScalarChannel::new(src.clone(), Snr::new(q).unwrap())
                    .mmse()
                    .unwrap();
                assert!(
                    m >= 0.0 && m <= gaussian_mmse(q) + 1e-9,
                    "{src} q={q} m={m}"
                );
                assert!(m <= prev + 1e-9, "{src} not monotone at q={q}");
                prev = m;
            }
        }
    }

    #[test]
    fn divergence_slope_identity() {
        // 1/(1+q) - mmse = 2 dD/dq
        for src in [ScalarSource::uniform(), ScalarSource::shifted_exponential()] {
            for q in [0.3, 1.5] {
                let m = channel(src.clone(), q).mmse().unwrap();
                let slope = nongaussianity_slope(&src, q).unwrap();
                assert!(
                    (gaussian_mmse(q) - m - 2.0 * slope.value).abs() < 1e-7,
                    "{src} q={q}"
                );
            }
        }
    }

    #[test]
    fn derivative_schedule_on_gaussian_is_zero() {
        let est = divergence_derivatives_at_zero(
            &ScalarSource::gaussian(),
            &[1, 2, 3, 4],
            &divergence_derivative_config(),
        )
        .unwrap();
        for e in est {
            assert!(e.value.abs() < 1e-9, "{e:?}");
        }
    }

    #[test]
    fn derivatives_at_zero_match_moment_formula() {
        let cfg = divergence_derivative_config();
        for src in [ScalarSource::rademacher(), ScalarSource::uniform()] {
            let est = divergence_derivatives_at_zero(&src, &[1, 2, 3, 4], &cfg).unwrap();
            for e in &est[..3] {
                assert!(
                    e.value.abs() <= (10.0 * e.error_estimate).max(1e-6),
                    "{src} {e:?}"
                );
            }
            assert_relative_eq!(
                est[3].value,
                d4_at_zero_from_moments(&src),
                max_relative = 1e-4
            );
        }
    }

    #[test]
    fn rademacher_quartic_onset() {
        // D(q)/q⁴ → D⁗(0)/24 = 1/12; two Richardson sweeps in q
        let src = ScalarSource::rademacher();
        let r: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&q| divergence_fn(&src)(q).unwrap() / q.powi(4))
            .collect();
        let (a, b) = (2.0 * r[1] - r[0], 2.0 * r[2] - r[1]);
        let limit = (4.0 * b - a) / 3.0;
        assert!(r[0] < r[1] && r[1] < r[2] && r[2] < 1.0 / 12.0, "{r:?}");
        assert_relative_eq!(limit, 1.0 / 12.0, max_relative = 0.03);
    }

    #[test]
    fn skewed_source_has_cubic_divergence() {
        // D ≈ (EX³)² q³ / 12 for a skewed law, so D'''(0) = 2 and D⁗(0) = -6
        let src = ScalarSource::shifted_exponential();
        let est =
            divergence_derivatives_at_zero(&src, &[3, 4], &divergence_derivative_config()).unwrap();
        assert!((est[0].value - 2.0).abs() < 1e-3, "{:?}", est[0]);
        assert!((est[1].value + 6.0).abs() < 0.05, "{:?}", est[1]);
        assert_eq!(d4_at_zero_from_moments(&src), 14.0);
    }

    /// Expansion for general (possibly skewed) laws with the `(EX³)²` terms at
    /// second and third order; test-only comparison route.
    fn mmse_taylor3_skew_complete(src: &ScalarSource, q: f64) -> f64 {
        let (m3, m4) = (src.third_moment(), src.fourth_moment());
        1.0 - q + 0.5 * (2.0 - m3 * m3) * q * q
            - (15.0 - 12.0 * m3 * m3 - 6.0 * m4 + m4 * m4) / 6.0 * q.powi(3)
    }

    #[test]
    fn skewed_source_expansion_discrepancy() {
        let src = ScalarSource::shifted_exponential();
        let mut ratios_moment = Vec::new();
        let mut ratios_full = Vec::new();
        for q in [0.04, 0.02, 0.01] {
            let m = channel(src.clone(), q).mmse().unwrap();
            ratios_moment.push((m - mmse_taylor3(&src, q)).abs() / (q * q));
            ratios_full.push((m - mmse_taylor3_skew_complete(&src, q)).abs() / q.powi(4));
        }
        // moment formula misses a q² term of size (EX³)²/2 = 2
        for r in &ratios_moment {
            assert!((r - 2.0).abs() < 0.5, "{ratios_moment:?}");
        }
        // the skew-complete expansion leaves an O(q⁴) remainder
        let spread = ratios_full.iter().cloned().fold(0.0, f64::max)
            / ratios_full.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 2.0, "{ratios_full:?}");
    }
}
