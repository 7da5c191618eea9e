//! The N-tone channel `dη = √q ξ_N dt + dw` on `[0, T]` with
//!
//! ```text
//! ξ_N(t) = √(2/(T N)) Σ_i a_i cos(ω_{k_i} t + θ_i),   θ_i uniform.
//! ```
//!
//! Projected on the Fourier basis, each tone is an independent 2-D channel
//! `Y = W + √(q/N) a (cos θ, -sin θ)` with `W ~ N(0, I₂)`. The exact error
//! formulas only need the per-tone divergence `D(q)` of that output from
//! `N(0, (1 + q/2) I₂)`.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::special::{ln_bessel_i0, LN_SQRT_2PI};
use crate::numerics::{
    central_derivative, derivative_at_zero, integrate, DerivativeConfig, DerivativeEstimate,
    Domain, Integral, QuadratureConfig,
};
use crate::scalar::{divergence_derivative_config, kl_integrand, Snr};
use crate::sources::AmplitudeLaw;

/// N-tone interference model with unit signal energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneModel {
    n: usize,
    snr: Snr,
    amplitude: AmplitudeLaw,
    frequencies: Vec<u32>,
    horizon: f64,
}

impl ToneModel {
    /// `n` tones at frequencies `1..=n` on the horizon `T = 2π`.
    pub fn new(n: usize, q: f64, amplitude: AmplitudeLaw) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("tone count must be at least 1"));
        }
        Ok(Self {
            n,
            snr: Snr::new(q)?,
            amplitude,
            frequencies: (1..=n as u32).collect(),
            horizon: 2.0 * std::f64::consts::PI,
        })
    }

    /// Frequency indices `k_i`, so that `ω_i = 2π k_i / T`. They never enter
    /// the error formulas; only their distinctness matters.
    pub fn with_frequencies(mut self, k: Vec<u32>) -> Result<Self> {
        if k.len() != self.n {
            return Err(Error::invalid(format!(
                "expected {} frequencies, got {}",
                self.n,
                k.len()
            )));
        }
        let mut sorted = k.clone();
        sorted.sort_unstable();
        if sorted.first() == Some(&0) || sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(
                "frequencies must be distinct positive integers",
            ));
        }
        self.frequencies = k;
        Ok(self)
    }

    pub fn with_horizon(mut self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        self.horizon = t;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.snr.value()
    }

    pub fn amplitude(&self) -> &AmplitudeLaw {
        &self.amplitude
    }

    pub fn frequencies(&self) -> &[u32] {
        &self.frequencies
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Per-tone SNR `q/N`.
    pub fn tone_snr(&self) -> f64 {
        self.q() / self.n as f64
    }

    /// Noiseless signal `ξ_N(t)` for given amplitudes and phases.
    pub fn signal(&self, amplitudes: &[f64], phases: &[f64], t: f64) -> f64 {
        let scale = (2.0 / (self.horizon * self.n as f64)).sqrt();
        let omega0 = 2.0 * std::f64::consts::PI / self.horizon;
        let sum: f64 = self
            .frequencies
            .iter()
            .zip(amplitudes.iter().zip(phases))
            .map(|(&k, (&a, &th))| a * (omega0 * k as f64 * t + th).cos())
            .sum();
        scale * sum
    }
}

/// Quadrature used for tone divergences; tight enough for differencing.
pub fn tone_quadrature() -> QuadratureConfig {
    QuadratureConfig::precise()
        .with_rel_tol(1e-10)
        .with_abs_tol(1e-30)
}

/// Per-tone divergence with its quadrature error.
///
/// The output law is rotation invariant. For amplitude `a` its planar
/// density is `exp(-(r² + q a²)/2) I₀(r a √q) / 2π`; random amplitudes mix
/// this kernel over the amplitude law.
pub fn tone_divergence_with(
    law: &AmplitudeLaw,
    q: f64,
    quad: &QuadratureConfig,
) -> Result<Integral> {
    Snr::new(q)?;
    let zero = Integral {
        value: 0.0,
        error: 0.0,
        subdivisions: 0,
    };
    let Some(nodes) = law.amplitude_nodes() else {
        return Ok(zero);
    };
    if q == 0.0 {
        return Ok(zero);
    }
    let sq = q.sqrt();
    let s2 = 1.0 + 0.5 * q;
    let shrink = 0.5 * q / s2;
    let ln_s2 = (0.5 * q).ln_1p();
    let a_max = nodes.iter().fold(0.0_f64, |m, &(a, _)| m.max(a.abs()));
    // ln of the planar N(0, s² I₂) density
    let ln_g = |r: f64| -0.5 * r * r / s2 - ln_s2 - 2.0 * LN_SQRT_2PI;
    let ln_mix = |r: f64| -> f64 {
        if let [(a, _)] = nodes[..] {
            return ln_bessel_i0(r * a * sq) - 0.5 * q * a * a;
        }
        let terms: Vec<f64> = nodes
            .iter()
            .map(|&(a, w)| w.ln() + ln_bessel_i0(r * a * sq) - 0.5 * q * a * a)
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    };
    let integrand = |r: f64| {
        let u = ln_s2 - 0.5 * shrink * r * r + ln_mix(r);
        kl_integrand(ln_g(r), u)
    };
    let scale = s2.sqrt() + sq * a_max / quad.tail_width;
    integrate(integrand, Domain::Radial { scale }, quad)
}

/// Per-tone divergence `D(q)`.
pub fn tone_divergence(law: &AmplitudeLaw, q: f64) -> Result<f64> {
    Ok(tone_divergence_with(law, q, &tone_quadrature())?.value)
}

fn memo_divergence(law: &AmplitudeLaw) -> impl Fn(f64) -> Result<f64> + '_ {
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
        let v = tone_divergence(law, q)?;
        cache.borrow_mut().push((q.to_bits(), v));
        Ok(v)
    }
}

/// `D_N = N D(q/N)`, the divergence of the whole N-tone output.
pub fn dn_divergence(model: &ToneModel) -> Result<f64> {
    Ok(model.n as f64 * tone_divergence(&model.amplitude, model.tone_snr())?)
}

/// `(2N/q) ln(1 + q/(2N))`, with the value 1 at `q = 0`.
pub fn gaussian_cmmse(n: usize, q: f64) -> f64 {
    let x = q / (2.0 * n as f64);
    if x == 0.0 {
        1.0
    } else {
        x.ln_1p() / x
    }
}

/// `1 / (1 + q/(2N))`.
pub fn gaussian_mmse_tone(n: usize, q: f64) -> f64 {
    1.0 / (1.0 + q / (2.0 * n as f64))
}

/// Causal MMSE `(2N/q) ln(1 + q/(2N)) - (2/q) D_N`; 1 at `q = 0`.
pub fn cmmse_exact(model: &ToneModel) -> Result<f64> {
    let q = model.q();
    if q == 0.0 {
        return Ok(1.0);
    }
    Ok(gaussian_cmmse(model.n, q) - 2.0 / q * dn_divergence(model)?)
}

/// `dD/dq` of the per-tone divergence at `q > 0`.
pub fn tone_divergence_slope(law: &AmplitudeLaw, q: f64) -> Result<DerivativeEstimate> {
    if !(q > 0.0) {
        return Err(Error::invalid("slope needs q > 0"));
    }
    let cfg = DerivativeConfig {
        initial_step: (0.1 * q).min(0.05),
        max_levels: 5,
        abs_tol: 1e-15,
        rel_tol: 1e-7,
        value_rel_noise: 1e-10,
        ..divergence_derivative_config()
    };
    central_derivative(memo_divergence(law), q, &cfg)
}

/// Non-causal MMSE `1/(1 + q/(2N)) - 2 D'(q/N)`; 1 at `q = 0`.
///
/// Fails with [`Error::DerivativeNoise`] when the slope's error estimate
/// exceeds 10% of the correction.
pub fn mmse_exact(model: &ToneModel) -> Result<f64> {
    let q = model.q();
    if q == 0.0 || model.amplitude == AmplitudeLaw::GaussianPair {
        return Ok(gaussian_mmse_tone(model.n, q));
    }
    let d = tone_divergence_slope(&model.amplitude, model.tone_snr())?;
    let correction = 2.0 * d.value;
    let error = 2.0 * d.error_estimate;
    if error > 0.1 * correction.abs() {
        return Err(Error::DerivativeNoise { correction, error });
    }
    Ok(gaussian_mmse_tone(model.n, q) - correction)
}

/// `1 - (1/4 + d2) q/N`.
pub fn cmmse_asymptotic(n: usize, q: f64, d2: f64) -> f64 {
    1.0 - (0.25 + d2) * q / n as f64
}

/// `1 - (1/2 + 2 d2) q/N`.
pub fn mmse_asymptotic(n: usize, q: f64, d2: f64) -> f64 {
    1.0 - (0.5 + 2.0 * d2) * q / n as f64
}

/// One-sided derivatives of the per-tone divergence at zero.
pub fn tone_divergence_derivatives_at_zero(
    law: &AmplitudeLaw,
    orders: &[u32],
    cfg: &DerivativeConfig,
) -> Result<Vec<DerivativeEstimate>> {
    let d = memo_divergence(law);
    orders
        .iter()
        .map(|&k| derivative_at_zero(&d, k, cfg))
        .collect()
}

/// `D''(0)` of the per-tone divergence.
pub fn tone_d2_at_zero(law: &AmplitudeLaw) -> Result<DerivativeEstimate> {
    let d = memo_divergence(law);
    derivative_at_zero(&d, 2, &divergence_derivative_config())
}

/// `|N D(q/N) - D''(0) q² / (2N)|`, the remainder of the quadratic law.
pub fn dn_quadratic_remainder(law: &AmplitudeLaw, q: f64, n: usize, d2: f64) -> Result<f64> {
    let model = ToneModel::new(n, q, law.clone())?;
    Ok((dn_divergence(&model)? - 0.5 * d2 * q * q / n as f64).abs())
}

/// Divergence values on a strictly increasing grid of SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceCurve {
    pub law: AmplitudeLaw,
    /// `(q, D(q), quadrature error)` triples.
    pub points: Vec<(f64, f64, f64)>,
}

impl DivergenceCurve {
    pub fn tabulate(law: &AmplitudeLaw, grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invalid("empty q grid"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("q grid must be strictly increasing"));
        }
        let quad = tone_quadrature();
        let points = grid
            .iter()
            .map(|&q| tone_divergence_with(law, q, &quad).map(|i| (q, i.value, i.error)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            law: law.clone(),
            points,
        })
    }

    /// Central difference quotient at interior point `i` (one-sided at the
    /// ends), with the quadrature errors propagated.
    pub fn slope(&self, i: usize) -> Option<(f64, f64)> {
        let last = self.points.len().checked_sub(1)?;
        if last == 0 || i > last {
            return None;
        }
        let (a, b) = (i.saturating_sub(1), (i + 1).min(last));
        let (qa, da, ea) = self.points[a];
        let (qb, db, eb) = self.points[b];
        Some(((db - da) / (qb - qa), (ea + eb) / (qb - qa)))
    }
}

/// Least-squares fit of the error deficit `δ(x) = 1 - error` against
/// `x = q/N` as `c₁ x + c₂ x² + c₃ x³` (the cubic term is dropped with
/// fewer than four points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficitFit {
    pub coefficient: f64,
    pub second_order: f64,
    /// Predicted first-order coefficient from the asymptotic formula.
    pub predicted: f64,
    /// `|coefficient / predicted - 1|`.
    pub relative_mismatch: f64,
    /// Euclidean norm of `δ - c₁ x`, the part beyond first order.
    pub residual_norm: f64,
}

/// Deficit fits for CMMSE and MMSE over an N sweep at fixed `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub d2: f64,
    pub cmmse: DeficitFit,
    pub mmse: DeficitFit,
}

fn fit_deficit(x: &[f64], delta: &[f64], predicted: f64) -> Result<DeficitFit> {
    let cols = if x.len() > 3 { 3 } else { 2 };
    let a = DMatrix::from_fn(x.len(), cols, |i, j| x[i].powi(j as i32 + 1));
    let b = DVector::from_column_slice(delta);
    let c = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::invalid(format!("deficit fit failed: {e}")))?;
    let (c1, c2) = (c[0], c[1]);
    let residual_norm = x
        .iter()
        .zip(delta)
        .map(|(&x, &d)| (d - c1 * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(DeficitFit {
        coefficient: c1,
        second_order: c2,
        predicted,
        relative_mismatch: (c1 / predicted - 1.0).abs(),
        residual_norm,
    })
}

/// Fits the `1/N` deficit of the exact CMMSE and MMSE and compares the
/// coefficients with `1/4 + d2` and `1/2 + 2 d2`.
pub fn convergence_rate_fit(
    law: &AmplitudeLaw,
    q: f64,
    n_list: &[usize],
    d2: f64,
) -> Result<RateFit> {
    if !(q > 0.0) {
        return Err(Error::invalid("rate fit needs q > 0"));
    }
    if n_list.len() < 4 {
        return Err(Error::invalid("rate fit needs at least 4 tone counts"));
    }
    let lo = *n_list.iter().min().expect("nonempty");
    let hi = *n_list.iter().max().expect("nonempty");
    if lo == 0 || hi < 10 * lo {
        return Err(Error::invalid("tone counts must span at least one decade"));
    }
    let mut x = Vec::with_capacity(n_list.len());
    let mut dc = Vec::with_capacity(n_list.len());
    let mut dm = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let model = ToneModel::new(n, q, law.clone())?;
        x.push(q / n as f64);
        dc.push(1.0 - cmmse_exact(&model)?);
        dm.push(1.0 - mmse_exact(&model)?);
    }
    Ok(RateFit {
        d2,
        cmmse: fit_deficit(&x, &dc, 0.25 + d2)?,
        mmse: fit_deficit(&x, &dm, 0.5 + 2.0 * d2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::normal_pdf;
    use crate::numerics::GaussLegendre;
    use crate::sources::ScalarSource;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[allow(clippy::excessive_precision)]
    const D_UNIT_1: f64 = 0.001_989_589_200_950_376_34;
    #[allow(clippy::excessive_precision)]
    const D_UNIT_HALF: f64 = 0.000_221_442_778_824_685_025;

    /// Independent 2-D tensor-grid KL with the phase averaged numerically.
    fn grid_divergence(nodes: &[(f64, f64)], q: f64) -> f64 {
        let s2 = 1.0 + 0.5 * q;
        let gl = GaussLegendre::new(20);
        let (half, panels, phases) = (10.0, 12, 64);
        let width = 2.0 * half / panels as f64;
        let mut pts = Vec::new();
        for p in 0..panels {
            let lo = -half + p as f64 * width;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                pts.push((lo + 0.5 * width * (x + 1.0), 0.5 * width * w));
            }
        }
        let mut total = 0.0;
        for &(y1, w1) in &pts {
            for &(y2, w2) in &pts {
                let mut p = 0.0;
                for &(a, wa) in nodes {
                    for j in 0..phases {
                        let th = 2.0 * PI * j as f64 / phases as f64;
                        let m1 = q.sqrt() * a * th.cos();
                        let m2 = -q.sqrt() * a * th.sin();
                        p += wa * normal_pdf(y1 - m1, 1.0) * normal_pdf(y2 - m2, 1.0)
                            / phases as f64;
                    }
                }
                let g = normal_pdf(y1, s2) * normal_pdf(y2, s2);
                if p > 0.0 {
                    total += w1 * w2 * p * (p / g).ln();
                }
            }
        }
        total
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(tone_divergence(&AmplitudeLaw::Unit, 0.0).unwrap(), 0.0);
        assert_eq!(
            tone_divergence(&AmplitudeLaw::GaussianPair, 3.0).unwrap(),
            0.0
        );
        assert_relative_eq!(
            tone_divergence(&AmplitudeLaw::Unit, 1.0).unwrap(),
            D_UNIT_1,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            tone_divergence(&AmplitudeLaw::Unit, 0.5).unwrap(),
            D_UNIT_HALF,
            max_relative = 1e-9
        );
    }

    #[test]
    fn radial_matches_tensor_grid() {
        for q in [1.0, 4.0] {
            let radial = tone_divergence(&AmplitudeLaw::Unit, q).unwrap();
            assert_relative_eq!(
                radial,
                grid_divergence(&[(1.0, 1.0)], q),
                max_relative = 1e-6
            );
        }
        let law = AmplitudeLaw::Random(ScalarSource::rademacher());
        assert_relative_eq!(
            tone_divergence(&law, 1.0).unwrap(),
            tone_divergence(&AmplitudeLaw::Unit, 1.0).unwrap(),
            max_relative = 1e-12
        );
        let src = ScalarSource::atoms(vec![-1.5, 0.25, 2.0], vec![0.2, 0.5, 0.3]).unwrap();
        let law = AmplitudeLaw::Random(src);
        let nodes = law.amplitude_nodes().unwrap();
        assert_relative_eq!(
            tone_divergence(&law, 2.0).unwrap(),
            grid_divergence(&nodes, 2.0),
            max_relative = 1e-6
        );
    }

    #[test]
    fn gaussian_amplitude_as_random_law_is_near_null() {
        // a ~ N(0,1) with a uniform phase is not the Gaussian pair: the
        // output is a scale mixture, so D > 0
        let d = tone_divergence(&AmplitudeLaw::Random(ScalarSource::gaussian()), 1.0).unwrap();
        assert!(d > 0.0);
    }

    #[test]
    fn model_validation() {
        assert!(ToneModel::new(0, 1.0, AmplitudeLaw::Unit).is_err());
        assert!(ToneModel::new(2, -1.0, AmplitudeLaw::Unit).is_err());
        let m = ToneModel::new(3, 1.0, AmplitudeLaw::Unit).unwrap();
        assert_eq!(m.frequencies(), &[1, 2, 3]);
        assert!(m.clone().with_frequencies(vec![1, 1, 2]).is_err());
        assert!(m.clone().with_frequencies(vec![0, 1, 2]).is_err());
        assert!(m.clone().with_frequencies(vec![5, 1]).is_err());
        assert!(m.clone().with_frequencies(vec![5, 1, 9]).is_ok());
        assert!(m.with_horizon(0.0).is_err());
    }

    #[test]
    fn signal_has_unit_energy() {
        let m = ToneModel::new(3, 1.0, AmplitudeLaw::Unit).unwrap();
        let (a, th) = ([1.0, 1.0, 1.0], [0.3, 1.1, 2.0]);
        let mut energy = 0.0;
        crate::numerics::gauss_legendre_composite(0.0, m.horizon(), 16, |t, w| {
            energy += w * m.signal(&a, &th, t).powi(2)
        });
        assert_relative_eq!(energy, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn dn_divergence_examples() {
        let m = ToneModel::new(1, 1.0, AmplitudeLaw::Unit).unwrap();
        assert_eq!(
            dn_divergence(&m).unwrap(),
            tone_divergence(&AmplitudeLaw::Unit, 1.0).unwrap()
        );
        let g = ToneModel::new(7, 2.0, AmplitudeLaw::GaussianPair).unwrap();
        assert_eq!(dn_divergence(&g).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_closed_forms() {
        assert_relative_eq!(
            gaussian_cmmse(2, 2.0),
            2.0 * 1.5f64.ln(),
            max_relative = 1e-15
        );
        assert_relative_eq!(gaussian_mmse_tone(2, 2.0), 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(gaussian_cmmse(1, 2.0), 2f64.ln(), max_relative = 1e-15);
        assert_eq!(gaussian_mmse_tone(1, 2.0), 0.5);
        assert_eq!(gaussian_cmmse(1, 0.0), 1.0);
        assert_eq!(gaussian_mmse_tone(1, 0.0), 1.0);
        assert_relative_eq!(gaussian_cmmse(1, 1e-12), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn exact_errors_examples() {
        let g = ToneModel::new(1, 2.0, AmplitudeLaw::GaussianPair).unwrap();
        assert_relative_eq!(cmmse_exact(&g).unwrap(), 2f64.ln(), max_relative = 1e-15);
        assert_eq!(mmse_exact(&g).unwrap(), 0.5);
        let u0 = ToneModel::new(3, 0.0, AmplitudeLaw::Unit).unwrap();
        assert_eq!(cmmse_exact(&u0).unwrap(), 1.0);
        assert_eq!(mmse_exact(&u0).unwrap(), 1.0);
        let u = ToneModel::new(1, 1.0, AmplitudeLaw::Unit).unwrap();
        assert_relative_eq!(
            cmmse_exact(&u).unwrap(),
            2.0 * 1.5f64.ln() - 2.0 * D_UNIT_1,
            max_relative = 1e-12
        );
        // D'(1) from the frozen values' neighbourhood: a secant bound
        let m = mmse_exact(&u).unwrap();
        let secant = (D_UNIT_1 - D_UNIT_HALF) / 0.5;
        assert!(m < 2.0 / 3.0 && m > 2.0 / 3.0 - 2.0 * 2.0 * secant, "{m}");
    }

    #[test]
    fn mmse_slope_matches_curve() {
        let grid: Vec<f64> = (0..=20).map(|i| 0.9 + 0.01 * i as f64).collect();
        let curve = DivergenceCurve::tabulate(&AmplitudeLaw::Unit, &grid).unwrap();
        let (s, e) = curve.slope(10).unwrap();
        let d = tone_divergence_slope(&AmplitudeLaw::Unit, 1.0).unwrap();
        // central difference error ~ h² D'''/6
        assert!((s - d.value).abs() < 1e-6 + e, "{s} {d:?}");
        assert!(curve.points.iter().all(|p| p.1 >= 0.0));
    }

    #[test]
    fn curve_validation() {
        assert!(DivergenceCurve::tabulate(&AmplitudeLaw::Unit, &[]).is_err());
        assert!(DivergenceCurve::tabulate(&AmplitudeLaw::Unit, &[0.1, 0.1]).is_err());
        let c = DivergenceCurve::tabulate(&AmplitudeLaw::Unit, &[0.0]).unwrap();
        assert_eq!(c.points[0].1, 0.0);
        assert!(c.slope(0).is_none());
    }

    #[test]
    fn error_ordering_and_gaussian_extremality() {
        for n in [1, 2, 5] {
            for q in [0.5, 1.0, 4.0] {
                let m = ToneModel::new(n, q, AmplitudeLaw::Unit).unwrap();
                let c = cmmse_exact(&m).unwrap();
                let s = mmse_exact(&m).unwrap();
                assert!(0.0 <= s && s <= c && c <= 1.0, "n={n} q={q}: {s} {c}");
                assert!(c <= gaussian_cmmse(n, q) && s <= gaussian_mmse_tone(n, q));
            }
        }
    }

    #[test]
    fn asymptotic_examples() {
        assert_eq!(cmmse_asymptotic(4, 2.0, 0.0), 1.0 - 2.0 / 16.0);
        assert_eq!(mmse_asymptotic(4, 2.0, 0.0), 0.75);
        assert_relative_eq!(cmmse_asymptotic(100, 1.0, 0.1), 1.0 - 0.35 / 100.0);
        assert!((1.0 - cmmse_asymptotic(1_000_000_000, 1.0, 0.0)) < 1e-9);
    }

    #[test]
    fn unit_tone_curvature_at_zero() {
        let d2 = tone_d2_at_zero(&AmplitudeLaw::Unit).unwrap();
        assert!(
            d2.value.abs() <= (10.0 * d2.error_estimate).max(1e-6),
            "{d2:?}"
        );
        // D(q)/q² keeps shrinking toward ½ D''(0)
        let r: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&q| tone_divergence(&AmplitudeLaw::Unit, q).unwrap() / (q * q))
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2] && r[2] < 1e-4, "{r:?}");
    }

    #[test]
    fn gaussian_pair_rate_fit() {
        let fit = convergence_rate_fit(&AmplitudeLaw::GaussianPair, 1.0, &[4, 8, 16, 32, 64], 0.0)
            .unwrap();
        assert!(fit.cmmse.relative_mismatch < 1e-3, "{fit:?}");
        assert!(fit.mmse.relative_mismatch < 1e-3, "{fit:?}");
        assert!(fit.cmmse.second_order < 0.0 && fit.cmmse.residual_norm > 0.0);
        assert!(convergence_rate_fit(&AmplitudeLaw::Unit, 1.0, &[4, 8, 16], 0.0).is_err());
        assert!(convergence_rate_fit(&AmplitudeLaw::Unit, 1.0, &[4, 5, 6, 7], 0.0).is_err());
    }
}
