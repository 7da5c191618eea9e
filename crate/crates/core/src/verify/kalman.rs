use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Snr;

const PSD_TOLERANCE: f64 = -1e-10;

/// Time grid and tone set for the discretized Gaussian-tone channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanSetup {
    horizon: f64,
    steps: usize,
    snr: Snr,
    frequencies: Vec<u32>,
}

impl KalmanSetup {
    /// `n` tones at frequencies `1..=n` on `T = 2π`, with `steps` Euler steps.
    pub fn new(n: usize, q: f64, steps: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("tone count must be at least 1"));
        }
        Self::with_frequencies(
            2.0 * std::f64::consts::PI,
            steps,
            q,
            (1..=n as u32).collect(),
        )
    }

    pub fn with_frequencies(
        horizon: f64,
        steps: usize,
        q: f64,
        frequencies: Vec<u32>,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        if steps < 100 {
            return Err(Error::invalid(format!(
                "need at least 100 time steps, got {steps}"
            )));
        }
        let mut sorted = frequencies.clone();
        sorted.sort_unstable();
        if sorted.is_empty() || sorted[0] == 0 || sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(
                "frequencies must be distinct positive integers",
            ));
        }
        Ok(Self {
            horizon,
            steps,
            snr: Snr::new(q)?,
            frequencies,
        })
    }

    pub fn n(&self) -> usize {
        self.frequencies.len()
    }

    pub fn q(&self) -> f64 {
        self.snr.value()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn frequencies(&self) -> &[u32] {
        &self.frequencies
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Same setup with `steps` replaced.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        Self::with_frequencies(self.horizon, steps, self.q(), self.frequencies.clone())
    }

    /// Orthonormal cosine/sine basis values at `t`.
    fn basis(&self, t: f64) -> DVector<f64> {
        let c = (2.0 / self.horizon).sqrt();
        let w0 = 2.0 * std::f64::consts::PI / self.horizon;
        let mut h = DVector::zeros(2 * self.n());
        for (i, &k) in self.frequencies.iter().enumerate() {
            let (s, co) = (w0 * k as f64 * t).sin_cos();
            h[2 * i] = c * co;
            h[2 * i + 1] = c * s;
        }
        h
    }
}

/// Causal and non-causal signal errors from one covariance recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanErrors {
    pub dt: f64,
    pub cmmse: f64,
    pub mmse: f64,
}

/// Riccati recursion for the static Gaussian coefficients of the tones.
///
/// The state holds the `2N` cosine/sine coefficients, each with prior
/// variance `1/(2N)` so the signal has unit energy. Each step observes
/// `√(q dt) hᵀc` in unit noise. CMMSE sums the predicted signal-error
/// variance over the grid; MMSE uses the final covariance, since for a
/// static state the smoother equals the final filter.
pub fn kalman_errors(setup: &KalmanSetup) -> Result<KalmanErrors> {
    let dim = 2 * setup.n();
    let dt = setup.dt();
    let gain = (setup.q() * dt).sqrt();
    let mut p = DMatrix::<f64>::identity(dim, dim) / dim as f64;
    let mut cmmse = 0.0;
    let mut basis = Vec::with_capacity(setup.steps);
    for j in 0..setup.steps {
        let h = setup.basis(j as f64 * dt);
        let ph = &p * &h;
        cmmse += h.dot(&ph) * dt;
        let hph = gain * gain * h.dot(&ph);
        p -= (&ph * ph.transpose()) * (gain * gain / (1.0 + hph));
        p = 0.5 * (&p + p.transpose());
        let min = SymmetricEigen::new(p.clone()).eigenvalues.min();
        if min < PSD_TOLERANCE {
            return Err(Error::IllConditioned {
                step: j,
                min_eigenvalue: min,
            });
        }
        basis.push(h);
    }
    let mmse = basis.iter().map(|h| h.dot(&(&p * h)) * dt).sum();
    Ok(KalmanErrors { dt, cmmse, mmse })
}

pub fn kalman_cmmse(setup: &KalmanSetup) -> Result<f64> {
    Ok(kalman_errors(setup)?.cmmse)
}

pub fn kalman_mmse(setup: &KalmanSetup) -> Result<f64> {
    Ok(kalman_errors(setup)?.mmse)
}

/// First-order Richardson combination `2 E(dt/2) - E(dt)`.
pub fn kalman_extrapolated(setup: &KalmanSetup) -> Result<KalmanErrors> {
    let coarse = kalman_errors(setup)?;
    let fine = kalman_errors(&setup.with_steps(2 * setup.steps)?)?;
    Ok(KalmanErrors {
        dt: 0.0,
        cmmse: 2.0 * fine.cmmse - coarse.cmmse,
        mmse: 2.0 * fine.mmse - coarse.mmse,
    })
}
