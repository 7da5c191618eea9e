use crate::error::{Error, Result};

/// A numerical derivative with the step that produced it and an error
/// estimate taken from the extrapolation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate {
    pub order: u32,
    pub value: f64,
    pub step_used: f64,
    pub error_estimate: f64,
}

/// Step schedule and noise model for Richardson-extrapolated differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeConfig {
    /// Largest step `h`; later levels use `h/2, h/4, ...`.
    pub initial_step: f64,
    pub max_levels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Relative accuracy of the function values themselves (quadrature
    /// tolerance for divergence curves, a few ulps for closed forms).
    pub value_rel_noise: f64,
    pub value_abs_noise: f64,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            max_levels: 7,
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            value_rel_noise: 4.0 * f64::EPSILON,
            value_abs_noise: 0.0,
        }
    }
}

impl DerivativeConfig {
    pub fn with_step(mut self, h: f64) -> Self {
        self.initial_step = h;
        self
    }

    pub fn with_value_noise(mut self, rel: f64, abs: f64) -> Self {
        self.value_rel_noise = rel;
        self.value_abs_noise = abs;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid("initial_step must be positive"));
        }
        if self.max_levels < 2 {
            return Err(Error::invalid("max_levels must be at least 2"));
        }
        Ok(())
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Memo of function values keyed by exact argument, so halved schedules reuse
/// earlier evaluations.
struct Memo<G> {
    g: G,
    seen: Vec<(f64, f64)>,
}

impl<G: FnMut(f64) -> Result<f64>> Memo<G> {
    fn get(&mut self, x: f64) -> Result<f64> {
        if let Some(&(_, v)) = self.seen.iter().find(|(a, _)| *a == x) {
            return Ok(v);
        }
        let v = (self.g)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        self.seen.push((x, v));
        Ok(v)
    }
}

/// Neville-style extrapolation table with a parallel noise-propagation table.
struct Tableau {
    /// Error exponents advance by `power_step` per column (1 for one-sided
    /// differences, 2 for central ones); refinement ratio is 2.
    power_step: i32,
    rows: Vec<Vec<(f64, f64)>>,
}

impl Tableau {
    fn push(&mut self, base: f64, noise: f64) -> (f64, f64, f64) {
        let mut row = vec![(base, noise)];
        if let Some(prev) = self.rows.last() {
            for m in 1..=prev.len() {
                let factor = 2f64.powi(self.power_step * m as i32);
                let (a, na) = row[m - 1];
                let (b, nb) = prev[m - 1];
                let v = a + (a - b) / (factor - 1.0);
                let n = (factor * na + nb) / (factor - 1.0);
                row.push((v, n));
            }
        }
        let n = row.len() - 1;
        let (best, noise) = row[n];
        let trunc = if n == 0 {
            f64::INFINITY
        } else {
            let prev_diag = self.rows[n - 1][n - 1].0;
            (best - row[n - 1].0).abs().max((best - prev_diag).abs())
        };
        self.rows.push(row);
        (best, trunc, noise)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    trunc: f64,
    noise: f64,
    step: f64,
}

impl Candidate {
    fn error(&self) -> f64 {
        self.trunc + self.noise
    }
}

fn run_schedule<S>(
    order: u32,
    cfg: &DerivativeConfig,
    power_step: i32,
    mut stencil: S,
) -> Result<DerivativeEstimate>
where
    S: FnMut(f64) -> Result<(f64, f64)>,
{
    cfg.validate()?;
    let mut table = Tableau {
        power_step,
        rows: Vec::new(),
    };
    let mut best: Option<Candidate> = None;
    let mut later_spread = 0.0_f64;
    let mut previous_within = false;
    let mut h = cfg.initial_step;
    for level in 0..cfg.max_levels {
        let (base, noise) = stencil(h)?;
        let (value, trunc, noise) = table.push(base, noise);
        if level > 0 {
            let cand = Candidate {
                value,
                trunc,
                noise,
                step: h,
            };
            let improved = best.is_none_or(|b| cand.error() < b.error());
            if improved {
                best = Some(cand);
                later_spread = 0.0;
            } else if let Some(b) = best {
                later_spread = later_spread.max((cand.value - b.value).abs());
            }
            let b = best.expect("set above");
            // two consecutive levels within tolerance guard against a
            // coincidental agreement of neighbouring table entries
            let within = cand.error() <= cfg.abs_tol + cfg.rel_tol * cand.value.abs();
            let b_error = b.trunc.max(later_spread) + b.noise;
            if within && previous_within && b_error <= cfg.abs_tol + cfg.rel_tol * b.value.abs() {
                break;
            }
            previous_within = within;
            // noise growth: halving further only hurts
            if level > 1 && cand.error() > 4.0 * b.error() && cand.noise > cand.trunc {
                break;
            }
        }
        h *= 0.5;
    }
    let mut b = best.expect("max_levels >= 2");
    // a retained level must also be consistent with the finer ones after it
    b.trunc = b.trunc.max(later_spread);
    let estimate = DerivativeEstimate {
        order,
        value: b.value,
        step_used: b.step,
        error_estimate: b.error(),
    };
    let converged = b.error() <= cfg.abs_tol + cfg.rel_tol * b.value.abs();
    if !converged && b.noise > b.trunc && b.noise > cfg.abs_tol + cfg.rel_tol * b.value.abs() {
        return Err(Error::StepUnderflow { best: estimate });
    }
    Ok(estimate)
}

/// One-sided `order`-th derivative of `g` at zero from forward differences
/// `Δ^k g(0) / h^k` on the schedule `h, h/2, h/4, ...`, extrapolated with
/// Richardson's method. Only `g(q)` for `q ≥ 0` is evaluated.
pub fn derivative_at_zero<G>(g: G, order: u32, cfg: &DerivativeConfig) -> Result<DerivativeEstimate>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(1..=4).contains(&order) {
        return Err(Error::invalid(format!(
            "derivative order {order} outside 1..=4"
        )));
    }
    let coeffs: Vec<f64> = (0..=order)
        .map(|i| {
            let sign = if (order - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(order, i)
        })
        .collect();
    let coeff_mass: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let mut memo = Memo {
        g,
        seen: Vec::new(),
    };
    run_schedule(order, cfg, 1, |h| {
        let mut acc = 0.0;
        let mut largest = 0.0_f64;
        for (i, c) in coeffs.iter().enumerate() {
            let v = memo.get(i as f64 * h)?;
            largest = largest.max(v.abs());
            acc += c * v;
        }
        let hk = h.powi(order as i32);
        let noise = coeff_mass
            * (cfg.value_rel_noise * largest + cfg.value_abs_noise + f64::EPSILON * largest)
            / hk;
        Ok((acc / hk, noise))
    })
}

/// First derivative at an interior point by central differences with
/// Richardson extrapolation in `h²`.
pub fn central_derivative<G>(g: G, x: f64, cfg: &DerivativeConfig) -> Result<DerivativeEstimate>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut memo = Memo {
        g,
        seen: Vec::new(),
    };
    run_schedule(1, cfg, 2, |h| {
        let a = memo.get(x + h)?;
        let b = memo.get(x - h)?;
        let largest = a.abs().max(b.abs());
        let noise = 2.0
            * (cfg.value_rel_noise * largest + cfg.value_abs_noise + f64::EPSILON * largest)
            / (2.0 * h);
        Ok(((a - b) / (2.0 * h), noise))
    })
}
