//! Standardized input laws (`EX = 0`, `EX² = 1`) and tone amplitude laws.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre_composite;
use crate::numerics::special::LN_SQRT_2PI;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Log-window kept around the peak of a tilted density: `e^{-46} ≈ 1e-20`.
const WINDOW_LOG_DEPTH: f64 = 46.0;
const WINDOW_PANELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

impl MixtureComponent {
    fn raw_moment(&self, k: u32) -> f64 {
        let (m, s2) = (self.mean, self.sd * self.sd);
        match k {
            1 => m,
            2 => m * m + s2,
            3 => m * m * m + 3.0 * m * s2,
            4 => m.powi(4) + 6.0 * m * m * s2 + 3.0 * s2 * s2,
            _ => unreachable!("moment order checked by caller"),
        }
    }
}

/// The law itself, already standardized.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Atoms {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
    Gaussian,
    GaussianMixture(Vec<MixtureComponent>),
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// `E - 1` with `E ~ Exp(1)`.
    ShiftedExponential,
}

/// A law before standardization; input to [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub enum RawLaw {
    Normal { mean: f64, variance: f64 },
    Atoms { values: Vec<f64>, probs: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Mixture(Vec<MixtureComponent>),
}

/// `E[exp(sX - qX²/2)]` in log form, with the mean of the tilted law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tilted {
    pub ln_z: f64,
    pub mean: f64,
}

/// A standardized scalar random variable with cached third and fourth
/// moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSource {
    law: Law,
    m3: f64,
    m4: f64,
}

impl ScalarSource {
    fn from_law(law: Law) -> Self {
        let (m3, m4) = match &law {
            Law::Atoms { values, probs } => (
                values.iter().zip(probs).map(|(x, p)| p * x.powi(3)).sum(),
                values.iter().zip(probs).map(|(x, p)| p * x.powi(4)).sum(),
            ),
            Law::Gaussian => (0.0, 3.0),
            Law::GaussianMixture(c) => (
                c.iter().map(|c| c.weight * c.raw_moment(3)).sum(),
                c.iter().map(|c| c.weight * c.raw_moment(4)).sum(),
            ),
            Law::Uniform => (0.0, 9.0 / 5.0),
            Law::ShiftedExponential => (2.0, 9.0),
        };
        Self { law, m3, m4 }
    }

    pub fn rademacher() -> Self {
        Self::from_law(Law::Atoms {
            values: vec![-1.0, 1.0],
            probs: vec![0.5, 0.5],
        })
    }

    pub fn gaussian() -> Self {
        Self::from_law(Law::Gaussian)
    }

    pub fn uniform() -> Self {
        Self::from_law(Law::Uniform)
    }

    /// Standardized exponential: `EX³ = 2`, `EX⁴ = 9`.
    pub fn shifted_exponential() -> Self {
        Self::from_law(Law::ShiftedExponential)
    }

    /// Two-component Gaussian mixture, standardized.
    pub fn mixture(w: f64, mu1: f64, sd1: f64, mu2: f64, sd2: f64) -> Result<Self> {
        standardize(&RawLaw::Mixture(vec![
            MixtureComponent {
                weight: w,
                mean: mu1,
                sd: sd1,
            },
            MixtureComponent {
                weight: 1.0 - w,
                mean: mu2,
                sd: sd2,
            },
        ]))
    }

    /// Discrete law on `values` with probabilities `probs`, standardized.
    pub fn atoms(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        standardize(&RawLaw::Atoms { values, probs })
    }

    /// The registry of built-in laws used by sweeps and the acceptance suite.
    pub fn builtins() -> Vec<ScalarSource> {
        vec![
            Self::rademacher(),
            Self::gaussian(),
            Self::uniform(),
            Self::shifted_exponential(),
            Self::mixture(0.5, -1.0, 0.5, 1.0, 0.5).expect("valid mixture"),
        ]
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.law, Law::Gaussian)
    }

    /// `E X^k` for `k` in `1..=4`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        match k {
            3 => Ok(self.m3),
            4 => Ok(self.m4),
            1 | 2 => Ok(match &self.law {
                Law::Atoms { values, probs } => values
                    .iter()
                    .zip(probs)
                    .map(|(x, p)| p * x.powi(k as i32))
                    .sum(),
                Law::GaussianMixture(c) => c.iter().map(|c| c.weight * c.raw_moment(k)).sum(),
                _ => (k - 1) as f64,
            }),
            _ => Err(Error::invalid(format!("moment order {k} outside 1..=4"))),
        }
    }

    pub fn third_moment(&self) -> f64 {
        self.m3
    }

    pub fn fourth_moment(&self) -> f64 {
        self.m4
    }

    /// Interval holding all but a negligible (`~e^{-t²/2}`) share of the
    /// mass, for truncating integrals in the output variable.
    pub fn support(&self, tail_width: f64) -> (f64, f64) {
        match &self.law {
            Law::Atoms { values, .. } => (
                values.iter().copied().fold(f64::INFINITY, f64::min),
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            Law::Gaussian => (-tail_width, tail_width),
            Law::GaussianMixture(c) => (
                c.iter()
                    .map(|c| c.mean - tail_width * c.sd)
                    .fold(f64::INFINITY, f64::min),
                c.iter()
                    .map(|c| c.mean + tail_width * c.sd)
                    .fold(f64::NEG_INFINITY, f64::max),
            ),
            Law::Uniform => (-SQRT3, SQRT3),
            Law::ShiftedExponential => (-1.0, -1.0 + 0.5 * tail_width * tail_width),
        }
    }

    /// `E[exp(sX - qX²/2)]` and the mean of the correspondingly tilted law.
    ///
    /// With `s = √q·y` this is `p_Y(y) / φ(y)` for `Y = W + √q X`, and the
    /// tilted mean is the conditional mean `E[X | Y = y]`.
    pub fn tilted(&self, s: f64, q: f64) -> Tilted {
        match &self.law {
            Law::Atoms { values, probs } => {
                let mut max = f64::NEG_INFINITY;
                for x in values {
                    max = max.max(s * x - 0.5 * q * x * x);
                }
                let mut z = 0.0;
                let mut zx = 0.0;
                for (x, p) in values.iter().zip(probs) {
                    let w = p * (s * x - 0.5 * q * x * x - max).exp();
                    z += w;
                    zx += w * x;
                }
                Tilted {
                    ln_z: max + z.ln(),
                    mean: zx / z,
                }
            }
            Law::Gaussian => Tilted {
                ln_z: 0.5 * s * s / (1.0 + q) - 0.5 * q.ln_1p(),
                mean: s / (1.0 + q),
            },
            Law::GaussianMixture(c) => {
                let terms: Vec<(f64, f64)> = c
                    .iter()
                    .map(|c| {
                        let s2 = c.sd * c.sd;
                        let a = 1.0 / s2 + q;
                        let b = c.mean / s2 + s;
                        let ln = c.weight.ln() - 0.5 * (q * s2).ln_1p() + 0.5 * b * b / a
                            - 0.5 * c.mean * c.mean / s2;
                        (ln, b / a)
                    })
                    .collect();
                let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = terms.iter().map(|t| (t.0 - max).exp()).sum();
                let zx: f64 = terms.iter().map(|t| (t.0 - max).exp() * t.1).sum();
                Tilted {
                    ln_z: max + z.ln(),
                    mean: zx / z,
                }
            }
            Law::Uniform => log_linear_tilted(-SQRT3, SQRT3, 0.0, -(2.0 * SQRT3).ln(), s, q),
            Law::ShiftedExponential => log_linear_tilted(-1.0, f64::INFINITY, -1.0, -1.0, s, q),
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            Law::Atoms { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (x, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *x;
                    }
                }
                *values.last().expect("atoms are nonempty")
            }
            Law::Gaussian => StandardNormal.sample(rng),
            Law::GaussianMixture(c) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = c.last().expect("components are nonempty");
                for comp in c {
                    acc += comp.weight;
                    if u < acc {
                        pick = comp;
                        break;
                    }
                }
                let z: f64 = StandardNormal.sample(rng);
                pick.mean + pick.sd * z
            }
            Law::Uniform => rng.random_range(-SQRT3..SQRT3),
            Law::ShiftedExponential => {
                let e: f64 = Exp1.sample(rng);
                e - 1.0
            }
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// Weighted nodes `(x, w)` representing the law: exact atoms for
    /// discrete laws, a composite Gauss-Legendre discretization otherwise.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let ln_density: Box<dyn Fn(f64) -> f64> = match &self.law {
            Law::Atoms { values, probs } => {
                return values.iter().copied().zip(probs.iter().copied()).collect();
            }
            Law::Gaussian => Box::new(|x| -0.5 * x * x - LN_SQRT_2PI),
            Law::GaussianMixture(c) => {
                let c = c.clone();
                Box::new(move |x| {
                    c.iter()
                        .map(|c| {
                            c.weight * (-0.5 * ((x - c.mean) / c.sd).powi(2) - LN_SQRT_2PI).exp()
                                / c.sd
                        })
                        .sum::<f64>()
                        .ln()
                })
            }
            Law::Uniform => Box::new(|_| -(2.0 * SQRT3).ln()),
            Law::ShiftedExponential => Box::new(|x| -(x + 1.0)),
        };
        let (lo, hi) = self.support(10.0);
        let mut out = Vec::new();
        gauss_legendre_composite(lo, hi, 40, |x, w| out.push((x, w * ln_density(x).exp())));
        let total: f64 = out.iter().map(|n| n.1).sum();
        out.iter_mut().for_each(|n| n.1 /= total);
        out
    }
}

/// Real roots of `a x² + b x + c = 0` (`a ≥ 0`), ascending, using the
/// cancellation-free form.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a == 0.0 {
        if b == 0.0 {
            return None;
        }
        let r = -c / b;
        return Some((r, r));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let t = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if t == 0.0 { (0.0, 0.0) } else { (t / a, c / t) };
    Some((r1.min(r2), r1.max(r2)))
}

/// Tilted expectation for a density `exp(log_norm + slope·x)` on `[lo, hi]`.
/// The log-integrand is a concave quadratic, so the region within
/// `WINDOW_LOG_DEPTH` of its peak is found in closed form and covered by a
/// fixed Gauss-Legendre rule.
fn log_linear_tilted(lo: f64, hi: f64, slope: f64, log_norm: f64, s: f64, q: f64) -> Tilted {
    let b = s + slope;
    let exponent = |x: f64| b * x - 0.5 * q * x * x;
    let peak = if q > 0.0 {
        (b / q).clamp(lo, hi)
    } else if b > 0.0 {
        hi
    } else {
        lo
    };
    let top = exponent(peak);
    let target = top - WINDOW_LOG_DEPTH;
    // exponent(x) >= target  <=>  (q/2) x² - b x + target <= 0
    let (mut a, mut c) = (lo, hi);
    if let Some((r1, r2)) = quadratic_roots(0.5 * q, -b, target) {
        if q > 0.0 {
            a = a.max(r1);
            c = c.min(r2);
        } else if b < 0.0 {
            c = c.min(r1);
        } else if b > 0.0 {
            a = a.max(r1);
        }
    }
    debug_assert!(a.is_finite() && c.is_finite() && c >= a);
    let mut z = 0.0;
    let mut zx = 0.0;
    gauss_legendre_composite(a, c, WINDOW_PANELS, |x, w| {
        let v = w * (exponent(x) - top).exp();
        z += v;
        zx += v * x;
    });
    Tilted {
        ln_z: log_norm + top + z.ln(),
        mean: zx / z,
    }
}

/// Affinely transform a law to zero mean and unit variance.
pub fn standardize(raw: &RawLaw) -> Result<ScalarSource> {
    let check_var = |v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ZeroVariance)
        }
    };
    match raw {
        RawLaw::Normal { variance, .. } => {
            check_var(*variance)?;
            Ok(ScalarSource::gaussian())
        }
        RawLaw::Uniform { lo, hi } => {
            check_var(hi - lo)?;
            Ok(ScalarSource::uniform())
        }
        RawLaw::Exponential { rate } => {
            if !(*rate > 0.0 && rate.is_finite()) {
                return Err(Error::invalid("exponential rate must be positive"));
            }
            Ok(ScalarSource::shifted_exponential())
        }
        RawLaw::Atoms { values, probs } => {
            if values.is_empty() || values.len() != probs.len() {
                return Err(Error::invalid(
                    "atoms need matching nonempty values and probabilities",
                ));
            }
            if probs.iter().any(|p| !(*p >= 0.0)) || values.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(
                    "atom probabilities must be nonnegative and values finite",
                ));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "atom probabilities sum to {total}, not 1"
                )));
            }
            let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
            let mean: f64 = values.iter().zip(&probs).map(|(x, p)| p * x).sum();
            let var: f64 = values
                .iter()
                .zip(&probs)
                .map(|(x, p)| p * (x - mean).powi(2))
                .sum();
            let sd = check_var(var)?.sqrt();
            let mut values: Vec<f64> = values.iter().map(|x| (x - mean) / sd).collect();
            // second pass removes the residual rounding in the mean
            let resid: f64 = values.iter().zip(&probs).map(|(x, p)| p * x).sum();
            values.iter_mut().for_each(|x| *x -= resid);
            let var: f64 = values.iter().zip(&probs).map(|(x, p)| p * x * x).sum();
            let sd = var.sqrt();
            values.iter_mut().for_each(|x| *x /= sd);
            Ok(ScalarSource::from_law(Law::Atoms { values, probs }))
        }
        RawLaw::Mixture(comps) => {
            if comps.is_empty()
                || comps.iter().any(|c| {
                    !(c.weight >= 0.0 && c.sd > 0.0 && c.mean.is_finite() && c.sd.is_finite())
                })
            {
                return Err(Error::invalid(
                    "mixture needs nonnegative weights and positive finite sds",
                ));
            }
            let total: f64 = comps.iter().map(|c| c.weight).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "mixture weights sum to {total}, not 1"
                )));
            }
            let comps: Vec<MixtureComponent> = comps
                .iter()
                .filter(|c| c.weight > 0.0)
                .map(|c| MixtureComponent {
                    weight: c.weight / total,
                    ..*c
                })
                .collect();
            let mean: f64 = comps.iter().map(|c| c.weight * c.mean).sum();
            let second: f64 = comps
                .iter()
                .map(|c| c.weight * ((c.mean - mean).powi(2) + c.sd * c.sd))
                .sum();
            let sd = check_var(second)?.sqrt();
            let comps = comps
                .into_iter()
                .map(|c| MixtureComponent {
                    weight: c.weight,
                    mean: (c.mean - mean) / sd,
                    sd: c.sd / sd,
                })
                .collect();
            Ok(ScalarSource::from_law(Law::GaussianMixture(comps)))
        }
    }
}

impl ScalarSource {
    /// The law expressed as a raw law, for round trips through [`standardize`].
    pub fn to_raw(&self) -> RawLaw {
        match &self.law {
            Law::Atoms { values, probs } => RawLaw::Atoms {
                values: values.clone(),
                probs: probs.clone(),
            },
            Law::Gaussian => RawLaw::Normal {
                mean: 0.0,
                variance: 1.0,
            },
            Law::GaussianMixture(c) => RawLaw::Mixture(c.clone()),
            Law::Uniform => RawLaw::Uniform {
                lo: -SQRT3,
                hi: SQRT3,
            },
            Law::ShiftedExponential => RawLaw::Exponential { rate: 1.0 },
        }
    }
}

impl fmt::Display for ScalarSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.law {
            Law::Atoms { values, probs }
                if values.len() == 2
                    && values[0] == -1.0
                    && values[1] == 1.0
                    && probs[0] == 0.5 =>
            {
                write!(f, "rademacher")
            }
            Law::Atoms { values, probs } => {
                let parts: Vec<String> = values
                    .iter()
                    .zip(probs)
                    .map(|(x, p)| format!("{x}:{p}"))
                    .collect();
                write!(f, "atoms:{}", parts.join(","))
            }
            Law::Gaussian => write!(f, "gaussian"),
            Law::GaussianMixture(c) => {
                let parts: Vec<String> = c
                    .iter()
                    .map(|c| format!("{},{},{}", c.weight, c.mean, c.sd))
                    .collect();
                write!(f, "mixture({})", parts.join(";"))
            }
            Law::Uniform => write!(f, "uniform"),
            Law::ShiftedExponential => write!(f, "expstd"),
        }
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{t}'")))
        })
        .collect()
}

impl FromStr for ScalarSource {
    type Err = Error;

    /// Accepts `rademacher`, `gaussian`, `uniform`, `expstd`,
    /// `mix:w,mu1,sigma1,mu2,sigma2` and `atoms:x1:p1,x2:p2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "rademacher" => return Ok(Self::rademacher()),
            "gaussian" | "normal" => return Ok(Self::gaussian()),
            "uniform" => return Ok(Self::uniform()),
            "expstd" | "exponential" => return Ok(Self::shifted_exponential()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("mix:") {
            let v = parse_numbers(rest)?;
            if v.len() != 5 {
                return Err(Error::invalid("mix needs w,mu1,sigma1,mu2,sigma2"));
            }
            if !(0.0..=1.0).contains(&v[0]) {
                return Err(Error::invalid("mixture weight outside [0, 1]"));
            }
            return Self::mixture(v[0], v[1], v[2], v[3], v[4]);
        }
        if let Some(rest) = s.strip_prefix("atoms:") {
            let mut values = Vec::new();
            let mut probs = Vec::new();
            for pair in rest.split(',') {
                let (x, p) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::invalid(format!("atom '{pair}' is not x:p")))?;
                values.push(
                    x.trim()
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad atom value '{x}'")))?,
                );
                probs.push(
                    p.trim()
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad atom probability '{p}'")))?,
                );
            }
            return Self::atoms(values, probs);
        }
        Err(Error::invalid(format!("unknown source '{s}'")))
    }
}

/// Law of the tone amplitude `a_i`.
///
/// `Unit` (`a ≡ 1`) is admitted although `E a ≠ 0`: the uniform phase
/// already makes each tone's signal zero-mean. `GaussianPair` is the tone
/// with independent Gaussian cosine and sine coefficients, whose output is
/// exactly Gaussian.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum AmplitudeLaw {
    #[default]
    Unit,
    GaussianPair,
    Random(ScalarSource),
}

impl AmplitudeLaw {
    /// Weighted amplitude nodes `(a, w)`; `None` for the Gaussian pair.
    pub fn amplitude_nodes(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            AmplitudeLaw::Unit => Some(vec![(1.0, 1.0)]),
            AmplitudeLaw::GaussianPair => None,
            AmplitudeLaw::Random(src) => Some(src.nodes()),
        }
    }
}

impl fmt::Display for AmplitudeLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmplitudeLaw::Unit => write!(f, "unit"),
            AmplitudeLaw::GaussianPair => write!(f, "gaussian-pair"),
            AmplitudeLaw::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for AmplitudeLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unit" => Ok(AmplitudeLaw::Unit),
            "gaussian-pair" | "gaussian" => Ok(AmplitudeLaw::GaussianPair),
            other => Ok(AmplitudeLaw::Random(
                other.strip_prefix("random:").unwrap_or(other).parse()?,
            )),
        }
    }
}
