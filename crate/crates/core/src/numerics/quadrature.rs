use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use once_cell::sync::Lazy;

use super::neumaier_sum;
use crate::error::{Error, Result};

/// Tolerances and truncation settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Half-width of truncated infinite domains, in standard deviations of
    /// the Gaussian envelope.
    pub tail_width: f64,
}

impl QuadratureConfig {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_subdivisions: usize,
        tail_width: f64,
    ) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol.is_finite()) || !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if max_subdivisions < 1 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        if !(tail_width >= 6.0) {
            return Err(Error::invalid("tail_width must be at least 6"));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
            tail_width,
        })
    }

    /// Settings for divergence values that feed fourth-order differencing.
    pub fn precise() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-28,
            max_subdivisions: 4000,
            tail_width: 10.0,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_width: 10.0,
        }
    }
}

/// Integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Finite interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// The real line, truncated at `center ± tail_width * scale`.
    Line { center: f64, scale: f64 },
    /// Radial half-line `r ≥ 0` of a rotation-invariant planar integrand,
    /// truncated at `tail_width * scale`. The `2πr` Jacobian is applied by
    /// [`integrate`], so `f` is the planar integrand as a function of radius.
    Radial { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Result<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval(f, center)?;
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
    })
}

const INITIAL_PANELS: usize = 4;

fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if !(lo.is_finite() && hi.is_finite()) || !(hi > lo) {
        return Err(Error::invalid(format!(
            "empty or non-finite domain [{lo}, {hi}]"
        )));
    }
    let tol = |v: f64| cfg.abs_tol.max(cfg.rel_tol * v.abs());

    let mut heap = BinaryHeap::new();
    let width = (hi - lo) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for i in 0..INITIAL_PANELS {
        let a = lo + width * i as f64;
        let b = if i + 1 == INITIAL_PANELS {
            hi
        } else {
            a + width
        };
        let p = kronrod_panel(&mut f, a, b)?;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    let mut subdivisions = 0;
    while total_err > tol(total) {
        if subdivisions >= cfg.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi)
            || (worst.hi - worst.lo) < 1e3 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
        {
            heap.push(worst);
            break;
        }
        let left = kronrod_panel(&mut f, worst.lo, mid)?;
        let right = kronrod_panel(&mut f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = neumaier_sum(panels.iter().map(|p| p.value));
    let error = neumaier_sum(panels.iter().map(|p| p.error));
    if error > tol(value) {
        return Err(Error::NonConvergence {
            estimate: value,
            error,
            subdivisions,
        });
    }
    Ok(Integral {
        value,
        error,
        subdivisions,
    })
}

/// Adaptive Gauss-Kronrod (7/15) integration with global error control.
///
/// Deterministic: panel selection breaks ties on position and the final sum
/// runs in domain order, so identical inputs give bit-identical output.
pub fn integrate<F>(mut f: F, domain: Domain, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    match domain {
        Domain::Interval { lo, hi } => adaptive(f, lo, hi, cfg),
        Domain::Line { center, scale } => {
            let w = cfg.tail_width * scale;
            adaptive(f, center - w, center + w, cfg)
        }
        Domain::Radial { scale } => {
            let r_max = cfg.tail_width * scale;
            adaptive(move |r| 2.0 * PI * r * f(r), 0.0, r_max, cfg)
        }
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub static GAUSS_LEGENDRE_20: Lazy<GaussLegendre> = Lazy::new(|| GaussLegendre::new(20));

/// Fixed composite 20-point Gauss-Legendre rule over `panels` equal panels.
/// Calls `visit(x, w)` for every node with its weight.
pub fn gauss_legendre_composite<V: FnMut(f64, f64)>(lo: f64, hi: f64, panels: usize, mut visit: V) {
    let rule = &*GAUSS_LEGENDRE_20;
    let width = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + width * p as f64;
        let c = a + 0.5 * width;
        let h = 0.5 * width;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            visit(c + h * x, h * w);
        }
    }
}
