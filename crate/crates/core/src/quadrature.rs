//! One-dimensional quadrature over real and complex integrands.
//!
//! Convergence is always judged against `rel_tol * ∫|f|`, so integrals that
//! cancel to (nearly) zero still terminate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Integrand: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    /// Estimated absolute error.
    pub error: f64,
    /// Estimate of `∫|f|`, the scale used for relative convergence.
    pub scale: f64,
    pub evaluations: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
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

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    scale: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn qk15<T: Integrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Panel<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = WGK[7] * fc.magnitude();
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let scale_len = half.abs();
    let raw = ((kronrod - gauss) * half).magnitude();
    let resabs = resabs * scale_len;
    let resasc = resasc * scale_len;
    let mut error = raw;
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error,
        scale: resabs,
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]`.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol * ∫|f|)`; fails after `max_panels` subdivisions.
pub fn gauss_kronrod<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate<T>>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
            scale: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = qk15(&mut f, a, b);
    let mut error = first.error;
    let mut scale = first.scale;
    let mut evaluations = 15;
    heap.push(first);
    loop {
        let mut target = abs_tol.max(rel_tol * scale);
        if error <= target {
            // incremental sums can cancel catastrophically after a huge panel is split
            error = heap.iter().map(|p: &Panel<T>| p.error).sum();
            scale = heap.iter().map(|p: &Panel<T>| p.scale).sum();
            target = abs_tol.max(rel_tol * scale);
            if error <= target {
                break;
            }
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature {
                achieved: error,
                target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be bisected in floating point
            return Err(Error::Quadrature {
                achieved: error,
                target,
            });
        }
        let left = qk15(&mut f, worst.a, mid);
        let right = qk15(&mut f, mid, worst.b);
        evaluations += 30;
        error += left.error + right.error - worst.error;
        scale += left.scale + right.scale - worst.scale;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the rounding accumulated by incremental updates
    let (mut v, mut e, mut s) = (T::default(), 0.0, 0.0);
    for p in heap.iter() {
        v = v + p.value;
        e += p.error;
        s += p.scale;
    }
    Ok(Estimate {
        value: v,
        error: e,
        scale: s,
        evaluations,
    })
}

/// Composite trapezoid rule with Richardson (Romberg) extrapolation.
///
/// Starts from `initial_panels` panels and halves the step up to
/// `max_levels` times.
pub fn romberg<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_levels: usize,
) -> Result<Estimate<T>>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    let n0 = initial_panels.max(1);
    let len = b - a;
    if len == 0.0 {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
            scale: 0.0,
            evaluations: 0,
        });
    }
    let mut h = len / n0 as f64;
    let fa = f(a);
    let fb = f(b);
    let mut sum = (fa + fb) * 0.5;
    let mut abs_sum = 0.5 * (fa.magnitude() + fb.magnitude());
    for k in 1..n0 {
        let v = f(a + k as f64 * h);
        sum = sum + v;
        abs_sum += v.magnitude();
    }
    let mut evaluations = n0 + 1;
    let mut prev_row = vec![sum * h];
    let mut panels = n0;
    let mut last_error = f64::INFINITY;
    for level in 1..=max_levels {
        // midpoints of the current panels
        let mut mid = T::default();
        for k in 0..panels {
            let v = f(a + (k as f64 + 0.5) * h);
            mid = mid + v;
            abs_sum += v.magnitude();
        }
        evaluations += panels;
        sum = sum + mid;
        panels *= 2;
        h *= 0.5;
        let mut row = Vec::with_capacity(level + 1);
        row.push(sum * h);
        let mut factor = 1.0;
        for m in 1..=level {
            factor *= 4.0;
            let r = row[m - 1] + (row[m - 1] - prev_row[m - 1]) * (1.0 / (factor - 1.0));
            row.push(r);
        }
        let error = (row[level] - prev_row[level - 1]).magnitude();
        let scale = abs_sum * h;
        last_error = error;
        if level >= 2 && error <= abs_tol.max(rel_tol * scale) {
            return Ok(Estimate {
                value: row[level],
                error,
                scale,
                evaluations,
            });
        }
        prev_row = row;
    }
    Err(Error::Quadrature {
        achieved: last_error,
        target: abs_tol.max(rel_tol * abs_sum * h),
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule over `panels` equal panels of `[a, b]`.
    pub fn composite<T: Integrand, F: FnMut(f64) -> T>(&self, mut f: F, a: f64, b: f64, panels: usize) -> T {
        let h = (b - a) / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let c = lo + 0.5 * h;
            let mut s = T::default();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s = s + f(c + 0.5 * h * x) * *w;
            }
            acc = acc + s * (0.5 * h);
        }
        acc
    }

    /// Nodes and weights of the composite rule, mapped onto `[a, b]`.
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(c + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
