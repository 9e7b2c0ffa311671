//! Bessel functions of the first kind, orders zero and one, on the real line.
//!
//! Three argument ranges are used:
//!
//! * `|x| <= 2`: ascending power series,
//! * `2 < |x| <= 20`: Miller's backward recurrence normalised with
//!   `J0 + 2 (J2 + J4 + ...) = 1`,
//! * `|x| > 20`: Hankel asymptotic expansion with the phase/amplitude
//!   polynomials `P_n`, `Q_n` summed to their smallest term.
//!
//! Parity is enforced by reflection, so `j0(-x) == j0(x)` and
//! `j1(-x) == -j1(x)` hold bit for bit.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 2.0;
const ASYMPTOTIC_CUTOFF: f64 = 20.0;

/// Advertised accuracy of [`j0`] and [`j1`] against an extended-precision
/// power-series reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselAccuracy {
    pub max_rel_error: f64,
}

impl BesselAccuracy {
    /// Absolute error floor used where the function value is close to a zero.
    pub const NEAR_ZERO_ABS: f64 = 1e-14;

    pub fn at(x: f64) -> Self {
        let max_rel_error = if x.abs() <= 50.0 { 1e-12 } else { 1e-10 };
        Self { max_rel_error }
    }

    /// True if `value` agrees with `reference` within the advertised bound.
    pub fn accepts(&self, value: f64, reference: f64) -> bool {
        let err = (value - reference).abs();
        err <= self.max_rel_error * reference.abs() || err <= Self::NEAR_ZERO_ABS
    }
}

/// `J0(x)`; rejects non-finite input.
pub fn bessel_j0(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(j0(x))
}

/// `J1(x)`; rejects non-finite input.
pub fn bessel_j1(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(j1(x))
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Bessel function argument {x} is not finite")))
    }
}

/// Unchecked `J0(x)` for hot loops. Returns NaN for non-finite input.
pub fn j0(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let ax = x.abs();
    if ax <= SERIES_CUTOFF {
        series_j0(ax)
    } else if ax <= ASYMPTOTIC_CUTOFF {
        miller(ax).0
    } else {
        hankel(0, ax)
    }
}

/// Unchecked `J1(x)` for hot loops. Returns NaN for non-finite input.
pub fn j1(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax <= SERIES_CUTOFF {
        ax * series_j1_over_x(ax)
    } else if ax <= ASYMPTOTIC_CUTOFF {
        miller(ax).1
    } else {
        hankel(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `J1(x) / x`, continued to `1/2` at the origin.
pub fn j1_over_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_CUTOFF {
        series_j1_over_x(ax)
    } else {
        j1(ax) / ax
    }
}

fn series_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() <= f64::EPSILON * 0.5 * sum.abs() {
            break;
        }
    }
    sum
}

fn series_j1_over_x(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5;
    let mut sum = 0.5;
    for k in 1..40 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term.abs() <= f64::EPSILON * 0.5 * sum.abs() {
            break;
        }
    }
    sum
}

/// Backward recurrence `J_{k-1} = (2k/x) J_k - J_{k+1}` from an even start
/// order well above `x`, returning `(J0, J1)`.
fn miller(x: f64) -> (f64, f64) {
    let start = 2 * ((1.4 * x + 30.0) / 2.0).ceil() as usize;
    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{k+1}
    let mut current = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        // `current` now holds J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * current;
        }
        if k == 2 {
            j1 = current;
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    let j0 = current;
    norm += j0;
    (j0 / norm, j1 / norm)
}

/// Hankel asymptotic expansion for order `n` in {0, 1}, `x > 0` large.
fn hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= last {
            break;
        }
        last = next.abs();
        term = next;
        // terms alternate in pairs: +t0, +t1, -t2, -t3, +t4, ...
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // cos/sin of x - pi/4 (n = 0) or x - 3pi/4 (n = 1) without forming the shifted phase
    let (cos_chi, sin_chi) = match n {
        0 => ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2),
        _ => ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2),
    };
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}
