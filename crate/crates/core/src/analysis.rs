//! Observables built on the polariton fields: stored spin norm, conversion
//! efficiency, the in/out balance, pulse containment and regime diagnostics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ClosedForm;
use crate::error::{Error, Result};
use crate::model::{PolaritonField, Provenance, PulseSpec};
use crate::quadrature;

/// A value counts as "much greater than" its reference at this ratio.
pub const MUCH_GREATER: f64 = 10.0;
/// A value counts as "much less than" its reference at this ratio.
pub const MUCH_LESS: f64 = 0.1;

fn trapezoid(values: impl ExactSizeIterator<Item = f64>, h: f64) -> f64 {
    let n = values.len();
    let mut sum = 0.0;
    for (k, v) in values.enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        sum += w * v;
    }
    sum * h
}

/// Fractional column index of `tau` on the field's grid.
fn column(field: &PolaritonField, tau: f64) -> Result<(usize, f64)> {
    let g = field.grid;
    if !(tau >= 0.0 && tau <= g.tau_max * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange {
            what: "tau",
            value: tau,
            lo: 0.0,
            hi: g.tau_max,
        });
    }
    if let Some(j) = field.tau_index(tau) {
        return Ok((j, 0.0));
    }
    let x = tau / g.dtau();
    let j = (x.floor() as usize).min(g.n_tau - 1);
    Ok((j, x - j as f64))
}

/// `∫_0^{zeta_max} |Upsilon(zeta, tau)|^2 dzeta` by the trapezoid rule, linear in
/// `tau` between grid columns.
pub fn upsilon_norm(field: &PolaritonField, tau: f64) -> Result<f64> {
    field.check_shape()?;
    let (j, w) = column(field, tau)?;
    let h = field.grid.dzeta();
    let at = |j: usize| trapezoid(field.upsilon.column(j).iter().map(|v| v.norm_sqr()), h);
    if w == 0.0 {
        Ok(at(j))
    } else {
        Ok((1.0 - w) * at(j) + w * at(j + 1))
    }
}

/// The same norm from the closed form, by adaptive quadrature in `zeta`.
pub fn upsilon_norm_analytic(cf: &ClosedForm, zeta_l: f64, tau: f64) -> Result<f64> {
    if !(zeta_l >= 0.0) {
        return Err(Error::Domain(format!("zeta_L must be >= 0, got {zeta_l}")));
    }
    if tau == 0.0 || zeta_l == 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let est = quadrature::gauss_kronrod(
        |z: f64| match cf.upsilon(z, tau) {
            Ok(v) => v.norm_sqr(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        zeta_l,
        cf.quadrature.rel_tol.max(1e-10),
        0.0,
        400,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    pub tau: Vec<f64>,
    pub eta: Vec<f64>,
    /// Pulse energy used as the denominator.
    pub normalization: f64,
    pub provenance: Provenance,
}

impl EfficiencyCurve {
    /// Sample with the largest efficiency, `(tau, eta)`.
    pub fn max(&self) -> Option<(f64, f64)> {
        self.tau
            .iter()
            .zip(&self.eta)
            .map(|(&t, &e)| (t, e))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn checked_energy(pulse: &PulseSpec) -> Result<f64> {
    let e = pulse.energy()?;
    if !(e > 0.0) {
        return Err(Error::InvalidParams("pulse energy must be > 0".into()));
    }
    Ok(e)
}

/// `eta(tau)` from a sampled field.
pub fn efficiency_curve(field: &PolaritonField, pulse: &PulseSpec, taus: &[f64]) -> Result<EfficiencyCurve> {
    let e = checked_energy(pulse)?;
    let eta = taus
        .iter()
        .map(|&t| upsilon_norm(field, t).map(|n| n / e))
        .collect::<Result<_>>()?;
    Ok(EfficiencyCurve {
        tau: taus.to_vec(),
        eta,
        normalization: e,
        provenance: field.provenance,
    })
}

/// `eta(tau)` straight from the closed form; samples are evaluated in parallel.
pub fn efficiency_curve_analytic(cf: &ClosedForm, zeta_l: f64, taus: &[f64]) -> Result<EfficiencyCurve> {
    let e = checked_energy(cf.pulse)?;
    let eta = taus
        .par_iter()
        .map(|&t| upsilon_norm_analytic(cf, zeta_l, t).map(|n| n / e))
        .collect::<Result<_>>()?;
    Ok(EfficiencyCurve {
        tau: taus.to_vec(),
        eta,
        normalization: e,
        provenance: Provenance::Analytic,
    })
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
pub fn golden_max<F: FnMut(f64) -> Result<f64>>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximum efficiency: the best sample of `curve`, polished by golden section
/// on the closed form between its neighbours.
pub fn refine_max_efficiency(cf: &ClosedForm, zeta_l: f64, curve: &EfficiencyCurve) -> Result<(f64, f64)> {
    let k = curve
        .eta
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::InvalidParams("empty efficiency curve".into()))?;
    let lo = curve.tau[k.saturating_sub(1)];
    let hi = curve.tau[(k + 1).min(curve.tau.len() - 1)];
    if hi <= lo {
        return Ok((curve.tau[k], curve.eta[k]));
    }
    let e = curve.normalization;
    let (t, v) = golden_max(|t| upsilon_norm_analytic(cf, zeta_l, t).map(|n| n / e), lo, hi, 1e-6 * (hi - lo).max(1e-12))?;
    Ok(if v >= curve.eta[k] { (t, v) } else { (curve.tau[k], curve.eta[k]) })
}

/// Relative residual of the balance
/// `∫|Upsilon(zeta, tau)|^2 dzeta = ∫_0^tau |Psi(0)|^2 - ∫_0^tau |Psi(zeta_max)|^2`,
/// all three terms taken from the sampled field.
pub fn conservation_residual(field: &PolaritonField, pulse: &PulseSpec, tau: f64) -> Result<f64> {
    field.check_shape()?;
    let e = checked_energy(pulse)?;
    let j = field.tau_index(tau).ok_or(Error::OutOfRange {
        what: "tau (grid node)",
        value: tau,
        lo: 0.0,
        hi: field.grid.tau_max,
    })?;
    let stored = upsilon_norm(field, tau)?;
    let k = field.grid.dtau();
    let last = field.grid.n_zeta;
    let flux = |i: usize| trapezoid(field.psi.row(i).iter().take(j + 1).map(|v| v.norm_sqr()), k);
    Ok((stored - flux(0) + flux(last)).abs() / e)
}

/// The same balance evaluated from the closed form with adaptive quadrature.
pub fn conservation_residual_analytic(cf: &ClosedForm, zeta_l: f64, tau: f64) -> Result<f64> {
    let e = checked_energy(cf.pulse)?;
    let stored = upsilon_norm_analytic(cf, zeta_l, tau)?;
    let incoming = cf.pulse.energy_until(tau)?;
    let mut failure = None;
    let outgoing = quadrature::gauss_kronrod(
        |t: f64| match cf.psi(zeta_l, t) {
            Ok(v) => v.norm_sqr(),
            Err(err) => {
                failure.get_or_insert(err);
                0.0
            }
        },
        0.0,
        tau,
        1e-11,
        1e-14 * e,
        4000,
    )?
    .value;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok((stored - incoming + outgoing).abs() / e)
}

/// Largest fraction of the pulse energy inside a window of temporal width `zeta_l`,
/// `max_tau ∫_{tau - zeta_l}^{tau} |Psi0|^2 / ∫ |Psi0|^2`.
pub fn containment_fraction(pulse: &PulseSpec, zeta_l: f64) -> Result<f64> {
    if !(zeta_l > 0.0) {
        return Err(Error::Domain(format!("zeta_L must be > 0, got {zeta_l}")));
    }
    let e = checked_energy(pulse)?;
    let end = pulse.support_end();
    if zeta_l >= end {
        return Ok(pulse.energy_until(end)? / e);
    }
    let window = |t: f64| -> Result<f64> {
        let lo = (t - zeta_l).max(0.0);
        let hi = t.min(end);
        if hi <= lo {
            return Ok(0.0);
        }
        let est = quadrature::gauss_kronrod(|x: f64| pulse.envelope(x).norm_sqr(), lo, hi, 1e-13, 0.0, 500)?;
        Ok(est.value / e)
    };
    let step = 0.01 * pulse.tau_p;
    let n = ((end + zeta_l) / step).ceil() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..=n {
        let t = k as f64 * step;
        let v = window(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let (_, v) = golden_max(window, (best.0 - step).max(0.0), best.0 + step, 1e-9 * pulse.tau_p)?;
    Ok(v.max(best.1))
}

/// Least-squares slope of `ln eta` against `ln tau` over samples in `[lo, hi]`.
pub fn asymptotic_exponent_fit(curve: &EfficiencyCurve, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .tau
        .iter()
        .zip(&curve.eta)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(&t, &e)| (t, e))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParams(format!("need >= 2 samples in [{lo}, {hi}]")));
    }
    if let Some((t, e)) = pts.iter().find(|(t, e)| !(*e > 0.0) || !(*t > 0.0)) {
        return Err(Error::Domain(format!("cannot fit a power law through eta({t}) = {e}")));
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|(t, _)| t.ln()).sum::<f64>() / n;
    let ym = pts.iter().map(|(_, e)| e.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, e) in &pts {
        let dx = t.ln() - xm;
        sxy += dx * (e.ln() - ym);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(Error::Domain("all samples share one tau".into()));
    }
    Ok(sxy / sxx)
}

/// Delta-kernel limit `∫_0^tau |Psi0|^2 / ∫_0^∞ |Psi0|^2`.
pub fn extremal_efficiency_estimate(pulse: &PulseSpec, tau: f64) -> Result<f64> {
    let e = checked_energy(pulse)?;
    Ok(pulse.energy_until(tau.max(0.0))? / e)
}

/// Dimensionless inputs for [`regime_report`]. The absorption conditions are only
/// reported when the optical density and EIT window are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInputs {
    pub nu0: f64,
    pub beta: f64,
    pub zeta_l: f64,
    pub tau: f64,
    pub tau_p: f64,
    pub optical_density: Option<f64>,
    pub delta_omega_eit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorption {
    /// `|nu0| sqrt(sqrt(s) tau_p / dw)`, should be `<< 1`.
    pub cond3_value: f64,
    /// `tau_p dw`.
    pub k_p: f64,
    /// `sqrt(s) K_p`.
    pub cond4_lhs: f64,
    /// `(dw / nu0)^2`; absent for `nu0 = 0`.
    pub cond4_rhs: Option<f64>,
    /// `|nu0| / dw`.
    pub nu_in_window: f64,
    pub cond3_ok: bool,
    pub k_p_ok: bool,
    pub cond4_ok: bool,
    pub nu_in_window_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// `|a| sqrt(zeta_L tau)`, should be `>> 1`.
    pub cond1_value: f64,
    /// `|a| sqrt(zeta_L / tau) tau_p`, should be `<< 1`.
    pub cond2_value: f64,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
    pub absorption: Option<Absorption>,
}

pub fn regime_report(r: &RegimeInputs) -> Result<RegimeReport> {
    let vals = [r.nu0, r.beta, r.zeta_l, r.tau, r.tau_p];
    if vals.iter().any(|v| !v.is_finite()) || r.zeta_l < 0.0 || r.tau < 0.0 || !(r.tau_p > 0.0) {
        return Err(Error::InvalidParams(format!("invalid regime inputs {r:?}")));
    }
    let a = crate::analytic::CouplingConstant::new(r.nu0, r.beta).a.abs();
    let cond1 = a * (r.zeta_l * r.tau).sqrt();
    let cond2 = if r.tau > 0.0 {
        a * (r.zeta_l / r.tau).sqrt() * r.tau_p
    } else if a == 0.0 || r.zeta_l == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let absorption = match (r.optical_density, r.delta_omega_eit) {
        (Some(s), Some(dw)) => {
            if !(s > 0.0) || !(dw > 0.0) || !s.is_finite() || !dw.is_finite() {
                return Err(Error::InvalidParams("optical density and EIT window must be > 0".into()));
            }
            let nu = r.nu0.abs();
            let k_p = r.tau_p * dw;
            let cond3 = nu * (s.sqrt() * r.tau_p / dw).sqrt();
            let lhs = s.sqrt() * k_p;
            let rhs = (nu > 0.0).then(|| (dw / nu).powi(2));
            Some(Absorption {
                cond3_value: cond3,
                k_p,
                cond4_lhs: lhs,
                cond4_rhs: rhs,
                nu_in_window: nu / dw,
                cond3_ok: cond3 <= MUCH_LESS,
                k_p_ok: k_p >= MUCH_GREATER,
                cond4_ok: rhs.is_some_and(|rhs| lhs >= MUCH_GREATER * rhs),
                nu_in_window_ok: nu / dw <= MUCH_LESS,
            })
        }
        _ => None,
    };
    Ok(RegimeReport {
        cond1_value: cond1,
        cond2_value: cond2,
        cond1_ok: cond1 >= MUCH_GREATER,
        cond2_ok: cond2 <= MUCH_LESS,
        absorption,
    })
}

/// `Psi` on the exit column as a time series, for plotting and retrieval checks.
pub fn exit_signal(field: &PolaritonField) -> Vec<Complex64> {
    field.psi.row(field.grid.n_zeta).to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub n_zeta: usize,
    pub n_tau: usize,
    /// `max |Goursat - closed form|` over both fields at the base-grid nodes, over the pulse peak.
    pub deviation: f64,
    /// `log2` of the previous rung's deviation over this one.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLadder {
    pub rungs: Vec<LadderRung>,
    /// Order between the two finest rungs.
    pub observed_order: f64,
}

/// Goursat solutions on `base` refined `levels - 1` times, each compared with the
/// closed form on the nodes of `base`.
pub fn goursat_convergence(
    pulse: &PulseSpec,
    nu0: f64,
    beta: f64,
    base: crate::model::Grid,
    levels: usize,
    q: crate::analytic::ConvolutionQuadrature,
) -> Result<ConvergenceLadder> {
    use crate::model::DetuningProfile;
    use crate::pde::{solve_goursat, GoursatScheme};

    if levels < 2 {
        return Err(Error::InvalidParams("a convergence ladder needs at least 2 levels".into()));
    }
    let reference = crate::analytic::field_on_grid(base, pulse, nu0, beta, q)?;
    let peak = pulse.peak();
    let nu = DetuningProfile::Constant(nu0);
    let mut rungs: Vec<LadderRung> = Vec::with_capacity(levels);
    let mut grid = base;
    for level in 0..levels {
        let f = 1usize << level;
        let s = solve_goursat(pulse, &nu, beta, grid, GoursatScheme::default())?;
        let mut dev: f64 = 0.0;
        for ((i, j), r) in reference.psi.indexed_iter() {
            dev = dev.max((s.psi[[i * f, j * f]] - r).norm());
            dev = dev.max((s.upsilon[[i * f, j * f]] - reference.upsilon[[i, j]]).norm());
        }
        let deviation = dev / peak;
        let order = rungs.last().map(|p| (p.deviation / deviation).log2());
        rungs.push(LadderRung {
            n_zeta: grid.n_zeta,
            n_tau: grid.n_tau,
            deviation,
            order,
        });
        grid = grid.refined();
    }
    let observed_order = rungs.last().and_then(|r| r.order).unwrap_or(f64::NAN);
    Ok(ConvergenceLadder { rungs, observed_order })
}

/// `max |Goursat - closed form| / peak` on `grid`, sampled every `stride` nodes in each direction.
pub fn goursat_deviation(
    pulse: &PulseSpec,
    nu0: f64,
    beta: f64,
    grid: crate::model::Grid,
    stride: usize,
    q: crate::analytic::ConvolutionQuadrature,
) -> Result<f64> {
    use crate::model::DetuningProfile;
    use crate::pde::{solve_goursat, GoursatScheme};

    let stride = stride.max(1);
    let s = solve_goursat(pulse, &DetuningProfile::Constant(nu0), beta, grid, GoursatScheme::default())?;
    let cf = ClosedForm::new(pulse, nu0, beta, q)?;
    let nodes: Vec<(usize, usize)> = (0..=grid.n_zeta)
        .step_by(stride)
        .flat_map(|i| (0..=grid.n_tau).step_by(stride).map(move |j| (i, j)))
        .collect();
    let devs = nodes
        .par_iter()
        .map(|&(i, j)| {
            let (z, t) = (grid.zeta(i), grid.tau(j));
            let dp = (s.psi[[i, j]] - cf.psi(z, t)?).norm();
            let du = (s.upsilon[[i, j]] - cf.upsilon(z, t)?).norm();
            Ok(dp.max(du))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max) / pulse.peak())
}
