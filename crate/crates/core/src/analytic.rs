//! Closed-form fields for constant detuning and their long-time limits.
//!
//! With `a = nu0 sin(beta) cos(beta)` and the pulse variable `s = tau - tau'`,
//!
//! ```text
//! Upsilon = i a e^{i nu0 sin^2 zeta} ∫ Psi0(s) e^{i nu0 cos^2 (tau - s)} J0(x) ds
//! Psi     = e^{i nu0 sin^2 zeta} [Psi0(tau) - 2 a^2 zeta ∫ Psi0(s) e^{i nu0 cos^2 (tau - s)} J1(x)/x ds]
//! ```
//!
//! where `x = 2 a sqrt(zeta (tau - s))` and `s` runs over `[0, min(tau, S)]`,
//! `S` being the end of the pulse support. Both kernels are entire functions
//! of `tau - s`, so the integrands are smooth up to the endpoint.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Frame, Grid, PolaritonField, Provenance, PulseSpec};
use crate::quadrature::{self, GaussLegendre};
use crate::specfun::{j0, j1_over_x};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureScheme {
    /// Composite trapezoid on panels resolving the local oscillation, with Richardson extrapolation.
    RegularizedTrapezoid,
    #[serde(rename = "adaptive_gk")]
    AdaptiveGK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvolutionQuadrature {
    pub scheme: QuadratureScheme,
    pub rel_tol: f64,
}

impl Default for ConvolutionQuadrature {
    fn default() -> Self {
        Self {
            scheme: QuadratureScheme::RegularizedTrapezoid,
            rel_tol: 1e-8,
        }
    }
}

impl ConvolutionQuadrature {
    pub fn new(scheme: QuadratureScheme, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidParams(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
        }
        Ok(Self { scheme, rel_tol })
    }
}

/// Coupling `a = nu0 sin(beta) cos(beta)` between the two polariton types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingConstant {
    pub a: f64,
}

impl CouplingConstant {
    pub fn new(nu0: f64, beta: f64) -> Self {
        let (s, c) = beta.sin_cos();
        // exact zeros at the decoupled angles
        let a = if beta == 0.0 || (beta.abs() - PI / 2.0).abs() < 4.0 * f64::EPSILON {
            0.0
        } else {
            nu0 * s * c
        };
        Self { a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseDirection {
    ToPrimed,
    FromPrimed,
}

/// `chi(zeta, tau) = nu0 (sin^2(beta) zeta + cos^2(beta) tau)`.
pub fn chi(nu0: f64, beta: f64, zeta: f64, tau: f64) -> f64 {
    let (s, c) = beta.sin_cos();
    nu0 * (s * s * zeta + c * c * tau)
}

/// Multiplies both fields by `e^{-i chi}` (to primed) or `e^{+i chi}` (back).
pub fn phase_transform(field: &PolaritonField, nu0: f64, beta: f64, direction: PhaseDirection) -> Result<PolaritonField> {
    field.check_shape()?;
    let (expected, target, sign) = match direction {
        PhaseDirection::ToPrimed => (Frame::Unprimed, Frame::Primed, -1.0),
        PhaseDirection::FromPrimed => (Frame::Primed, Frame::Unprimed, 1.0),
    };
    if field.frame != expected {
        return Err(Error::FrameMismatch {
            expected,
            found: field.frame,
        });
    }
    let g = field.grid;
    let phase = Array2::from_shape_fn(g.shape(), |(i, j)| {
        Complex64::from_polar(1.0, sign * chi(nu0, beta, g.zeta(i), g.tau(j)))
    });
    Ok(PolaritonField {
        grid: g,
        psi: &field.psi * &phase,
        upsilon: &field.upsilon * &phase,
        frame: target,
        provenance: field.provenance,
    })
}

/// Point evaluator for the closed-form fields of one parameter set.
#[derive(Debug, Clone)]
pub struct ClosedForm<'a> {
    pub pulse: &'a PulseSpec,
    pub nu0: f64,
    pub beta: f64,
    pub quadrature: ConvolutionQuadrature,
    a: f64,
    c2: f64,
    s2: f64,
    support: f64,
}

impl<'a> ClosedForm<'a> {
    pub fn new(pulse: &'a PulseSpec, nu0: f64, beta: f64, quadrature: ConvolutionQuadrature) -> Result<Self> {
        pulse.validate()?;
        if !nu0.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams("nu0 and beta must be finite".into()));
        }
        let (s, c) = beta.sin_cos();
        Ok(Self {
            pulse,
            nu0,
            beta,
            quadrature,
            a: CouplingConstant::new(nu0, beta).a,
            c2: c * c,
            s2: s * s,
            support: pulse.support_end(),
        })
    }

    pub fn coupling(&self) -> f64 {
        self.a
    }

    fn check_point(zeta: f64, tau: f64) -> Result<()> {
        if !(zeta >= 0.0) || !(tau >= 0.0) || !zeta.is_finite() || !tau.is_finite() {
            return Err(Error::Domain(format!("need finite zeta, tau >= 0, got ({zeta}, {tau})")));
        }
        Ok(())
    }

    /// Number of starting panels so each resolves 1/8 of the shortest local period.
    fn initial_panels(&self, zeta: f64, len: f64) -> usize {
        let carrier = self.nu0.abs() * self.c2;
        // the Bessel phase 2|a| sqrt(zeta y) has slope |a| sqrt(zeta / y); it only
        // oscillates once its argument exceeds ~1, i.e. for y >= 1 / (4 a^2 zeta)
        let bessel = 2.0 * self.a * self.a * zeta;
        let envelope = 2.0 / self.pulse.tau_p;
        let k = carrier + bessel + envelope;
        let period = 2.0 * PI / k;
        ((8.0 * len / period).ceil() as usize).clamp(4, 1 << 20)
    }

    fn convolve<K: Fn(f64) -> f64 + Sync>(&self, zeta: f64, tau: f64, kernel: K) -> Result<Complex64> {
        let hi = tau.min(self.support);
        if hi <= 0.0 {
            return Ok(Complex64::default());
        }
        let (a, nu_c2, pulse) = (self.a, self.nu0 * self.c2, self.pulse);
        let (nu0, beta) = (self.nu0, self.beta);
        let f = |s: f64| {
            let y = (tau - s).max(0.0);
            let x = 2.0 * a * (zeta * y).sqrt();
            pulse.value(nu0, beta, s) * Complex64::from_polar(kernel(x), nu_c2 * y)
        };
        let q = self.quadrature;
        let est = match q.scheme {
            QuadratureScheme::RegularizedTrapezoid => {
                quadrature::romberg(f, 0.0, hi, self.initial_panels(zeta, hi), q.rel_tol, 0.0, 16)?
            }
            QuadratureScheme::AdaptiveGK => quadrature::gauss_kronrod(f, 0.0, hi, q.rel_tol, 0.0, 20_000)?,
        };
        Ok(est.value)
    }

    pub fn psi(&self, zeta: f64, tau: f64) -> Result<Complex64> {
        Self::check_point(zeta, tau)?;
        let direct = self.pulse.value(self.nu0, self.beta, tau);
        if zeta == 0.0 || self.a == 0.0 {
            return Ok(direct * Complex64::from_polar(1.0, self.nu0 * self.s2 * zeta));
        }
        let conv = self.convolve(zeta, tau, j1_over_x)?;
        let front = Complex64::from_polar(1.0, self.nu0 * self.s2 * zeta);
        Ok(front * (direct - conv * (2.0 * self.a * self.a * zeta)))
    }

    pub fn upsilon(&self, zeta: f64, tau: f64) -> Result<Complex64> {
        Self::check_point(zeta, tau)?;
        if tau == 0.0 || self.a == 0.0 {
            return Ok(Complex64::default());
        }
        let conv = self.convolve(zeta, tau, j0)?;
        Ok(I * self.a * Complex64::from_polar(1.0, self.nu0 * self.s2 * zeta) * conv)
    }
}

pub fn evaluate_psi(zeta: f64, tau: f64, pulse: &PulseSpec, nu0: f64, beta: f64, q: ConvolutionQuadrature) -> Result<Complex64> {
    ClosedForm::new(pulse, nu0, beta, q)?.psi(zeta, tau)
}

pub fn evaluate_upsilon(zeta: f64, tau: f64, pulse: &PulseSpec, nu0: f64, beta: f64, q: ConvolutionQuadrature) -> Result<Complex64> {
    ClosedForm::new(pulse, nu0, beta, q)?.upsilon(zeta, tau)
}

/// Both fields on every grid node; rows of constant `zeta` run in parallel.
pub fn field_on_grid(grid: Grid, pulse: &PulseSpec, nu0: f64, beta: f64, q: ConvolutionQuadrature) -> Result<PolaritonField> {
    grid.validate()?;
    let cf = ClosedForm::new(pulse, nu0, beta, q)?;
    let (nz, nt) = grid.shape();
    let rows: Vec<Vec<(Complex64, Complex64)>> = (0..nz)
        .into_par_iter()
        .map(|i| {
            let z = grid.zeta(i);
            (0..nt)
                .map(|j| {
                    let t = grid.tau(j);
                    Ok((cf.psi(z, t)?, cf.upsilon(z, t)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut field = PolaritonField::zeros(grid, Frame::Unprimed, Provenance::Analytic);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, (p, u)) in row.into_iter().enumerate() {
            field.psi[[i, j]] = p;
            field.upsilon[[i, j]] = u;
        }
    }
    Ok(field)
}

/// Long-time `1/sqrt(tau)` law for `∫|Upsilon|^2 dzeta`, with the
/// `tau`-independent Fourier factor computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongTimeAsymptote {
    pub a: f64,
    pub zeta_l: f64,
    pub tau_p: f64,
    /// `|∫ Psi0(t) e^{-i nu0 cos^2(beta) t} dt|^2`.
    pub fourier_factor: f64,
}

/// Value of the asymptotic norm together with the validity numbers it relies on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticNorm {
    pub value: f64,
    /// `|a| sqrt(zeta_L tau)`, should be `>> 1`.
    pub cond1: f64,
    /// `|a| sqrt(zeta_L / tau) tau_p`, should be `<< 1`.
    pub cond2: f64,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
}

impl LongTimeAsymptote {
    pub fn new(pulse: &PulseSpec, nu0: f64, beta: f64, zeta_l: f64) -> Result<Self> {
        pulse.validate()?;
        if !(zeta_l > 0.0) {
            return Err(Error::InvalidParams(format!("zeta_L must be > 0, got {zeta_l}")));
        }
        let c2 = beta.cos().powi(2);
        let end = pulse.support_end();
        let est = quadrature::gauss_kronrod(
            |t: f64| pulse.value(nu0, beta, t) * Complex64::from_polar(1.0, -nu0 * c2 * t),
            0.0,
            end,
            1e-12,
            0.0,
            5000,
        )?;
        Ok(Self {
            a: CouplingConstant::new(nu0, beta).a,
            zeta_l,
            tau_p: pulse.tau_p,
            fourier_factor: est.value.norm_sqr(),
        })
    }

    pub fn at(&self, tau: f64) -> Result<AsymptoticNorm> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("asymptotic norm needs tau > 0, got {tau}")));
        }
        let a = self.a.abs();
        let cond1 = a * (self.zeta_l * tau).sqrt();
        let cond2 = a * (self.zeta_l / tau).sqrt() * self.tau_p;
        Ok(AsymptoticNorm {
            value: a / PI * (self.zeta_l / tau).sqrt() * self.fourier_factor,
            cond1,
            cond2,
            cond1_ok: cond1 >= crate::analysis::MUCH_GREATER,
            cond2_ok: cond2 <= crate::analysis::MUCH_LESS,
        })
    }
}

pub fn asymptotic_upsilon_norm(pulse: &PulseSpec, nu0: f64, beta: f64, zeta_l: f64, tau: f64) -> Result<AsymptoticNorm> {
    LongTimeAsymptote::new(pulse, nu0, beta, zeta_l)?.at(tau)
}

/// `sin(k d) / (pi d)`, continued to `k / pi` at `d = 0`.
pub fn sinc_kernel(k: f64, d: f64) -> f64 {
    let x = k * d;
    if x.abs() < 1e-4 {
        k / PI * (1.0 - x * x / 6.0)
    } else {
        x.sin() / (PI * d)
    }
}

/// Sinc-kernel approximation of `∫|Upsilon|^2 dzeta`, valid once
/// `|a| sqrt(zeta_L tau) >> 1`. Returns the value and that condition number.
pub fn sinc_kernel_upsilon_norm(pulse: &PulseSpec, nu0: f64, beta: f64, zeta_l: f64, tau: f64) -> Result<(f64, f64)> {
    pulse.validate()?;
    if !(tau > 0.0) || !(zeta_l > 0.0) {
        return Err(Error::Domain(format!("need tau > 0 and zeta_L > 0, got {tau}, {zeta_l}")));
    }
    let a = CouplingConstant::new(nu0, beta).a.abs();
    let cond1 = a * (zeta_l * tau).sqrt();
    let k = a * (zeta_l / tau).sqrt();
    let c2 = beta.cos().powi(2);
    let hi = tau.min(pulse.support_end());
    // panels resolve the kernel, the carrier and the envelope
    let rate = k + nu0.abs() * c2 + 2.0 / pulse.tau_p;
    let panels = ((hi * rate / 2.0).ceil() as usize).max(4);
    let gl = GaussLegendre::new(16);
    let (xs, ws) = gl.composite_points(0.0, hi, panels);
    let g: Vec<Complex64> = xs
        .iter()
        .zip(&ws)
        .map(|(&t, &w)| pulse.value(nu0, beta, t) * Complex64::from_polar(w, -nu0 * c2 * t))
        .collect();
    let mut total = 0.0;
    for p in 0..xs.len() {
        // kernel is symmetric: diagonal once, off-diagonal twice
        total += g[p].norm_sqr() * sinc_kernel(k, 0.0);
        for q in 0..p {
            total += 2.0 * (g[p] * g[q].conj()).re * sinc_kernel(k, xs[p] - xs[q]);
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::INFINITY,
            target: 0.0,
        });
    }
    Ok((total, cond1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> PulseSpec {
        PulseSpec::default()
    }

    #[test]
    fn boundary_values_are_exact() {
        let p = pulse();
        let q = ConvolutionQuadrature::default();
        for &t in &[0.0, 0.7, 3.0, 8.5] {
            assert_eq!(evaluate_psi(0.0, t, &p, 5.0, PI / 4.0, q).unwrap(), p.value(5.0, PI / 4.0, t));
        }
        for &z in &[0.0, 0.3, 1.0] {
            assert_eq!(evaluate_upsilon(z, 0.0, &p, 5.0, PI / 4.0, q).unwrap(), Complex64::default());
        }
    }

    #[test]
    fn zero_detuning_decouples() {
        let p = pulse();
        let q = ConvolutionQuadrature::default();
        assert_eq!(evaluate_psi(0.8, 2.5, &p, 0.0, PI / 4.0, q).unwrap(), p.value(0.0, 0.0, 2.5));
        assert_eq!(evaluate_upsilon(0.8, 2.5, &p, 0.0, PI / 4.0, q).unwrap(), Complex64::default());
    }

    #[test]
    fn coupling_vanishes_at_decoupled_angles() {
        assert_eq!(CouplingConstant::new(3.0, 0.0).a, 0.0);
        assert_eq!(CouplingConstant::new(3.0, PI / 2.0).a, 0.0);
        assert_eq!(CouplingConstant::new(3.0, -PI / 2.0).a, 0.0);
        assert!((CouplingConstant::new(1.0, PI / 4.0).a - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chi_arithmetic() {
        assert!((chi(1.0, PI / 4.0, 0.0, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_round_trip_and_frame_check() {
        let g = Grid::new(1.0, 4.0, 3, 5).unwrap();
        let mut f = PolaritonField::zeros(g, Frame::Unprimed, Provenance::Analytic);
        for ((i, j), v) in f.psi.indexed_iter_mut() {
            *v = Complex64::new(i as f64 + 0.5, j as f64 - 1.0);
        }
        f.upsilon.fill(Complex64::new(0.3, -0.2));
        let p = phase_transform(&f, 2.0, 0.4, PhaseDirection::ToPrimed).unwrap();
        assert_eq!(p.frame, Frame::Primed);
        assert!(matches!(
            phase_transform(&p, 2.0, 0.4, PhaseDirection::ToPrimed),
            Err(Error::FrameMismatch { .. })
        ));
        let back = phase_transform(&p, 2.0, 0.4, PhaseDirection::FromPrimed).unwrap();
        for (x, y) in back.psi.iter().zip(f.psi.iter()) {
            assert!((x - y).norm() < 1e-15 * (1.0 + y.norm()));
        }
        let id = phase_transform(&f, 0.0, 0.4, PhaseDirection::ToPrimed).unwrap();
        assert_eq!(id.psi, f.psi);
    }

    #[test]
    fn schemes_agree() {
        let p = pulse();
        let tr = ConvolutionQuadrature::default();
        let gk = ConvolutionQuadrature::new(QuadratureScheme::AdaptiveGK, 1e-10).unwrap();
        for &(z, t) in &[(1.0, 3.0), (0.4, 6.0), (1.0, 40.0)] {
            let a = evaluate_upsilon(z, t, &p, 5.0, PI / 4.0, tr).unwrap();
            let b = evaluate_upsilon(z, t, &p, 5.0, PI / 4.0, gk).unwrap();
            assert!((a - b).norm() < 1e-7, "{a} vs {b}");
            let a = evaluate_psi(z, t, &p, 5.0, PI / 4.0, tr).unwrap();
            let b = evaluate_psi(z, t, &p, 5.0, PI / 4.0, gk).unwrap();
            assert!((a - b).norm() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn small_grid_matches_point_evaluators() {
        let p = pulse();
        let q = ConvolutionQuadrature::default();
        let g = Grid::new(0.5, 4.0, 2, 4).unwrap();
        let f = field_on_grid(g, &p, 5.0, PI / 4.0, q).unwrap();
        assert_eq!(f.upsilon[[2, 3]], evaluate_upsilon(0.5, 3.0, &p, 5.0, PI / 4.0, q).unwrap());
        assert_eq!(f.psi[[0, 4]], p.value(5.0, PI / 4.0, 4.0));
    }

    #[test]
    fn asymptote_scaling() {
        let p = pulse();
        let la = LongTimeAsymptote::new(&p, 1.0, PI / 4.0, 1.0).unwrap();
        let r = la.at(100.0).unwrap().value / la.at(400.0).unwrap().value;
        assert!((r - 2.0).abs() < 1e-12);
        assert!(la.at(0.0).is_err());
        assert_eq!(asymptotic_upsilon_norm(&p, 0.0, PI / 4.0, 1.0, 10.0).unwrap().value, 0.0);
        // detuned carrier makes the Fourier factor |∫|Psi0||^2
        let d = LongTimeAsymptote::new(&p.clone().with_detuned_carrier(true), 1.0, PI / 4.0, 1.0).unwrap();
        assert!((d.fourier_factor - PI).abs() < 1e-3);
    }

    #[test]
    fn sinc_diagonal_limit() {
        assert_eq!(sinc_kernel(2.0, 0.0), 2.0 / PI);
        assert!((sinc_kernel(2.0, 1e-9) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc_kernel(2.0, 0.5) - 1f64.sin() / (0.5 * PI)).abs() < 1e-15);
    }
}
