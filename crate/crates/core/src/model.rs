//! Medium parameters, signal pulses, detuning schedules and sampled fields.
//!
//! The reduced (polariton) solvers work in units where the pulse duration
//! `tau_p` sets the time scale; `zeta = z / v_g` carries time units as well,
//! so a medium is described by `zeta_L / tau_p`. Physical [`MediumParams`]
//! are only needed by the lab-frame Maxwell-Bloch solver.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Ratio `Omega / (kappa sqrt(n1d))` below which the slow-light reduction
/// is considered valid.
pub const SLOW_LIGHT_RATIO_MAX: f64 = 0.1;

/// Pulse tails are truncated where the envelope drops below this fraction
/// of its peak.
pub const TAIL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Total control Rabi frequency; `Omega_1 = Omega cos(beta)`, `Omega_2 = Omega sin(beta)`.
    pub omega: f64,
    pub beta: f64,
    /// Radiative decay rate of the excited state.
    pub gamma: f64,
    /// Resonant optical density `s`.
    pub optical_density: f64,
    pub length: f64,
    /// Phase-front speed of the signal field.
    pub c: f64,
    /// Linear atomic density `N / L`.
    pub n1d: f64,
}

impl MediumParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega,
            self.beta,
            self.gamma,
            self.optical_density,
            self.length,
            self.c,
            self.n1d,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("medium parameters must be finite".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams(format!("Omega must be > 0, got {}", self.omega)));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.optical_density <= 0.0 || self.length <= 0.0 || self.c <= 0.0 || self.n1d <= 0.0 {
            return Err(Error::InvalidParams(
                "optical density, length, c and n1d must all be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Number of atoms in the interaction volume.
    pub fn atom_number(&self) -> f64 {
        self.n1d * self.length
    }

    /// `kappa = sqrt(gamma s c / (2 N))`.
    pub fn kappa(&self) -> f64 {
        (self.gamma * self.optical_density * self.c / (2.0 * self.atom_number())).sqrt()
    }

    /// Collective coupling `kappa sqrt(n1d)`.
    pub fn collective_coupling(&self) -> f64 {
        self.kappa() * self.n1d.sqrt()
    }

    pub fn rabi_1(&self) -> f64 {
        self.omega * self.beta.cos()
    }

    pub fn rabi_2(&self) -> f64 {
        self.omega * self.beta.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub kappa: f64,
    /// Mixing angle, `tan(theta) = kappa sqrt(n1d) / Omega`.
    pub theta: f64,
    pub v_g: f64,
    /// `L / v_g`.
    pub zeta_l: f64,
    /// EIT window `Omega^2 / (gamma sqrt(s))`; infinite when `gamma = 0`.
    pub delta_omega_eit: f64,
    /// `sin^2(theta) sin^2(beta) + cos^2(beta)`, the factor turning `nu` into the effective detuning.
    pub nu_tilde_factor: f64,
    /// Effective control angle, `tan(beta~) = sin(theta) tan(beta)`.
    pub beta_tilde: f64,
    /// `Omega / (kappa sqrt(n1d))`.
    pub slow_light_ratio: f64,
    /// False when the slow-light reduction is not justified (the lab-frame solver still is).
    pub slow_light: bool,
}

pub fn derive_params(m: &MediumParams) -> Result<DerivedParams> {
    m.validate()?;
    let kappa = m.kappa();
    if !(kappa > 0.0) {
        return Err(Error::InvalidParams("kappa must be > 0 (gamma = 0 gives no coupling)".into()));
    }
    let g = kappa * m.n1d.sqrt();
    let theta = (g / m.omega).atan();
    // cos^2(theta) = Omega^2 / (Omega^2 + g^2), written to stay accurate for Omega << g
    let cos2 = m.omega * m.omega / (m.omega * m.omega + g * g);
    let sin2 = 1.0 - cos2;
    let v_g = m.c * cos2;
    let (sb, cb) = m.beta.sin_cos();
    let delta_omega_eit = m.omega * m.omega / (m.gamma * m.optical_density.sqrt());
    let slow_light_ratio = m.omega / g;
    Ok(DerivedParams {
        kappa,
        theta,
        v_g,
        zeta_l: m.length / v_g,
        delta_omega_eit,
        nu_tilde_factor: sin2 * sb * sb + cb * cb,
        beta_tilde: (theta.sin() * sb).atan2(cb),
        slow_light_ratio,
        slow_light: slow_light_ratio < SLOW_LIGHT_RATIO_MAX,
    })
}

/// Complex envelope samples, linearly interpolated and zero outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedEnvelope {
    pub times: Vec<f64>,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl TabulatedEnvelope {
    pub fn new(times: Vec<f64>, values: &[Complex64]) -> Result<Self> {
        let t = Self {
            times,
            re: values.iter().map(|v| v.re).collect(),
            im: values.iter().map(|v| v.im).collect(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() < 2 || self.re.len() != self.times.len() {
            return Err(Error::InvalidParams(
                "tabulated pulse needs >= 2 samples with matching lengths".into(),
            ));
        }
        if !self.im.is_empty() && self.im.len() != self.times.len() {
            return Err(Error::InvalidParams("tabulated pulse: `im` length mismatch".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("tabulated pulse times must increase strictly".into()));
        }
        if self.times[0] < 0.0 {
            return Err(Error::InvalidParams("tabulated pulse must start at t >= 0".into()));
        }
        Ok(())
    }

    fn sample(&self, k: usize) -> Complex64 {
        Complex64::new(self.re[k], self.im.get(k).copied().unwrap_or(0.0))
    }

    fn eval(&self, t: f64) -> Complex64 {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return Complex64::default();
        }
        let k = match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        self.sample(k) * (1.0 - w) + self.sample(k + 1) * w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PulseShape {
    /// `exp(-(t - t0)^2 / tau_p^2) - exp(-(t + t0)^2 / tau_p^2)` with `t0 = center_offset * tau_p`,
    /// which vanishes at `t = 0`.
    GaussianDifference,
    Tabulated(TabulatedEnvelope),
}

/// Incoming signal envelope `Psi_0(tau)` at the medium entrance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub amplitude: f64,
    pub tau_p: f64,
    pub center_offset: f64,
    /// Multiply by `exp(i nu0 cos^2(beta) tau)`, the detuning that phase-matches the spin coupling.
    pub detuned_carrier: bool,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self::gaussian_difference(1.0, 1.0, 3.0, false)
    }
}

impl PulseSpec {
    pub fn gaussian_difference(amplitude: f64, tau_p: f64, center_offset: f64, detuned_carrier: bool) -> Self {
        Self {
            shape: PulseShape::GaussianDifference,
            amplitude,
            tau_p,
            center_offset,
            detuned_carrier,
        }
    }

    pub fn tabulated(envelope: TabulatedEnvelope, amplitude: f64, detuned_carrier: bool) -> Result<Self> {
        envelope.validate()?;
        Ok(Self {
            shape: PulseShape::Tabulated(envelope),
            amplitude,
            tau_p: 1.0,
            center_offset: 0.0,
            detuned_carrier,
        })
    }

    pub fn with_detuned_carrier(mut self, on: bool) -> Self {
        self.detuned_carrier = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !(self.tau_p > 0.0) || !self.tau_p.is_finite() {
            return Err(Error::InvalidParams(
                "pulse amplitude must be finite and tau_p > 0".into(),
            ));
        }
        if !self.center_offset.is_finite() || self.center_offset < 0.0 {
            return Err(Error::InvalidParams("pulse center_offset must be >= 0".into()));
        }
        if let PulseShape::Tabulated(t) = &self.shape {
            t.validate()?;
        }
        Ok(())
    }

    /// Envelope without the optional carrier phase; exactly zero for `tau <= 0`.
    pub fn envelope(&self, tau: f64) -> Complex64 {
        if !(tau > 0.0) {
            return Complex64::default();
        }
        match &self.shape {
            PulseShape::GaussianDifference => {
                let t0 = self.center_offset * self.tau_p;
                let a = (tau - t0) / self.tau_p;
                let b = (tau + t0) / self.tau_p;
                Complex64::new(self.amplitude * ((-a * a).exp() - (-b * b).exp()), 0.0)
            }
            PulseShape::Tabulated(t) => t.eval(tau) * self.amplitude,
        }
    }

    /// `Psi_0(tau)` including the carrier phase when `detuned_carrier` is set.
    pub fn value(&self, nu0: f64, beta: f64, tau: f64) -> Complex64 {
        let env = self.envelope(tau);
        if self.detuned_carrier && env != Complex64::default() {
            let c = beta.cos();
            env * Complex64::from_polar(1.0, nu0 * c * c * tau)
        } else {
            env
        }
    }

    /// End of the support: beyond it the envelope is below [`TAIL_THRESHOLD`] of its peak.
    pub fn support_end(&self) -> f64 {
        match &self.shape {
            PulseShape::GaussianDifference => {
                (self.center_offset + (1.0 / TAIL_THRESHOLD).ln().sqrt()) * self.tau_p
            }
            PulseShape::Tabulated(t) => *t.times.last().expect("validated non-empty"),
        }
    }

    /// Points where the envelope is not smooth (inside `(0, support_end)`).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            PulseShape::GaussianDifference => Vec::new(),
            PulseShape::Tabulated(t) => t.times.iter().copied().filter(|&x| x > 0.0).collect(),
        }
    }

    /// Largest envelope modulus.
    pub fn peak(&self) -> f64 {
        match &self.shape {
            PulseShape::GaussianDifference => {
                let t0 = self.center_offset * self.tau_p;
                self.envelope(t0.max(1e-300)).norm()
            }
            PulseShape::Tabulated(t) => {
                (0..t.times.len()).map(|k| t.sample(k).norm()).fold(0.0, f64::max) * self.amplitude.abs()
            }
        }
    }

    /// `∫_0^∞ |Psi_0|^2 dtau`.
    pub fn energy(&self) -> Result<f64> {
        self.validate()?;
        self.energy_until(f64::INFINITY)
    }

    /// `∫_0^t |Psi_0|^2 dtau`.
    pub fn energy_until(&self, t: f64) -> Result<f64> {
        let end = self.support_end().min(t);
        if !(end > 0.0) || self.amplitude == 0.0 {
            return Ok(0.0);
        }
        match &self.shape {
            PulseShape::GaussianDifference => {
                let est = quadrature::gauss_kronrod(
                    |x: f64| self.envelope(x).norm_sqr(),
                    0.0,
                    end,
                    1e-13,
                    0.0,
                    500,
                )?;
                Ok(est.value)
            }
            PulseShape::Tabulated(tab) => {
                // |linear interpolant|^2 is quadratic per segment; Simpson is exact
                let mut sum = 0.0;
                for w in tab.times.windows(2) {
                    let (a, b) = (w[0], w[1].min(end));
                    if b <= a {
                        break;
                    }
                    let fa = self.envelope(a.max(0.0)).norm_sqr();
                    let fm = self.envelope(0.5 * (a + b)).norm_sqr();
                    let fb = self.envelope(b).norm_sqr();
                    sum += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
                }
                if !sum.is_finite() {
                    return Err(Error::InvalidParams("tabulated pulse is not normalizable".into()));
                }
                Ok(sum)
            }
        }
    }
}

/// Convenience wrapper matching the free-function form used elsewhere.
pub fn pulse_value(p: &PulseSpec, nu0: f64, beta: f64, tau: f64) -> Complex64 {
    p.value(nu0, beta, tau)
}

pub fn pulse_energy(p: &PulseSpec) -> Result<f64> {
    p.energy()
}

/// Two-photon detuning `nu(t)` of the second control field, in lab time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum DetuningProfile {
    Constant(f64),
    /// `(start_time, nu)` segments; each value holds until the next start.
    PiecewiseConstant(Vec<(f64, f64)>),
    /// `(time, nu)` samples, linearly interpolated and held constant beyond the ends.
    Tabulated(Vec<(f64, f64)>),
}

impl DetuningProfile {
    pub fn piecewise(segments: Vec<(f64, f64)>) -> Result<Self> {
        let p = Self::PiecewiseConstant(segments);
        p.validate()?;
        Ok(p)
    }

    /// `nu0` until lab time `t_switch`, zero afterwards.
    pub fn switched_off_at(nu0: f64, t_switch: f64) -> Result<Self> {
        Self::piecewise(vec![(0.0, nu0), (t_switch, 0.0)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::InvalidParams("detuning must be finite".into()));
                }
            }
            Self::PiecewiseConstant(s) => {
                if s.is_empty() || s[0].0 > 0.0 {
                    return Err(Error::InvalidParams(
                        "piecewise detuning must start at t <= 0".into(),
                    ));
                }
                if s.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::InvalidParams(
                        "piecewise detuning segments must be ordered and non-overlapping".into(),
                    ));
                }
                if s.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidParams("detuning must be finite".into()));
                }
            }
            Self::Tabulated(s) => {
                if s.is_empty() || s.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::InvalidParams(
                        "tabulated detuning needs increasing sample times".into(),
                    ));
                }
                if s.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidParams("detuning must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::PiecewiseConstant(s) => {
                let k = s.partition_point(|&(start, _)| start <= t);
                s[k.saturating_sub(1)].1
            }
            Self::Tabulated(s) => {
                let k = s.partition_point(|&(time, _)| time <= t);
                if k == 0 {
                    s[0].1
                } else if k >= s.len() {
                    s[s.len() - 1].1
                } else {
                    let (t0, v0) = s[k - 1];
                    let (t1, v1) = s[k];
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            }
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Self::Constant(v) => Some(*v),
            _ => None,
        }
    }

    /// Largest `|nu|` over the profile.
    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Constant(v) => v.abs(),
            Self::PiecewiseConstant(s) | Self::Tabulated(s) => s.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max),
        }
    }
}

/// Uniform grid on `[0, zeta_max] x [0, tau_max]`; counts are numbers of intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_zeta: usize,
    pub n_tau: usize,
    pub zeta_max: f64,
    pub tau_max: f64,
}

impl Grid {
    pub fn new(zeta_max: f64, tau_max: f64, n_zeta: usize, n_tau: usize) -> Result<Self> {
        let g = Self {
            n_zeta,
            n_tau,
            zeta_max,
            tau_max,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_zeta == 0 || self.n_tau == 0 {
            return Err(Error::InvalidParams("grid needs at least one interval per axis".into()));
        }
        if !(self.zeta_max >= 0.0) || !(self.tau_max >= 0.0) || !self.zeta_max.is_finite() || !self.tau_max.is_finite() {
            return Err(Error::InvalidParams("grid extents must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn dzeta(&self) -> f64 {
        self.zeta_max / self.n_zeta as f64
    }

    pub fn dtau(&self) -> f64 {
        self.tau_max / self.n_tau as f64
    }

    pub fn zeta(&self, i: usize) -> f64 {
        if i == self.n_zeta {
            self.zeta_max
        } else {
            i as f64 * self.dzeta()
        }
    }

    pub fn tau(&self, j: usize) -> f64 {
        if j == self.n_tau {
            self.tau_max
        } else {
            j as f64 * self.dtau()
        }
    }

    /// Node counts `(n_zeta + 1, n_tau + 1)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.n_zeta + 1, self.n_tau + 1)
    }

    /// Same extents with every interval halved.
    pub fn refined(&self) -> Self {
        Self {
            n_zeta: 2 * self.n_zeta,
            n_tau: 2 * self.n_tau,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Fields with the phase `chi(zeta, tau)` removed.
    Primed,
    Unprimed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    GoursatPde,
    MaxwellBloch,
}

/// `Psi` and `Upsilon` sampled on a grid, indexed `[zeta, tau]`.
#[derive(Debug, Clone)]
pub struct PolaritonField {
    pub grid: Grid,
    pub psi: Array2<Complex64>,
    pub upsilon: Array2<Complex64>,
    pub frame: Frame,
    pub provenance: Provenance,
}

impl PolaritonField {
    pub fn zeros(grid: Grid, frame: Frame, provenance: Provenance) -> Self {
        Self {
            grid,
            psi: Array2::zeros(grid.shape()),
            upsilon: Array2::zeros(grid.shape()),
            frame,
            provenance,
        }
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.psi.dim() != self.grid.shape() || self.upsilon.dim() != self.grid.shape() {
            return Err(Error::InvalidParams(format!(
                "field arrays {:?}/{:?} do not match grid {:?}",
                self.psi.dim(),
                self.upsilon.dim(),
                self.grid.shape()
            )));
        }
        Ok(())
    }

    /// Index of the grid node at `tau`, if `tau` lies on one (to rounding).
    pub fn tau_index(&self, tau: f64) -> Option<usize> {
        let h = self.grid.dtau();
        let j = (tau / h).round();
        if j < 0.0 || j as usize > self.grid.n_tau {
            return None;
        }
        ((tau - j * h).abs() <= 1e-9 * h.max(1.0)).then_some(j as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn medium(ratio: f64) -> MediumParams {
        // pick c so that kappa sqrt(n1d) = Omega / ratio with gamma = 1, s = 100, L = 1
        let omega = 1.0;
        let g = omega / ratio;
        let s = 100.0;
        MediumParams {
            omega,
            beta: PI / 4.0,
            gamma: 1.0,
            optical_density: s,
            length: 1.0,
            c: 2.0 * g * g / s,
            n1d: 1.0e4,
        }
    }

    #[test]
    fn group_velocity_at_ratio_one_tenth() {
        let m = medium(0.1);
        let d = derive_params(&m).unwrap();
        assert!((d.slow_light_ratio - 0.1).abs() < 1e-12);
        assert!((d.v_g / m.c - 0.01 / 1.01).abs() < 1e-15);
        assert!((d.v_g / m.c - 9.901e-3).abs() < 1e-6);
        assert!(!d.slow_light, "ratio exactly 0.1 is not < 0.1");
        assert!((d.zeta_l - m.length / d.v_g).abs() < 1e-12);
    }

    #[test]
    fn vanishing_control_stops_light() {
        let mut m = medium(0.1);
        m.omega = 1e-9;
        let d = derive_params(&m).unwrap();
        assert!(d.v_g / m.c < 1e-18);
        assert!((d.theta - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn eit_window_arithmetic() {
        let mut m = medium(0.05);
        m.optical_density = 100.0;
        m.gamma = 1.0;
        m.omega = 1.0;
        let d = derive_params(&m).unwrap();
        assert!((d.delta_omega_eit - 0.1).abs() < 1e-15);
    }

    #[test]
    fn tilde_quantities_approach_plain_ones() {
        let d = derive_params(&medium(0.01)).unwrap();
        assert!((d.nu_tilde_factor - 1.0).abs() < 1e-4);
        assert!((d.beta_tilde - PI / 4.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_medium() {
        let mut m = medium(0.1);
        m.omega = 0.0;
        assert!(derive_params(&m).is_err());
        let mut m = medium(0.1);
        m.gamma = -1.0;
        assert!(derive_params(&m).is_err());
    }

    #[test]
    fn pulse_boundary_and_peak() {
        let p = PulseSpec::default();
        assert_eq!(p.value(1.0, PI / 4.0, 0.0), Complex64::default());
        let peak = p.value(0.0, PI / 4.0, 3.0);
        assert!((peak.re - (1.0 - (-36.0f64).exp())).abs() < 1e-15);
        assert_eq!(peak.im, 0.0);
        // continuity at 0+: of order e^{-9} slope times tau
        assert!(p.value(0.0, 0.0, 1e-6).norm() < 1e-8);
    }

    #[test]
    fn detuned_carrier_phase() {
        let p = PulseSpec::default().with_detuned_carrier(true);
        let v = p.value(1.0, PI / 4.0, 3.0);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!((v.arg() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn pulse_energy_values() {
        let p = PulseSpec::default();
        let e = p.energy().unwrap();
        assert!((e - (PI / 2.0).sqrt()).abs() < 1e-3);
        let d = p.clone().with_detuned_carrier(true).energy().unwrap();
        assert_eq!(e, d);
        let zero = PulseSpec::gaussian_difference(0.0, 1.0, 3.0, false);
        assert_eq!(zero.energy().unwrap(), 0.0);
    }

    #[test]
    fn tabulated_pulse() {
        let env = TabulatedEnvelope::new(vec![0.0, 1.0, 2.0], &[0.0.into(), 1.0.into(), 0.0.into()]).unwrap();
        let p = PulseSpec::tabulated(env, 2.0, false).unwrap();
        assert!((p.envelope(0.5).re - 1.0).abs() < 1e-15);
        // ∫ (2 t)^2 over [0,1] twice = 8/3
        assert!((p.energy().unwrap() - 8.0 / 3.0).abs() < 1e-13);
        assert_eq!(p.envelope(2.5), Complex64::default());
        let bad = TabulatedEnvelope::new(vec![0.0, 1.0], &[0.0.into(), f64::NAN.into()]).unwrap();
        let p = PulseSpec::tabulated(bad, 1.0, false).unwrap();
        assert!(p.energy().is_err());
    }

    #[test]
    fn detuning_profiles() {
        let d = DetuningProfile::switched_off_at(2.0, 5.0).unwrap();
        assert_eq!(d.at(0.0), 2.0);
        assert_eq!(d.at(4.999), 2.0);
        assert_eq!(d.at(5.0), 0.0);
        assert_eq!(d.at(100.0), 0.0);
        assert!(DetuningProfile::piecewise(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(DetuningProfile::piecewise(vec![(1.0, 1.0)]).is_err());
        let t = DetuningProfile::Tabulated(vec![(0.0, 0.0), (2.0, 4.0)]);
        assert_eq!(t.at(1.0), 2.0);
        assert_eq!(t.at(3.0), 4.0);
    }

    #[test]
    fn grid_nodes() {
        let g = Grid::new(1.0, 10.0, 4, 8).unwrap();
        assert_eq!(g.shape(), (5, 9));
        assert_eq!(g.zeta(4), 1.0);
        assert_eq!(g.tau(8), 10.0);
        assert!(Grid::new(1.0, 1.0, 0, 3).is_err());
    }
}
