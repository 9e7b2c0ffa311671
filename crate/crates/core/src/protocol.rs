//! Storage by sudden switching and retrieval by swapping the control fields.
//!
//! A switch at lab time `t_s` acts on the line `tau = t_s - zeta` of the
//! characteristic rectangle. Retrieval uses the rotated control basis
//! `beta' = beta - pi/2` (so `Omega_1 = sin(beta) Omega`, `Omega_2 = -cos(beta) Omega`)
//! with `nu = 0`; the stored spin wave then is the propagating polariton and
//! leaves the medium unchanged in shape.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::golden_max;
use crate::analytic::ClosedForm;
use crate::error::{Error, Result};
use crate::model::PolaritonField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchKind {
    /// `nu -> 0`: the spin polariton freezes, the optical one keeps moving and drains.
    NuToZero,
    /// Both control fields off: everything in the medium is frozen into spin coherence.
    ControlsOff,
    /// Controls rotated to the retrieval configuration.
    RetrievalSwap,
}

/// Control amplitudes used for retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalControls {
    pub omega_1: f64,
    pub omega_2: f64,
    pub nu: f64,
}

impl RetrievalControls {
    pub fn new(beta: f64, omega: f64) -> Self {
        Self {
            omega_1: beta.sin() * omega,
            omega_2: -beta.cos() * omega,
            nu: 0.0,
        }
    }

    /// Control angle of the retrieval configuration, `beta - pi/2`.
    pub fn beta(&self) -> f64 {
        self.omega_2.atan2(self.omega_1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSchedule {
    pub storage_time: f64,
    pub switch_kind: SwitchKind,
    pub retrieval: RetrievalControls,
}

impl ProtocolSchedule {
    pub fn new(storage_time: f64, switch_kind: SwitchKind, beta: f64, omega: f64) -> Result<Self> {
        if !(storage_time > 0.0) || !storage_time.is_finite() {
            return Err(Error::InvalidParams(format!("storage time must be > 0, got {storage_time}")));
        }
        Ok(Self {
            storage_time,
            switch_kind,
            retrieval: RetrievalControls::new(beta, omega),
        })
    }
}

/// Spin coherences `f_1`, `f_2` on uniform `zeta` nodes covering `[0, zeta_L]`,
/// in the deep slow-light limit where the polaritons are purely atomic.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    pub zeta: Vec<f64>,
    pub f_1: Vec<Complex64>,
    pub f_2: Vec<Complex64>,
    /// Lab time of the switch.
    pub t_s: f64,
    /// Optical polariton still in the medium at the switch and not frozen (`NuToZero`).
    pub in_flight: Vec<Complex64>,
}

/// Composite Simpson weights for an odd node count, trapezoid otherwise.
fn line_weights(n: usize, h: f64) -> Vec<f64> {
    if n >= 3 && n % 2 == 1 {
        (0..n)
            .map(|k| {
                if k == 0 || k + 1 == n {
                    h / 3.0
                } else if k % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                }
            })
            .collect()
    } else {
        (0..n).map(|k| if k == 0 || k + 1 == n { 0.5 * h } else { h }).collect()
    }
}

impl SpinState {
    fn dzeta(&self) -> f64 {
        if self.zeta.len() < 2 {
            0.0
        } else {
            self.zeta[1] - self.zeta[0]
        }
    }

    /// `∫ (|f_1|^2 + |f_2|^2) dzeta`.
    pub fn norm(&self) -> f64 {
        let w = line_weights(self.zeta.len(), self.dzeta());
        (0..self.zeta.len())
            .map(|k| w[k] * (self.f_1[k].norm_sqr() + self.f_2[k].norm_sqr()))
            .sum()
    }

    pub fn in_flight_norm(&self) -> f64 {
        let w = line_weights(self.zeta.len(), self.dzeta());
        self.in_flight.iter().zip(&w).map(|(v, w)| w * v.norm_sqr()).sum()
    }

    /// Spin polariton amplitudes `(sin(b) f_1 - cos(b) f_2, -(cos(b) f_1 + sin(b) f_2))`
    /// for control angle `b`: the stationary one and the atomic part of the moving one.
    pub fn components(&self, b: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let (s, c) = b.sin_cos();
        self.f_1
            .iter()
            .zip(&self.f_2)
            .map(|(&f1, &f2)| (f1 * s - f2 * c, -(f1 * c + f2 * s)))
            .unzip()
    }
}

/// Freezes the fields on the switch line. `psi`, `upsilon` are sampled on uniform
/// `zeta` nodes at retarded time `t_s - zeta`.
pub fn apply_storage_switch(
    zeta: Vec<f64>,
    psi: Vec<Complex64>,
    upsilon: Vec<Complex64>,
    t_s: f64,
    beta: f64,
    kind: SwitchKind,
) -> Result<SpinState> {
    if zeta.len() != psi.len() || zeta.len() != upsilon.len() || zeta.len() < 2 {
        return Err(Error::InvalidParams("switch samples must have matching lengths >= 2".into()));
    }
    let (s, c) = beta.sin_cos();
    let (f_1, f_2, in_flight) = match kind {
        SwitchKind::NuToZero | SwitchKind::RetrievalSwap => {
            let f_1 = upsilon.iter().map(|u| u * s).collect();
            let f_2 = upsilon.iter().map(|u| -u * c).collect();
            (f_1, f_2, psi)
        }
        SwitchKind::ControlsOff => {
            let f_1 = upsilon.iter().zip(&psi).map(|(u, p)| u * s - p * c).collect();
            let f_2 = upsilon.iter().zip(&psi).map(|(u, p)| -u * c - p * s).collect();
            (f_1, f_2, vec![Complex64::default(); zeta.len()])
        }
    };
    Ok(SpinState {
        zeta,
        f_1,
        f_2,
        t_s,
        in_flight,
    })
}

/// Samples of `(Psi, Upsilon)` on the switch line from the closed form.
pub fn switch_line_analytic(cf: &ClosedForm, zeta_l: f64, t_s: f64, nodes: usize) -> Result<(Vec<f64>, Vec<Complex64>, Vec<Complex64>)> {
    if nodes < 2 || !(zeta_l > 0.0) {
        return Err(Error::InvalidParams("need >= 2 nodes and zeta_L > 0".into()));
    }
    let h = zeta_l / (nodes - 1) as f64;
    let zeta: Vec<f64> = (0..nodes).map(|k| if k + 1 == nodes { zeta_l } else { k as f64 * h }).collect();
    let mut psi = Vec::with_capacity(nodes);
    let mut ups = Vec::with_capacity(nodes);
    for &z in &zeta {
        let tau = t_s - z;
        if tau <= 0.0 {
            psi.push(Complex64::default());
            ups.push(Complex64::default());
        } else {
            psi.push(cf.psi(z, tau)?);
            ups.push(cf.upsilon(z, tau)?);
        }
    }
    Ok((zeta, psi, ups))
}

/// Samples on the switch line from a gridded field, linear in `tau` between columns.
pub fn switch_line_from_field(field: &PolaritonField, t_s: f64) -> Result<(Vec<f64>, Vec<Complex64>, Vec<Complex64>)> {
    field.check_shape()?;
    let g = field.grid;
    if !(t_s >= 0.0) || t_s > g.tau_max {
        return Err(Error::OutOfRange {
            what: "storage time",
            value: t_s,
            lo: 0.0,
            hi: g.tau_max,
        });
    }
    let k = g.dtau();
    let mut zeta = Vec::with_capacity(g.n_zeta + 1);
    let mut psi = Vec::with_capacity(g.n_zeta + 1);
    let mut ups = Vec::with_capacity(g.n_zeta + 1);
    for i in 0..=g.n_zeta {
        let z = g.zeta(i);
        zeta.push(z);
        let tau = t_s - z;
        if tau <= 0.0 {
            psi.push(Complex64::default());
            ups.push(Complex64::default());
            continue;
        }
        let x = tau / k;
        let j = (x.floor() as usize).min(g.n_tau - 1);
        let w = x - j as f64;
        psi.push(field.psi[[i, j]] * (1.0 - w) + field.psi[[i, j + 1]] * w);
        ups.push(field.upsilon[[i, j]] * (1.0 - w) + field.upsilon[[i, j + 1]] * w);
    }
    Ok((zeta, psi, ups))
}

/// Stored spin norm on the switch line, `∫ |Upsilon(zeta, t_s - zeta)|^2 dzeta`.
pub fn stored_norm_at(cf: &ClosedForm, zeta_l: f64, t_s: f64, nodes: usize) -> Result<f64> {
    let (zeta, psi, ups) = switch_line_analytic(cf, zeta_l, t_s, nodes)?;
    Ok(apply_storage_switch(zeta, psi, ups, t_s, cf.beta, SwitchKind::NuToZero)?.norm())
}

/// Retrieved waveform at the exit `zeta = zeta_L`, indexed by time since retrieval starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievedPulse {
    pub time: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub energy: f64,
    /// Largest stationary-polariton amplitude in the retrieval basis.
    pub orthogonal_max: f64,
}

/// Releases a stored spin wave. With `nu = 0` the moving polariton keeps its
/// profile, so `output(s) = Psi_new(zeta_L - s)` for `s` in `[0, zeta_L]`.
pub fn retrieve(stored: &SpinState, beta: f64) -> RetrievedPulse {
    let swapped = beta - FRAC_PI_2;
    let (stationary, moving_atomic) = stored.components(swapped);
    let n = stored.zeta.len();
    let zl = *stored.zeta.last().unwrap_or(&0.0);
    let time: Vec<f64> = stored.zeta.iter().rev().map(|z| zl - z).collect();
    let psi: Vec<Complex64> = moving_atomic.into_iter().rev().collect();
    let w = line_weights(n, stored.dzeta());
    let energy = psi.iter().zip(&w).map(|(v, w)| w * v.norm_sqr()).sum();
    let orthogonal_max = stationary.iter().map(|v| v.norm()).fold(0.0, f64::max);
    RetrievedPulse {
        time,
        psi,
        energy,
        orthogonal_max,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub t_s: f64,
    pub input_until_switch: f64,
    pub transmitted_before_switch: f64,
    pub stored: f64,
    pub in_flight: f64,
    pub retrieved: f64,
    pub input_total: f64,
}

impl EnergyLedger {
    /// `|stored + in_flight + transmitted - input| / input_total` at the switch.
    pub fn switch_residual(&self) -> f64 {
        (self.stored + self.in_flight + self.transmitted_before_switch - self.input_until_switch).abs() / self.input_total
    }

    pub fn retrieval_ratio(&self) -> f64 {
        self.retrieved / self.input_total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolOutcome {
    pub ledger: EnergyLedger,
    pub retrieved: RetrievedPulse,
    pub kind: SwitchKind,
}

/// Store at `t_s` from the closed-form fields, then retrieve.
pub fn run_protocol(cf: &ClosedForm, zeta_l: f64, t_s: f64, kind: SwitchKind, nodes: usize) -> Result<ProtocolOutcome> {
    let (zeta, psi, ups) = switch_line_analytic(cf, zeta_l, t_s, nodes)?;
    let stored = apply_storage_switch(zeta, psi, ups, t_s, cf.beta, kind)?;
    let retrieved = retrieve(&stored, cf.beta);
    let input_total = cf.pulse.energy()?;
    let transmitted = if t_s > zeta_l {
        crate::quadrature::gauss_kronrod(
            |t: f64| cf.psi(zeta_l, t).map(|v| v.norm_sqr()).unwrap_or(f64::NAN),
            0.0,
            t_s - zeta_l,
            1e-10,
            1e-15 * input_total,
            4000,
        )?
        .value
    } else {
        0.0
    };
    let ledger = EnergyLedger {
        t_s,
        input_until_switch: cf.pulse.energy_until(t_s)?,
        transmitted_before_switch: transmitted,
        stored: stored.norm(),
        in_flight: stored.in_flight_norm(),
        retrieved: retrieved.energy,
        input_total,
    };
    Ok(ProtocolOutcome { ledger, retrieved, kind })
}

/// Switch time in `[lo, hi]` maximizing the stored norm (sampled, then golden section).
pub fn best_storage_time(cf: &ClosedForm, zeta_l: f64, lo: f64, hi: f64, nodes: usize) -> Result<f64> {
    let samples = 80;
    let step = (hi - lo) / samples as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..=samples {
        let t = lo + k as f64 * step;
        let v = stored_norm_at(cf, zeta_l, t, nodes)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let (t, _) = golden_max(
        |t| stored_norm_at(cf, zeta_l, t, nodes),
        (best.0 - step).max(lo),
        (best.0 + step).min(hi),
        1e-6 * (hi - lo),
    )?;
    Ok(t)
}
