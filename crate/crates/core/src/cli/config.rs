//! Experiment configuration: presets plus TOML overrides.
//!
//! A config file names a `preset` and overrides any subset of its fields;
//! unknown keys are rejected. The effective configuration serializes back to
//! TOML or JSON and re-parses to an equal value.

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytic::QuadratureScheme;
use crate::error::{Error, Result};
use crate::pde::maxwell_bloch::MbValidation;
use crate::protocol::SwitchKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig2,
    Fig3,
    Convergence,
    Regime,
    Protocol,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "convergence" => Ok(Self::Convergence),
            "regime" => Ok(Self::Regime),
            "protocol" => Ok(Self::Protocol),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Analytic,
    Goursat,
    Mb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub amplitude: f64,
    pub center_offset: f64,
    pub detuned_carrier: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_zeta: usize,
    pub n_tau: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Coarsest ladder grid; each rung doubles both counts.
    pub base_n_zeta: usize,
    pub base_n_tau: usize,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    /// Retarded time at which the validity conditions are evaluated, in units of `tau_p`.
    pub tau_over_tau_p: f64,
    pub optical_density: Option<f64>,
    /// `tau_p dw_EIT`.
    pub k_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub switch_kind: SwitchKind,
    /// Lab-time switch in units of `tau_p`; absent means "at the maximum stored norm".
    pub storage_time: Option<f64>,
    /// Nodes along the switch line.
    pub nodes: usize,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub solver: Solver,
    pub nu0_tau_p: Vec<f64>,
    pub beta: f64,
    #[serde(rename = "zeta_L_over_tau_p")]
    pub zeta_l_over_tau_p: Vec<f64>,
    pub tau_range: [f64; 2],
    pub tau_samples: usize,
    pub long_tail: bool,
    pub long_tail_max: f64,
    pub long_tail_samples: usize,
    pub rel_tol: f64,
    pub quadrature: QuadratureScheme,
    pub grid: GridConfig,
    pub pulse: PulseConfig,
    pub convergence: ConvergenceConfig,
    pub regime: RegimeConfig,
    pub protocol: ProtocolConfig,
    pub mb: MbValidation,
    pub output_dir: PathBuf,
}

/// Same shape as [`ExperimentConfig`] with every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    preset: Option<Preset>,
    solver: Option<Solver>,
    nu0_tau_p: Option<Vec<f64>>,
    beta: Option<f64>,
    #[serde(rename = "zeta_L_over_tau_p")]
    zeta_l_over_tau_p: Option<Vec<f64>>,
    tau_range: Option<[f64; 2]>,
    tau_samples: Option<usize>,
    long_tail: Option<bool>,
    long_tail_max: Option<f64>,
    long_tail_samples: Option<usize>,
    rel_tol: Option<f64>,
    quadrature: Option<QuadratureScheme>,
    grid: Option<PartialGrid>,
    pulse: Option<PartialPulse>,
    convergence: Option<PartialConvergence>,
    regime: Option<PartialRegime>,
    protocol: Option<PartialProtocol>,
    mb: Option<PartialMb>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialGrid {
    n_zeta: Option<usize>,
    n_tau: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialPulse {
    amplitude: Option<f64>,
    center_offset: Option<f64>,
    detuned_carrier: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConvergence {
    base_n_zeta: Option<usize>,
    base_n_tau: Option<usize>,
    levels: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialRegime {
    tau_over_tau_p: Option<f64>,
    optical_density: Option<f64>,
    k_p: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialProtocol {
    switch_kind: Option<SwitchKind>,
    storage_time: Option<f64>,
    nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialMb {
    optical_density: Option<f64>,
    omega_over_g: Option<f64>,
    nu0_over_window: Option<f64>,
    k_p: Option<f64>,
    beta: Option<f64>,
    n_z: Option<usize>,
    reduced_n_tau: Option<usize>,
}

macro_rules! merge {
    ($dst:expr, $src:expr, $($field:ident),+) => {
        $( if let Some(v) = $src.$field { $dst.$field = v; } )+
    };
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut c = Self {
            preset,
            solver: Solver::Analytic,
            nu0_tau_p: vec![1.0, 5.0, 10.0],
            beta: FRAC_PI_4,
            zeta_l_over_tau_p: vec![1.0, 0.5, 0.25, 0.1],
            tau_range: [0.0, 10.0],
            tau_samples: 201,
            long_tail: false,
            long_tail_max: 1000.0,
            long_tail_samples: 61,
            rel_tol: 1e-8,
            quadrature: QuadratureScheme::RegularizedTrapezoid,
            grid: GridConfig {
                n_zeta: 1024,
                n_tau: 2048,
            },
            pulse: PulseConfig {
                amplitude: 1.0,
                center_offset: 3.0,
                detuned_carrier: false,
            },
            convergence: ConvergenceConfig {
                base_n_zeta: 32,
                base_n_tau: 80,
                levels: 4,
            },
            regime: RegimeConfig {
                tau_over_tau_p: 3.0,
                optical_density: None,
                k_p: None,
            },
            protocol: ProtocolConfig {
                switch_kind: SwitchKind::NuToZero,
                storage_time: None,
                nodes: 401,
            },
            mb: MbValidation::default(),
            output_dir: PathBuf::from("out"),
        };
        match preset {
            Preset::Fig2 => {}
            Preset::Fig3 => c.pulse.detuned_carrier = true,
            Preset::Convergence => {
                c.solver = Solver::Goursat;
                c.nu0_tau_p = vec![5.0];
                c.zeta_l_over_tau_p = vec![1.0];
            }
            Preset::Regime => {
                c.nu0_tau_p = vec![10.0];
                c.zeta_l_over_tau_p = vec![1.0];
                c.pulse.detuned_carrier = true;
            }
            Preset::Protocol => {
                c.nu0_tau_p = vec![1.0];
                c.zeta_l_over_tau_p = vec![1.0];
                c.pulse.detuned_carrier = true;
            }
        }
        c
    }

    /// Parses a TOML document; its `preset` key (default `fig2`) selects the base.
    pub fn from_toml(text: &str) -> Result<Self> {
        let p: PartialConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = Self::preset(p.preset.unwrap_or(Preset::Fig2));
        merge!(
            c,
            p,
            solver,
            nu0_tau_p,
            beta,
            zeta_l_over_tau_p,
            tau_range,
            tau_samples,
            long_tail,
            long_tail_max,
            long_tail_samples,
            rel_tol,
            quadrature,
            output_dir
        );
        if let Some(g) = p.grid {
            merge!(c.grid, g, n_zeta, n_tau);
        }
        if let Some(g) = p.pulse {
            merge!(c.pulse, g, amplitude, center_offset, detuned_carrier);
        }
        if let Some(g) = p.convergence {
            merge!(c.convergence, g, base_n_zeta, base_n_tau, levels);
        }
        if let Some(g) = p.regime {
            merge!(c.regime, g, tau_over_tau_p);
            if g.optical_density.is_some() {
                c.regime.optical_density = g.optical_density;
            }
            if g.k_p.is_some() {
                c.regime.k_p = g.k_p;
            }
        }
        if let Some(g) = p.protocol {
            merge!(c.protocol, g, switch_kind, nodes);
            if g.storage_time.is_some() {
                c.protocol.storage_time = g.storage_time;
            }
        }
        if let Some(g) = p.mb {
            merge!(c.mb, g, optical_density, omega_over_g, nu0_over_window, k_p, beta, n_z, reduced_n_tau);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.nu0_tau_p.is_empty() || self.zeta_l_over_tau_p.is_empty() {
            return bad("nu0_tau_p and zeta_L_over_tau_p must be non-empty".into());
        }
        if self.nu0_tau_p.iter().any(|v| !v.is_finite()) || !self.beta.is_finite() {
            return bad("nu0_tau_p and beta must be finite".into());
        }
        if self.zeta_l_over_tau_p.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return bad("zeta_L_over_tau_p entries must be > 0".into());
        }
        let [lo, hi] = self.tau_range;
        if !(lo >= 0.0) || !(hi > lo) || !hi.is_finite() {
            return bad(format!("tau_range must satisfy 0 <= lo < hi, got {:?}", self.tau_range));
        }
        if self.tau_samples < 2 {
            return bad("tau_samples must be >= 2".into());
        }
        if self.long_tail && (!(self.long_tail_max > hi) || self.long_tail_samples < 2) {
            return bad("long tail needs long_tail_max > tau_range[1] and >= 2 samples".into());
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol));
        }
        if self.grid.n_zeta == 0 || self.grid.n_tau == 0 {
            return bad("grid counts must be > 0".into());
        }
        if !self.pulse.amplitude.is_finite() || !(self.pulse.center_offset >= 0.0) {
            return bad("pulse amplitude must be finite and center_offset >= 0".into());
        }
        let cv = &self.convergence;
        if cv.base_n_zeta == 0 || cv.base_n_tau == 0 || cv.levels < 3 {
            return bad("convergence ladder needs positive base counts and >= 3 levels".into());
        }
        if !(self.regime.tau_over_tau_p >= 0.0) {
            return bad("regime.tau_over_tau_p must be >= 0".into());
        }
        if self.regime.optical_density.is_some() != self.regime.k_p.is_some() {
            return bad("regime.optical_density and regime.k_p must be given together".into());
        }
        if self.protocol.nodes < 2 || self.protocol.storage_time.is_some_and(|t| !(t > 0.0)) {
            return bad("protocol needs >= 2 nodes and a positive storage time".into());
        }
        if self.mb.n_z == 0 || self.mb.reduced_n_tau == 0 || !(self.mb.omega_over_g > 0.0) || !(self.mb.optical_density > 0.0) || !(self.mb.k_p > 0.0) {
            return bad("invalid [mb] settings".into());
        }
        match (self.preset, self.solver) {
            (Preset::Fig2 | Preset::Fig3 | Preset::Protocol, Solver::Mb) => {
                bad("the mb solver only runs under the convergence preset".into())
            }
            (Preset::Protocol, Solver::Goursat) => bad("the protocol preset uses the analytic solver".into()),
            _ => Ok(()),
        }
    }

    /// Retarded-time samples in units of `tau_p`.
    pub fn tau_samples(&self) -> Vec<f64> {
        let [lo, hi] = self.tau_range;
        let n = self.tau_samples - 1;
        let mut t: Vec<f64> = (0..=n).map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 }).collect();
        if self.long_tail {
            let m = self.long_tail_samples - 1;
            let ratio = (self.long_tail_max / hi).ln();
            t.extend((1..=m).map(|k| if k == m { self.long_tail_max } else { hi * (ratio * k as f64 / m as f64).exp() }));
        }
        t
    }
}
