//! One function per preset. Each returns the artifacts to write; parameter pairs
//! are evaluated in parallel and collected in config order.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Preset, Solver};
use super::output::{curve_csv, pair_file_name, to_json_pretty, Artifact};
use crate::analysis::{
    efficiency_curve, efficiency_curve_analytic, goursat_convergence, goursat_deviation, refine_max_efficiency,
    regime_report, ConvergenceLadder, RegimeInputs, RegimeReport,
};
use crate::analytic::{ClosedForm, ConvolutionQuadrature};
use crate::error::{Error, Result};
use crate::model::{DetuningProfile, Grid, Provenance, PulseSpec};
use crate::pde::maxwell_bloch::MbValidationReport;
use crate::pde::{solve_goursat, GoursatScheme};
use crate::protocol::{best_storage_time, run_protocol, ProtocolOutcome};

/// Stride of the sampled comparison against the closed form on the full-size grid.
const DEFAULT_GRID_STRIDE: usize = 32;

pub fn run(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    config.validate()?;
    let mut artifacts = vec![Artifact {
        name: "config.toml".into(),
        contents: config.to_toml()?,
    }];
    artifacts.extend(match config.preset {
        Preset::Fig2 | Preset::Fig3 => run_figure(config)?,
        Preset::Convergence => run_convergence(config)?,
        Preset::Regime => run_regime(config)?,
        Preset::Protocol => run_protocol_preset(config)?,
    });
    Ok(artifacts)
}

fn pulse(config: &ExperimentConfig) -> PulseSpec {
    let p = &config.pulse;
    PulseSpec::gaussian_difference(p.amplitude, 1.0, p.center_offset, p.detuned_carrier)
}

fn quadrature(config: &ExperimentConfig) -> Result<ConvolutionQuadrature> {
    ConvolutionQuadrature::new(config.quadrature, config.rel_tol)
}

fn pairs(config: &ExperimentConfig) -> Vec<(f64, f64)> {
    config
        .nu0_tau_p
        .iter()
        .flat_map(|&nu| config.zeta_l_over_tau_p.iter().map(move |&zl| (nu, zl)))
        .collect()
}

/// Attaches the failing parameter pair to a solver error.
fn tagged<T>(r: Result<T>, nu0: f64, zeta_l: f64) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Domain(format!("nu0_tau_p = {nu0}, zeta_L_over_tau_p = {zeta_l}: {other}")),
    })
}

#[derive(Serialize)]
struct CurveHeader<'a> {
    config: &'a ExperimentConfig,
    nu0_tau_p: f64,
    #[serde(rename = "zeta_L_over_tau_p")]
    zeta_l_over_tau_p: f64,
    provenance: Provenance,
    normalization: f64,
    /// Largest sampled efficiency and where it occurs.
    max_eta: f64,
    tau_at_max: f64,
    /// Golden-section refinement of the maximum; analytic solver only.
    max_eta_refined: Option<f64>,
}

fn run_figure(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let pulse = pulse(config);
    let q = quadrature(config)?;
    let taus = config.tau_samples();
    let tau_max = *taus.last().expect("at least two samples");
    let prefix = match config.preset {
        Preset::Fig3 => "fig3",
        _ => "fig2",
    };
    pairs(config)
        .par_iter()
        .map(|&(nu0, zl)| {
            let curve_and_refined = || -> Result<_> {
                match config.solver {
                    Solver::Analytic => {
                        let cf = ClosedForm::new(&pulse, nu0, config.beta, q)?;
                        let curve = efficiency_curve_analytic(&cf, zl, &taus)?;
                        let refined = refine_max_efficiency(&cf, zl, &curve)?.1;
                        Ok((curve, Some(refined)))
                    }
                    Solver::Goursat => {
                        let grid = Grid::new(zl, tau_max, config.grid.n_zeta, config.grid.n_tau)?;
                        let nu = DetuningProfile::Constant(nu0);
                        let field = solve_goursat(&pulse, &nu, config.beta, grid, GoursatScheme::default())?;
                        Ok((efficiency_curve(&field, &pulse, &taus)?, None))
                    }
                    Solver::Mb => Err(Error::Config("the mb solver does not produce efficiency curves".into())),
                }
            };
            let (curve, refined) = tagged(curve_and_refined(), nu0, zl)?;
            let (tau_at_max, max_eta) = curve.max().unwrap_or((0.0, 0.0));
            let header = CurveHeader {
                config,
                nu0_tau_p: nu0,
                zeta_l_over_tau_p: zl,
                provenance: curve.provenance,
                normalization: curve.normalization,
                max_eta,
                tau_at_max,
                max_eta_refined: refined,
            };
            Ok(Artifact {
                name: pair_file_name(prefix, nu0, zl),
                contents: curve_csv(&header, &curve)?,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct GoursatConvergenceReport {
    pub nu0_tau_p: f64,
    #[serde(rename = "zeta_L_over_tau_p")]
    pub zeta_l_over_tau_p: f64,
    pub ladder: ConvergenceLadder,
    pub default_grid: [usize; 2],
    /// Deviation at the configured grid, sampled every few nodes.
    pub default_grid_deviation: f64,
}

#[derive(Serialize)]
struct Report<'a, T> {
    config: &'a ExperimentConfig,
    results: T,
}

fn run_convergence(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let contents = match config.solver {
        Solver::Goursat => {
            let results = goursat_convergence_reports(config)?;
            to_json_pretty(&Report { config, results })?
        }
        Solver::Mb => {
            let results: MbValidationReport = config.mb.run()?;
            to_json_pretty(&Report { config, results })?
        }
        Solver::Analytic => {
            return Err(Error::Config(
                "the convergence preset needs --solver goursat or --solver mb".into(),
            ))
        }
    };
    Ok(vec![Artifact {
        name: "convergence.json".into(),
        contents,
    }])
}

pub fn goursat_convergence_reports(config: &ExperimentConfig) -> Result<Vec<GoursatConvergenceReport>> {
    let pulse = pulse(config);
    let q = quadrature(config)?;
    let tau_max = config.tau_range[1];
    let cv = &config.convergence;
    pairs(config)
        .into_iter()
        .map(|(nu0, zl)| {
            let build = || -> Result<_> {
                let base = Grid::new(zl, tau_max, cv.base_n_zeta, cv.base_n_tau)?;
                let ladder = goursat_convergence(&pulse, nu0, config.beta, base, cv.levels, q)?;
                let grid = Grid::new(zl, tau_max, config.grid.n_zeta, config.grid.n_tau)?;
                let dev = goursat_deviation(&pulse, nu0, config.beta, grid, DEFAULT_GRID_STRIDE, q)?;
                Ok(GoursatConvergenceReport {
                    nu0_tau_p: nu0,
                    zeta_l_over_tau_p: zl,
                    ladder,
                    default_grid: [config.grid.n_zeta, config.grid.n_tau],
                    default_grid_deviation: dev,
                })
            };
            tagged(build(), nu0, zl)
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct RegimeEntry {
    pub nu0_tau_p: f64,
    #[serde(rename = "zeta_L_over_tau_p")]
    pub zeta_l_over_tau_p: f64,
    pub report: RegimeReport,
}

fn run_regime(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let results = pairs(config)
        .into_iter()
        .map(|(nu0, zl)| {
            let inputs = RegimeInputs {
                nu0,
                beta: config.beta,
                zeta_l: zl,
                tau: config.regime.tau_over_tau_p,
                tau_p: 1.0,
                optical_density: config.regime.optical_density,
                delta_omega_eit: config.regime.k_p,
            };
            tagged(regime_report(&inputs), nu0, zl).map(|report| RegimeEntry {
                nu0_tau_p: nu0,
                zeta_l_over_tau_p: zl,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![Artifact {
        name: "regime.json".into(),
        contents: to_json_pretty(&Report { config, results })?,
    }])
}

#[derive(Debug, Serialize)]
pub struct ProtocolEntry {
    pub nu0_tau_p: f64,
    #[serde(rename = "zeta_L_over_tau_p")]
    pub zeta_l_over_tau_p: f64,
    /// Lab-time switch, chosen at the maximum stored norm unless configured.
    pub storage_time: f64,
    pub switch_residual: f64,
    pub retrieval_ratio: f64,
    pub outcome: ProtocolOutcome,
}

/// Search window for the storage time: lab times up to the end of the retarded-time range plus the transit.
pub fn storage_search_window(config: &ExperimentConfig, zeta_l: f64) -> (f64, f64) {
    let [lo, hi] = config.tau_range;
    (lo.max(1e-3), hi + zeta_l)
}

pub fn protocol_entries(config: &ExperimentConfig) -> Result<Vec<ProtocolEntry>> {
    let pulse = pulse(config);
    let q = quadrature(config)?;
    let nodes = config.protocol.nodes;
    pairs(config)
        .par_iter()
        .map(|&(nu0, zl)| {
            let build = || -> Result<_> {
                let cf = ClosedForm::new(&pulse, nu0, config.beta, q)?;
                let t_s = match config.protocol.storage_time {
                    Some(t) => t,
                    None => {
                        let (lo, hi) = storage_search_window(config, zl);
                        best_storage_time(&cf, zl, lo, hi, nodes)?
                    }
                };
                let outcome = run_protocol(&cf, zl, t_s, config.protocol.switch_kind, nodes)?;
                Ok(ProtocolEntry {
                    nu0_tau_p: nu0,
                    zeta_l_over_tau_p: zl,
                    storage_time: t_s,
                    switch_residual: outcome.ledger.switch_residual(),
                    retrieval_ratio: outcome.ledger.retrieval_ratio(),
                    outcome,
                })
            };
            tagged(build(), nu0, zl)
        })
        .collect()
}

fn run_protocol_preset(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let results = protocol_entries(config)?;
    Ok(vec![Artifact {
        name: "protocol.json".into(),
        contents: to_json_pretty(&Report { config, results })?,
    }])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(preset: Preset) -> ExperimentConfig {
        let mut c = ExperimentConfig::preset(preset);
        c.nu0_tau_p = vec![0.0, 2.0];
        c.zeta_l_over_tau_p = vec![0.5];
        c.tau_samples = 11;
        c.rel_tol = 1e-6;
        c
    }

    #[test]
    fn zero_detuning_gives_zero_efficiency() {
        let arts = run(&small(Preset::Fig2)).unwrap();
        assert_eq!(arts.len(), 3);
        let rows = super::super::output::read_curve_csv(&arts[1].contents).unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn figure_run_is_deterministic() {
        let c = small(Preset::Fig3);
        assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    }

    #[test]
    fn regime_reports_every_pair() {
        let arts = run(&small(Preset::Regime)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&arts[1].contents).unwrap();
        assert_eq!(v["results"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn analytic_convergence_is_a_config_error() {
        let mut c = small(Preset::Convergence);
        c.solver = Solver::Analytic;
        assert!(matches!(run(&c), Err(Error::Config(_))));
    }
}
