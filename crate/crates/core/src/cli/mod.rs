//! Command-line front end: `tripod run <preset|file>` and `tripod compare`.

pub mod config;
pub mod output;
pub mod runs;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use config::{ExperimentConfig, Preset, Solver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

const AFTER_HELP: &str = "\
Outputs:
  fig2, fig3    one CSV per (nu0_tau_p, zeta_L_over_tau_p) pair, named
                <preset>_nu<nu0>_L<zeta_L>.csv. Line 1 is '#' followed by a JSON
                header (effective config, parameters, provenance, maximum).
                Columns:
                  tau_over_tau_p  retarded time in units of the pulse width
                  eta             conversion efficiency, stored spin norm over pulse energy
  convergence   convergence.json: Goursat-vs-closed-form refinement ladder, or the
                Maxwell-Bloch validation report with --solver mb
  regime        regime.json: validity conditions per parameter pair
  protocol      protocol.json: storage time, energy ledger, retrieved pulse
Every run also writes config.toml, the effective configuration.

Exit codes: 0 success, 1 compare mismatch, 2 configuration error, 3 solver failure.";

#[derive(Debug, Parser)]
#[command(name = "tripod", version, about = "Slow-light polariton conversion in a tripod medium", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a preset (fig2, fig3, convergence, regime, protocol) or a TOML config file.
    #[command(after_help = AFTER_HELP)]
    Run {
        target: String,
        #[arg(long, value_enum)]
        solver: Option<Solver>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extend the retarded-time samples logarithmically to `long_tail_max`.
        #[arg(long)]
        long_tail: bool,
        /// Goursat grid as `N_TAUxN_ZETA`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Relative tolerance of the closed-form quadrature.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Compare the eta columns of two curve CSVs.
    Compare {
        expected: PathBuf,
        actual: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected N_TAUxN_ZETA, got `{s}`"))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((n(a)?, n(b)?))
}

/// Resolves the target and applies command-line overrides.
pub fn resolve_config(
    target: &str,
    solver: Option<Solver>,
    out: Option<PathBuf>,
    long_tail: bool,
    grid: Option<(usize, usize)>,
    tol: Option<f64>,
) -> crate::Result<ExperimentConfig> {
    let mut c = match target.parse::<Preset>() {
        Ok(p) => ExperimentConfig::preset(p),
        Err(_) => {
            let path = Path::new(target);
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("`{target}` is neither a preset nor a readable file: {e}")))?;
            ExperimentConfig::from_toml(&text)?
        }
    };
    if let Some(s) = solver {
        c.solver = s;
    }
    if let Some(o) = out {
        c.output_dir = o;
    }
    c.long_tail |= long_tail;
    if let Some((n_tau, n_zeta)) = grid {
        c.grid.n_tau = n_tau;
        c.grid.n_zeta = n_zeta;
    }
    if let Some(t) = tol {
        c.rel_tol = t;
    }
    c.validate()?;
    Ok(c)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Run {
            target,
            solver,
            out,
            long_tail,
            grid,
            tol,
        } => {
            let config = match resolve_config(&target, solver, out, long_tail, grid, tol) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            let written = runs::run(&config).and_then(|a| output::write_all(&config.output_dir, &a));
            match written {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            }
        }
        Command::Compare { expected, actual, tol } => {
            let read = |p: &Path| -> crate::Result<_> {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                output::read_curve_csv(&text)
            };
            match read(&expected).and_then(|a| output::compare_curves(&a, &read(&actual)?)) {
                Ok(d) if d <= tol => {
                    println!("max |d eta| = {d:e} <= {tol:e}");
                    EXIT_OK
                }
                Ok(d) => {
                    println!("max |d eta| = {d:e} > {tol:e}");
                    EXIT_MISMATCH
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
    }
}
