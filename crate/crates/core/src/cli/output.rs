//! Serialization of run artifacts. Every file is rendered to a string first so
//! that identical configs give byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::EfficiencyCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub const CSV_COLUMNS: &str = "tau_over_tau_p,eta";

/// `#`-prefixed JSON header, column line, then one row per sample.
pub fn curve_csv<H: Serialize>(header: &H, curve: &EfficiencyCurve) -> Result<String> {
    let mut out = String::with_capacity(32 * curve.tau.len() + 1024);
    out.push('#');
    out.push_str(&to_json_line(header)?);
    out.push('\n');
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for (t, e) in curve.tau.iter().zip(&curve.eta) {
        out.push_str(&format!("{t:e},{e:e}\n"));
    }
    Ok(out)
}

pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Config(e.to_string()))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// `fig3_nu1_L0.5.csv` style name for one parameter pair.
pub fn pair_file_name(prefix: &str, nu0: f64, zeta_l: f64) -> String {
    format!("{prefix}_nu{nu0}_L{zeta_l}.csv")
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents)?;
            Ok(path)
        })
        .collect()
}

/// Rows of a curve CSV, skipping the header and column lines.
pub fn read_curve_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.starts_with('#') || line == CSV_COLUMNS || line.trim().is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("line {}: malformed row `{line}`", k + 1)))
        };
        let mut it = line.split(',');
        rows.push((parse(it.next())?, parse(it.next())?));
    }
    Ok(rows)
}

/// Largest absolute difference in `eta` between two curves sampled at the same times.
pub fn compare_curves(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Config(format!("row counts differ: {} vs {}", a.len(), b.len())));
    }
    let mut worst: f64 = 0.0;
    for (k, (ra, rb)) in a.iter().zip(b).enumerate() {
        if (ra.0 - rb.0).abs() > 1e-12 * ra.0.abs().max(1.0) {
            return Err(Error::Config(format!("row {k}: tau {} vs {}", ra.0, rb.0)));
        }
        worst = worst.max((ra.1 - rb.1).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;

    fn curve() -> EfficiencyCurve {
        EfficiencyCurve {
            tau: vec![0.0, 0.5, 1.0],
            eta: vec![0.0, 0.25, 0.125],
            normalization: 1.0,
            provenance: Provenance::Analytic,
        }
    }

    #[test]
    fn csv_reads_back() {
        let text = curve_csv(&serde_json::json!({"k": 1}), &curve()).unwrap();
        assert!(text.starts_with("#{\"k\":1}\ntau_over_tau_p,eta\n"));
        let rows = read_curve_csv(&text).unwrap();
        assert_eq!(rows, vec![(0.0, 0.0), (0.5, 0.25), (1.0, 0.125)]);
        assert_eq!(compare_curves(&rows, &rows).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_curves_rejected() {
        let a = [(0.0, 1.0), (1.0, 1.0)];
        assert!(compare_curves(&a, &a[..1]).is_err());
        assert!(compare_curves(&a, &[(0.0, 1.0), (2.0, 1.0)]).is_err());
        assert_eq!(compare_curves(&a, &[(0.0, 1.5), (1.0, 0.75)]).unwrap(), 0.5);
    }

    #[test]
    fn file_names_use_shortest_numbers() {
        assert_eq!(pair_file_name("fig3", 1.0, 0.5), "fig3_nu1_L0.5.csv");
    }
}
