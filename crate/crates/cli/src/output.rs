//! CSV and JSON serialization of run results.
//!
//! Every number is written with 17 significant digits so that parsing the
//! file gives back the exact `f64` that was computed.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use budget_core::{
    CompositeSolution, FixedPointReport, ModelParams, PortraitPoint, Regime, SweepOutput,
    SweepRow, SweepSpec, Trajectory, ValidationReport,
};
use tempfile::NamedTempFile;

use crate::CliError;

/// Round-trip exact decimal form of a float.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

pub fn trajectory_csv(traj: &Trajectory, params: &ModelParams) -> String {
    let mut out = String::from("t,b,regime\n");
    for s in &traj.samples {
        let _ = writeln!(out, "{},{},{}", num(s.t), num(s.b), Regime::classify(s.b, params));
    }
    out
}

pub fn fixed_points_csv(gamma: f64, report: &FixedPointReport) -> String {
    let mut out = String::from("gamma,b_star,stability,branch\n");
    for p in &report.points {
        let branch = if p.b_star >= 0.0 { "solvent" } else { "debt" };
        let _ = writeln!(out, "{},{},{},{branch}", num(gamma), num(p.b_star), p.stability);
    }
    if report.debt_continuum {
        let _ = writeln!(out, "{},,MarginallyStable,debt", num(gamma));
    }
    if report.is_empty() {
        let _ = writeln!(out, "{},,None,", num(gamma));
    }
    out
}

pub fn portrait_csv(points: &[PortraitPoint]) -> String {
    let mut out = String::from("b,dbdt\n");
    for p in points {
        let _ = writeln!(out, "{},{}", num(p.b), num(p.dbdt));
    }
    out
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut header = vec![spec.varying.name(), "gamma"];
    for o in &spec.outputs {
        match o {
            SweepOutput::FixedPoint => header.extend(["b_star", "stability", "debt_continuum"]),
            SweepOutput::T0 => header.push("t0"),
            SweepOutput::FinalB => header.push("final_b"),
            SweepOutput::MaxError => header.push("max_error"),
        }
    }
    header.push("error");

    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut fields = vec![num(row.value), num(row.gamma)];
        for o in &spec.outputs {
            match o {
                SweepOutput::FixedPoint => {
                    fields.push(opt(row.b_star));
                    fields.push(row.stability.map_or_else(|| "None".to_owned(), |s| s.to_string()));
                    fields.push(row.debt_continuum.to_string());
                }
                SweepOutput::T0 => fields.push(opt(row.t0)),
                SweepOutput::FinalB => fields.push(opt(row.final_b)),
                SweepOutput::MaxError => fields.push(opt(row.max_error)),
            }
        }
        fields.push(quote(row.error.as_deref().unwrap_or("")));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Numerical and closed-form values side by side on the integrator grid.
pub fn comparison_csv(numeric: &Trajectory, exact: &CompositeSolution) -> Result<String, CliError> {
    let mut out = String::from("t,b_numeric,b_analytic,abs_error\n");
    for s in &numeric.samples {
        let e = exact.eval(s.t)?;
        let _ = writeln!(out, "{},{},{},{}", num(s.t), num(s.b), num(e), num((s.b - e).abs()));
    }
    Ok(out)
}

pub fn report_json(report: &ValidationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Write to a temporary file next to `path`; the caller renames it into place.
pub fn stage(path: &Path, bytes: &[u8]) -> Result<NamedTempFile, CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = NamedTempFile::new_in(dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    file.write_all(bytes)?;
    file.as_file().sync_all()?;
    Ok(file)
}

/// Replace `path` with `bytes` without ever exposing a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    stage(path, bytes)?
        .persist(path)
        .map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -0.0, 1.0 / 3.0, 0.6283185307179586, 1e-300, -12.5, f64::MAX] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(10.0), "1.0000000000000000e1");
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("plain"), "plain");
        assert_eq!(quote("a, b"), "\"a, b\"");
        assert_eq!(quote("say \"x\""), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn write_into_missing_directory_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nope").join("out.csv");
        assert!(matches!(write_atomic(&path, b"x"), Err(CliError::Runtime(_))));
        assert!(!path.exists());
    }
}
