use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn budget(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_budget"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn parse_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn simulate_upper_surplus_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let res = budget(&[
        "simulate",
        "--config",
        scenario("surplus_upper.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,b,regime\n"));
    let rows = parse_rows(&csv);
    assert_eq!(rows.len(), 4001);
    let b: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(b[0], 15.0);
    assert!(b.windows(2).all(|w| w[1] < w[0]));
    assert!(b.last().unwrap() > &10.0);
    assert!(rows.iter().all(|r| r[2] == "SurplusSolvent"));
}

#[test]
fn fixed_points_without_equilibrium() {
    let res = budget(&[
        "fixed-points",
        "--config",
        scenario("deficit_fixed_points.json").to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert_eq!(
        stdout,
        "gamma,b_star,stability,branch\n-2.0000000000000000e0,,None,\n"
    );
}

#[test]
fn negative_curvature_is_a_config_error() {
    let res = budget(&[
        "simulate",
        "--config",
        scenario("surplus_upper.json").to_str().unwrap(),
        "--set",
        "params.a=-1",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let err = stderr(&res);
    assert!(err.contains("params.a"), "{err}");
    assert!(err.contains("a > 0"), "{err}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"params": {"a": 1, "y0": 1}, "b0": 1, "speed": 3}"#).unwrap();
    let res = budget(&["fixed-points", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("speed"));
}

#[test]
fn non_finite_state_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let res = budget(&[
        "simulate",
        "--set",
        "params={\"a\":1,\"y0\":0}",
        "--set",
        "b0=1e200",
        "--set",
        "integrator={\"method\":\"euler\",\"dt\":0.1,\"t_end\":1}",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2), "{}", stderr(&res));
    assert!(stderr(&res).contains("non-finite"));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn validate_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let res = budget(&[
        "validate",
        "--config",
        scenario("deficit_validate.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cmp.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["scenario_id"], "deficit-anchor");
    assert!(report["event_time_error"].as_f64().unwrap() < 1e-6);
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,b_numeric,b_analytic,abs_error\n"));
}

#[test]
fn validate_rejects_hydro_rule() {
    let res = budget(&[
        "validate",
        "--config",
        scenario("deficit_validate.json").to_str().unwrap(),
        "--set",
        "rule={\"kind\":\"sqrt_hydro\",\"k\":1}",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("rule"));
}

#[test]
fn sweep_reproduces_fixed_point_curve() {
    let res = budget(&["sweep", "--config", scenario("fixed_point_sweep.json").to_str().unwrap()]);
    assert!(res.status.success(), "{}", stderr(&res));
    let rows = parse_rows(&String::from_utf8(res.stdout).unwrap());
    let b_star: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(
        b_star,
        vec![
            "",
            "0.0000000000000000e0",
            "1.0000000000000000e0",
            "2.0000000000000000e0"
        ]
    );
    let stability: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(stability, vec!["None", "HalfStable", "Stable", "Stable"]);
}

#[test]
fn config_is_optional_when_everything_is_set() {
    let res = budget(&[
        "phase-portrait",
        "--set",
        "params.a=1",
        "--set",
        "params.y0=1",
        "--set",
        "portrait.b_min=0",
        "--set",
        "portrait.b_max=2",
        "--set",
        "portrait.n=3",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert_eq!(
        String::from_utf8(res.stdout).unwrap(),
        "b,dbdt\n\
         0.0000000000000000e0,1.0000000000000000e0\n\
         1.0000000000000000e0,0.0000000000000000e0\n\
         2.0000000000000000e0,-3.0000000000000000e0\n"
    );
}

#[test]
fn discrete_and_analytic_sources() {
    let res = budget(&[
        "simulate",
        "--config",
        scenario("surplus_upper.json").to_str().unwrap(),
        "--set",
        "output=null",
        "--set",
        "simulate={\"source\":\"discrete\",\"periods\":3}",
        "--set",
        "b0=10",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let rows = parse_rows(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[1] == "1.0000000000000000e1"));

    let res = budget(&[
        "simulate",
        "--config",
        scenario("deficit_validate.json").to_str().unwrap(),
        "--set",
        "run=simulate",
        "--set",
        "simulate.source=analytic",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let rows = parse_rows(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(rows.first().unwrap()[2], "DeficitSolvent");
    assert_eq!(rows.last().unwrap()[2], "Debt");
}

#[test]
fn missing_config_file() {
    let res = budget(&["simulate", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(res.status.code(), Some(1));
}
