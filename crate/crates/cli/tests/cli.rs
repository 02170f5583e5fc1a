use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

use mvhermite::exact::{int, rat};
use mvhermite::mvops::mvop_by_recurrence;
use mvhermite::weight::WeightFamily;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvhermite"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let o = run(&["gen", "--family", "pochhammer", "--N", "2", "--nu", "1", "--nmax", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let expected = mvop_by_recurrence(&WeightFamily::pochhammer(2, int(1)).unwrap(), 3).unwrap().to_json();
    for key in ["polys", "norms", "B", "C", "family"] {
        assert_eq!(got[key], expected[key], "{key}");
    }
    assert_eq!(got["polys"].as_array().unwrap().len(), 4);
    assert_eq!(got["B"][0], serde_json::json!([["0/1", "1/6"], ["1/1", "0/1"]]));
}

#[test]
fn gen_scalar_case_is_hermite() {
    let o = run(&["gen", "--N", "1", "--nmax", "2", "--route", "recurrence"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // x² − 1/2
    assert_eq!(v["polys"][2]["coeffs"], serde_json::json!([[["-1/2"]], [["0/1"]], [["1/1"]]]));
}

#[test]
fn gen_output_is_deterministic() {
    let args = ["gen", "--family", "flat", "--N", "3", "--nu", "3/2", "--nmax", "4"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let csv = run(&["gen", "--N", "2", "--nmax", "1", "--format", "csv"]);
    let text = stdout(&csv);
    assert!(text.starts_with("object,n,power,row,col,value"));
    assert!(text.contains("B,0,0,1,2,1/6"));
}

#[test]
fn invalid_parameters_exit_2() {
    let o = run(&["gen", "--nu", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nu must be positive"));
    assert_eq!(run(&["gen", "--nu", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "--family", "gamma", "--lambda", "0"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"family":"gamma","N":2,"nu":"3/2","lambda":"1/2","nmax":3}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "gen", "--nmax", "1", "--route", "gs"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["polys"].as_array().unwrap().len(), 2);
    assert_eq!(v["family"]["family"], "gamma");
    let expected = mvop_by_recurrence(&WeightFamily::gamma(2, rat(3, 2), rat(1, 2)).unwrap(), 1).unwrap();
    assert_eq!(v["polys"], expected.to_json()["polys"]);
    fs::write(&cfg, r#"{"bogus":1}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "gen"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "--suite", "routes", "--N", "4", "--nmax", "6", "--family", "flat"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("route-rodrigues"));
    assert!(!stdout(&o).contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&["verify", "--nmax", "2", "--mmax", "2", "--degree-cap", "4", "--json", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    let suites: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["suite"].as_str().unwrap()).collect();
    for s in ["pearson", "routes", "diffops", "burchnall", "toda-exact", "connection", "commutant", "printed-constant-audit"] {
        assert!(suites.contains(&s), "{s}");
    }
}

#[test]
fn corrupted_weight_exits_1() {
    let o = run(&["verify", "--suite", "pearson", "--corrupt-weight"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn toda_compare_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let o = run(&["toda", "--family", "gamma", "--N", "3", "--nmax", "3", "--compare", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("max deviation vs closed form"));
    assert!(text.contains("observed order"));
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 1002);
    assert!(rows.starts_with("t,B0_11"));

    let o = run(&["toda", "--N", "2", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("identically zero"));

    let o = run(&["toda", "--N", "2", "--h", "0.25", "--tolerance", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn norms_and_connection() {
    let o = run(&["norms", "--N", "2", "--nmax", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["norms"][0]["closedForm"][1]["coeff"], "6/1");
    assert_eq!(v["norms"][0]["closedForm"][1]["piPower"], 1);

    let o = run(&["connection", "--N", "3", "--nu", "2", "--to", "1", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["matchesDivision"], true);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 4);
}
