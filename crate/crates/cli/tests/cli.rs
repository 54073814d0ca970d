use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_holder-reg"));
    c.env_remove("HOLDERREG_CONFIG");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], out: &TempDir) -> Output {
    bin().args(args).arg("--out-dir").arg(out.path()).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn report(out: &TempDir, stem: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.path().join(format!("{stem}.json"))).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        other => other.as_f64().unwrap_or_else(|| panic!("not a number: {other}")),
    }
}

#[test]
fn fn_sharp_on_the_square() {
    let out = TempDir::new().unwrap();
    let o = run(&["analyze", "fn-sharp", "--q", "2", fixture("power2.json").to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out, "fn-sharp");
    assert!((num(&r["modulus"]) - 1.0).abs() < 1e-2, "{r}");
    assert_eq!(r["verdict"], "holds");
    assert_eq!(r["quantity"], "sharp_minimum");
    let csv = std::fs::read_to_string(out.path().join("fn-sharp.csv")).unwrap();
    assert!(csv.starts_with("direction_index,t,value\n"));
    assert!(!csv.contains('\r'));
    assert!(out.path().join("fn-sharp.metadata.json").exists());
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout, r);
}

#[test]
fn problem_flag_is_accepted() {
    let out = TempDir::new().unwrap();
    let o = run(&["analyze", "fn-sharp", "--q", "1", "--problem", fixture("power2.json").to_str().unwrap()], &out);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&out, "fn-sharp")["verdict"], "fails");
}

#[test]
fn usage_errors_exit_two() {
    let out = TempDir::new().unwrap();
    let p = fixture("power2.json");
    let p = p.to_str().unwrap();
    assert_eq!(code(&run(&["analyze", "fn-sharp", p], &out)), 2, "missing --q");
    assert_eq!(code(&run(&["analyze", "fn-sharp", "--q", "2"], &out)), 2, "missing problem");
    assert_eq!(code(&run(&["analyze", "fn-sharp", "--q", "-1", p], &out)), 2, "bad order");
    assert_eq!(code(&run(&["analyze", "teleport", "--q", "2", p], &out)), 2, "bad kind");
    let epi = fixture("epi_square.json");
    assert_eq!(code(&run(&["analyze", "fn-sharp", "--q", "2", epi.to_str().unwrap()], &out)), 2, "map for fn");
    assert_eq!(code(&run(&["analyze", "map-subreg", "--q", "2", p], &out)), 2, "fn for map");
    let missing = out.path().join("absent.json");
    assert_eq!(code(&run(&["analyze", "fn-sharp", "--q", "2", missing.to_str().unwrap()], &out)), 2);
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", "{\n  \"kind\": \"function\",\n  \"family\": }");
    let o = run(&["analyze", "fn-sharp", "--q", "1", p.to_str().unwrap()], &dir);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3, column 13"), "{err}");
}

#[test]
fn map_commands() {
    let out = TempDir::new().unwrap();
    let epi = fixture("epi_square.json");
    let epi = epi.to_str().unwrap();
    assert_eq!(code(&run(&["analyze", "map-subreg", "--q", "2", epi], &out)), 0);
    assert!((num(&report(&out, "map-subreg")["modulus"]) - 1.0).abs() < 5e-2);
    assert_eq!(code(&run(&["analyze", "deriv-norm", "--q", "3", epi], &out)), 0);
    let r = report(&out, "deriv-norm");
    assert_eq!(r["lower"]["verdict"], "infinite");
    assert_eq!(code(&run(&["analyze", "map-calmness", "--q", "2", epi], &out)), 0);
    assert_eq!(report(&out, "map-calmness")["verdict"], "fails");
}

#[test]
fn lsip_semicircle() {
    let out = TempDir::new().unwrap();
    let p = fixture("semicircle.json");
    let p = p.to_str().unwrap();
    assert_eq!(code(&run(&["lsip", "calmness", "--q", "2", p], &out)), 0);
    let r = report(&out, "lsip-calmness");
    assert!((num(&r["certificate"]["estimate"]["value"]) - 0.25).abs() <= 0.02, "{r}");
    assert_eq!(r["certificate"]["outer_norm_criterion"], "not_applicable");
    assert_eq!(code(&run(&["lsip", "calmness", p], &out)), 2, "missing --q");

    assert_eq!(code(&run(&["lsip", "slater", p], &out)), 0);
    assert_eq!(report(&out, "lsip-slater")["holds"], true);
    assert_eq!(code(&run(&["lsip", "enc", p], &out)), 0);
    let r = report(&out, "lsip-enc");
    assert_eq!(r["holds"], false);
    let t = num(&r["violating_params"][0]);
    assert!((t - std::f64::consts::PI).abs() < 2.0 * std::f64::consts::TAU / 719.0, "{r}");
    assert_eq!(code(&run(&["lsip", "solve", p], &out)), 0);
    assert!((num(&report(&out, "lsip-solve")["objective"]) + 1.0).abs() < 1e-3);
}

#[test]
fn lsip_precondition_exits_three() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "strip.json",
        r#"{"n":2,"c":[1.0,0.0],"family":{"kind":"finite","rows":[[[-1.0,0.0],0.0],[[0.0,1.0],1.0],[[0.0,-1.0],1.0]]}}"#,
    );
    let o = run(&["lsip", "calmness", "--q", "1", p.to_str().unwrap()], &dir);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singleton"));
}

#[test]
fn penalty_threshold_per_convention() {
    let out = TempDir::new().unwrap();
    let two = fixture("power_constraint.json");
    assert_eq!(code(&run(&["penalty", "threshold", "--q", "1", two.to_str().unwrap()], &out)), 0);
    assert!((num(&report(&out, "penalty-threshold")["rho0"]) - 1.0).abs() < 1e-5);
    let dom = fixture("power_constraint_domain.json");
    assert_eq!(code(&run(&["penalty", "threshold", "--q", "1", dom.to_str().unwrap()], &out)), 0);
    let r = report(&out, "penalty-threshold");
    assert_eq!(num(&r["rho0"]), 0.0);
    assert_eq!(r["kstar_nonempty"], false);

    assert_eq!(code(&run(&["penalty", "check", "--q", "1", "--r", "3", two.to_str().unwrap()], &out)), 0);
    let r = report(&out, "penalty-check");
    assert!((num(&r["sharp"]["modulus"]) - 2.0).abs() < 2e-2, "{r}");
    assert_eq!(r["consistent"], true);
}

#[test]
fn penalty_needs_p() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "nop.json", r#"{"f":{"family":"abs","params":{}},"g":[]}"#);
    assert_eq!(code(&run(&["penalty", "threshold", "--q", "1", p.to_str().unwrap()], &dir)), 2);
    assert_eq!(code(&run(&["penalty", "threshold", "--q", "1", "--p", "2", p.to_str().unwrap()], &dir)), 0);
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let p = fixture("epi_square.json");
    for d in [&a, &b] {
        assert_eq!(code(&run(&["analyze", "map-subreg", "--q", "1", p.to_str().unwrap(), "--parallel", "2"], d)), 0);
    }
    for f in ["map-subreg.json", "map-subreg.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_from_environment() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.toml", "[tolerances]\neps_pos = -1.0\n");
    let p = fixture("power2.json");
    let o = bin()
        .env("HOLDERREG_CONFIG", &bad)
        .args(["analyze", "fn-sharp", "--q", "2", p.to_str().unwrap(), "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps_pos"));

    let good = write(&dir, "good.toml", "[output]\ndir = \"from-config\"\n");
    let o = bin()
        .current_dir(dir.path())
        .args(["--config", good.to_str().unwrap(), "analyze", "fn-sharp", "--q", "2", p.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("from-config/fn-sharp.json").exists());
}

#[test]
fn verify_exit_codes() {
    let out = TempDir::new().unwrap();
    let o = run(&["verify", "lsip"], &out);
    assert_eq!(code(&o), 0);
    let r = report(&out, "verify-lsip");
    let ids: Vec<&str> = r.as_array().unwrap().iter().map(|p| p["property_id"].as_str().unwrap()).collect();
    assert!(!ids.is_empty() && ids.iter().all(|id| id.starts_with("lsip.")));

    let o = run(&["verify", "calculus", "--inject-norm-lower-bias", "0.1"], &out);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
    assert_eq!(code(&run(&["verify", "everything"], &out)), 2);
}
