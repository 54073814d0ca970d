//! Every checked-in fuzz seed is a valid input for its parser.

use std::fs;
use std::path::{Path, PathBuf};

use holder_reg::catalog::{PenaltySpec, ProblemSpec};
use holder_reg::config::RunConfig;
use holder_reg::lsip::LsipProblem;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn problem_seeds_build() {
    for (path, text) in seeds("problem_json") {
        ProblemSpec::from_json(&text)
            .and_then(|s| s.build())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn lsip_seeds_discretize() {
    for (path, text) in seeds("lsip_json") {
        LsipProblem::from_json(&text)
            .and_then(|p| p.discretized())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn penalty_seeds_build() {
    for (path, text) in seeds("penalty_json") {
        PenaltySpec::from_json(&text)
            .and_then(|s| s.build(None, None))
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn config_seeds_load() {
    for (path, text) in seeds("config_toml") {
        RunConfig::from_toml(&text)
            .and_then(|c| c.settings())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
