#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wickchaos"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Writes `json` to `dir/name` and returns the path.
pub fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

/// A small expanding-front run with closed-form boundary data.
pub const FUJITA: &str = r#"{
    "equation": {"preset": "fujita_gelfand"},
    "domain": {"x_min": -10, "x_max": 10, "n_x": 201, "bc": "dirichlet"},
    "time": {"t_final": 1.0, "dt": 0.002, "save_every": 100},
    "truncation": {"modes": 2, "order": 2},
    "initial": {"preset": "paper_31"}
}"#;

/// A short stochastic run used by the norms and sample tests.
pub const STOCHASTIC: &str = r#"{
    "equation": {"preset": "fujita_gelfand"},
    "domain": {"x_min": -5, "x_max": 5, "n_x": 41, "bc": "dirichlet"},
    "time": {"t_final": 0.2, "dt": 0.01, "save_every": 5},
    "truncation": {"modes": 3, "order": 3},
    "initial": {"preset": "paper_31", "value": 0.5},
    "norms": [[2, 0], [32, 3]]
}"#;

pub fn solved(dir: &Path, json: &str) -> PathBuf {
    let cfg = write_config(dir, "run.json", json);
    let out = dir.join("bundle");
    let o = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}
