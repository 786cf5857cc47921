use std::fs;
use std::path::{Path, PathBuf};

use jsonschema::JSONSchema;
use serde_json::Value;
use wickchaos_cli::config::RunConfig;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn schema() -> JSONSchema {
    let text = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run_config.schema.json"),
    )
    .unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    JSONSchema::options()
        .with_draft(jsonschema::Draft::Draft202012)
        .compile(&v)
        .unwrap()
}

fn shipped_configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(root().join("configs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_satisfy_schema_and_parser() {
    let s = schema();
    let configs = shipped_configs();
    assert!(configs.len() >= 4);
    for path in configs {
        let text = fs::read_to_string(&path).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(s.is_valid(&v), "{} fails the schema", path.display());
        RunConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn serialized_configs_satisfy_schema() {
    let s = schema();
    for path in shipped_configs() {
        let cfg = RunConfig::load(&path).unwrap();
        let v = serde_json::to_value(cfg.resolved()).unwrap();
        assert!(s.is_valid(&v), "{} after round trip", path.display());
    }
}

#[test]
fn schema_and_parser_reject_the_same_mistakes() {
    let s = schema();
    let base = fs::read_to_string(root().join("configs/fujita_gelfand.json")).unwrap();
    let broken = [
        base.replace("\"fujita_gelfand\"", "\"burgers\""),
        base.replace("\"dirichlet\"", "\"robin\""),
        base.replace("\"n_x\": 401", "\"n_x\": 4"),
        base.replace("\"modes\": 2", "\"modes\": 0"),
        base.replace("\"seed\": 0", "\"seed\": 0, \"colour\": 1"),
        base.replace("[2.0, 0.0]", "[1.0, 0.0]"),
        base.replace("\"paper_31\"", "\"paper31\""),
    ];
    for text in broken {
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(!s.is_valid(&v), "schema accepts:\n{text}");
        assert!(
            RunConfig::from_json(&text).is_err(),
            "parser accepts:\n{text}"
        );
    }
}
