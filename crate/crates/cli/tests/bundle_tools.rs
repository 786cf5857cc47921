mod common;

use std::fs;

use common::*;
use wickchaos_cli::output::{sha256_hex, NormsFile, OutputManifest};
use wickchaos_cli::{cmd_norms, cmd_sample, parse_pairs, SampleRequest};

fn norms_json(bytes: &[u8]) -> NormsFile {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn norms_reproduce_the_run_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solved(tmp.path(), STOCHASTIC);
    let original = norms_json(&fs::read(out.join("norms.json")).unwrap());

    let o = run(&[
        "norms",
        "--bundle",
        out.to_str().unwrap(),
        "--pairs",
        "2:0,32:3",
    ]);
    assert_eq!(code(&o), 0);
    let again = norms_json(&o.stdout);
    assert_eq!(again.pairs.len(), 2);
    assert_eq!(again.time, original.time);
    for (a, b) in again.pairs.iter().zip(&original.pairs) {
        assert_eq!((a.r, a.p), (b.r, b.p));
        let (x, y) = (a.log_norm.unwrap(), b.log_norm.unwrap());
        assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{x} vs {y}");
        assert_eq!(a.log_contributions.len(), 4);
    }
}

#[test]
fn norms_nest_in_r_and_p() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solved(tmp.path(), STOCHASTIC);
    let pairs = parse_pairs("2:0,4:0,32:0,2:1,2:3,32:3").unwrap();
    let n = cmd_norms(&out, &pairs).unwrap();
    let v: Vec<f64> = n.pairs.iter().map(|e| e.log_norm.unwrap()).collect();
    assert!(v[1] <= v[0] && v[2] <= v[1]);
    assert!(v[3] <= v[0] && v[4] <= v[3]);
    assert!(v[5] <= v[2] && v[5] <= v[4]);
}

#[test]
fn norms_reject_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nothing");
    assert_eq!(
        code(&run(&["norms", "--bundle", missing.to_str().unwrap()])),
        1
    );
    let out = solved(tmp.path(), STOCHASTIC);
    assert_eq!(
        code(&run(&[
            "norms",
            "--bundle",
            out.to_str().unwrap(),
            "--pairs",
            "1:0"
        ])),
        1
    );

    let path = out.join("coefficients.csv");
    let mut bytes = fs::read(&path).unwrap();
    let last = bytes.len() - 2;
    bytes[last] = if bytes[last] == b'1' { b'2' } else { b'1' };
    fs::write(&path, bytes).unwrap();
    let o = run(&["norms", "--bundle", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("manifest"));
}

fn bundle_hashes(dir: &std::path::Path) -> Vec<String> {
    OutputManifest::load(dir)
        .unwrap()
        .files
        .iter()
        .map(|f| sha256_hex(&fs::read(dir.join(&f.path)).unwrap()))
        .collect()
}

#[test]
fn sampling_is_deterministic_and_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solved(tmp.path(), STOCHASTIC);
    let before = bundle_hashes(&out);
    let sample = |seed: &str, file: &str| {
        let path = tmp.path().join(file);
        let o = run(&[
            "sample",
            "--bundle",
            out.to_str().unwrap(),
            "--n",
            "1",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(path).unwrap()
    };
    let a = sample("7", "a.csv");
    let b = sample("7", "b.csv");
    let c = sample("8", "c.csv");
    assert_eq!(sha256_hex(&a), sha256_hex(&b));
    assert_ne!(a, c);
    assert_eq!(bundle_hashes(&out), before);

    let (header, rows) = read_csv(&tmp.path().join("a.csv"));
    assert_eq!(header, ["t", "x", "mean", "variance", "sample_0"]);
    assert_eq!(rows.len(), 5 * 41);
    // a single sample is its own mean
    assert!(rows.iter().all(|r| r[2] == r[4] && r[3] == 0.0));
}

#[test]
fn sampling_needs_a_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "sample",
        "--bundle",
        tmp.path().to_str().unwrap(),
        "--n",
        "3",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn empirical_moments_match_the_expansion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = solved(tmp.path(), STOCHASTIC);
    let n = 100_000;
    let table = cmd_sample(&SampleRequest {
        dir: &out,
        n,
        seed: 2024,
        columns: 2,
        out: None,
    })
    .unwrap();
    assert!(table.path.ends_with("samples.csv"));
    let (_, moments) = read_csv(&out.join("moments.csv"));
    let n_x = 41;
    let last = moments.len() - n_x;
    let (mean, var) = (table.mean.last().unwrap(), table.variance.last().unwrap());
    let mut worst = 0.0f64;
    for i in (0..n_x).step_by(5) {
        let (m, v) = (moments[last + i][2], moments[last + i][3]);
        let se = (v / n as f64).sqrt();
        worst = worst.max((mean[i] - m).abs() / se);
        // variance of the sample variance from the fourth moment is not at
        // hand; a 5% band is many standard errors wide at this sample size
        assert!((var[i] - v).abs() <= 0.05 * v, "variance {} vs {v}", var[i]);
    }
    assert!(worst <= 3.0, "mean deviates by {worst} standard errors");
}
