//! Run artifacts: CSV tables, JSON reports and the hashed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wickchaos::diagnostics::{
    log_growth_bound, moments, norm_report, sup_bound_certificate, NormReport, SpatialNorm,
};
use wickchaos::{Bundle, Field, Problem, RunStatus};

use crate::config::{RunConfig, SpatialNormConfig};
use crate::presets::{fujita_front, has_closed_form};
use crate::CliError;

pub const COEFFICIENTS: &str = "coefficients.csv";
pub const MOMENTS: &str = "moments.csv";
pub const NORMS: &str = "norms.json";
pub const SUP_TABLE: &str = "sup_table.csv";
pub const METADATA: &str = "metadata.json";
pub const MANIFEST: &str = "manifest.json";

/// Seventeen significant digits, locale independent.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `None` for values JSON cannot carry (the `-inf` of a zero norm, say).
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub role: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputManifest {
    pub files: Vec<ManifestEntry>,
}

impl OutputManifest {
    /// Checks that every listed file exists and matches its hash.
    pub fn verify(&self, dir: &Path) -> Result<(), CliError> {
        for e in &self.files {
            let bytes = fs::read(dir.join(&e.path))
                .map_err(|err| CliError::Bundle(format!("{}: {err}", e.path)))?;
            if sha256_hex(&bytes) != e.sha256 {
                return Err(CliError::Bundle(format!(
                    "{} does not match its manifest hash",
                    e.path
                )));
            }
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(dir.join(MANIFEST))
            .map_err(|e| CliError::Bundle(format!("{MANIFEST}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| CliError::Bundle(format!("{MANIFEST}: {e}")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub r: f64,
    pub p: f64,
    pub log_norm: Option<f64>,
    pub log_contributions: Vec<Option<f64>>,
    pub log_partial_sums: Vec<Option<f64>>,
    pub top_share: f64,
}

impl From<&NormReport> for NormEntry {
    fn from(n: &NormReport) -> Self {
        NormEntry {
            r: n.r,
            p: n.p,
            log_norm: finite(n.log_norm),
            log_contributions: n
                .tail
                .log_contributions
                .iter()
                .map(|&v| finite(v))
                .collect(),
            log_partial_sums: n.tail.log_partial_sums.iter().map(|&v| finite(v)).collect(),
            top_share: n.tail.top_share,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsFile {
    pub time: f64,
    pub spatial_norm: SpatialNormConfig,
    pub pairs: Vec<NormEntry>,
}

pub fn spatial_norm(cfg: &RunConfig) -> SpatialNorm {
    match cfg.spatial_norm {
        SpatialNormConfig::Max => SpatialNorm::Max,
        SpatialNormConfig::L2 => {
            let d = &cfg.domain;
            SpatialNorm::L2 {
                spacing: (d.x_max - d.x_min) / (d.n_x - 1) as f64,
            }
        }
    }
}

pub fn norms_file(
    cfg: &RunConfig,
    field: &Field,
    time: f64,
    pairs: &[(f64, f64)],
) -> Result<NormsFile, CliError> {
    let reports = norm_report(field, pairs, spatial_norm(cfg))?;
    Ok(NormsFile {
        time,
        spatial_norm: cfg.spatial_norm,
        pairs: reports.iter().map(NormEntry::from).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub r0: f64,
    pub p0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusLabel {
    Completed,
    BlowUp,
    NonFinite,
}

impl From<RunStatus> for StatusLabel {
    fn from(s: RunStatus) -> Self {
        match s {
            RunStatus::Completed => StatusLabel::Completed,
            RunStatus::BlowUp => StatusLabel::BlowUp,
            RunStatus::NonFinite => StatusLabel::NonFinite,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub problem_digest: String,
    pub status: StatusLabel,
    pub steps_planned: usize,
    pub steps_taken: usize,
    pub t_reached: f64,
    pub failure: Option<String>,
    pub warnings: Vec<String>,
    pub index_set_size: usize,
    pub saved_times: usize,
    pub certificate: Option<Certificate>,
    /// Max over interior points and saved times of the expectation's
    /// distance to the closed-form front, when the run has one.
    pub closed_form_error: Option<f64>,
}

/// In-memory CSV writer; labels such as `a(0,2,0)` get quoted.
pub fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub fn csv_bytes(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory writer")
}

fn csv_coefficients(bundle: &Bundle, xs: &[f64]) -> Result<Vec<u8>, csv::Error> {
    let set = bundle.index_set();
    let mut w = csv_writer();
    let mut header = vec!["t".to_string(), "x".to_string()];
    header.extend(set.indices().iter().map(|a| a.label()));
    w.write_record(&header)?;
    for (t, snap) in bundle.times.iter().zip(&bundle.snapshots) {
        for (i, &x) in xs.iter().enumerate() {
            let mut row = vec![num(*t), num(x)];
            row.extend((0..set.len()).map(|ord| num(snap.coeff(ord)[i])));
            w.write_record(&row)?;
        }
    }
    Ok(csv_bytes(w))
}

fn csv_moments(bundle: &Bundle, xs: &[f64]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv_writer();
    w.write_record(["t", "x", "mean", "variance"])?;
    for (t, snap) in bundle.times.iter().zip(&bundle.snapshots) {
        let m = moments(snap);
        for (i, &x) in xs.iter().enumerate() {
            w.write_record([num(*t), num(x), num(m.mean[i]), num(m.variance[i])])?;
        }
    }
    Ok(csv_bytes(w))
}

fn csv_sup_table(bundle: &Bundle, cert: Option<(f64, f64)>) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv_writer();
    w.write_record(["alpha", "L_alpha", "log_bound"])?;
    for (a, &l) in bundle.index_set().indices().iter().zip(&bundle.sup_table) {
        let bound = match cert {
            Some((r, p)) => num(log_growth_bound(a, r, p)),
            None => String::new(),
        };
        w.write_record([a.label(), num(l), bound])?;
    }
    Ok(csv_bytes(w))
}

fn closed_form_error(bundle: &Bundle, xs: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (t, snap) in bundle.times.iter().zip(&bundle.snapshots) {
        let u0 = snap.coeff(0);
        for i in 1..xs.len() - 1 {
            worst = worst.max((u0[i] - fujita_front(*t, xs[i])).abs());
        }
    }
    worst
}

/// Pretty JSON with a trailing newline.
pub fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

fn write_file(dir: &Path, name: &str, role: &str, bytes: &[u8]) -> Result<ManifestEntry, CliError> {
    fs::write(dir.join(name), bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", dir.join(name).display())))?;
    Ok(ManifestEntry {
        path: name.to_string(),
        role: role.to_string(),
        sha256: sha256_hex(bytes),
    })
}

/// Writes every artifact of a run into `dir` and returns the manifest.
pub fn write_run(
    dir: &Path,
    cfg: &RunConfig,
    problem: &Problem,
    bundle: &Bundle,
) -> Result<(OutputManifest, Metadata), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let xs = problem.grid.points();
    let cert = sup_bound_certificate(bundle.index_set(), &bundle.sup_table);
    let norms = norms_file(
        cfg,
        bundle.last(),
        *bundle.times.last().unwrap(),
        &cfg.norms,
    )?;

    let m = &bundle.metadata;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.resolved(),
        problem_digest: m.digest.clone(),
        status: m.status.into(),
        steps_planned: m.steps_planned,
        steps_taken: m.steps_taken,
        t_reached: m.t_reached,
        failure: m.failure.clone(),
        warnings: m.warnings.clone(),
        index_set_size: bundle.index_set().len(),
        saved_times: bundle.times.len(),
        certificate: cert.map(|(r0, p0)| Certificate { r0, p0 }),
        closed_form_error: has_closed_form(cfg).then(|| closed_form_error(bundle, &xs)),
    };

    let files = vec![
        write_file(
            dir,
            COEFFICIENTS,
            "coefficients",
            &csv_coefficients(bundle, &xs)?,
        )?,
        write_file(dir, MOMENTS, "moments", &csv_moments(bundle, &xs)?)?,
        write_file(dir, NORMS, "norms", &pretty(&norms))?,
        write_file(dir, SUP_TABLE, "sup_table", &csv_sup_table(bundle, cert)?)?,
        write_file(dir, METADATA, "metadata", &pretty(&meta))?,
    ];
    let manifest = OutputManifest { files };
    fs::write(dir.join(MANIFEST), pretty(&manifest))
        .map_err(|e| CliError::Io(format!("cannot write manifest: {e}")))?;
    Ok((manifest, meta))
}

/// Default location of the sample table inside a bundle directory.
pub fn samples_path(dir: &Path) -> PathBuf {
    dir.join("samples.csv")
}
