//! Batch front end for the `wickchaos` solver.
//!
//! Every subcommand is a plain function here so the binary stays a thin
//! argument parser and the integration tests can call the commands
//! directly. Exit codes: 0 success, 1 configuration or I/O error, 2 the
//! run stopped early (blow-up or non-finite values), 3 a verification
//! suite failed.

// `!(x >= a)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;
pub mod output;
pub mod presets;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use wickchaos::diagnostics::sample_realization;
use wickchaos::{solve, RunStatus};

use crate::bundle::load_bundle;
use crate::config::RunConfig;
use crate::output::{
    csv_bytes, csv_writer, norms_file, num, samples_path, write_run, Metadata, NormsFile,
    OutputManifest,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("bundle error: {0}")]
    Bundle(String),
    #[error(transparent)]
    Solver(#[from] wickchaos::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        1
    }
}

pub struct SolveOutcome {
    pub dir: PathBuf,
    pub manifest: OutputManifest,
    pub metadata: Metadata,
    pub status: RunStatus,
}

impl SolveOutcome {
    pub fn exit_code(&self) -> u8 {
        match self.status {
            RunStatus::Completed => 0,
            RunStatus::BlowUp | RunStatus::NonFinite => 2,
        }
    }
}

/// Runs the solver on a config file and writes the output bundle.
/// `out` overrides the config's `output` directory.
pub fn cmd_solve(config_path: &Path, out: Option<&Path>) -> Result<SolveOutcome, CliError> {
    let cfg = RunConfig::load(config_path)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| {
            CliError::Config("no output directory: pass --out or set `output`".into())
        })?;
    solve_config(&cfg, &dir)
}

pub fn solve_config(cfg: &RunConfig, dir: &Path) -> Result<SolveOutcome, CliError> {
    let problem = presets::build_problem(cfg)?;
    problem
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    log::info!(
        "solving: {} coefficients, {} grid points, {} steps",
        problem.index_set().len(),
        problem.grid.n_x,
        problem.step_count()
    );
    let bundle = solve(&problem, cfg.time.save_every)?;
    for w in &bundle.metadata.warnings {
        log::warn!("{w}");
    }
    let (manifest, metadata) = write_run(dir, cfg, &problem, &bundle)?;
    Ok(SolveOutcome {
        dir: dir.to_path_buf(),
        manifest,
        metadata,
        status: bundle.metadata.status,
    })
}

/// Parses `r:p[,r:p...]`.
pub fn parse_pairs(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|item| {
            let bad = || CliError::Config(format!("bad norm pair `{item}`, expected r:p"));
            let (r, p) = item.trim().split_once(':').ok_or_else(bad)?;
            let r: f64 = r.trim().parse().map_err(|_| bad())?;
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            if !(r >= 2.0 && p >= 0.0 && r.is_finite() && p.is_finite()) {
                return Err(CliError::Config(format!(
                    "norm pair ({r}, {p}) needs r >= 2 and p >= 0"
                )));
            }
            Ok((r, p))
        })
        .collect()
}

/// Recomputes norms and grade tails for the final snapshot of a bundle.
pub fn cmd_norms(dir: &Path, pairs: &[(f64, f64)]) -> Result<NormsFile, CliError> {
    let b = load_bundle(dir)?;
    norms_file(b.config(), b.last(), *b.times.last().unwrap(), pairs)
}

pub struct SampleRequest<'a> {
    pub dir: &'a Path,
    pub n: usize,
    pub seed: u64,
    /// Number of individual sample columns kept in the table.
    pub columns: usize,
    /// Defaults to `samples.csv` inside the bundle.
    pub out: Option<&'a Path>,
}

pub struct SampleTable {
    pub path: PathBuf,
    /// Per saved time: empirical mean and variance over all samples.
    pub mean: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
}

const CHUNK: usize = 512;

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn variance(&self) -> f64 {
        if self.n > 1.0 {
            self.m2 / (self.n - 1.0)
        } else {
            0.0
        }
    }
}

/// Draws realizations of every saved snapshot from one set of Gaussian
/// vectors. Results do not depend on the thread count: the Gaussians are
/// drawn sequentially and chunk statistics are merged in a fixed order.
pub fn cmd_sample(req: &SampleRequest) -> Result<SampleTable, CliError> {
    if req.n == 0 {
        return Err(CliError::Config("need at least one sample".into()));
    }
    let b = load_bundle(req.dir)?;
    let k = b.set.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let gaussians: Vec<f64> = (0..req.n * k)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let n_x = b.xs.len();

    let stats: Vec<Vec<Welford>> = b
        .snapshots
        .iter()
        .map(|snap| {
            let chunks: Result<Vec<Vec<Welford>>, CliError> = gaussians
                .par_chunks(CHUNK * k)
                .map(|block| {
                    let mut acc = vec![Welford::default(); n_x];
                    for xi in block.chunks(k) {
                        let v = sample_realization(snap, xi)?;
                        for (a, x) in acc.iter_mut().zip(v) {
                            a.push(x);
                        }
                    }
                    Ok(acc)
                })
                .collect();
            Ok(chunks?
                .into_iter()
                .reduce(|a, c| a.into_iter().zip(c).map(|(p, q)| p.merge(q)).collect())
                .unwrap())
        })
        .collect::<Result<_, CliError>>()?;

    let m = req.columns.min(req.n);
    let mut w = csv_writer();
    let mut header: Vec<String> = ["t", "x", "mean", "variance"].map(String::from).to_vec();
    header.extend((0..m).map(|j| format!("sample_{j}")));
    w.write_record(&header)?;
    for ((t, snap), st) in b.times.iter().zip(&b.snapshots).zip(&stats) {
        let kept: Vec<Vec<f64>> = gaussians
            .chunks(k)
            .take(m)
            .map(|xi| sample_realization(snap, xi))
            .collect::<Result<_, _>>()?;
        for (i, &x) in b.xs.iter().enumerate() {
            let mut row = vec![num(*t), num(x), num(st[i].mean), num(st[i].variance())];
            row.extend(kept.iter().map(|col| num(col[i])));
            w.write_record(&row)?;
        }
    }
    let path = req
        .out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| samples_path(req.dir));
    fs::write(&path, csv_bytes(w))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(SampleTable {
        path,
        mean: stats
            .iter()
            .map(|st| st.iter().map(|w| w.mean).collect())
            .collect(),
        variance: stats
            .iter()
            .map(|st| st.iter().map(Welford::variance).collect())
            .collect(),
    })
}
