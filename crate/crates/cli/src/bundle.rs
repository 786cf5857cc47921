//! Reading a solve output directory back in.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use wickchaos::{ChaosField, Field, IndexSet, MultiIndex};

use crate::config::RunConfig;
use crate::output::{Metadata, OutputManifest, COEFFICIENTS, METADATA};
use crate::CliError;

pub struct LoadedBundle {
    pub metadata: Metadata,
    pub set: Arc<IndexSet>,
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
}

impl LoadedBundle {
    pub fn config(&self) -> &RunConfig {
        &self.metadata.config
    }

    pub fn last(&self) -> &Field {
        self.snapshots
            .last()
            .expect("bundle has at least one snapshot")
    }
}

fn corrupt(what: impl std::fmt::Display) -> CliError {
    CliError::Bundle(format!("{COEFFICIENTS}: {what}"))
}

/// Loads a bundle after checking every file against the manifest.
pub fn load_bundle(dir: &Path) -> Result<LoadedBundle, CliError> {
    OutputManifest::load(dir)?.verify(dir)?;
    let meta_text = fs::read_to_string(dir.join(METADATA))
        .map_err(|e| CliError::Bundle(format!("{METADATA}: {e}")))?;
    let metadata: Metadata = serde_json::from_str(&meta_text)
        .map_err(|e| CliError::Bundle(format!("{METADATA}: {e}")))?;
    let tr = &metadata.config.truncation;
    let set = Arc::new(IndexSet::enumerate(tr.modes, tr.order)?);

    let mut rdr = csv::Reader::from_path(dir.join(COEFFICIENTS)).map_err(corrupt)?;
    let header = rdr.headers().map_err(corrupt)?.clone();
    if header.len() != set.len() + 2 || &header[0] != "t" || &header[1] != "x" {
        return Err(corrupt("unexpected header"));
    }
    // column j + 2 holds the coefficient with ordinal columns[j]
    let columns: Vec<usize> = header
        .iter()
        .skip(2)
        .map(|label| {
            MultiIndex::parse_label(label)
                .and_then(|a| set.position(&a))
                .ok_or_else(|| corrupt(format!("unknown column {label}")))
        })
        .collect::<Result<_, _>>()?;

    let n_x = metadata.config.domain.n_x;
    let mut times = Vec::new();
    let mut xs = Vec::with_capacity(n_x);
    let mut snapshots = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_x);
    for record in rdr.records() {
        let record = record.map_err(corrupt)?;
        let vals: Vec<f64> = record
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| corrupt(format!("bad number {v}")))
            })
            .collect::<Result<_, _>>()?;
        if rows.is_empty() {
            times.push(vals[0]);
        }
        if snapshots.is_empty() {
            xs.push(vals[1]);
        }
        let mut by_ord = vec![0.0; set.len()];
        for (col, &ord) in columns.iter().enumerate() {
            by_ord[ord] = vals[col + 2];
        }
        rows.push(by_ord);
        if rows.len() == n_x {
            snapshots.push(ChaosField::from_fn(set.clone(), n_x, |ord, _, i| {
                rows[i][ord]
            }));
            rows.clear();
        }
    }
    if !rows.is_empty() || snapshots.is_empty() {
        return Err(corrupt("incomplete snapshot"));
    }
    Ok(LoadedBundle {
        metadata,
        set,
        xs,
        times,
        snapshots,
    })
}
