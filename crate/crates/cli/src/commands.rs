//! Commands on measure files: transport distance and family diagnostics.

use std::path::{Path, PathBuf};

use epm_core::io::load_measure;
use epm_core::{family_report, ot_infinity, FamilyReport, MetricConfig, PersistenceMeasure, Thresholds};
use log::warn;
use serde::Serialize;

use crate::artifacts;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub ot_infinity: f64,
}

/// OT∞ between two measure files. The exponent comes from `q` when given,
/// otherwise from the first file.
pub fn distance(a: &Path, b: &Path, q: Option<f64>, coupling_out: Option<&Path>) -> CliResult<DistanceReport> {
    let (fa, fb) = (load_measure(a)?, load_measure(b)?);
    let cfg = match q {
        Some(q) => MetricConfig::new(q)?,
        None => {
            if fa.q != fb.q {
                warn!("measure files disagree on q; using {} from {}", fa.q.q(), a.display());
            }
            fa.q
        }
    };
    let result = ot_infinity(&fa.measure, &fb.measure, &cfg);
    if let Some(path) = coupling_out {
        artifacts::write_json(path, &result.coupling)?;
    }
    Ok(DistanceReport {
        ot_infinity: result.distance,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnoseOptions {
    pub eps: Vec<f64>,
    pub odut_eps: f64,
    pub bands: Vec<u64>,
    pub q: Option<f64>,
    pub thresholds: Thresholds,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            eps: vec![0.1, 0.5, 1.0],
            odut_eps: 0.1,
            bands: vec![1, 10, 100],
            q: None,
            thresholds: Thresholds::default(),
        }
    }
}

/// Every `*.json` measure in `dir`, sorted by file name.
pub fn load_family(dir: &Path) -> CliResult<(Vec<PathBuf>, Vec<PersistenceMeasure>, MetricConfig)> {
    let paths = artifacts::list_files(dir, "json")?;
    if paths.is_empty() {
        return Err(CliError::Data(format!("no measure files in {}", dir.display())));
    }
    let files = paths
        .iter()
        .map(|p| load_measure(p))
        .collect::<epm_core::Result<Vec<_>>>()?;
    let q = files[0].q;
    Ok((paths, files.into_iter().map(|f| f.measure).collect(), q))
}

pub fn diagnose(dir: &Path, opts: &DiagnoseOptions) -> CliResult<FamilyReport> {
    let (_, family, file_q) = load_family(dir)?;
    let cfg = match opts.q {
        Some(q) => MetricConfig::new(q)?,
        None => file_q,
    };
    Ok(family_report(
        &family,
        &opts.eps,
        opts.odut_eps,
        &opts.bands,
        &cfg,
        &opts.thresholds,
    )?)
}
