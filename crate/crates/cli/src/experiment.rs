//! End-to-end runs with a manifest that makes every stage resumable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::artifacts::{self, Metrics, MANIFEST_FILE, METRICS_FILE, TABLE_CSV, TABLE_TXT};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::seeds::config_hash;
use crate::stages;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    /// Hash of the stage name, the configuration and the previous stage's hash.
    pub config_hash: String,
    /// Paths relative to the run directory.
    pub outputs: Vec<String>,
    pub wall_time_secs: f64,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEntry {
    pub samples_per_object: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub stages: Vec<StageRecord>,
    pub accuracy: Vec<AccuracyEntry>,
}

impl RunManifest {
    pub fn load(out: &Path) -> CliResult<Self> {
        artifacts::read_json(&out.join(MANIFEST_FILE))
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a Path,
    previous: BTreeMap<String, StageRecord>,
    manifest: RunManifest,
    chain: String,
}

impl Runner<'_> {
    fn relative(&self, p: &Path) -> String {
        p.strip_prefix(self.out).unwrap_or(p).to_string_lossy().into_owned()
    }

    /// Runs `body` unless a previous record with the same hash has all of
    /// its outputs on disk.
    fn stage<F>(&mut self, name: &str, body: F) -> CliResult<()>
    where
        F: FnOnce() -> CliResult<Vec<PathBuf>>,
    {
        let hash = config_hash(&(name, self.cfg, &self.chain));
        self.chain = hash.clone();
        if let Some(prev) = self.previous.get(name) {
            if prev.config_hash == hash && prev.outputs.iter().all(|o| self.out.join(o).exists()) {
                info!("stage {name}: up to date, skipped");
                self.manifest.stages.push(StageRecord {
                    skipped: true,
                    wall_time_secs: 0.0,
                    ..prev.clone()
                });
                return self.save();
            }
        }
        info!("stage {name}: running");
        let start = Instant::now();
        let outputs = body().map_err(|e| e.in_stage(name))?;
        let record = StageRecord {
            name: name.to_string(),
            config_hash: hash,
            outputs: outputs.iter().map(|p| self.relative(p)).collect(),
            wall_time_secs: start.elapsed().as_secs_f64(),
            skipped: false,
        };
        self.manifest.stages.push(record);
        self.save()
    }

    fn save(&self) -> CliResult<()> {
        artifacts::write_json(&self.out.join(MANIFEST_FILE), &self.manifest)
    }
}

/// sample → diagram → (featurize → train → evaluate) for every entry of
/// `samples_per_object`, then the accuracy table. With `resume`, stages
/// whose hash and outputs match the existing manifest are skipped.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, resume: bool) -> CliResult<RunManifest> {
    cfg.validate()?;
    artifacts::create_dir(out)?;
    let previous = if resume && out.join(MANIFEST_FILE).exists() {
        RunManifest::load(out)?
            .stages
            .into_iter()
            .map(|s| (s.name.clone(), s))
            .collect()
    } else {
        BTreeMap::new()
    };
    let mut run = Runner {
        cfg,
        out,
        previous,
        manifest: RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            stages: Vec::new(),
            accuracy: Vec::new(),
        },
        chain: String::new(),
    };

    run.stage("sample", || stages::sample(cfg, out))?;
    let diagrams = stages::diagrams_dir(out);
    run.stage("diagram", || {
        stages::diagram(
            &stages::samples_dir(out),
            &diagrams,
            &cfg.filtration(),
            &cfg.homology_degrees,
        )
    })?;

    for &k in &cfg.samples_per_object {
        let dir = out.join(format!("spo_{k}"));
        let diagram_chain = run.chain.clone();
        run.stage(&format!("featurize/spo_{k}"), || {
            stages::featurize(&diagrams, cfg, k, &dir)
        })?;
        run.stage(&format!("train/spo_{k}"), || stages::train(&dir, cfg))?;
        run.stage(&format!("evaluate/spo_{k}"), || stages::evaluate(&dir).map(|r| r.1))?;
        let metrics: Metrics = artifacts::read_json(&dir.join(METRICS_FILE))?;
        info!("samples per object {k}: test accuracy {:.4}", metrics.accuracy);
        run.manifest.accuracy.push(AccuracyEntry {
            samples_per_object: k,
            accuracy: metrics.accuracy,
        });
        // Each k depends on the diagrams only, not on the previous k.
        run.chain = diagram_chain;
    }

    let entries = run.manifest.accuracy.clone();
    run.stage("table", || write_accuracy_table(out, &entries))?;
    Ok(run.manifest)
}

/// The accuracy table with one column per samples-per-object value, as CSV
/// and as aligned text.
pub fn write_accuracy_table(out: &Path, entries: &[AccuracyEntry]) -> CliResult<Vec<PathBuf>> {
    if entries.is_empty() {
        return Err(CliError::Data("no accuracies to tabulate".into()));
    }
    let mut csv = String::from("samples_per_object");
    for e in entries {
        csv.push_str(&format!(",{}", e.samples_per_object));
    }
    csv.push_str("\naccuracy");
    for e in entries {
        csv.push_str(&format!(",{}", e.accuracy));
    }
    csv.push('\n');

    let head: Vec<String> = entries.iter().map(|e| format!("{:>8}", e.samples_per_object)).collect();
    let vals: Vec<String> = entries
        .iter()
        .map(|e| format!("{:>7.2}%", 100.0 * e.accuracy))
        .collect();
    let txt = format!(
        "samples per object | {}\naccuracy           | {}\n",
        head.join(" | "),
        vals.join(" | ")
    );

    let paths = vec![out.join(TABLE_CSV), out.join(TABLE_TXT)];
    artifacts::write_text(&paths[0], &csv)?;
    artifacts::write_text(&paths[1], &txt)?;
    Ok(paths)
}
