//! File names and the small file formats exchanged between stages.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SAMPLES_DIR: &str = "samples";
pub const DIAGRAMS_DIR: &str = "diagrams";
pub const IMAGES_DIR: &str = "images";
pub const FEATURES_FILE: &str = "features.csv";
pub const TEMPLATES_FILE: &str = "template_system.json";
pub const SPLIT_FILE: &str = "split.json";
pub const MODEL_FILE: &str = "model.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TABLE_CSV: &str = "accuracy_table.csv";
pub const TABLE_TXT: &str = "accuracy_table.txt";

/// `{class}_{instance:04}`.
pub fn instance_name(class: &str, instance: usize) -> String {
    format!("{class}_{instance:04}")
}

/// `{class}_{instance:04}_{repeat:02}`, the stem shared by a sample and
/// its diagrams.
pub fn sample_stem(class: &str, instance: usize, repeat: usize) -> String {
    format!("{}_{repeat:02}", instance_name(class, instance))
}

pub fn diagram_file_name(stem: &str, degree: usize) -> String {
    format!("{stem}_h{degree}.csv")
}

/// The parts encoded in a diagram file name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramKey {
    pub class: String,
    pub instance: usize,
    pub repeat: usize,
    pub degree: usize,
}

impl DiagramKey {
    pub fn instance_name(&self) -> String {
        instance_name(&self.class, self.instance)
    }
}

/// Parses `{class}_{instance}_{repeat}_h{degree}.csv`. Class names may
/// themselves contain underscores.
pub fn parse_diagram_name(name: &str) -> Option<DiagramKey> {
    let stem = name.strip_suffix(".csv")?;
    let mut parts = stem.rsplitn(4, '_');
    let degree = parts.next()?.strip_prefix('h')?.parse().ok()?;
    let repeat = parts.next()?.parse().ok()?;
    let instance = parts.next()?.parse().ok()?;
    let class = parts.next()?.to_string();
    if class.is_empty() {
        return None;
    }
    Some(DiagramKey {
        class,
        instance,
        repeat,
        degree,
    })
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Sorted regular files in `dir` with the given extension.
pub fn list_files(dir: &Path, extension: &str) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == extension) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// One row per instance: its name, one value per surviving template and the
/// class label.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub template_ids: Vec<usize>,
    pub instances: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["instance".to_string()];
        header.extend(self.template_ids.iter().map(|id| format!("t{id}")));
        header.push("label".into());
        w.write_record(&header)?;
        for ((name, row), label) in self.instances.iter().zip(&self.rows).zip(&self.labels) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            rec.push(label.clone());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let bad = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
        let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
        let header = r.headers()?.clone();
        let n = header.len();
        if n < 2 || &header[0] != "instance" || &header[n - 1] != "label" {
            return Err(bad("expected columns instance, t<id>..., label".into()));
        }
        let template_ids = (1..n - 1)
            .map(|c| {
                header[c]
                    .strip_prefix('t')
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad(format!("bad column name {:?}", &header[c])))
            })
            .collect::<CliResult<Vec<usize>>>()?;
        let mut table = FeatureTable {
            template_ids,
            instances: Vec::new(),
            rows: Vec::new(),
            labels: Vec::new(),
        };
        for rec in r.records() {
            let rec = rec?;
            let row = (1..n - 1)
                .map(|c| {
                    rec[c]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(format!("bad feature value {:?}", &rec[c])))
                })
                .collect::<CliResult<Vec<f64>>>()?;
            table.instances.push(rec[0].to_string());
            table.rows.push(row);
            table.labels.push(rec[n - 1].to_string());
        }
        Ok(table)
    }
}

/// Train/test partition by instance name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub train_accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub classes: Vec<String>,
    /// Rows are true classes, columns predicted classes.
    pub confusion_matrix: Vec<Vec<usize>>,
}
