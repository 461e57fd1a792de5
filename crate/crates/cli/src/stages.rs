//! The pipeline stages. Each reads and writes files only, so any stage can
//! be run on its own or resumed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use epm_core::io::{load_diagram, load_pgm_unit, load_point_cloud, save_diagram, save_point_cloud, write_pgm};
use epm_core::learn::{encode_labels, split_indices};
use epm_core::sampling::pairwise_distances;
use epm_core::{
    accuracy, confusion_matrix, feature_vector, image_sublevel_h0, predict, sample_patches, sample_shape,
    template_grid, train_logistic, vr_persistence, Dataset, FiltrationOptions, Frame, LogisticModel,
    PersistenceDiagram, PolynomialMap, Rectangle, ShapeSpec, StepKernel, TemplateSystem,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    self, create_dir, diagram_file_name, parse_diagram_name, sample_stem, FeatureTable, Metrics, Split, DIAGRAMS_DIR,
    FEATURES_FILE, IMAGES_DIR, METRICS_FILE, MODEL_FILE, SAMPLES_DIR, SPLIT_FILE, TEMPLATES_FILE,
};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, CliResult};
use crate::seeds::derive_seed;
use crate::textures::{generate_texture, to_byte_scale, TextureFamily};

/// Writes one sample per (instance, repeat) into `out/samples`: point
/// cloud CSVs for shapes, 8-bit PGM patches for textures. Texture source
/// images go to `out/images`.
pub fn sample(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let dir = out.join(SAMPLES_DIR);
    create_dir(&dir)?;
    match cfg.experiment {
        ExperimentKind::Shapes => sample_shapes(cfg, &dir),
        ExperimentKind::Textures => sample_textures(cfg, out, &dir),
    }
}

fn sample_shapes(cfg: &ExperimentConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let repeats = cfg.repeats();
    let jobs: Vec<(usize, usize, usize)> = cfg
        .shapes
        .iter()
        .enumerate()
        .flat_map(|(c, class)| (0..class.instances).flat_map(move |i| (0..repeats).map(move |r| (c, i, r))))
        .collect();
    jobs.par_iter()
        .map(|&(c, i, r)| {
            let class = &cfg.shapes[c];
            let name = class.name();
            let spec = ShapeSpec {
                shape: class.shape,
                n: cfg.points_per_sample,
                seed: derive_seed(cfg.seed, &format!("sample/{name}"), i as u64, r as u64),
            };
            let path = dir.join(format!("{}.csv", sample_stem(&name, i, r)));
            save_point_cloud(&path, &sample_shape(&spec)?)?;
            Ok(path)
        })
        .collect()
}

fn sample_textures(cfg: &ExperimentConfig, out: &Path, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let t = &cfg.textures;
    let images = out.join(IMAGES_DIR);
    create_dir(&images)?;
    let jobs: Vec<(TextureFamily, usize)> = TextureFamily::ALL
        .iter()
        .flat_map(|&f| (0..t.images_per_family).map(move |i| (f, i)))
        .collect();
    let nested: Vec<Vec<PathBuf>> = jobs
        .par_iter()
        .map(|&(family, i)| {
            let name = family.name();
            let seed = derive_seed(cfg.seed, &format!("texture/{name}"), i as u64, 0);
            let img = to_byte_scale(&generate_texture(family, t, seed)?)?;
            let mut paths = vec![images.join(format!("{}.pgm", artifacts::instance_name(name, i)))];
            write_pgm_file(&paths[0], &img)?;
            let patch_seed = derive_seed(cfg.seed, &format!("patch/{name}"), i as u64, 0);
            for (p, patch) in sample_patches(&img, t.patch_size, t.patches_per_image, patch_seed, None)?
                .iter()
                .enumerate()
            {
                let path = dir.join(format!("{}.pgm", sample_stem(name, i, p)));
                write_pgm_file(&path, patch)?;
                paths.push(path);
            }
            Ok(paths)
        })
        .collect::<CliResult<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn write_pgm_file(path: &Path, img: &epm_core::GrayImage) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_pgm(std::io::BufWriter::new(file), img, 255)?;
    Ok(())
}

/// One diagram CSV per input and requested degree. Point cloud CSVs get
/// Rips persistence; PGM images get sublevel-set H0 on intensities scaled
/// to `[0, 1]`.
pub fn diagram(input: &Path, out: &Path, opts: &FiltrationOptions, degrees: &[usize]) -> CliResult<Vec<PathBuf>> {
    create_dir(out)?;
    let mut inputs = artifacts::list_files(input, "csv")?;
    inputs.extend(artifacts::list_files(input, "pgm")?);
    inputs.sort();
    if inputs.is_empty() {
        warn!("no .csv or .pgm inputs in {}", input.display());
        return Ok(Vec::new());
    }
    let nested: Vec<Vec<PathBuf>> = inputs
        .par_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let dgms: BTreeMap<usize, PersistenceDiagram> = if path.extension().is_some_and(|e| e == "pgm") {
                let img = load_pgm_unit(path)?;
                BTreeMap::from([(0, image_sublevel_h0(&img, opts)?)])
            } else {
                let dm = pairwise_distances(&load_point_cloud(path)?);
                vr_persistence(&dm, opts)?
            };
            let mut written = Vec::new();
            for &d in degrees {
                let Some(dgm) = dgms.get(&d) else { continue };
                let target = out.join(diagram_file_name(&stem, d));
                save_diagram(&target, dgm)?;
                written.push(target);
            }
            Ok(written)
        })
        .collect::<CliResult<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// All diagrams of one object: every requested degree of each of its first
/// `k` samples, merged per sample into one (birth, persistence) plane.
#[derive(Clone, Debug)]
struct Group {
    class: String,
    samples: BTreeMap<usize, Vec<epm_core::BirthDeathPoint>>,
}

fn load_groups(dir: &Path, degrees: &[usize], k: usize) -> CliResult<BTreeMap<String, Group>> {
    let mut groups: BTreeMap<String, Group> = BTreeMap::new();
    for path in artifacts::list_files(dir, "csv")? {
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let Some(key) = parse_diagram_name(&name) else {
            warn!("skipping unrecognised file {}", path.display());
            continue;
        };
        let group = groups.entry(key.instance_name()).or_insert_with(|| Group {
            class: key.class.clone(),
            samples: BTreeMap::new(),
        });
        if key.repeat >= k || !degrees.contains(&key.degree) {
            continue;
        }
        let points = group.samples.entry(key.repeat).or_default();
        points.extend(load_diagram(&path)?.iter().copied());
    }
    for (name, g) in &groups {
        if g.samples.len() < k {
            return Err(CliError::Data(format!(
                "instance {name} has {} samples, {k} requested",
                g.samples.len()
            )));
        }
    }
    Ok(groups)
}

/// Grid bounds enclosing every training point in (birth, persistence)
/// coordinates, widened to at least one cell per axis.
fn training_bounds(diagrams: &[&Vec<PersistenceDiagram>], cell: f64) -> CliResult<Rectangle> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in diagrams.iter().flat_map(|g| g.iter()).flat_map(|d| d.iter()) {
        let c = Frame::BirthPersistence.apply(p);
        for a in 0..2 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    if !lo[0].is_finite() {
        return Err(CliError::Data("training diagrams contain no points".into()));
    }
    Ok(Rectangle::new(
        lo[0],
        hi[0].max(lo[0] + cell),
        lo[1],
        hi[1].max(lo[1] + cell),
    )?)
}

/// Builds the feature matrix for objects summarised by `k` samples each.
/// The split, the grid bounds and the surviving columns are all fixed from
/// the training objects and written next to the features.
pub fn featurize(diagrams: &Path, cfg: &ExperimentConfig, k: usize, out: &Path) -> CliResult<Vec<PathBuf>> {
    create_dir(out)?;
    let groups = load_groups(diagrams, &cfg.homology_degrees, k)?;
    if groups.is_empty() {
        return Err(CliError::Data(format!("no diagrams found in {}", diagrams.display())));
    }
    let names: Vec<String> = groups.keys().cloned().collect();
    let class_of: Vec<String> = groups.values().map(|g| g.class.clone()).collect();
    let batches: Vec<Vec<PersistenceDiagram>> = groups
        .values()
        .map(|g| {
            g.samples
                .values()
                .map(|pts| PersistenceDiagram::new(pts.clone()))
                .collect()
        })
        .collect();

    let (ids, classes) = encode_labels(&class_of);
    if classes.len() < 2 {
        return Err(CliError::Data(format!("need at least two classes, found {classes:?}")));
    }
    let split_seed = derive_seed(cfg.seed, "split", 0, 0);
    let (train, test) = split_indices(&ids, classes.len(), cfg.split_ratio, split_seed, cfg.stratified)?;

    let bounds = match cfg.template_grid {
        Some(b) => b,
        None => training_bounds(
            &train.iter().map(|&i| &batches[i]).collect::<Vec<_>>(),
            cfg.template_cell,
        )?,
    };
    let mut system = TemplateSystem {
        kernel: StepKernel::new(cfg.kernel)?,
        templates: template_grid(&bounds, cfg.template_cell)?,
        frame: Frame::BirthPersistence,
    };
    let rows: Vec<Vec<f64>> = batches
        .par_iter()
        .map(|b| feature_vector(b, &system).map(|f| f.values))
        .collect::<epm_core::Result<_>>()?;

    let kept: Vec<usize> = if cfg.drop_zero_columns {
        let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
        epm_core::drop_zero_columns(&train_rows).1
    } else {
        (0..system.len()).collect()
    };
    if kept.is_empty() {
        return Err(CliError::Data(
            "every feature column is zero on the training set".into(),
        ));
    }
    info!("{} of {} templates kept for k = {k}", kept.len(), system.len());
    system.templates = kept.iter().map(|&c| system.templates[c]).collect();

    let table = FeatureTable {
        template_ids: kept.clone(),
        instances: names.clone(),
        rows: rows.iter().map(|r| kept.iter().map(|&c| r[c]).collect()).collect(),
        labels: class_of,
    };
    let split = Split {
        seed: split_seed,
        train: train.iter().map(|&i| names[i].clone()).collect(),
        test: test.iter().map(|&i| names[i].clone()).collect(),
    };
    let paths = [out.join(FEATURES_FILE), out.join(TEMPLATES_FILE), out.join(SPLIT_FILE)];
    table.save(&paths[0])?;
    artifacts::write_json(&paths[1], &system)?;
    artifacts::write_json(&paths[2], &split)?;
    Ok(paths.to_vec())
}

/// Model file: the class names in label order and the fitted model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub classes: Vec<String>,
    pub model: LogisticModel,
}

struct Labelled {
    dataset: Dataset,
    classes: Vec<String>,
}

fn labelled_subset(table: &FeatureTable, members: &[String], classes: Option<&[String]>) -> CliResult<Labelled> {
    let index: BTreeMap<&str, usize> = table
        .instances
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let rows = members
        .iter()
        .map(|m| {
            index
                .get(m.as_str())
                .copied()
                .ok_or_else(|| CliError::Data(format!("instance {m} is missing from the feature table")))
        })
        .collect::<CliResult<Vec<usize>>>()?;
    let classes = match classes {
        Some(c) => c.to_vec(),
        None => encode_labels(&table.labels).1,
    };
    let y = rows
        .iter()
        .map(|&r| {
            classes
                .iter()
                .position(|c| *c == table.labels[r])
                .ok_or_else(|| CliError::Data(format!("unknown class {}", table.labels[r])))
        })
        .collect::<CliResult<Vec<usize>>>()?;
    let x: Vec<Vec<f64>> = rows.iter().map(|&r| table.rows[r].clone()).collect();
    Ok(Labelled {
        dataset: Dataset::from_rows(&x, y, classes.len())?,
        classes,
    })
}

/// Fits the model on the training rows of `dir/features.csv`.
pub fn train(dir: &Path, cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let table = FeatureTable::load(&dir.join(FEATURES_FILE))?;
    let split: Split = artifacts::read_json(&dir.join(SPLIT_FILE))?;
    let train = labelled_subset(&table, &split.train, None)?;
    let map = PolynomialMap::new(train.dataset.n_features(), cfg.polynomial_degree, true)?;
    let mut model = train_logistic(&train.dataset, &map, &cfg.train_config())?;
    if !model.summary.converged {
        warn!(
            "training stopped after {} iterations with gradient norm {:.3e}",
            model.summary.iterations, model.summary.gradient_norm
        );
    }
    let templates = dir.join(TEMPLATES_FILE);
    if templates.exists() {
        model.template_system = Some(artifacts::read_json(&templates)?);
    }
    let path = dir.join(MODEL_FILE);
    artifacts::write_json(
        &path,
        &ModelFile {
            classes: train.classes,
            model,
        },
    )?;
    Ok(vec![path])
}

/// Scores the saved model on both sides of the split.
pub fn evaluate(dir: &Path) -> CliResult<(Metrics, Vec<PathBuf>)> {
    let table = FeatureTable::load(&dir.join(FEATURES_FILE))?;
    let split: Split = artifacts::read_json(&dir.join(SPLIT_FILE))?;
    let file: ModelFile = artifacts::read_json(&dir.join(MODEL_FILE))?;
    let score = |members: &[String]| -> CliResult<(Vec<usize>, Vec<usize>)> {
        let data = labelled_subset(&table, members, Some(&file.classes))?.dataset;
        let pred = predict(&file.model, data.x().view())?;
        Ok((data.y().to_vec(), pred.labels))
    };
    let (train_truth, train_pred) = score(&split.train)?;
    let (truth, pred) = score(&split.test)?;
    let metrics = Metrics {
        accuracy: accuracy(&truth, &pred)?,
        train_accuracy: accuracy(&train_truth, &train_pred)?,
        n_train: train_truth.len(),
        n_test: truth.len(),
        confusion_matrix: confusion_matrix(&truth, &pred, file.classes.len())?,
        classes: file.classes,
    };
    let path = dir.join(METRICS_FILE);
    artifacts::write_json(&path, &metrics)?;
    Ok((metrics, vec![path]))
}

/// Conventional locations under an output directory.
pub fn samples_dir(out: &Path) -> PathBuf {
    out.join(SAMPLES_DIR)
}

pub fn diagrams_dir(out: &Path) -> PathBuf {
    out.join(DIAGRAMS_DIR)
}
