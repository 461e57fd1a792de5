//! Experiment configuration, read from JSON with exactly these field names.

use std::path::Path;

use epm_core::{EssentialPolicy, Rectangle, Shape, StepKernel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One class of the shape experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeClass {
    #[serde(flatten)]
    pub shape: Shape,
    pub instances: usize,
    /// Class name; defaults to the shape kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ShapeClass {
    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.shape.name().to_string())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Shapes,
    Textures,
}

/// Synthetic texture families: a smooth ramp with faint Gaussian noise
/// against the same ramp hit by salt-and-pepper impulses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextureConfig {
    pub image_size: usize,
    pub images_per_family: usize,
    pub patch_size: usize,
    pub patches_per_image: usize,
    /// Standard deviation of the Gaussian noise added to every image, in
    /// units of the full intensity range.
    pub noise_sigma: f64,
    /// Fraction of pixels replaced by 0 or 1 in the noisy family.
    pub impulse_fraction: f64,
}

impl Default for TextureConfig {
    fn default() -> Self {
        Self {
            image_size: 64,
            images_per_family: 50,
            patch_size: 16,
            patches_per_image: 16,
            noise_sigma: 0.01,
            impulse_fraction: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub shapes: Vec<ShapeClass>,
    pub points_per_sample: usize,
    pub samples_per_object: Vec<usize>,
    pub homology_degrees: Vec<usize>,
    pub essential_policy: EssentialPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_radius: Option<f64>,
    pub kernel: Rectangle,
    pub template_cell: f64,
    /// Fixed grid bounds; computed from the training diagrams when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template_grid: Option<Rectangle>,
    pub drop_zero_columns: bool,
    pub polynomial_degree: usize,
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub split_ratio: f64,
    pub stratified: bool,
    pub seed: u64,
    pub textures: TextureConfig,
}

fn default_shapes(instances: usize) -> Vec<ShapeClass> {
    let class = |shape| ShapeClass {
        shape,
        instances,
        label: None,
    };
    vec![
        class(Shape::Sphere { radius: 1.0 }),
        class(Shape::Torus {
            ring_radius: 2.0,
            tube_radius: 1.0,
        }),
        class(Shape::Circle { radius: 1.0 }),
        class(Shape::Annulus {
            inner_radius: 1.0,
            outer_radius: 2.0,
        }),
    ]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Shapes,
            shapes: default_shapes(300),
            points_per_sample: 10,
            samples_per_object: vec![1, 10, 20, 40],
            homology_degrees: vec![1],
            essential_policy: EssentialPolicy::Cap,
            max_radius: None,
            kernel: Rectangle::centered(0.1, 0.1).expect("valid rectangle"),
            template_cell: 0.4,
            template_grid: None,
            drop_zero_columns: true,
            polynomial_degree: 2,
            l2: 1e-4,
            max_iters: 2000,
            tol: 1e-6,
            split_ratio: 0.8,
            stratified: true,
            seed: 0,
            textures: TextureConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Settings for the texture experiment: a fine kernel, a grid over the
    /// unit square and cubic polynomials.
    pub fn textures() -> Self {
        Self {
            experiment: ExperimentKind::Textures,
            samples_per_object: vec![TextureConfig::default().patches_per_image],
            homology_degrees: vec![0],
            kernel: Rectangle::centered(0.01, 0.01).expect("valid rectangle"),
            template_cell: 0.1,
            template_grid: Some(Rectangle::new(0.0, 1.0, 0.0, 1.0).expect("valid rectangle")),
            polynomial_degree: 3,
            ..Self::default()
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.experiment == ExperimentKind::Shapes {
            if self.shapes.len() < 2 {
                return fail("at least two shape classes are required".into());
            }
            for class in &self.shapes {
                class.shape.validate()?;
                if class.instances == 0 {
                    return fail(format!("class {} has no instances", class.name()));
                }
            }
            let mut names: Vec<String> = self.shapes.iter().map(ShapeClass::name).collect();
            names.sort();
            names.dedup();
            if names.len() != self.shapes.len() {
                return fail("class labels must be distinct".into());
            }
            if self.points_per_sample == 0 {
                return fail("points_per_sample must be at least 1".into());
            }
        } else {
            let t = &self.textures;
            if t.images_per_family == 0 || t.patches_per_image == 0 || t.patch_size == 0 {
                return fail("texture counts must be at least 1".into());
            }
            if t.patch_size > t.image_size {
                return fail(format!(
                    "patch size {} exceeds image size {}",
                    t.patch_size, t.image_size
                ));
            }
            if !(0.0..=1.0).contains(&t.impulse_fraction) || !(t.noise_sigma >= 0.0) {
                return fail("texture noise parameters out of range".into());
            }
            if self.max_samples() > t.patches_per_image {
                return fail(format!(
                    "samples_per_object {} exceeds patches_per_image {}",
                    self.max_samples(),
                    t.patches_per_image
                ));
            }
        }
        if self.samples_per_object.is_empty() || self.samples_per_object.contains(&0) {
            return fail("samples_per_object entries must be at least 1".into());
        }
        if self.homology_degrees.is_empty() || self.homology_degrees.iter().any(|&d| d > 1) {
            return fail("homology_degrees must be a non-empty subset of {0, 1}".into());
        }
        StepKernel::new(self.kernel)?;
        if !(self.template_cell > 0.0 && self.template_cell.is_finite()) {
            return fail(format!("template_cell must be positive, got {}", self.template_cell));
        }
        if self.polynomial_degree == 0 {
            return fail("polynomial_degree must be at least 1".into());
        }
        if !(self.l2 >= 0.0) {
            return fail(format!("l2 must be non-negative, got {}", self.l2));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return fail(format!("split_ratio must lie in (0, 1), got {}", self.split_ratio));
        }
        Ok(())
    }

    pub fn max_samples(&self) -> usize {
        self.samples_per_object.iter().copied().max().unwrap_or(1)
    }

    /// Samples drawn per object: point clouds per shape instance, or
    /// patches per texture image.
    pub fn repeats(&self) -> usize {
        match self.experiment {
            ExperimentKind::Shapes => self.max_samples(),
            ExperimentKind::Textures => self.textures.patches_per_image,
        }
    }

    pub fn class_names(&self) -> Vec<String> {
        match self.experiment {
            ExperimentKind::Shapes => self.shapes.iter().map(ShapeClass::name).collect(),
            ExperimentKind::Textures => vec!["gradient".into(), "salt_pepper".into()],
        }
    }

    pub fn train_config(&self) -> epm_core::TrainConfig {
        epm_core::TrainConfig {
            l2: self.l2,
            max_iters: self.max_iters,
            tol: self.tol,
            seed: self.seed,
        }
    }

    pub fn filtration(&self) -> epm_core::FiltrationOptions {
        epm_core::FiltrationOptions {
            max_dim: self.homology_degrees.iter().copied().max().unwrap_or(0),
            max_radius: self.max_radius,
            essential_policy: self.essential_policy,
            ..Default::default()
        }
    }
}
