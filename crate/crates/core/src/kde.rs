//! Kernel density estimates of expected persistence measures and template
//! function features.
//!
//! With a step kernel `K_A = 1_A / area(A)` and an indicator template `1_B`,
//! the feature `∫ 1_B ρ̂` is an average over diagram points `r` of
//! `area((r − A) ∩ B) / area(A)`, so features are computed exactly without
//! any quadrature. Other kernel/template pairs go through [`convolve_quadrature`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{BirthDeathPoint, PersistenceDiagram, Rectangle};

/// A symmetric integrable kernel with compact rectangular support.
pub trait Kernel {
    fn eval(&self, u: [f64; 2]) -> f64;
    fn support(&self) -> Rectangle;
}

/// A template function with compact rectangular support.
pub trait Template {
    fn eval(&self, u: [f64; 2]) -> f64;
    fn support(&self) -> Rectangle;
}

/// `K_A = (1/area(A)) 1_A` for a rectangle `A` symmetric about the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Rectangle", into = "Rectangle")]
pub struct StepKernel {
    support: Rectangle,
}

impl TryFrom<Rectangle> for StepKernel {
    type Error = Error;

    fn try_from(r: Rectangle) -> Result<Self> {
        StepKernel::new(r)
    }
}

impl From<StepKernel> for Rectangle {
    fn from(k: StepKernel) -> Rectangle {
        k.support
    }
}

impl StepKernel {
    pub fn new(support: Rectangle) -> Result<Self> {
        if support.x_min != -support.x_max || support.y_min != -support.y_max {
            return Err(Error::AsymmetricKernel);
        }
        if !(support.area() > 0.0) {
            return Err(Error::InvalidArgument("kernel support has zero area".into()));
        }
        Ok(Self { support })
    }

    /// Kernel on `[-h, h]²`.
    pub fn square(h: f64) -> Result<Self> {
        Self::new(Rectangle::centered(h, h)?)
    }

    pub fn rectangle(&self) -> &Rectangle {
        &self.support
    }

    pub fn area(&self) -> f64 {
        self.support.area()
    }
}

impl Kernel for StepKernel {
    fn eval(&self, u: [f64; 2]) -> f64 {
        if self.support.contains(u) {
            1.0 / self.area()
        } else {
            0.0
        }
    }

    fn support(&self) -> Rectangle {
        self.support
    }
}

/// Product Epanechnikov kernel on `[-hx, hx] × [-hy, hy]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpanechnikovKernel {
    pub hx: f64,
    pub hy: f64,
}

impl EpanechnikovKernel {
    pub fn new(hx: f64, hy: f64) -> Result<Self> {
        if hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite() {
            Ok(Self { hx, hy })
        } else {
            Err(Error::InvalidArgument(format!(
                "bandwidths must be positive, got {hx}, {hy}"
            )))
        }
    }
}

impl Kernel for EpanechnikovKernel {
    fn eval(&self, u: [f64; 2]) -> f64 {
        let (sx, sy) = (u[0] / self.hx, u[1] / self.hy);
        if sx.abs() > 1.0 || sy.abs() > 1.0 {
            return 0.0;
        }
        0.5625 / (self.hx * self.hy) * (1.0 - sx * sx) * (1.0 - sy * sy)
    }

    fn support(&self) -> Rectangle {
        Rectangle {
            x_min: -self.hx,
            x_max: self.hx,
            y_min: -self.hy,
            y_max: self.hy,
        }
    }
}

/// Indicator of a rectangle `B` with positive area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Rectangle", into = "Rectangle")]
pub struct TemplateFunction {
    support: Rectangle,
}

impl TryFrom<Rectangle> for TemplateFunction {
    type Error = Error;

    fn try_from(r: Rectangle) -> Result<Self> {
        TemplateFunction::new(r)
    }
}

impl From<TemplateFunction> for Rectangle {
    fn from(t: TemplateFunction) -> Rectangle {
        t.support
    }
}

impl TemplateFunction {
    pub fn new(support: Rectangle) -> Result<Self> {
        if support.area() > 0.0 {
            Ok(Self { support })
        } else {
            Err(Error::InvalidArgument("template support has zero area".into()))
        }
    }

    pub fn rectangle(&self) -> &Rectangle {
        &self.support
    }
}

impl Template for TemplateFunction {
    fn eval(&self, u: [f64; 2]) -> f64 {
        if self.support.contains(u) {
            1.0
        } else {
            0.0
        }
    }

    fn support(&self) -> Rectangle {
        self.support
    }
}

/// Plane in which diagram points are placed before features are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// `(b, d) ↦ (b, d − b)`.
    #[default]
    BirthPersistence,
    BirthDeath,
}

impl Frame {
    pub fn apply(self, p: &BirthDeathPoint) -> [f64; 2] {
        match self {
            Frame::BirthPersistence => p.to_birth_persistence(),
            Frame::BirthDeath => [p.birth(), p.death()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateSystem {
    pub kernel: StepKernel,
    pub templates: Vec<TemplateFunction>,
    #[serde(default)]
    pub frame: Frame,
}

impl TemplateSystem {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub template_ids: Vec<usize>,
}

/// `ρ̂(x) = (1/n) Σ_i Σ_{r ∈ D_i} K(x − r)`, evaluated in birth–death
/// coordinates. An empty batch has density zero everywhere.
pub fn kde_eval(diagrams: &[PersistenceDiagram], kernel: &StepKernel, x: [f64; 2]) -> f64 {
    kde_eval_with(diagrams, kernel, Frame::BirthDeath, x)
}

/// [`kde_eval`] with the diagram points first mapped into `frame`.
pub fn kde_eval_with<K: Kernel>(diagrams: &[PersistenceDiagram], kernel: &K, frame: Frame, x: [f64; 2]) -> f64 {
    if diagrams.is_empty() {
        return 0.0;
    }
    let total: f64 = diagrams
        .iter()
        .flat_map(|d| d.iter())
        .map(|p| {
            let r = frame.apply(p);
            kernel.eval([x[0] - r[0], x[1] - r[1]])
        })
        .sum();
    total / diagrams.len() as f64
}

/// `(1_B * K_A)(x) = area((x − A) ∩ B) / area(A)`, clamped into `[0, 1]`
/// against rounding.
pub fn convolve_step(f: &TemplateFunction, kernel: &StepKernel, x: [f64; 2]) -> f64 {
    (f.support.overlap_area(&kernel.support.reflect_about(x)) / kernel.area()).min(1.0)
}

/// `∫ f(u) K(x − u) du` by the midpoint rule on a `resolution × resolution`
/// grid over the template's support.
pub fn convolve_quadrature<T: Template, K: Kernel>(f: &T, kernel: &K, x: [f64; 2], resolution: usize) -> f64 {
    let b = f.support();
    let res = resolution.max(1);
    let (hx, hy) = (b.width() / res as f64, b.height() / res as f64);
    let mut total = 0.0;
    for i in 0..res {
        let u0 = b.x_min + (i as f64 + 0.5) * hx;
        for j in 0..res {
            let u1 = b.y_min + (j as f64 + 0.5) * hy;
            total += f.eval([u0, u1]) * kernel.eval([x[0] - u0, x[1] - u1]);
        }
    }
    total * hx * hy
}

/// `(1/n) Σ_i Σ_{r ∈ D_i} (1_B * K_A)(r)` for every template `B`, with
/// points mapped into the system's frame.
pub fn feature_vector(diagrams: &[PersistenceDiagram], system: &TemplateSystem) -> Result<FeatureVector> {
    if diagrams.is_empty() {
        return Err(Error::InvalidArgument(
            "feature vector of an empty diagram batch".into(),
        ));
    }
    let points: Vec<[f64; 2]> = diagrams
        .iter()
        .flat_map(|d| d.iter())
        .map(|p| system.frame.apply(p))
        .collect();
    let n = diagrams.len() as f64;
    let values = system
        .templates
        .par_iter()
        .map(|t| points.iter().map(|&r| convolve_step(t, &system.kernel, r)).sum::<f64>() / n)
        .collect();
    Ok(FeatureVector {
        values,
        template_ids: (0..system.templates.len()).collect(),
    })
}

/// `⌈w/cell⌉ × ⌈h/cell⌉` squares of side `cell` anchored at the lower-left
/// corner of `bounds`, listed row by row from the bottom. A ratio within
/// `1e-9` of an integer is not rounded up, so `[0, 2.8]` with cell `0.4`
/// gives 7 rows rather than 8.
pub fn template_grid(bounds: &Rectangle, cell: f64) -> Result<Vec<TemplateFunction>> {
    if !(cell > 0.0 && cell.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cell side must be positive, got {cell}"
        )));
    }
    if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
        return Err(Error::InvalidArgument(format!("degenerate grid bounds {bounds:?}")));
    }
    let count = |len: f64| ((len / cell) - 1e-9).ceil().max(1.0) as usize;
    let (nx, ny) = (count(bounds.width()), count(bounds.height()));
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x0 = bounds.x_min + i as f64 * cell;
            let y0 = bounds.y_min + j as f64 * cell;
            out.push(TemplateFunction::new(Rectangle::new(x0, x0 + cell, y0, y0 + cell)?)?);
        }
    }
    Ok(out)
}

/// Removes columns that are zero in every row; returns the reduced rows and
/// the original indices of the surviving columns.
pub fn drop_zero_columns(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let width = rows.first().map_or(0, Vec::len);
    let kept: Vec<usize> = (0..width).filter(|&c| rows.iter().any(|r| r[c] != 0.0)).collect();
    let reduced = rows.iter().map(|r| kept.iter().map(|&c| r[c]).collect()).collect();
    (reduced, kept)
}
