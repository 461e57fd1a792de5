//! Persistence measures as a metric space and a featurisation pipeline built
//! on them.
//!
//! - [`measure`]: birth–death points, diagrams, atomic measures and the
//!   diagonal-aware ground metric.
//! - [`transport`]: the partial ∞-optimal transport distance and its couplings.
//! - [`compactness`]: boundedness and tightness profiles of measure families.
//! - [`persistence`]: Vietoris–Rips and image sublevel-set persistence.
//! - [`sampling`]: shape samplers, geodesic distances and patch sampling.
//! - [`kde`]: step-kernel density estimates and template features.
//! - [`learn`]: polynomial expansion and softmax regression.
//! - [`io`]: file formats.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compactness;
pub mod error;
pub mod flow;
pub mod io;
pub mod kde;
pub mod learn;
pub mod measure;
pub mod persistence;
pub mod sampling;
pub mod transport;

pub use compactness::{
    counterexample_family, diameter_bound, family_report, odut_profile, uodf_profile, ConditionFlags, FamilyReport,
    OdutEntry, Thresholds, UodfEntry,
};
pub use error::{Error, Result};
pub use kde::{
    convolve_quadrature, convolve_step, drop_zero_columns, feature_vector, kde_eval, template_grid, FeatureVector,
    Frame, StepKernel, TemplateFunction, TemplateSystem,
};
pub use learn::{
    accuracy, confusion_matrix, polynomial_expand, predict, train_logistic, train_test_split, Dataset, LogisticModel,
    PolynomialMap, Prediction, TrainConfig,
};
pub use measure::{
    diag_distance, ground_distance, mass_above, pers_infinity, truncate, Atom, BirthDeathPoint, Closure, MetricConfig,
    PersistenceDiagram, PersistenceMeasure, Rectangle, Site,
};
pub use persistence::{
    image_sublevel_h0, reduce_boundary_matrix, vr_persistence, Connectivity, DistanceMatrix, EssentialPolicy,
    FiltrationOptions, GrayImage,
};
pub use sampling::{
    eccentricity, inverse_transform_sample, knn_geodesic, sample_patches, sample_shape, PointCloud, Shape, ShapeSpec,
};
pub use transport::{
    bottleneck, cost_infinity, feasible_at, ot_infinity, verify_coupling, Coupling, Endpoint, MassScaling, Pair,
    TransportResult,
};
