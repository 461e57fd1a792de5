//! Sampled metric measure spaces: uniform samples of parametric shapes,
//! geodesic distances on k-nearest-neighbour graphs, eccentricity-weighted
//! resampling and random image patches.
//!
//! Every random draw comes from ChaCha8 seeded with `seed_from_u64`, so a
//! given spec and seed reproduce the same output on every platform.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use petgraph::algo::{connected_components, dijkstra};
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Rectangle;
use crate::persistence::{DistanceMatrix, GrayImage};

/// The generator used by every sampler.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sub-cloud of the given indices (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            dim: self.dim,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }
}

/// A compact manifold carrying its uniform measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Round 2-sphere in ℝ³.
    Sphere { radius: f64 },
    /// Torus of revolution in ℝ³; `tube_radius < ring_radius`.
    Torus { ring_radius: f64, tube_radius: f64 },
    /// Circle in ℝ².
    Circle { radius: f64 },
    /// Planar annulus `inner_radius ≤ |x| ≤ outer_radius`.
    Annulus { inner_radius: f64, outer_radius: f64 },
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Sphere { .. } => "sphere",
            Shape::Torus { .. } => "torus",
            Shape::Circle { .. } => "circle",
            Shape::Annulus { .. } => "annulus",
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Shape::Sphere { .. } | Shape::Torus { .. } => 3,
            Shape::Circle { .. } | Shape::Annulus { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let ok = match *self {
            Shape::Sphere { radius } | Shape::Circle { radius } => positive(radius),
            Shape::Torus {
                ring_radius,
                tube_radius,
            } => positive(ring_radius) && positive(tube_radius) && tube_radius < ring_radius,
            Shape::Annulus {
                inner_radius,
                outer_radius,
            } => positive(inner_radius) && positive(outer_radius) && inner_radius < outer_radius,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidShape(format!("{self:?}")))
        }
    }

    /// Distance from `p` to the manifold, computed from its implicit form.
    pub fn residual(&self, p: &[f64]) -> f64 {
        match *self {
            Shape::Sphere { radius } => (p[0].hypot(p[1]).hypot(p[2]) - radius).abs(),
            Shape::Circle { radius } => (p[0].hypot(p[1]) - radius).abs(),
            Shape::Torus {
                ring_radius,
                tube_radius,
            } => ((p[0].hypot(p[1]) - ring_radius).hypot(p[2]) - tube_radius).abs(),
            Shape::Annulus {
                inner_radius,
                outer_radius,
            } => {
                let r = p[0].hypot(p[1]);
                (inner_radius - r).max(r - outer_radius).max(0.0)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub shape: Shape,
    pub n: usize,
    pub seed: u64,
}

fn draw_point<R: Rng>(shape: &Shape, rng: &mut R) -> Vec<f64> {
    match *shape {
        Shape::Sphere { radius } => loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let norm = v[0].hypot(v[1]).hypot(v[2]);
            if norm > 0.0 {
                break v.iter().map(|c| radius * c / norm).collect();
            }
        },
        Shape::Circle { radius } => {
            let theta = rng.random::<f64>() * TAU;
            vec![radius * theta.cos(), radius * theta.sin()]
        }
        Shape::Annulus {
            inner_radius,
            outer_radius,
        } => {
            let theta = rng.random::<f64>() * TAU;
            let u = rng.random::<f64>();
            let (r0, r1) = (inner_radius * inner_radius, outer_radius * outer_radius);
            let r = (u * (r1 - r0) + r0).sqrt();
            vec![r * theta.cos(), r * theta.sin()]
        }
        Shape::Torus {
            ring_radius,
            tube_radius,
        } => {
            // Area element is proportional to R + r cos(tube angle).
            let tube_angle = loop {
                let theta = rng.random::<f64>() * TAU;
                let accept = rng.random::<f64>() * (ring_radius + tube_radius);
                if accept < ring_radius + tube_radius * theta.cos() {
                    break theta;
                }
            };
            let ring_angle = rng.random::<f64>() * TAU;
            let w = ring_radius + tube_radius * tube_angle.cos();
            vec![
                w * ring_angle.cos(),
                w * ring_angle.sin(),
                tube_radius * tube_angle.sin(),
            ]
        }
    }
}

/// `spec.n` i.i.d. points from the uniform measure on the shape.
pub fn sample_shape(spec: &ShapeSpec) -> Result<PointCloud> {
    spec.shape.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let points = (0..spec.n).map(|_| draw_point(&spec.shape, &mut rng)).collect();
    PointCloud::new(spec.shape.ambient_dim(), points)
}

/// Euclidean distance matrix of a point cloud.
pub fn pairwise_distances(pc: &PointCloud) -> DistanceMatrix {
    let n = pc.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = pc.points[i]
                .iter()
                .zip(&pc.points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix::new(n, entries).expect("euclidean distances form a valid matrix")
}

/// All-pairs shortest paths on the symmetrised k-nearest-neighbour graph.
pub fn knn_geodesic(dm: &DistanceMatrix, k: usize) -> Result<DistanceMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let n = dm.len();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dm.get(i, a).total_cmp(&dm.get(i, b)).then(a.cmp(&b)));
        for &j in others.iter().take(k) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    let mut graph: UnGraph<(), f64> = UnGraph::with_capacity(n, edges.len());
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    for &(i, j) in &edges {
        graph.add_edge(nodes[i], nodes[j], dm.get(i, j));
    }
    let components = connected_components(&graph);
    if n > 0 && components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }

    let mut entries = vec![0.0; n * n];
    for (i, &start) in nodes.iter().enumerate() {
        let dist = dijkstra(&graph, start, None, |e| *e.weight());
        for (node, d) in dist {
            entries[i * n + node.index()] = d;
        }
    }
    // Path sums accumulate in different orders from each end; keep the shorter.
    for i in 0..n {
        entries[i * n + i] = 0.0;
        for j in i + 1..n {
            let d = entries[i * n + j].min(entries[j * n + i]);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix::new(n, entries)
}

/// `max_j d(i, j)` normalised into a probability vector.
pub fn eccentricity(dm: &DistanceMatrix) -> Result<Vec<f64>> {
    let raw: Vec<f64> = (0..dm.len())
        .map(|i| dm.row(i).iter().copied().fold(0.0, f64::max))
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidWeights("eccentricities sum to zero".into()));
    }
    Ok(raw.into_iter().map(|e| e / total).collect())
}

/// `m` i.i.d. indices with `P(i) = weights[i]`, by inverting the cumulative
/// distribution at uniform draws.
pub fn inverse_transform_sample(weights: &[f64], m: usize, seed: u64) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    let cdf: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let last_positive = weights.iter().rposition(|&w| w > 0.0).expect("weights sum to 1");
    let mut rng = seeded_rng(seed);
    Ok((0..m)
        .map(|_| {
            let u: f64 = rng.random();
            cdf.partition_point(|&c| c <= u).min(last_positive)
        })
        .collect())
}

/// `m` random `size × size` crops whose top-left corners are uniform over
/// every position inside `region` (the whole image by default). The region
/// is a half-open pixel box `[x_min, x_max) × [y_min, y_max)`, clipped to the image.
pub fn sample_patches(
    img: &GrayImage,
    size: usize,
    m: usize,
    seed: u64,
    region: Option<&Rectangle>,
) -> Result<Vec<GrayImage>> {
    let (x0, x1, y0, y1) = match region {
        None => (0, img.width(), 0, img.height()),
        Some(r) => (
            r.x_min.max(0.0).ceil() as usize,
            (r.x_max.floor().max(0.0) as usize).min(img.width()),
            r.y_min.max(0.0).ceil() as usize,
            (r.y_max.floor().max(0.0) as usize).min(img.height()),
        ),
    };
    let (w, h) = (x1.saturating_sub(x0), y1.saturating_sub(y0));
    if size == 0 || size > w || size > h {
        return Err(Error::PatchTooLarge {
            size,
            width: w,
            height: h,
        });
    }
    let mut rng = seeded_rng(seed);
    (0..m)
        .map(|_| {
            let x = rng.random_range(x0..=x1 - size);
            let y = rng.random_range(y0..=y1 - size);
            img.crop(x, y, size, size)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(shape: Shape, n: usize, seed: u64) -> ShapeSpec {
        ShapeSpec { shape, n, seed }
    }

    #[test]
    fn circle_points_on_manifold() {
        let pc = sample_shape(&spec(Shape::Circle { radius: 1.0 }, 4, 7)).unwrap();
        assert_eq!(pc.len(), 4);
        for p in pc.points() {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_mean_near_origin() {
        let pc = sample_shape(&spec(Shape::Sphere { radius: 1.0 }, 1000, 3)).unwrap();
        for c in 0..3 {
            let mean: f64 = pc.points().iter().map(|p| p[c]).sum::<f64>() / 1000.0;
            assert!(mean.abs() < 0.1, "coordinate {c} mean {mean}");
        }
    }

    #[test]
    fn annulus_mean_radius() {
        let pc = sample_shape(&spec(
            Shape::Annulus {
                inner_radius: 1.0,
                outer_radius: 2.0,
            },
            1000,
            11,
        ))
        .unwrap();
        let mean: f64 = pc.points().iter().map(|p| p[0].hypot(p[1])).sum::<f64>() / 1000.0;
        assert!((mean - 14.0 / 9.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn torus_tube_angle_density() {
        // Under the area measure, P(cos θ > 0) = (π R + 2 r) / (2 π R).
        let (ring, tube) = (2.0, 1.0);
        let pc = sample_shape(&spec(
            Shape::Torus {
                ring_radius: ring,
                tube_radius: tube,
            },
            20_000,
            5,
        ))
        .unwrap();
        let outer = pc.points().iter().filter(|p| p[0].hypot(p[1]) > ring).count() as f64 / 20_000.0;
        let expected = (std::f64::consts::PI * ring + 2.0 * tube) / (TAU * ring);
        // 3σ of a binomial proportion at n = 20000 is about 0.01.
        assert!((outer - expected).abs() < 0.01, "{outer} vs {expected}");
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(sample_shape(&spec(Shape::Circle { radius: 0.0 }, 3, 0)).is_err());
        assert!(sample_shape(&spec(
            Shape::Torus {
                ring_radius: 1.0,
                tube_radius: 1.0
            },
            3,
            0
        ))
        .is_err());
        assert!(sample_shape(&spec(
            Shape::Annulus {
                inner_radius: 2.0,
                outer_radius: 1.0
            },
            3,
            0
        ))
        .is_err());
    }

    #[test]
    fn distances_examples() {
        let pc = PointCloud::new(1, vec![vec![0.0], vec![1.0]]).unwrap();
        let dm = pairwise_distances(&pc);
        assert_eq!((dm.get(0, 1), dm.get(1, 0), dm.get(0, 0)), (1.0, 1.0, 0.0));

        let sq = PointCloud::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let dm = pairwise_distances(&sq);
        for i in 0..4 {
            let mut row: Vec<f64> = (0..4).filter(|&j| j != i).map(|j| dm.get(i, j)).collect();
            row.sort_by(f64::total_cmp);
            assert_eq!(row[..2], [1.0, 1.0]);
            assert!((row[2] - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn knn_geodesic_examples() {
        let line = PointCloud::new(1, vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let g = knn_geodesic(&pairwise_distances(&line), 1).unwrap();
        assert_eq!(g.get(0, 2), 2.0);

        let sq = PointCloud::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.2], vec![0.3, 1.0]]).unwrap();
        let dm = pairwise_distances(&sq);
        assert_eq!(knn_geodesic(&dm, 2).unwrap(), dm);

        assert!(knn_geodesic(&dm, 0).is_err());
    }

    #[test]
    fn knn_geodesic_circle_follows_arcs() {
        let pts: Vec<Vec<f64>> = (0..4)
            .map(|k| {
                let t = k as f64 * TAU / 4.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let dm = pairwise_distances(&PointCloud::new(2, pts).unwrap());
        let g = knn_geodesic(&dm, 2).unwrap();
        // Antipodal points are reached through a neighbour: two chords of √2.
        assert!((g.get(0, 2) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(g.get(0, 2) > dm.get(0, 2));
        assert_eq!(g.get(0, 1), dm.get(0, 1));
    }

    #[test]
    fn knn_disconnected() {
        let pc = PointCloud::new(1, vec![vec![0.0], vec![0.1], vec![10.0], vec![10.1]]).unwrap();
        match knn_geodesic(&pairwise_distances(&pc), 1) {
            Err(Error::DisconnectedGraph { components }) => assert_eq!(components, 2),
            other => panic!("expected disconnected graph, got {other:?}"),
        }
    }

    #[test]
    fn eccentricity_examples() {
        let two = DistanceMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(eccentricity(&two).unwrap(), vec![0.5, 0.5]);
        let line = pairwise_distances(&PointCloud::new(1, vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap());
        let e = eccentricity(&line).unwrap();
        assert!((e[0] - 0.4).abs() < 1e-15 && (e[1] - 0.2).abs() < 1e-15 && (e[2] - 0.4).abs() < 1e-15);
        assert!(eccentricity(&DistanceMatrix::new(1, vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn inverse_transform_examples() {
        assert_eq!(inverse_transform_sample(&[1.0, 0.0, 0.0], 5, 1).unwrap(), vec![0; 5]);
        assert!(inverse_transform_sample(&[1.5, -0.5], 5, 1).is_err());
        assert!(inverse_transform_sample(&[0.5, 0.4], 5, 1).is_err());

        let m = 10_000;
        let idx = inverse_transform_sample(&[0.4, 0.2, 0.4], m, 9).unwrap();
        let freq = idx.iter().filter(|&&i| i == 1).count() as f64 / m as f64;
        assert!((freq - 0.2).abs() <= 0.012, "{freq}");
    }

    #[test]
    fn inverse_transform_uniform_within_three_sigma() {
        let k = 5;
        let m = 50_000;
        let idx = inverse_transform_sample(&vec![1.0 / k as f64; k], m, 21).unwrap();
        let p = 1.0 / k as f64;
        let sigma = (m as f64 * p * (1.0 - p)).sqrt();
        for c in 0..k {
            let count = idx.iter().filter(|&&i| i == c).count() as f64;
            assert!((count - m as f64 * p).abs() < 3.0 * sigma, "class {c}: {count}");
        }
    }

    #[test]
    fn patches_examples() {
        let img = GrayImage::new(35, 35, (0..35 * 35).map(|v| v as f64).collect()).unwrap();
        let patches = sample_patches(&img, 35, 3, 0, None).unwrap();
        assert!(patches.iter().all(|p| p == &img));

        let narrow = Rectangle::new(0.0, 20.0, 0.0, 35.0).unwrap();
        assert!(sample_patches(&img, 21, 1, 0, Some(&narrow)).is_err());

        let big = GrayImage::new(100, 100, (0..10_000).map(|v| v as f64).collect()).unwrap();
        let patches = sample_patches(&big, 96, 2000, 4, None).unwrap();
        let mut corners = BTreeSet::new();
        for p in &patches {
            let first = p.pixels()[0] as usize;
            let (x, y) = (first % 100, first / 100);
            assert!(x <= 4 && y <= 4);
            corners.insert((x, y));
        }
        assert_eq!(corners.len(), 25);
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = spec(
            Shape::Torus {
                ring_radius: 2.0,
                tube_radius: 1.0,
            },
            50,
            42,
        );
        assert_eq!(sample_shape(&s).unwrap(), sample_shape(&s).unwrap());
        let pc = sample_shape(&s).unwrap();
        assert!(pc.points().iter().all(|p| s.shape.residual(p) < 1e-9));
    }
}
