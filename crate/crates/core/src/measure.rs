//! Birth–death points, persistence diagrams and finite atomic persistence
//! measures, together with the ground pseudometric on the closed half-plane.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point `(birth, death)` of the open half-plane `birth < death`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct BirthDeathPoint {
    birth: f64,
    death: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    birth: f64,
    death: f64,
}

impl TryFrom<RawPoint> for BirthDeathPoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        BirthDeathPoint::new(raw.birth, raw.death)
    }
}

impl BirthDeathPoint {
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        if birth.is_finite() && death.is_finite() && birth < death {
            Ok(Self { birth, death })
        } else {
            Err(Error::InvalidPoint { birth, death })
        }
    }

    #[inline]
    pub fn birth(&self) -> f64 {
        self.birth
    }

    #[inline]
    pub fn death(&self) -> f64 {
        self.death
    }

    /// `death - birth`, always positive.
    #[inline]
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// The point in `(birth, persistence)` coordinates.
    #[inline]
    pub fn to_birth_persistence(&self) -> [f64; 2] {
        [self.birth, self.death - self.birth]
    }
}

/// A finite multiset of birth–death points. Order carries no meaning.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub points: Vec<BirthDeathPoint>,
}

impl PersistenceDiagram {
    pub fn new(points: Vec<BirthDeathPoint>) -> Self {
        Self { points }
    }

    /// Builds a diagram from raw pairs, rejecting any pair off the half-plane.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(b, d)| BirthDeathPoint::new(b, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BirthDeathPoint> {
        self.points.iter()
    }

    /// Points sorted by `(birth, death)`, handy for multiset comparison.
    pub fn sorted_pairs(&self) -> Vec<(f64, f64)> {
        let mut pairs: Vec<_> = self.points.iter().map(|p| (p.birth, p.death)).collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        pairs
    }

    /// The counting measure of the diagram scaled by `mass`.
    pub fn to_measure(&self, mass: f64) -> PersistenceMeasure {
        PersistenceMeasure {
            atoms: if mass > 0.0 {
                self.points.iter().map(|&point| Atom { point, mass }).collect()
            } else {
                Vec::new()
            },
        }
    }
}

/// A weighted point mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(flatten)]
    pub point: BirthDeathPoint,
    pub mass: f64,
}

/// A finite atomic measure on the open half-plane. Zero-mass atoms never
/// survive construction; equal points may appear as separate atoms.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PersistenceMeasure {
    atoms: Vec<Atom>,
}

impl<'de> Deserialize<'de> for PersistenceMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<Atom>,
        }
        let raw = Raw::deserialize(deserializer)?;
        PersistenceMeasure::new(raw.atoms).map_err(de::Error::custom)
    }
}

impl PersistenceMeasure {
    /// Validates masses (finite, non-negative) and drops zero-mass atoms.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for atom in &atoms {
            if !atom.mass.is_finite() || atom.mass < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "atom mass must be finite and non-negative, got {}",
                    atom.mass
                )));
            }
        }
        Ok(Self {
            atoms: atoms.into_iter().filter(|a| a.mass > 0.0).collect(),
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `mass · δ_point`.
    pub fn dirac(point: BirthDeathPoint, mass: f64) -> Result<Self> {
        Self::new(vec![Atom { point, mass }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Sum of two measures (atoms concatenated).
    pub fn superpose(&self, other: &PersistenceMeasure) -> PersistenceMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        PersistenceMeasure { atoms }
    }

    /// Multiplies every mass by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<PersistenceMeasure> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor {factor}")));
        }
        Self::new(
            self.atoms
                .iter()
                .map(|a| Atom {
                    point: a.point,
                    mass: a.mass * factor,
                })
                .collect(),
        )
    }
}

/// Norm exponent `q ∈ [1, ∞]` for the ground metric. Serialized as a number
/// or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricConfig {
    q: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { q: f64::INFINITY }
    }
}

impl MetricConfig {
    pub fn new(q: f64) -> Result<Self> {
        if q >= 1.0 {
            Ok(Self { q })
        } else {
            Err(Error::InvalidExponent(q))
        }
    }

    pub fn infinity() -> Self {
        Self::default()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `2^(1/q - 1)`, the factor turning persistence into distance to the diagonal.
    #[inline]
    pub fn diagonal_factor(&self) -> f64 {
        if self.q.is_infinite() {
            0.5
        } else {
            (1.0 / self.q - 1.0).exp2()
        }
    }

    /// `‖v‖_q` for a planar vector.
    #[inline]
    pub fn norm(&self, dx: f64, dy: f64) -> f64 {
        let (ax, ay) = (dx.abs(), dy.abs());
        if self.q.is_infinite() {
            ax.max(ay)
        } else if self.q == 1.0 {
            ax + ay
        } else if self.q == 2.0 {
            ax.hypot(ay)
        } else {
            (ax.powf(self.q) + ay.powf(self.q)).powf(1.0 / self.q)
        }
    }
}

impl Serialize for MetricConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.q.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.q)
        }
    }
}

impl<'de> Deserialize<'de> for MetricConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct QVisitor;

        impl Visitor<'_> for QVisitor {
            type Value = MetricConfig;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<MetricConfig, E> {
                MetricConfig::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<MetricConfig, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<MetricConfig, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<MetricConfig, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => Ok(MetricConfig::infinity()),
                    other => other.parse::<f64>().map_err(E::custom).and_then(|q| self.visit_f64(q)),
                }
            }
        }

        deserializer.deserialize_any(QVisitor)
    }
}

/// A point of the closed half-plane: either an off-diagonal point or the
/// diagonal collapsed to a single token.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Site {
    Point(BirthDeathPoint),
    Diagonal,
}

/// `‖x − Δ‖_q = (death − birth) · 2^(1/q − 1)`.
#[inline]
pub fn diag_distance(x: &BirthDeathPoint, cfg: &MetricConfig) -> f64 {
    x.persistence() * cfg.diagonal_factor()
}

/// The pseudometric `min(‖x − y‖_q, ‖x − Δ‖_q + ‖y − Δ‖_q)`.
pub fn ground_distance(x: &Site, y: &Site, cfg: &MetricConfig) -> f64 {
    match (x, y) {
        (Site::Diagonal, Site::Diagonal) => 0.0,
        (Site::Point(p), Site::Diagonal) | (Site::Diagonal, Site::Point(p)) => diag_distance(p, cfg),
        (Site::Point(p), Site::Point(r)) => point_distance(p, r, cfg),
    }
}

#[inline]
pub(crate) fn point_distance(p: &BirthDeathPoint, r: &BirthDeathPoint, cfg: &MetricConfig) -> f64 {
    let direct = cfg.norm(p.birth - r.birth, p.death - r.death);
    let via_diagonal = diag_distance(p, cfg) + diag_distance(r, cfg);
    direct.min(via_diagonal)
}

/// Supremum of the diagonal distance over the support; 0 for the empty measure.
pub fn pers_infinity(mu: &PersistenceMeasure, cfg: &MetricConfig) -> f64 {
    mu.atoms
        .iter()
        .map(|a| diag_distance(&a.point, cfg))
        .fold(0.0, f64::max)
}

/// Restriction of `mu` to the atoms with persistence strictly above `eps`.
pub fn truncate(mu: &PersistenceMeasure, eps: f64) -> PersistenceMeasure {
    PersistenceMeasure {
        atoms: mu
            .atoms
            .iter()
            .filter(|a| a.point.persistence() > eps)
            .copied()
            .collect(),
    }
}

/// Whether a persistence threshold is strict (`> eps`) or inclusive (`>= eps`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    Open,
    Closed,
}

impl Closure {
    #[inline]
    pub fn admits(self, persistence: f64, eps: f64) -> bool {
        match self {
            Closure::Open => persistence > eps,
            Closure::Closed => persistence >= eps,
        }
    }
}

/// Mass of the atoms whose persistence exceeds `eps` (strictly when open).
pub fn mass_above(mu: &PersistenceMeasure, eps: f64, closure: Closure) -> f64 {
    mu.atoms
        .iter()
        .filter(|a| closure.admits(a.point.persistence(), eps))
        .map(|a| a.mass)
        .sum()
}

/// `∫ f dμ = Σ mass · f(point)`.
pub fn integrate<F>(mu: &PersistenceMeasure, f: F) -> f64
where
    F: Fn(&BirthDeathPoint) -> f64,
{
    mu.atoms.iter().map(|a| a.mass * f(&a.point)).sum()
}

/// Closed axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRectangle")]
pub struct Rectangle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Deserialize)]
struct RawRectangle {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl TryFrom<RawRectangle> for Rectangle {
    type Error = Error;

    fn try_from(r: RawRectangle) -> Result<Self> {
        Rectangle::new(r.x_min, r.x_max, r.y_min, r.y_max)
    }
}

impl Rectangle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if finite && x_min <= x_max && y_min <= y_max {
            Ok(Self {
                x_min,
                x_max,
                y_min,
                y_max,
            })
        } else {
            Err(Error::InvalidRectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            })
        }
    }

    /// `[-half_width, half_width] × [-half_height, half_height]`.
    pub fn centered(half_width: f64, half_height: f64) -> Result<Self> {
        Self::new(-half_width, half_width, -half_height, half_height)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    /// `{x − a : a ∈ self}`.
    pub fn reflect_about(&self, x: [f64; 2]) -> Rectangle {
        Rectangle {
            x_min: x[0] - self.x_max,
            x_max: x[0] - self.x_min,
            y_min: x[1] - self.y_max,
            y_max: x[1] - self.y_min,
        }
    }

    /// Area of the intersection, by per-axis interval overlap.
    pub fn overlap_area(&self, other: &Rectangle) -> f64 {
        let w = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let h = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        w * h
    }

    /// Smallest rectangle containing both.
    pub fn union_bounds(&self, other: &Rectangle) -> Rectangle {
        Rectangle {
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(b: f64, d: f64) -> BirthDeathPoint {
        BirthDeathPoint::new(b, d).unwrap()
    }

    fn measure(atoms: &[((f64, f64), f64)]) -> PersistenceMeasure {
        PersistenceMeasure::new(
            atoms
                .iter()
                .map(|&((b, d), mass)| Atom { point: pt(b, d), mass })
                .collect(),
        )
        .unwrap()
    }

    fn q(v: f64) -> MetricConfig {
        MetricConfig::new(v).unwrap()
    }

    // Grid-search oracle for inf_t ‖(b, d) − (t, t)‖_q.
    fn diag_distance_grid(p: &BirthDeathPoint, cfg: &MetricConfig) -> f64 {
        let steps = 200_000;
        let (lo, hi) = (p.birth() - 1.0, p.death() + 1.0);
        (0..=steps)
            .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
            .map(|t| cfg.norm(p.birth() - t, p.death() - t))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn point_validation() {
        assert!(BirthDeathPoint::new(1.0, 1.0).is_err());
        assert!(BirthDeathPoint::new(2.0, 1.0).is_err());
        assert!(BirthDeathPoint::new(0.0, f64::INFINITY).is_err());
        assert!(BirthDeathPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn diag_distance_examples() {
        assert_eq!(diag_distance(&pt(0.0, 1.0), &MetricConfig::infinity()), 0.5);
        let d2 = diag_distance(&pt(0.0, 1.0), &q(2.0));
        assert!((d2 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((d2 - diag_distance_grid(&pt(0.0, 1.0), &q(2.0))).abs() < 1e-6);
        assert_eq!(diag_distance(&pt(2.0, 5.0), &q(1.0)), 3.0);
        assert!((3.0 - diag_distance_grid(&pt(2.0, 5.0), &q(1.0))).abs() < 1e-9);
        let d3 = diag_distance(&pt(-1.0, 0.5), &q(3.0));
        assert!((d3 - diag_distance_grid(&pt(-1.0, 0.5), &q(3.0))).abs() < 1e-6);
    }

    #[test]
    fn ground_distance_examples() {
        let inf = MetricConfig::infinity();
        let a = Site::Point(pt(0.0, 1.0));
        assert_eq!(ground_distance(&a, &Site::Point(pt(0.0, 3.0)), &inf), 2.0);
        let far = ground_distance(&a, &Site::Point(pt(10.0, 10.2)), &inf);
        assert!((far - 0.6).abs() < 1e-12);
        assert_eq!(ground_distance(&Site::Point(pt(1.0, 2.0)), &Site::Diagonal, &inf), 0.5);
        assert_eq!(ground_distance(&Site::Diagonal, &Site::Diagonal, &inf), 0.0);
    }

    #[test]
    fn pers_infinity_examples() {
        let inf = MetricConfig::infinity();
        assert_eq!(
            pers_infinity(&measure(&[((0.0, 1.0), 1.0), ((2.0, 5.0), 0.3)]), &inf),
            1.5
        );
        assert_eq!(pers_infinity(&PersistenceMeasure::empty(), &inf), 0.0);
        assert_eq!(pers_infinity(&measure(&[((0.0, 1.0), 7.0)]), &q(1.0)), 1.0);
    }

    #[test]
    fn truncate_examples() {
        let mu = measure(&[((0.0, 1.0), 1.0), ((0.0, 0.1), 5.0)]);
        assert_eq!(truncate(&mu, 0.5), measure(&[((0.0, 1.0), 1.0)]));
        assert_eq!(truncate(&mu, 0.05), mu);
        assert!(truncate(&mu, 1.0).is_empty());
    }

    #[test]
    fn mass_above_examples() {
        let mu = measure(&[((0.0, 1.0), 2.0), ((0.0, 3.0), 0.5)]);
        assert_eq!(mass_above(&mu, 1.0, Closure::Closed), 2.5);
        assert_eq!(mass_above(&mu, 1.0, Closure::Open), 0.5);
        assert_eq!(mass_above(&PersistenceMeasure::empty(), 0.3, Closure::Closed), 0.0);
        assert_eq!(mass_above(&mu, 0.0, Closure::Open), mu.total_mass());
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(integrate(&measure(&[((1.0, 2.0), 2.0)]), |_| 1.0), 2.0);
        let mu = measure(&[((1.0, 2.0), 2.0), ((0.0, 4.0), 1.0)]);
        assert_eq!(integrate(&mu, |p| p.persistence()), 6.0);
        assert_eq!(integrate(&PersistenceMeasure::empty(), |p| p.death()), 0.0);
    }

    #[test]
    fn zero_mass_atoms_dropped_and_negative_rejected() {
        let mu = measure(&[((0.0, 1.0), 0.0), ((0.0, 2.0), 1.0)]);
        assert_eq!(mu.len(), 1);
        assert!(PersistenceMeasure::new(vec![Atom {
            point: pt(0.0, 1.0),
            mass: -1.0
        }])
        .is_err());
    }

    #[test]
    fn metric_config_serde() {
        let inf: MetricConfig = serde_json::from_str("\"inf\"").unwrap();
        assert!(inf.q().is_infinite());
        let two: MetricConfig = serde_json::from_str("2").unwrap();
        assert_eq!(two.q(), 2.0);
        assert!(serde_json::from_str::<MetricConfig>("0.5").is_err());
        assert_eq!(serde_json::to_string(&inf).unwrap(), "\"inf\"");
    }

    #[test]
    fn rectangle_overlap() {
        let a = Rectangle::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let b = Rectangle::new(1.0, 3.0, 1.5, 4.0).unwrap();
        assert_eq!(a.overlap_area(&b), 0.5);
        assert!(Rectangle::new(1.0, 0.0, 0.0, 1.0).is_err());
    }
}
