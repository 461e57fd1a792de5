//! Persistence diagrams from Vietoris–Rips filtrations (degrees 0 and 1, by
//! boundary-matrix reduction over the two-element field) and from sublevel-set
//! filtrations of grayscale images (degree 0, by union-find).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{BirthDeathPoint, PersistenceDiagram};

/// Symmetric matrix of non-negative pairwise distances with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates a row-major `n × n` matrix.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidDistanceMatrix(format!(
                "expected {} entries, found {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidDistanceMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDistanceMatrix(format!(
                        "entry ({i}, {j}) = {v} is negative or not finite"
                    )));
                }
                if v != entries[j * n + i] {
                    return Err(Error::InvalidDistanceMatrix(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::InvalidDistanceMatrix(format!(
                "row of length {} in a {n}-row matrix",
                r.len()
            )));
        }
        Self::new(n, rows.concat())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// The matrix with rows and columns reordered so that new index `k` is old `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: perm.len(),
            });
        }
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                entries[a * n + b] = self.get(perm[a], perm[b]);
            }
        }
        Self::new(n, entries)
    }
}

/// Row-major grayscale image.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width * height != pixels.len() {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image with {} pixels",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidImage("non-finite pixel intensity".into()));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Copies out the `w × h` block whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<GrayImage> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::InvalidImage(format!(
                "crop {w}x{h} at ({x}, {y}) exceeds {}x{}",
                self.width, self.height
            )));
        }
        let pixels = (y..y + h)
            .flat_map(|row| {
                self.pixels[row * self.width + x..row * self.width + x + w]
                    .iter()
                    .copied()
            })
            .collect();
        GrayImage::new(w, h, pixels)
    }
}

/// What to do with classes that never die.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EssentialPolicy {
    /// Close them at the last filtration value: the largest included
    /// distance for Rips filtrations, the maximum intensity for images.
    #[default]
    Cap,
    Drop,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FiltrationOptions {
    /// Highest homology degree computed (0 or 1).
    pub max_dim: usize,
    /// Rips scale cut-off; `None` builds the full filtration.
    pub max_radius: Option<f64>,
    pub essential_policy: EssentialPolicy,
    /// Pixel adjacency for image filtrations.
    pub connectivity: Connectivity,
}

impl Default for FiltrationOptions {
    fn default() -> Self {
        Self {
            max_dim: 1,
            max_radius: None,
            essential_policy: EssentialPolicy::Cap,
            connectivity: Connectivity::Four,
        }
    }
}

/// Result of reducing a boundary matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    /// Reduced columns, each a strictly increasing list of row indices.
    pub columns: Vec<Vec<usize>>,
    /// `(low(j), j)` for every non-zero reduced column `j`.
    pub pairs: Vec<(usize, usize)>,
    /// Columns that reduce to zero and are never a pivot row.
    pub essential: Vec<usize>,
}

/// Symmetric difference of two sorted index lists (addition over the
/// two-element field).
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn validate_boundary(columns: &[Vec<usize>]) -> Result<()> {
    for (j, col) in columns.iter().enumerate() {
        if col.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedBoundary {
                column: j,
                reason: "row indices must be strictly increasing".into(),
            });
        }
        if col.last().is_some_and(|&r| r >= j) {
            return Err(Error::MalformedBoundary {
                column: j,
                reason: "a face must precede its coface in filtration order".into(),
            });
        }
        let mut acc: Vec<usize> = Vec::new();
        for &r in col {
            acc = add_columns(&acc, &columns[r]);
        }
        if !acc.is_empty() {
            return Err(Error::MalformedBoundary {
                column: j,
                reason: "boundary of boundary is nonzero".into(),
            });
        }
    }
    Ok(())
}

fn finish(columns: Vec<Vec<usize>>, pivot_of_row: &[Option<usize>]) -> Reduction {
    let mut pairs: Vec<(usize, usize)> = columns
        .iter()
        .enumerate()
        .filter_map(|(j, c)| c.last().map(|&low| (low, j)))
        .collect();
    pairs.sort_unstable_by_key(|p| p.1);
    let essential = columns
        .iter()
        .enumerate()
        .filter(|(j, c)| c.is_empty() && pivot_of_row[*j].is_none())
        .map(|(j, _)| j)
        .collect();
    Reduction {
        columns,
        pairs,
        essential,
    }
}

fn reduce_column(mut col: Vec<usize>, reduced: &[Vec<usize>], pivot_of_row: &[Option<usize>]) -> Vec<usize> {
    while let Some(&low) = col.last() {
        match pivot_of_row[low] {
            Some(k) => col = add_columns(&col, &reduced[k]),
            None => break,
        }
    }
    col
}

/// Standard left-to-right column reduction of a boundary matrix given in
/// filtration order. Afterwards every non-zero column has a distinct lowest row.
pub fn reduce_boundary_matrix(columns: &[Vec<usize>]) -> Result<Reduction> {
    validate_boundary(columns)?;
    let n = columns.len();
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        let col = reduce_column(columns[j].clone(), &reduced, &pivot_of_row);
        if let Some(&low) = col.last() {
            pivot_of_row[low] = Some(j);
        }
        reduced[j] = col;
    }
    Ok(finish(reduced, &pivot_of_row))
}

/// Reduction with clearing: columns are processed from the highest
/// dimension down, and any column already known to be a pivot row is zeroed
/// without work. Pairings are identical to [`reduce_boundary_matrix`].
pub fn reduce_boundary_matrix_with_clearing(columns: &[Vec<usize>], dims: &[usize]) -> Result<Reduction> {
    if dims.len() != columns.len() {
        return Err(Error::DimensionMismatch {
            expected: columns.len(),
            found: dims.len(),
        });
    }
    validate_boundary(columns)?;
    let n = columns.len();
    let top = dims.iter().copied().max().unwrap_or(0);
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    for dim in (1..=top).rev() {
        for j in (0..n).filter(|&j| dims[j] == dim) {
            if cleared[j] {
                continue;
            }
            let col = reduce_column(columns[j].clone(), &reduced, &pivot_of_row);
            if let Some(&low) = col.last() {
                pivot_of_row[low] = Some(j);
                cleared[low] = true;
            }
            reduced[j] = col;
        }
    }
    Ok(finish(reduced, &pivot_of_row))
}

#[derive(Clone, Copy, Debug)]
struct Simplex {
    value: f64,
    dim: usize,
    vertices: [usize; 3],
}

impl Simplex {
    fn order(&self, other: &Self) -> std::cmp::Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices[..=self.dim].cmp(&other.vertices[..=other.dim]))
    }
}

fn push_pair(diagrams: &mut BTreeMap<usize, PersistenceDiagram>, degree: usize, birth: f64, death: f64) {
    if birth < death {
        let point = BirthDeathPoint::new(birth, death).expect("birth < death and both finite");
        diagrams.entry(degree).or_default().points.push(point);
    }
}

/// Vietoris–Rips persistence in degrees `0..=opts.max_dim`.
///
/// The value of a simplex is the largest pairwise distance among its
/// vertices. Ties are broken by dimension, then lexicographically by vertex
/// list. Zero-persistence pairs are discarded.
pub fn vr_persistence(dm: &DistanceMatrix, opts: &FiltrationOptions) -> Result<BTreeMap<usize, PersistenceDiagram>> {
    if opts.max_dim > 1 {
        return Err(Error::InvalidArgument(format!(
            "homology degree {} is not supported (0 or 1)",
            opts.max_dim
        )));
    }
    let n = dm.len();
    let radius = opts.max_radius.unwrap_or(f64::INFINITY);
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidArgument(format!("max_radius {radius}")));
    }

    let mut simplices: Vec<Simplex> = (0..n)
        .map(|v| Simplex {
            value: 0.0,
            dim: 0,
            vertices: [v, 0, 0],
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            let value = dm.get(i, j);
            if value <= radius {
                simplices.push(Simplex {
                    value,
                    dim: 1,
                    vertices: [i, j, 0],
                });
            }
        }
    }
    if opts.max_dim >= 1 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let value = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                    if value <= radius {
                        simplices.push(Simplex {
                            value,
                            dim: 2,
                            vertices: [i, j, k],
                        });
                    }
                }
            }
        }
    }
    simplices.sort_by(Simplex::order);

    let mut vertex_pos = vec![0usize; n];
    let mut edge_pos = vec![usize::MAX; n * n];
    for (pos, s) in simplices.iter().enumerate() {
        match s.dim {
            0 => vertex_pos[s.vertices[0]] = pos,
            1 => {
                let [i, j, _] = s.vertices;
                edge_pos[i * n + j] = pos;
            }
            _ => {}
        }
    }
    let columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            let [i, j, k] = s.vertices;
            let mut col = match s.dim {
                0 => Vec::new(),
                1 => vec![vertex_pos[i], vertex_pos[j]],
                _ => vec![edge_pos[i * n + j], edge_pos[i * n + k], edge_pos[j * n + k]],
            };
            col.sort_unstable();
            col
        })
        .collect();
    let dims: Vec<usize> = simplices.iter().map(|s| s.dim).collect();
    let reduction = reduce_boundary_matrix_with_clearing(&columns, &dims)?;

    let mut diagrams: BTreeMap<usize, PersistenceDiagram> =
        (0..=opts.max_dim).map(|d| (d, PersistenceDiagram::default())).collect();
    for &(b, d) in &reduction.pairs {
        let degree = simplices[b].dim;
        if degree <= opts.max_dim {
            push_pair(&mut diagrams, degree, simplices[b].value, simplices[d].value);
        }
    }
    if opts.essential_policy == EssentialPolicy::Cap {
        let cap = simplices.iter().map(|s| s.value).fold(0.0, f64::max);
        for &e in &reduction.essential {
            let degree = simplices[e].dim;
            if degree <= opts.max_dim {
                push_pair(&mut diagrams, degree, simplices[e].value, cap);
            }
        }
    }
    Ok(diagrams)
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Links two roots and returns the surviving root.
    fn link(&mut self, a: usize, b: usize) -> usize {
        let (hi, lo) = if self.rank[a] >= self.rank[b] { (a, b) } else { (b, a) };
        self.parent[lo] = hi;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        hi
    }
}

fn neighbours(x: usize, y: usize, w: usize, h: usize, conn: Connectivity) -> impl Iterator<Item = usize> {
    const FOUR: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
    const EIGHT: [(isize, isize); 8] = [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, -1), (-1, 1), (1, 1)];
    let offsets: &'static [(isize, isize)] = match conn {
        Connectivity::Four => &FOUR,
        Connectivity::Eight => &EIGHT,
    };
    offsets.iter().filter_map(move |&(dx, dy)| {
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then(|| ny as usize * w + nx as usize)
    })
}

/// Degree-0 persistence of the sublevel-set filtration of an image.
///
/// Pixels enter in order of intensity; when a pixel joins two components the
/// one with the later birth dies at that pixel's intensity (elder rule).
pub fn image_sublevel_h0(img: &GrayImage, opts: &FiltrationOptions) -> Result<PersistenceDiagram> {
    if img.is_empty() {
        return Err(Error::InvalidImage("empty image".into()));
    }
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let mut order: Vec<usize> = (0..px.len()).collect();
    order.sort_by(|&a, &b| px[a].total_cmp(&px[b]).then(a.cmp(&b)));

    let mut sets = DisjointSet::new(px.len());
    // Birth of the component rooted at each root, with the root index as tiebreak.
    let mut birth: Vec<(f64, usize)> = (0..px.len()).map(|i| (px[i], i)).collect();
    let mut active = vec![false; px.len()];
    let mut diagram = PersistenceDiagram::default();
    let older = |a: (f64, usize), b: (f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);

    for &p in &order {
        let value = px[p];
        active[p] = true;
        for q in neighbours(p % w, p / w, w, h, opts.connectivity) {
            if !active[q] {
                continue;
            }
            let (rp, rq) = (sets.find(p), sets.find(q));
            if rp == rq {
                continue;
            }
            let (bp, bq) = (birth[rp], birth[rq]);
            let (survivor, victim) = if older(bp, bq) { (bp, bq) } else { (bq, bp) };
            if victim.0 < value {
                diagram.points.push(BirthDeathPoint::new(victim.0, value)?);
            }
            let root = sets.link(rp, rq);
            birth[root] = survivor;
        }
    }
    if opts.essential_policy == EssentialPolicy::Cap {
        let cap = px.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut roots: Vec<usize> = (0..px.len()).map(|i| sets.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        for r in roots {
            if birth[r].0 < cap {
                diagram.points.push(BirthDeathPoint::new(birth[r].0, cap)?);
            }
        }
    }
    Ok(diagram)
}
