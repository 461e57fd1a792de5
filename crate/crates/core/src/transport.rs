//! Partial ∞-optimal transport between finite atomic persistence measures.
//!
//! The distance is the smallest threshold `t` at which a coupling with
//! worst-pair cost `≤ t` exists. Feasibility at a fixed `t` is a balanced
//! transportation problem: each side gets an extra diagonal node carrying the
//! other side's total mass, arcs exist only where the ground distance is at
//! most `t`, and the problem is feasible exactly when a max-flow saturates
//! every supply. Feasibility is monotone in `t` and can only change at a
//! pairwise ground distance or a diagonal distance, so a binary search over
//! those candidates finds the exact optimum.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::flow::{ArcId, Capacity, FlowNetwork, UNBOUNDED};
use crate::measure::{
    diag_distance, ground_distance, point_distance, MetricConfig, PersistenceDiagram, PersistenceMeasure, Site,
};

/// Tolerance on coupling marginals.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// One endpoint of a transported parcel: an atom index or the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Atom(usize),
    Diagonal,
}

impl Serialize for Endpoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Endpoint::Atom(i) => s.serialize_u64(*i as u64),
            Endpoint::Diagonal => s.serialize_str("diagonal"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pair {
    pub source: Endpoint,
    pub target: Endpoint,
    pub mass: f64,
}

/// A transport plan between two measures, stored as weighted pairs.
/// Mass moved diagonal-to-diagonal is free and never recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    source: PersistenceMeasure,
    target: PersistenceMeasure,
    pairs: Vec<Pair>,
}

impl Coupling {
    /// Checks index ranges and masses; does not check marginals (see
    /// [`verify_coupling`]).
    pub fn new(source: PersistenceMeasure, target: PersistenceMeasure, pairs: Vec<Pair>) -> Result<Self> {
        for p in &pairs {
            if !(p.mass.is_finite() && p.mass > 0.0) {
                return Err(Error::InvalidArgument(format!("pair mass {}", p.mass)));
            }
            match (p.source, p.target) {
                (Endpoint::Diagonal, Endpoint::Diagonal) => {
                    return Err(Error::InvalidArgument(
                        "diagonal-to-diagonal pairs are not recorded".into(),
                    ))
                }
                (s, t) => {
                    if matches!(s, Endpoint::Atom(i) if i >= source.len())
                        || matches!(t, Endpoint::Atom(j) if j >= target.len())
                    {
                        return Err(Error::InvalidArgument("pair index out of range".into()));
                    }
                }
            }
        }
        Ok(Self { source, target, pairs })
    }

    pub fn empty(source: PersistenceMeasure, target: PersistenceMeasure) -> Self {
        Self {
            source,
            target,
            pairs: Vec::new(),
        }
    }

    pub fn source(&self) -> &PersistenceMeasure {
        &self.source
    }

    pub fn target(&self) -> &PersistenceMeasure {
        &self.target
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    fn site(&self, e: Endpoint, measure: &PersistenceMeasure) -> Site {
        match e {
            Endpoint::Atom(i) => Site::Point(measure.atoms()[i].point),
            Endpoint::Diagonal => Site::Diagonal,
        }
    }

    /// Ground cost of one pair.
    pub fn pair_cost(&self, pair: &Pair, cfg: &MetricConfig) -> f64 {
        ground_distance(
            &self.site(pair.source, &self.source),
            &self.site(pair.target, &self.target),
            cfg,
        )
    }
}

impl Serialize for Coupling {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Coupling", 3)?;
        st.serialize_field("source", &self.source)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("pairs", &self.pairs)?;
        st.end()
    }
}

/// `C∞(π)`: the largest ground cost carried by a pair of positive mass.
pub fn cost_infinity(pi: &Coupling, cfg: &MetricConfig) -> f64 {
    pi.pairs
        .iter()
        .filter(|p| p.mass > 0.0)
        .map(|p| pi.pair_cost(p, cfg))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MarginalSide {
    Source,
    Target,
}

/// A marginal that the coupling fails to reproduce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginalViolation {
    pub side: MarginalSide,
    pub atom: usize,
    pub expected: f64,
    pub actual: f64,
}

impl MarginalViolation {
    pub fn discrepancy(&self) -> f64 {
        (self.expected - self.actual).abs()
    }
}

/// Lists every atom whose transported mass differs from its own mass by
/// more than [`MARGINAL_TOLERANCE`].
pub fn verify_coupling(pi: &Coupling) -> Vec<MarginalViolation> {
    let mut out_mass = vec![0.0; pi.source.len()];
    let mut in_mass = vec![0.0; pi.target.len()];
    for p in &pi.pairs {
        if let Endpoint::Atom(i) = p.source {
            out_mass[i] += p.mass;
        }
        if let Endpoint::Atom(j) = p.target {
            in_mass[j] += p.mass;
        }
    }
    let check = |side, measure: &PersistenceMeasure, actual: &[f64]| {
        measure
            .atoms()
            .iter()
            .zip(actual)
            .enumerate()
            .filter(|(_, (a, &m))| (a.mass - m).abs() > MARGINAL_TOLERANCE)
            .map(|(atom, (a, &m))| MarginalViolation {
                side,
                atom,
                expected: a.mass,
                actual: m,
            })
            .collect::<Vec<_>>()
    };
    let mut violations = check(MarginalSide::Source, &pi.source, &out_mass);
    violations.extend(check(MarginalSide::Target, &pi.target, &in_mass));
    violations
}

/// How real masses become integer capacities for the flow.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum MassScaling {
    /// Every finite double is a dyadic rational; scale by the smallest
    /// power of two that makes all masses integers. Exact whenever the
    /// scaled total fits in 120 bits (about 67 bits of dynamic range beyond
    /// the mantissa), otherwise falls back to rounding the largest mass at
    /// that budget.
    #[default]
    Exact,
    /// `round(mass · precision)`.
    Fixed(f64),
}

#[derive(Clone, Debug)]
struct ScaledMasses {
    source: Vec<Capacity>,
    target: Vec<Capacity>,
    /// Real mass represented by one capacity unit.
    unit: f64,
    discrepancy: f64,
}

/// `2^e` for any exponent down to the subnormal range.
fn exp2i(e: i32) -> f64 {
    let half = e / 2;
    2f64.powi(half) * 2f64.powi(e - half)
}

fn dyadic_parts(m: f64) -> (u64, i32) {
    let bits = m.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    let tz = mant.trailing_zeros();
    mant >>= tz;
    exp += tz as i32;
    (mant, exp)
}

/// Bit budget for the total scaled mass; stays well below [`UNBOUNDED`].
const MASS_BITS: i32 = 120;

fn scale_masses(mu: &PersistenceMeasure, nu: &PersistenceMeasure, scaling: MassScaling) -> ScaledMasses {
    let masses = || mu.atoms().iter().chain(nu.atoms()).map(|a| a.mass);
    match scaling {
        MassScaling::Exact => {
            let parts: Vec<(u64, i32)> = masses().map(dyadic_parts).collect();
            let Some(min_exp) = parts.iter().map(|&(_, e)| e).min() else {
                return ScaledMasses {
                    source: Vec::new(),
                    target: Vec::new(),
                    unit: 1.0,
                    discrepancy: 0.0,
                };
            };
            let widest = parts
                .iter()
                .map(|&(m, e)| (64 - m.leading_zeros()) as i32 + (e - min_exp))
                .max()
                .unwrap_or(0);
            let count_bits = (usize::BITS - parts.len().leading_zeros()) as i32;
            if widest + count_bits > MASS_BITS {
                let max_mass = masses().fold(0.0, f64::max);
                let precision = exp2i(MASS_BITS - count_bits - max_mass.log2().ceil() as i32);
                return scale_masses(mu, nu, MassScaling::Fixed(precision));
            }
            let scaled: Vec<Capacity> = parts.iter().map(|&(m, e)| (m as Capacity) << (e - min_exp)).collect();
            let (source, target) = scaled.split_at(mu.len());
            ScaledMasses {
                source: source.to_vec(),
                target: target.to_vec(),
                unit: exp2i(min_exp),
                discrepancy: 0.0,
            }
        }
        MassScaling::Fixed(precision) => {
            let mut discrepancy = 0.0;
            let mut round = |m: f64| {
                let s = (m * precision).round();
                discrepancy += (s / precision - m).abs();
                s as Capacity
            };
            let source = mu.atoms().iter().map(|a| round(a.mass)).collect();
            let target = nu.atoms().iter().map(|a| round(a.mass)).collect();
            ScaledMasses {
                source,
                target,
                unit: 1.0 / precision,
                discrepancy,
            }
        }
    }
}

/// Precomputed costs shared by every threshold test.
struct TransportProblem<'a> {
    mu: &'a PersistenceMeasure,
    nu: &'a PersistenceMeasure,
    cost: Vec<f64>,
    mu_diag: Vec<f64>,
    nu_diag: Vec<f64>,
    masses: ScaledMasses,
}

impl<'a> TransportProblem<'a> {
    fn new(mu: &'a PersistenceMeasure, nu: &'a PersistenceMeasure, cfg: &MetricConfig, scaling: MassScaling) -> Self {
        let cost = mu
            .atoms()
            .iter()
            .flat_map(|a| nu.atoms().iter().map(move |b| (a, b)))
            .map(|(a, b)| point_distance(&a.point, &b.point, cfg))
            .collect();
        let mu_diag = mu.atoms().iter().map(|a| diag_distance(&a.point, cfg)).collect();
        let nu_diag = nu.atoms().iter().map(|a| diag_distance(&a.point, cfg)).collect();
        Self {
            mu,
            nu,
            cost,
            mu_diag,
            nu_diag,
            masses: scale_masses(mu, nu, scaling),
        }
    }

    fn candidates(&self) -> Vec<f64> {
        let mut c: Vec<f64> = std::iter::once(0.0)
            .chain(self.cost.iter().copied())
            .chain(self.mu_diag.iter().copied())
            .chain(self.nu_diag.iter().copied())
            .collect();
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }

    fn solve(&self, t: f64) -> Option<Coupling> {
        let (m, n) = (self.mu.len(), self.nu.len());
        let source = 0;
        let mu_node = |i: usize| 1 + i;
        let mu_diag = m + 1;
        let nu_node = |j: usize| m + 2 + j;
        let nu_diag = m + n + 2;
        let sink = m + n + 3;

        let mu_total: Capacity = self.masses.source.iter().sum();
        let nu_total: Capacity = self.masses.target.iter().sum();

        let mut net = FlowNetwork::new(m + n + 4);
        for (i, &s) in self.masses.source.iter().enumerate() {
            net.add_arc(source, mu_node(i), s);
        }
        net.add_arc(source, mu_diag, nu_total);
        for (j, &r) in self.masses.target.iter().enumerate() {
            net.add_arc(nu_node(j), sink, r);
        }
        net.add_arc(nu_diag, sink, mu_total);

        let mut arcs: Vec<(Endpoint, Endpoint, ArcId)> = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if self.cost[i * n + j] <= t {
                    let id = net.add_arc(mu_node(i), nu_node(j), UNBOUNDED);
                    arcs.push((Endpoint::Atom(i), Endpoint::Atom(j), id));
                }
            }
            if self.mu_diag[i] <= t {
                let id = net.add_arc(mu_node(i), nu_diag, UNBOUNDED);
                arcs.push((Endpoint::Atom(i), Endpoint::Diagonal, id));
            }
        }
        for j in 0..n {
            if self.nu_diag[j] <= t {
                let id = net.add_arc(mu_diag, nu_node(j), UNBOUNDED);
                arcs.push((Endpoint::Diagonal, Endpoint::Atom(j), id));
            }
        }
        net.add_arc(mu_diag, nu_diag, UNBOUNDED);

        if net.max_flow(source, sink) != mu_total + nu_total {
            return None;
        }
        let pairs = arcs
            .into_iter()
            .filter_map(|(s, e, id)| {
                let f = net.flow(id);
                (f > 0).then_some(Pair {
                    source: s,
                    target: e,
                    mass: f as f64 * self.masses.unit,
                })
            })
            .collect();
        Some(Coupling {
            source: self.mu.clone(),
            target: self.nu.clone(),
            pairs,
        })
    }
}

/// A coupling of cost at most `t`, if one exists.
pub fn feasible_at(mu: &PersistenceMeasure, nu: &PersistenceMeasure, t: f64, cfg: &MetricConfig) -> Option<Coupling> {
    feasible_at_with(mu, nu, t, cfg, MassScaling::default())
}

pub fn feasible_at_with(
    mu: &PersistenceMeasure,
    nu: &PersistenceMeasure,
    t: f64,
    cfg: &MetricConfig,
    scaling: MassScaling,
) -> Option<Coupling> {
    if !(t >= 0.0) {
        return None;
    }
    TransportProblem::new(mu, nu, cfg, scaling).solve(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransportResult {
    pub distance: f64,
    pub coupling: Coupling,
    /// Number of max-flow feasibility tests performed by the search.
    pub thresholds_tested: usize,
    /// Total absolute mass change caused by integer scaling (0 when exact).
    pub rounding_discrepancy: f64,
}

/// The partial ∞-optimal transport distance and an optimal coupling.
pub fn ot_infinity(mu: &PersistenceMeasure, nu: &PersistenceMeasure, cfg: &MetricConfig) -> TransportResult {
    ot_infinity_with(mu, nu, cfg, MassScaling::default())
}

pub fn ot_infinity_with(
    mu: &PersistenceMeasure,
    nu: &PersistenceMeasure,
    cfg: &MetricConfig,
    scaling: MassScaling,
) -> TransportResult {
    let problem = TransportProblem::new(mu, nu, cfg, scaling);
    let candidates = problem.candidates();
    let mut tested = 0;

    // The largest candidate is always feasible: every atom can go to the diagonal.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        tested += 1;
        match problem.solve(candidates[mid]) {
            Some(c) => {
                best = Some(c);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let coupling = match best {
        Some(c) => c,
        None => {
            tested += 1;
            problem
                .solve(candidates[lo])
                .expect("largest transport candidate is always feasible")
        }
    };
    TransportResult {
        distance: candidates[lo],
        coupling,
        thresholds_tested: tested,
        rounding_discrepancy: problem.masses.discrepancy,
    }
}

/// Bottleneck distance: OT∞ between unit-mass counting measures.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram, cfg: &MetricConfig) -> f64 {
    ot_infinity(&d1.to_measure(1.0), &d2.to_measure(1.0), cfg).distance
}
