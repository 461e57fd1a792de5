//! Profiles of the necessary conditions for relative compactness of a finite
//! family of persistence measures: boundedness, uniform off-diagonal
//! finiteness (UODF) and off-diagonal uniform tightness (ODUT).
//!
//! No compactness verdict is produced. The three conditions are necessary
//! but not sufficient; [`counterexample_family`] builds a family that passes
//! all of them while staying uniformly separated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{mass_above, BirthDeathPoint, Closure, MetricConfig, PersistenceMeasure};
use crate::transport::ot_infinity;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UodfEntry {
    pub eps: f64,
    pub sup_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdutEntry {
    pub eps: f64,
    pub n: u64,
    pub sup_mass: f64,
}

/// User thresholds for the per-condition flags. Infinite thresholds only
/// require the profile values to be finite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub diameter: f64,
    pub uodf_mass: f64,
    pub odut_mass: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            diameter: f64::INFINITY,
            uodf_mass: f64::INFINITY,
            odut_mass: f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionFlags {
    pub bounded: bool,
    pub uodf: bool,
    pub odut: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family_size: usize,
    pub diameter_upper_bound: f64,
    /// Smallest OT∞ between distinct members (0 for a singleton).
    pub min_pairwise_distance: f64,
    pub uodf_profile: Vec<UodfEntry>,
    pub odut_profile: Vec<OdutEntry>,
    pub flags: ConditionFlags,
}

fn sorted_positive(values: &[f64], what: &str) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} list is empty")));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!("{what} must be positive, got {v}")));
    }
    let mut out = values.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// For each `ε`, `sup_μ μ(W̄_ε)` over the family, with ε in ascending order.
pub fn uodf_profile(family: &[PersistenceMeasure], eps_list: &[f64]) -> Result<Vec<UodfEntry>> {
    let eps = sorted_positive(eps_list, "eps")?;
    Ok(eps
        .into_iter()
        .map(|eps| UodfEntry {
            eps,
            sup_mass: family
                .iter()
                .map(|mu| mass_above(mu, eps, Closure::Closed))
                .fold(0.0, f64::max),
        })
        .collect())
}

/// Mass of atoms with persistence `> eps` and birth outside `[-n, n]`.
fn out_of_band_mass(mu: &PersistenceMeasure, eps: f64, n: u64) -> f64 {
    let band = n as f64;
    mu.atoms()
        .iter()
        .filter(|a| a.point.persistence() > eps && a.point.birth().abs() > band)
        .map(|a| a.mass)
        .sum()
}

/// For each `N` (ascending), `sup_μ μ(W_ε ∩ (ℝ∖[−N, N]) × ℝ)`.
pub fn odut_profile(family: &[PersistenceMeasure], eps: f64, n_list: &[u64]) -> Result<Vec<OdutEntry>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("N list is empty".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    Ok(ns
        .into_iter()
        .map(|n| OdutEntry {
            eps,
            n,
            sup_mass: family.iter().map(|mu| out_of_band_mass(mu, eps, n)).fold(0.0, f64::max),
        })
        .collect())
}

/// All OT∞ distances between distinct members, as `(i, j, distance)` with `i < j`.
pub fn pairwise_distances(family: &[PersistenceMeasure], cfg: &MetricConfig) -> Vec<(usize, usize, f64)> {
    let index_pairs: Vec<(usize, usize)> = (0..family.len())
        .flat_map(|i| (i + 1..family.len()).map(move |j| (i, j)))
        .collect();
    index_pairs
        .into_par_iter()
        .map(|(i, j)| (i, j, ot_infinity(&family[i], &family[j], cfg).distance))
        .collect()
}

/// Largest pairwise OT∞ in the family; exact diameter for finite families.
pub fn diameter_bound(family: &[PersistenceMeasure], cfg: &MetricConfig) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty family".into()));
    }
    Ok(pairwise_distances(family, cfg)
        .into_iter()
        .map(|(_, _, d)| d)
        .fold(0.0, f64::max))
}

/// `{(1/k) δ_x : k = 1..n}`.
pub fn counterexample_family(x: BirthDeathPoint, n: usize) -> Result<Vec<PersistenceMeasure>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    (1..=n).map(|k| PersistenceMeasure::dirac(x, 1.0 / k as f64)).collect()
}

/// Computes every profile plus the pairwise distance summary.
pub fn family_report(
    family: &[PersistenceMeasure],
    eps_list: &[f64],
    odut_eps: f64,
    n_list: &[u64],
    cfg: &MetricConfig,
    thresholds: &Thresholds,
) -> Result<FamilyReport> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty family".into()));
    }
    let uodf = uodf_profile(family, eps_list)?;
    let odut = odut_profile(family, odut_eps, n_list)?;
    let distances = pairwise_distances(family, cfg);
    let diameter = distances.iter().map(|d| d.2).fold(0.0, f64::max);
    let min_pairwise = if distances.is_empty() {
        0.0
    } else {
        distances.iter().map(|d| d.2).fold(f64::INFINITY, f64::min)
    };
    let within = |v: f64, limit: f64| v.is_finite() && v <= limit;
    let flags = ConditionFlags {
        bounded: within(diameter, thresholds.diameter),
        uodf: uodf.iter().all(|e| within(e.sup_mass, thresholds.uodf_mass)),
        // ODUT asks that the out-of-band mass falls below the threshold for
        // some band; the widest requested band is the decisive one.
        odut: odut.last().is_some_and(|e| within(e.sup_mass, thresholds.odut_mass)),
    };
    Ok(FamilyReport {
        family_size: family.len(),
        diameter_upper_bound: diameter,
        min_pairwise_distance: min_pairwise,
        uodf_profile: uodf,
        odut_profile: odut,
        flags,
    })
}
