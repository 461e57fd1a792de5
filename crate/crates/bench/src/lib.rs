//! Deterministic inputs shared by the criterion benchmarks.

use epm_core::sampling::seeded_rng;
use epm_core::{Atom, BirthDeathPoint, PersistenceMeasure};
use rand::Rng;

/// `n` atoms with births in `[0, 1)`, persistence in `(0, 1]` and masses in `(0, 2]`.
pub fn random_measure(n: usize, seed: u64) -> PersistenceMeasure {
    let mut rng = seeded_rng(seed);
    let atoms = (0..n)
        .map(|_| {
            let b: f64 = rng.random();
            let p = 1.0 - rng.random::<f64>();
            Atom {
                point: BirthDeathPoint::new(b, b + p).expect("positive persistence"),
                mass: 2.0 - 2.0 * rng.random::<f64>(),
            }
        })
        .collect();
    PersistenceMeasure::new(atoms).expect("positive masses")
}
