//! Polynomial feature expansion and multinomial logistic regression.
//!
//! Raw features are standardised with training-set statistics, expanded into
//! every monomial of total degree at most `degree`, and fed to a softmax
//! model fitted by full-batch gradient descent on the L2-regularised
//! cross-entropy.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::TemplateSystem;
use crate::sampling::seeded_rng;

/// Feature matrix with class ids `0..n_classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Vec<usize>,
    n_classes: usize,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                found: y.len(),
            });
        }
        if n_classes < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::InvalidDataset(format!("label {bad} outside 0..{n_classes}")));
        }
        Ok(Self { x, y, n_classes })
    }

    /// Builds a dataset from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<usize>, n_classes: usize) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: r.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let x = Array2::from_shape_vec((rows.len(), width), flat).map_err(|e| Error::InvalidDataset(e.to_string()))?;
        Self::new(x, y, n_classes)
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
        }
    }
}

/// Monomials of total degree `≤ degree` in `n_inputs` variables, in graded
/// lexicographic order. Each term lists its variable indices in
/// non-decreasing order, so `[0, 0, 1]` is `x₀² x₁`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialMap {
    degree: usize,
    include_bias: bool,
    n_inputs: usize,
    terms: Vec<Vec<usize>>,
}

impl PolynomialMap {
    pub fn new(n_inputs: usize, degree: usize, include_bias: bool) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("polynomial degree must be at least 1".into()));
        }
        let mut terms = Vec::new();
        if include_bias {
            terms.push(Vec::new());
        }
        let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..degree {
            layer = layer
                .iter()
                .flat_map(|t| {
                    let start = t.last().copied().unwrap_or(0);
                    (start..n_inputs).map(move |i| {
                        let mut next = t.clone();
                        next.push(i);
                        next
                    })
                })
                .collect();
            terms.extend(layer.iter().cloned());
        }
        Ok(Self {
            degree,
            include_bias,
            n_inputs,
            terms,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn include_bias(&self) -> bool {
        self.include_bias
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn terms(&self) -> &[Vec<usize>] {
        &self.terms
    }

    pub fn output_dim(&self) -> usize {
        self.terms.len()
    }

    /// Exponent multi-index of a term.
    pub fn exponents(&self, term: usize) -> Vec<u32> {
        let mut e = vec![0; self.n_inputs];
        for &i in &self.terms[term] {
            e[i] += 1;
        }
        e
    }
}

pub fn polynomial_expand(x: ArrayView2<'_, f64>, map: &PolynomialMap) -> Result<Array2<f64>> {
    if x.ncols() != map.n_inputs {
        return Err(Error::DimensionMismatch {
            expected: map.n_inputs,
            found: x.ncols(),
        });
    }
    let mut out = Array2::zeros((x.nrows(), map.output_dim()));
    for (row, mut target) in x.outer_iter().zip(out.outer_iter_mut()) {
        for (slot, term) in target.iter_mut().zip(&map.terms) {
            *slot = term.iter().map(|&i| row[i]).product();
        }
    }
    Ok(out)
}

/// Per-feature centring and scaling. Constant features keep scale 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mean: Vec<f64> = x.axis_iter(Axis(1)).map(|c| c.sum() / n).collect();
        let scale = x
            .axis_iter(Axis(1))
            .zip(&mean)
            .map(|(c, m)| {
                let sd = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - self.mean[j]) / self.scale[j]);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l2: f64,
    pub max_iters: usize,
    /// Stop once the gradient's Frobenius norm falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            max_iters: 2000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub iterations: usize,
    pub final_loss: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Objective after every accepted step, starting from the initial weights.
    pub loss_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// `n_classes × expanded_dim`.
    pub weights: Array2<f64>,
    pub polynomial: PolynomialMap,
    pub standardizer: Standardizer,
    pub n_classes: usize,
    pub config: TrainConfig,
    pub summary: TrainSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_system: Option<TemplateSystem>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub labels: Vec<usize>,
    /// Row `i` holds the class probabilities of instance `i`.
    pub probabilities: Array2<f64>,
}

fn softmax_rows(scores: &mut Array2<f64>) {
    for mut row in scores.outer_iter_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
}

/// Mean softmax cross-entropy plus `(l2/2)‖W‖²`, and its gradient in `W`.
pub fn loss_and_gradient(phi: &Array2<f64>, y: &[usize], weights: &Array2<f64>, l2: f64) -> (f64, Array2<f64>) {
    let n = phi.nrows().max(1) as f64;
    let mut scores = phi.dot(&weights.t());
    let mut data_loss = 0.0;
    for (row, &label) in scores.outer_iter().zip(y) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        data_loss += log_sum - row[label];
    }
    softmax_rows(&mut scores);
    for (mut row, &label) in scores.outer_iter_mut().zip(y) {
        row[label] -= 1.0;
    }
    let grad = scores.t().dot(phi) / n + weights * l2;
    let penalty = 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (data_loss / n + penalty, grad)
}

fn check_finite(x: ArrayView2<'_, f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite feature value".into()))
    }
}

fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Gradient descent from seeded small random weights. Each iteration tries
/// a Barzilai–Borwein step and halves it until the Armijo condition holds,
/// so the objective never increases between accepted iterates.
fn minimise(
    phi: &Array2<f64>,
    y: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<(Array2<f64>, TrainSummary)> {
    let mut rng = seeded_rng(cfg.seed);
    let mut w = Array2::from_shape_fn((n_classes, phi.ncols()), |_| {
        0.01 * rng.sample::<f64, _>(StandardNormal)
    });
    let (mut loss, mut grad) = loss_and_gradient(phi, y, &w, cfg.l2);
    let mut history = vec![loss];
    let mut step = 1.0;
    let mut prev: Option<(Array2<f64>, Array2<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        let gnorm2 = grad.iter().map(|g| g * g).sum::<f64>();
        if gnorm2.sqrt() < cfg.tol {
            converged = true;
            break;
        }
        if let Some((w_prev, g_prev)) = &prev {
            let s = &w - w_prev;
            let yv = &grad - g_prev;
            let sy: f64 = s.iter().zip(yv.iter()).map(|(a, b)| a * b).sum();
            let ss: f64 = s.iter().map(|a| a * a).sum();
            if sy > 0.0 && (ss / sy).is_finite() {
                step = ss / sy;
            } else {
                step *= 2.0;
            }
        }
        let accepted = loop {
            let trial = &w - &(&grad * step);
            let (trial_loss, trial_grad) = loss_and_gradient(phi, y, &trial, cfg.l2);
            if trial_loss.is_finite() && trial_loss <= loss - 1e-4 * step * gnorm2 {
                break Some((trial, trial_loss, trial_grad));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((trial, trial_loss, trial_grad)) = accepted else {
            // No descent is representable at this precision: a stationary point.
            converged = true;
            break;
        };
        prev = Some((
            std::mem::replace(&mut w, trial),
            std::mem::replace(&mut grad, trial_grad),
        ));
        loss = trial_loss;
        history.push(loss);
        iterations += 1;
    }
    if !loss.is_finite() {
        return Err(Error::Numerical("training loss diverged".into()));
    }
    let summary = TrainSummary {
        iterations,
        final_loss: loss,
        gradient_norm: frobenius(&grad),
        converged: converged || frobenius(&grad) < cfg.tol,
        loss_history: history,
    };
    Ok((w, summary))
}

/// Fits a standardise → expand → softmax pipeline. `map` must take the
/// dataset's raw features as inputs.
pub fn train_logistic(ds: &Dataset, map: &PolynomialMap, cfg: &TrainConfig) -> Result<LogisticModel> {
    if !(cfg.l2 >= 0.0 && cfg.l2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "l2 must be non-negative, got {}",
            cfg.l2
        )));
    }
    if let Some(c) = ds.class_counts().iter().position(|&n| n == 0) {
        return Err(Error::InvalidDataset(format!("class {c} has no instances")));
    }
    check_finite(ds.x.view())?;
    let standardizer = Standardizer::fit(ds.x.view());
    let phi = polynomial_expand(standardizer.transform(ds.x.view())?.view(), map)?;
    check_finite(phi.view())?;
    let (weights, summary) = minimise(&phi, &ds.y, ds.n_classes, cfg)?;
    Ok(LogisticModel {
        weights,
        polynomial: map.clone(),
        standardizer,
        n_classes: ds.n_classes,
        config: *cfg,
        summary,
        template_system: None,
    })
}

pub fn predict(model: &LogisticModel, x: ArrayView2<'_, f64>) -> Result<Prediction> {
    let phi = polynomial_expand(model.standardizer.transform(x)?.view(), &model.polynomial)?;
    if phi.ncols() != model.weights.ncols() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.ncols(),
            found: phi.ncols(),
        });
    }
    let mut probabilities = phi.dot(&model.weights.t());
    softmax_rows(&mut probabilities);
    let labels = probabilities
        .outer_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |best, (c, &p)| if p > best.1 { (c, p) } else { best },
                )
                .0
        })
        .collect();
    Ok(Prediction { labels, probabilities })
}

/// Regularised training objective of a model on a dataset.
pub fn model_loss(model: &LogisticModel, ds: &Dataset) -> Result<f64> {
    let phi = polynomial_expand(model.standardizer.transform(ds.x.view())?.view(), &model.polynomial)?;
    Ok(loss_and_gradient(&phi, &ds.y, &model.weights, model.config.l2).0)
}

/// Train and test index sets, each sorted. Stratified splits put
/// `round(ratio · n_c)` instances of every class `c` in the training side.
pub fn split_indices(
    labels: &[usize],
    n_classes: usize,
    ratio: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        (0..n_classes)
            .map(|c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
            .collect()
    } else {
        vec![(0..labels.len()).collect()]
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (g, mut members) in groups.into_iter().enumerate() {
        let k = (ratio * members.len() as f64).round() as usize;
        if k == 0 || k == members.len() {
            let what = if stratified {
                format!("class {g}")
            } else {
                "dataset".into()
            };
            return Err(Error::InvalidDataset(format!(
                "{what} with {} instances cannot be split at ratio {ratio}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn train_test_split(ds: &Dataset, ratio: f64, seed: u64, stratified: bool) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(&ds.y, ds.n_classes, ratio, seed, stratified)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

pub fn accuracy(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty label set".into()));
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// `m[t][p]` counts instances of true class `t` predicted as `p`.
pub fn confusion_matrix(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    let mut m = vec![vec![0; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::InvalidDataset(format!("label outside 0..{n_classes}")));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Maps class names onto `0..C` in sorted order.
pub fn encode_labels(names: &[String]) -> (Vec<usize>, Vec<String>) {
    let classes: Vec<String> = names.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let ids = names
        .iter()
        .map(|n| classes.binary_search(n).expect("name is in its own class set"))
        .collect();
    (ids, classes)
}

/// Row sums of a probability matrix, for callers checking normalisation.
pub fn row_sums(p: &Array2<f64>) -> Array1<f64> {
    p.sum_axis(Axis(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn expansion_examples() {
        let map = PolynomialMap::new(2, 2, true).unwrap();
        let out = polynomial_expand(array![[2.0, 3.0]].view(), &map).unwrap();
        assert_eq!(out.row(0).to_vec(), vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);

        let id = PolynomialMap::new(3, 1, false).unwrap();
        let x = array![[1.0, -2.0, 0.5]];
        assert_eq!(polynomial_expand(x.view(), &id).unwrap(), x);

        let cubic = PolynomialMap::new(4, 3, true).unwrap();
        let z = polynomial_expand(Array2::zeros((1, 4)).view(), &cubic).unwrap();
        assert_eq!(z[[0, 0]], 1.0);
        assert!(z.iter().skip(1).all(|&v| v == 0.0));
        // C(4 + 3, 3) monomials of degree ≤ 3 in 4 variables.
        assert_eq!(cubic.output_dim(), 35);

        assert!(polynomial_expand(array![[1.0]].view(), &map).is_err());
        assert!(PolynomialMap::new(2, 0, true).is_err());
    }

    #[test]
    fn exponents_of_terms() {
        let map = PolynomialMap::new(2, 3, false).unwrap();
        let all: BTreeSet<Vec<u32>> = (0..map.output_dim()).map(|t| map.exponents(t)).collect();
        assert_eq!(all.len(), map.output_dim());
        assert!(all.contains(&vec![2, 1]));
    }

    fn one_d(xs: &[f64], ys: &[usize]) -> Dataset {
        Dataset::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(), ys.to_vec(), 2).unwrap()
    }

    #[test]
    fn separable_one_d() {
        let ds = one_d(&[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0], &[0, 0, 0, 1, 1, 1]);
        let map = PolynomialMap::new(1, 1, true).unwrap();
        let model = train_logistic(&ds, &map, &TrainConfig::default()).unwrap();
        let pred = predict(&model, ds.x().view()).unwrap();
        assert_eq!(accuracy(ds.y(), &pred.labels).unwrap(), 1.0);
        for s in row_sums(&pred.probabilities) {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    fn xor() -> Dataset {
        Dataset::from_rows(
            &[vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn xor_needs_degree_two() {
        let ds = xor();
        let cfg = TrainConfig::default();
        let quad = train_logistic(&ds, &PolynomialMap::new(2, 2, true).unwrap(), &cfg).unwrap();
        let acc = accuracy(ds.y(), &predict(&quad, ds.x().view()).unwrap().labels).unwrap();
        assert_eq!(acc, 1.0);
        let lin = train_logistic(&ds, &PolynomialMap::new(2, 1, true).unwrap(), &cfg).unwrap();
        let acc = accuracy(ds.y(), &predict(&lin, ds.x().view()).unwrap().labels).unwrap();
        assert!(acc <= 0.75);
    }

    #[test]
    fn loss_never_increases() {
        let ds = xor();
        let model = train_logistic(&ds, &PolynomialMap::new(2, 2, true).unwrap(), &TrainConfig::default()).unwrap();
        for w in model.summary.loss_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seeded_rng(3);
        let phi = Array2::from_shape_fn((6, 4), |_| rng.random_range(-1.0..1.0));
        let w = Array2::from_shape_fn((3, 4), |_| rng.random_range(-1.0..1.0));
        let y = vec![0, 1, 2, 1, 0, 2];
        let (_, g) = loss_and_gradient(&phi, &y, &w, 0.1);
        let h = 1e-6;
        for idx in [(0, 0), (1, 2), (2, 3)] {
            let mut up = w.clone();
            up[idx] += h;
            let mut down = w.clone();
            down[idx] -= h;
            let fd = (loss_and_gradient(&phi, &y, &up, 0.1).0 - loss_and_gradient(&phi, &y, &down, 0.1).0) / (2.0 * h);
            assert!(
                (fd - g[idx]).abs() <= 1e-5 * fd.abs().max(1e-3),
                "{idx:?}: {fd} vs {}",
                g[idx]
            );
        }
    }

    #[test]
    fn empty_class_and_non_finite_rejected() {
        let ds = one_d(&[0.0, 1.0], &[0, 0]);
        let map = PolynomialMap::new(1, 1, true).unwrap();
        assert!(train_logistic(&ds, &map, &TrainConfig::default()).is_err());
        let bad = one_d(&[0.0, f64::NAN], &[0, 1]);
        assert!(train_logistic(&bad, &map, &TrainConfig::default()).is_err());
    }

    #[test]
    fn split_examples() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let (tr, te) = split_indices(&labels, 2, 0.8, 1, true).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        assert_eq!(split_indices(&labels, 2, 0.8, 1, true).unwrap(), (tr, te));

        let small = [0, 0, 1, 1];
        let (tr, te) = split_indices(&small, 2, 0.5, 4, true).unwrap();
        assert_eq!(tr.iter().filter(|&&i| small[i] == 0).count(), 1);
        assert_eq!(te.iter().filter(|&&i| small[i] == 1).count(), 1);

        assert!(split_indices(&[0, 1], 2, 0.8, 0, true).is_err());
        assert!(split_indices(&small, 2, 1.0, 0, false).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert!(accuracy(&[0], &[0, 1]).is_err());
        assert_eq!(
            confusion_matrix(&[0, 1, 1], &[0, 0, 1], 2).unwrap(),
            vec![vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn label_encoding_is_sorted() {
        let names: Vec<String> = ["torus", "circle", "torus"].iter().map(|s| s.to_string()).collect();
        let (ids, classes) = encode_labels(&names);
        assert_eq!(classes, vec!["circle", "torus"]);
        assert_eq!(ids, vec![1, 0, 1]);
    }
}
