//! Training data, linear multiclass classifiers and every quantity used to
//! judge them: scores, pairwise margins, half-space distances, the
//! generalized (Crammer–Singer) hinge loss, the risk count and the worst-pair
//! objective.
//!
//! Class labels are 1-based everywhere in the public API: a dataset with `K`
//! classes uses labels `1..=K`, and class pairs `(r, s)` are written with
//! `r < s` in lexicographic order.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg;

/// `‖w_r − w_s‖` below this is treated as a degenerate pair.
pub const ZERO_NORM_TOL: f64 = 1e-12;

/// Samples whose unit-margin value falls short of 1 by no more than this are
/// treated as lying on the margin boundary (and therefore not at risk).
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Labeled samples `(x_i, y_i) ∈ R^N × {1..K}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    n_features: usize,
    n_classes: usize,
}

impl Dataset {
    /// Builds a dataset from per-sample feature rows and 1-based labels.
    pub fn new(samples: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("dataset has zero samples"));
        }
        if samples.len() != labels.len() {
            return Err(Error::input(format!(
                "{} feature rows but {} labels",
                samples.len(),
                labels.len()
            )));
        }
        let n_features = samples[0].len();
        if n_features == 0 {
            return Err(Error::input("samples have zero features"));
        }
        let mut features = Vec::with_capacity(samples.len() * n_features);
        for (i, row) in samples.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::input(format!(
                    "sample {} has {} features, expected {n_features}",
                    i + 1,
                    row.len()
                )));
            }
            ensure_finite(row, &format!("sample {}", i + 1))?;
            features.extend_from_slice(row);
        }
        Self::from_flat(features, labels, n_features, n_classes)
    }

    /// Builds a dataset from a row-major `M × N` feature buffer.
    pub fn from_flat(
        features: Vec<f64>,
        labels: Vec<usize>,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::input(format!("need at least 2 classes, got {n_classes}")));
        }
        if labels.is_empty() {
            return Err(Error::input("dataset has zero samples"));
        }
        if n_features == 0 || features.len() != labels.len() * n_features {
            return Err(Error::input(format!(
                "feature buffer of length {} does not hold {} samples of dimension {n_features}",
                features.len(),
                labels.len()
            )));
        }
        ensure_finite(&features, "features")?;
        if let Some(i) = labels.iter().position(|&y| y == 0 || y > n_classes) {
            return Err(Error::input(format!(
                "sample {} has label {} outside 1..={n_classes}",
                i + 1,
                labels[i]
            )));
        }
        Ok(Dataset {
            features,
            labels,
            n_features,
            n_classes,
        })
    }

    /// Sample count `M`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension `N`.
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Class count `K`.
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Features of sample `i` (0-based sample index).
    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    /// 1-based label of sample `i` (0-based sample index).
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Row-major feature buffer.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> + '_ {
        self.features
            .chunks_exact(self.n_features)
            .zip(self.labels.iter().copied())
    }

    /// 0-based indices of the samples carrying label `j` (the set `D_j`).
    pub fn class_indices(&self, j: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == j).collect()
    }

    /// Number of samples per class, indexed by `label - 1`.
    pub fn label_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &y in &self.labels {
            counts[y - 1] += 1;
        }
        counts
    }

    /// `max_i ‖x_i‖`.
    pub fn max_sample_norm(&self) -> f64 {
        self.features
            .chunks_exact(self.n_features)
            .map(linalg::norm)
            .fold(0.0, f64::max)
    }
}

/// Lexicographically ordered class pairs `(1,2), (1,3), …, (K−1,K)`.
pub fn class_pairs(n_classes: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n_classes * n_classes.saturating_sub(1) / 2);
    for r in 1..=n_classes {
        for s in r + 1..=n_classes {
            pairs.push((r, s));
        }
    }
    pairs
}

/// Position of the pair `(r, s)`, `r < s`, in [`class_pairs`] order.
pub fn pair_index(r: usize, s: usize, n_classes: usize) -> usize {
    debug_assert!(1 <= r && r < s && s <= n_classes);
    // Pairs starting with 1..r-1 come first.
    let before: usize = (1..r).map(|q| n_classes - q).sum();
    before + (s - r - 1)
}

/// The stacked classifier parameters `p = (w_j, b_j)_{j=1..K}`.
///
/// Stored flat as `K` consecutive blocks of `N + 1` reals: the weight vector
/// followed by its offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    n_features: usize,
    n_classes: usize,
    values: Vec<f64>,
}

impl ClassifierParams {
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        ClassifierParams {
            n_features,
            n_classes,
            values: vec![0.0; (n_features + 1) * n_classes],
        }
    }

    /// Assembles `p` from `K` weight vectors and `K` offsets.
    pub fn from_parts(weights: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        let n_classes = weights.len();
        if n_classes < 2 {
            return Err(Error::input("a classifier needs at least 2 classes"));
        }
        if offsets.len() != n_classes {
            return Err(Error::input(format!(
                "{n_classes} weight vectors but {} offsets",
                offsets.len()
            )));
        }
        let n_features = weights[0].len();
        let mut values = Vec::with_capacity((n_features + 1) * n_classes);
        for (j, w) in weights.iter().enumerate() {
            if w.len() != n_features {
                return Err(Error::input(format!(
                    "weight vector {} has length {}, expected {n_features}",
                    j + 1,
                    w.len()
                )));
            }
            values.extend_from_slice(w);
            values.push(offsets[j]);
        }
        ensure_finite(&values, "classifier parameters")?;
        Ok(ClassifierParams {
            n_features,
            n_classes,
            values,
        })
    }

    /// Wraps a flat `(N+1)K` buffer of `(w_j, b_j)` blocks.
    pub fn from_flat(n_features: usize, n_classes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != (n_features + 1) * n_classes {
            return Err(Error::input(format!(
                "parameter vector of length {} does not match (N+1)K = {}",
                values.len(),
                (n_features + 1) * n_classes
            )));
        }
        Ok(ClassifierParams {
            n_features,
            n_classes,
            values,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Flattened dimension `(N+1)K`.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    fn block(&self, j: usize) -> &[f64] {
        let stride = self.n_features + 1;
        &self.values[(j - 1) * stride..j * stride]
    }

    /// Weight vector of class `j` (1-based).
    pub fn w(&self, j: usize) -> &[f64] {
        &self.block(j)[..self.n_features]
    }

    pub fn w_mut(&mut self, j: usize) -> &mut [f64] {
        let stride = self.n_features + 1;
        &mut self.values[(j - 1) * stride..(j - 1) * stride + self.n_features]
    }

    /// Offset of class `j` (1-based).
    pub fn b(&self, j: usize) -> f64 {
        self.block(j)[self.n_features]
    }

    pub fn set_b(&mut self, j: usize, value: f64) {
        let stride = self.n_features + 1;
        self.values[(j - 1) * stride + self.n_features] = value;
    }

    pub fn weights(&self) -> Vec<Vec<f64>> {
        (1..=self.n_classes).map(|j| self.w(j).to_vec()).collect()
    }

    pub fn offsets(&self) -> Vec<f64> {
        (1..=self.n_classes).map(|j| self.b(j)).collect()
    }

    /// `w_j ᵀ x + b_j`.
    pub fn score(&self, j: usize, x: &[f64]) -> f64 {
        linalg::dot(self.w(j), x) + self.b(j)
    }

    /// `ω_rs = w_r − w_s`.
    pub fn omega(&self, r: usize, s: usize) -> Vec<f64> {
        self.w(r).iter().zip(self.w(s)).map(|(a, b)| a - b).collect()
    }

    /// `β_rs = b_r − b_s`.
    pub fn beta(&self, r: usize, s: usize) -> f64 {
        self.b(r) - self.b(s)
    }

    /// `ω_rsᵀ x + β_rs`, the pair-(r, s) decision value.
    pub fn pair_value(&self, r: usize, s: usize, x: &[f64]) -> f64 {
        let wr = self.w(r);
        let ws = self.w(s);
        let mut acc = 0.0;
        for k in 0..self.n_features {
            acc += (wr[k] - ws[k]) * x[k];
        }
        acc + self.beta(r, s)
    }

    pub fn omega_norm(&self, r: usize, s: usize) -> f64 {
        self.w(r)
            .iter()
            .zip(self.w(s))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn check_label(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n_classes {
            return Err(Error::input(format!(
                "label {j} outside 1..={}",
                self.n_classes
            )));
        }
        Ok(())
    }

    fn check_pair(&self, r: usize, s: usize) -> Result<()> {
        self.check_label(r)?;
        self.check_label(s)?;
        if r == s {
            return Err(Error::input(format!("pair ({r}, {s}) must have distinct classes")));
        }
        Ok(())
    }

    fn check_dims(&self, d: &Dataset) -> Result<()> {
        if d.n_features() != self.n_features || d.n_classes() != self.n_classes {
            return Err(Error::input(format!(
                "classifier is N={}, K={} but dataset is N={}, K={}",
                self.n_features,
                self.n_classes,
                d.n_features(),
                d.n_classes()
            )));
        }
        Ok(())
    }
}

/// The classification rule: the smallest label attaining `max_j w_jᵀx + b_j`.
pub fn classify(p: &ClassifierParams, x: &[f64]) -> Result<usize> {
    if x.len() != p.n_features() {
        return Err(Error::input(format!(
            "input has {} features, classifier expects {}",
            x.len(),
            p.n_features()
        )));
    }
    let mut best = 1;
    let mut best_score = p.score(1, x);
    for j in 2..=p.n_classes() {
        let sc = p.score(j, x);
        if sc > best_score {
            best = j;
            best_score = sc;
        }
    }
    Ok(best)
}

/// `1 / ‖w_r − w_s‖`, or `+∞` when the pair is degenerate.
pub fn pairwise_margin(p: &ClassifierParams, r: usize, s: usize) -> Result<f64> {
    p.check_pair(r, s)?;
    Ok(margin_from_norm(p.omega_norm(r, s), ZERO_NORM_TOL))
}

fn margin_from_norm(norm: f64, zero_tol: f64) -> f64 {
    if norm < zero_tol {
        f64::INFINITY
    } else {
        1.0 / norm
    }
}

/// Euclidean distance from `x` to the half-space `{ω_rsᵀx + β_rs ≥ 1}`.
pub fn halfspace_distance(p: &ClassifierParams, r: usize, s: usize, x: &[f64]) -> Result<f64> {
    p.check_pair(r, s)?;
    if x.len() != p.n_features() {
        return Err(Error::input(format!(
            "input has {} features, classifier expects {}",
            x.len(),
            p.n_features()
        )));
    }
    let norm = p.omega_norm(r, s);
    if norm < ZERO_NORM_TOL {
        return Err(Error::DegeneratePair { r, s });
    }
    let value = p.pair_value(r, s, x);
    Ok(if value >= 1.0 { 0.0 } else { (1.0 - value) / norm })
}

/// Tolerances used by [`evaluate_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// Pairs with `‖ω_rs‖` below this report an infinite margin.
    pub zero_norm_tol: f64,
    /// A sample counts towards the risk when some pair value is below
    /// `1 − boundary_tol`. Zero gives the literal strict inequality.
    pub boundary_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            zero_norm_tol: ZERO_NORM_TOL,
            boundary_tol: BOUNDARY_TOL,
        }
    }
}

impl EvalOptions {
    /// Exact set-membership semantics: no boundary tolerance.
    pub fn strict() -> Self {
        EvalOptions {
            boundary_tol: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMargin {
    pub r: usize,
    pub s: usize,
    pub margin: f64,
}

/// Every evaluation quantity of a classifier on a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    /// `Φ_D(p)`.
    pub hinge_loss: f64,
    /// `δ̃_p(i)` per sample, in sample order.
    pub per_sample_deviation: Vec<f64>,
    /// One entry per pair `r < s`, lexicographic.
    pub pairwise_margins: Vec<PairMargin>,
    /// `Ψ(p) = max_{r<s} ‖w_r − w_s‖`.
    pub worst_pair_objective: f64,
    /// Samples lying strictly inside some unit-margin band against a wrong class.
    pub risk_count: usize,
}

impl EvaluationReport {
    /// The pair with the smallest margin (first in lexicographic order on ties).
    pub fn smallest_margin(&self) -> PairMargin {
        let mut best = self.pairwise_margins[0];
        for pm in &self.pairwise_margins[1..] {
            if pm.margin < best.margin {
                best = *pm;
            }
        }
        best
    }

    pub fn margin(&self, r: usize, s: usize) -> Option<f64> {
        self.pairwise_margins
            .iter()
            .find(|pm| pm.r == r && pm.s == s)
            .map(|pm| pm.margin)
    }
}

/// Per-sample hinge term `max{0, max_{s≠y}[1 − (ω_{ys}ᵀx + β_{ys})]}`.
fn sample_deviation(p: &ClassifierParams, x: &[f64], y: usize) -> f64 {
    let mut worst = 0.0f64;
    for s in 1..=p.n_classes() {
        if s != y {
            worst = worst.max(1.0 - p.pair_value(y, s, x));
        }
    }
    worst
}

/// Evaluates `p` on `d` with the default tolerances.
pub fn evaluate(p: &ClassifierParams, d: &Dataset) -> Result<EvaluationReport> {
    evaluate_with(p, d, &EvalOptions::default())
}

pub fn evaluate_with(
    p: &ClassifierParams,
    d: &Dataset,
    opts: &EvalOptions,
) -> Result<EvaluationReport> {
    p.check_dims(d)?;
    let per_sample_deviation: Vec<f64> =
        d.iter().map(|(x, y)| sample_deviation(p, x, y)).collect();
    // Fixed ascending-i summation order.
    let hinge_loss = per_sample_deviation.iter().sum();
    let risk_count = per_sample_deviation
        .iter()
        .filter(|&&dev| dev > opts.boundary_tol)
        .count();
    let pairwise_margins = class_pairs(p.n_classes())
        .into_iter()
        .map(|(r, s)| PairMargin {
            r,
            s,
            margin: margin_from_norm(p.omega_norm(r, s), opts.zero_norm_tol),
        })
        .collect();
    Ok(EvaluationReport {
        hinge_loss,
        per_sample_deviation,
        pairwise_margins,
        worst_pair_objective: worst_pair_objective(p),
        risk_count,
    })
}

/// `Φ_D(p)` alone.
pub fn hinge_loss(p: &ClassifierParams, d: &Dataset) -> Result<f64> {
    p.check_dims(d)?;
    Ok(d.iter().map(|(x, y)| sample_deviation(p, x, y)).sum())
}

/// `Ψ(p) = max_{r<s} ‖w_r − w_s‖`.
pub fn worst_pair_objective(p: &ClassifierParams) -> f64 {
    class_pairs(p.n_classes())
        .into_iter()
        .map(|(r, s)| p.omega_norm(r, s))
        .fold(0.0, f64::max)
}

/// True iff every sample of class `r` satisfies `ω_rsᵀx + β_rs ≥ 1` against
/// every other class `s`, i.e. iff `Φ_D(p) = 0`.
pub fn check_margin_witness(p: &ClassifierParams, d: &Dataset) -> Result<bool> {
    p.check_dims(d)?;
    Ok(d.iter().all(|(x, y)| {
        (1..=p.n_classes()).all(|s| s == y || p.pair_value(y, s, x) >= 1.0)
    }))
}
