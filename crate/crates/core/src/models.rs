//! Classifiers implemented from first principles.
//!
//! * multinomial logistic regression trained by full-batch gradient descent
//!   on mean cross-entropy with an L2 penalty;
//! * a random forest of CART trees (Gini, bootstrap rows, `⌈√D⌉` features
//!   redrawn per split);
//! * second-order gradient-boosted trees, `K` regression trees per round fit
//!   to softmax cross-entropy gradients and hessians.
//!
//! Both tree learners share one exact greedy split search: thresholds are
//! midpoints between distinct consecutive values, a sample goes left when
//! `x <= threshold`, and ties go to the lowest feature index and then the
//! lowest threshold.

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{LabeledDataset, Matrix};
use crate::rng::{derive_seed, seeded_rng};

/// Version of the model JSON document layout.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest entry; the lowest index wins exact ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Anything that turns a feature vector into class probabilities.
pub trait Classifier {
    fn n_classes(&self) -> usize;
    fn n_features(&self) -> usize;
    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>>;

    fn predict_label(&self, features: &[f64]) -> Result<usize> {
        self.predict_proba(features).map(|p| argmax(&p))
    }

    fn predict_proba_batch(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        (0..x.rows()).map(|r| self.predict_proba(x.row(r))).collect()
    }

    fn predict_labels(&self, x: &Matrix) -> Result<Vec<usize>> {
        (0..x.rows()).map(|r| self.predict_label(x.row(r))).collect()
    }
}

fn check_dim(expected: usize, features: &[f64]) -> Result<()> {
    if features.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: features.len() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { learning_rate: 0.1, max_iters: 500, tolerance: 1e-6, l2: 0.0 }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(self.tolerance >= 0.0) || !(self.l2 >= 0.0) {
            return Err(Error::InvalidParameter("logistic: learning_rate must be > 0, tolerance and l2 >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub params: LogisticParams,
    /// `K × D`, one row per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub class_names: Vec<String>,
    /// Training loss after every accepted iteration, starting with the initial loss.
    pub loss_history: Vec<f64>,
}

impl LogisticModel {
    /// All-zero parameters: predicts the uniform distribution.
    pub fn zeros(n_features: usize, class_names: Vec<String>, params: LogisticParams) -> Self {
        let k = class_names.len();
        Self {
            params,
            weights: vec![vec![0.0; n_features]; k],
            bias: vec![0.0; k],
            class_names,
            loss_history: Vec::new(),
        }
    }

    fn from_theta(
        theta: &[f64],
        d: usize,
        class_names: Vec<String>,
        params: LogisticParams,
        loss_history: Vec<f64>,
    ) -> Self {
        let k = class_names.len();
        Self {
            params,
            weights: (0..k).map(|c| theta[c * d..(c + 1) * d].to_vec()).collect(),
            bias: theta[k * d..].to_vec(),
            class_names,
            loss_history,
        }
    }
}

impl Classifier for LogisticModel {
    fn n_classes(&self) -> usize {
        self.bias.len()
    }

    fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features(), features)?;
        let logits: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(features).map(|(wi, xi)| wi * xi).sum::<f64>())
            .collect();
        Ok(softmax(&logits))
    }
}

/// Mean cross-entropy plus `l2/2·‖W‖²` and its gradient.
///
/// `theta` packs the `K × D` weights row-major followed by the `K` biases;
/// the gradient uses the same layout. The bias is not penalized.
pub fn logistic_loss_and_grad(
    theta: &[f64],
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    l2: f64,
) -> Result<(f64, Vec<f64>)> {
    let (n, d, k) = (x.rows(), x.cols(), n_classes);
    if theta.len() != k * d + k {
        return Err(Error::DimensionMismatch { expected: k * d + k, found: theta.len() });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("logistic loss needs at least one sample".into()));
    }
    let (w, b) = theta.split_at(k * d);
    let mut grad = vec![0.0; theta.len()];
    let mut loss = 0.0;
    let mut logits = vec![0.0; k];
    for (r, &label) in y.iter().enumerate() {
        if label >= k {
            return Err(Error::LabelOutOfRange { label, n_classes: k });
        }
        let xr = x.row(r);
        for c in 0..k {
            logits[c] = b[c] + w[c * d..(c + 1) * d].iter().zip(xr).map(|(a, v)| a * v).sum::<f64>();
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_total = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
        loss += log_total - logits[label];
        for c in 0..k {
            let residual = (logits[c] - log_total).exp() - if c == label { 1.0 } else { 0.0 };
            for (g, v) in grad[c * d..(c + 1) * d].iter_mut().zip(xr) {
                *g += residual * v;
            }
            grad[k * d + c] += residual;
        }
    }
    let inv_n = 1.0 / n as f64;
    loss *= inv_n;
    for g in &mut grad {
        *g *= inv_n;
    }
    if l2 > 0.0 {
        loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
        for (g, v) in grad[..k * d].iter_mut().zip(w) {
            *g += l2 * v;
        }
    }
    Ok((loss, grad))
}

/// Full-batch gradient descent from zero weights.
///
/// A step that would raise the loss is rejected and the step size halved,
/// so the recorded loss is non-increasing across accepted iterations.
/// Stops after `max_iters` iterations or once an accepted step improves the
/// loss by less than `tolerance`.
pub fn train_logistic(dataset: &LabeledDataset, params: &LogisticParams) -> Result<LogisticModel> {
    params.validate()?;
    let (x, y, k, d) = (dataset.features(), dataset.labels(), dataset.n_classes(), dataset.n_features());
    let mut theta = vec![0.0; k * d + k];
    let (mut loss, mut grad) = logistic_loss_and_grad(&theta, x, y, k, params.l2)?;
    let mut history = vec![loss];
    let mut lr = params.learning_rate;
    for _ in 0..params.max_iters {
        let candidate: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - lr * g).collect();
        let (new_loss, new_grad) = logistic_loss_and_grad(&candidate, x, y, k, params.l2)?;
        if !new_loss.is_finite() {
            return Err(Error::Diverged(format!("logistic loss became {new_loss} at learning rate {lr}")));
        }
        if new_loss > loss {
            lr *= 0.5;
            continue;
        }
        let improvement = loss - new_loss;
        theta = candidate;
        loss = new_loss;
        grad = new_grad;
        history.push(loss);
        if improvement < params.tolerance {
            break;
        }
    }
    Ok(LogisticModel::from_theta(&theta, d, dataset.class_names().to_vec(), params.clone(), history))
}

// ---------------------------------------------------------------------------
// Trees and split search
// ---------------------------------------------------------------------------

/// Tree node stored in an arena; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: Vec<f64> },
}

/// Binary decision tree. Serialized as parallel arrays, with `feature = -1`
/// marking leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlatTree", try_from = "FlatTree")]
pub struct Tree {
    nodes: Vec<Node>,
}

#[derive(Serialize, Deserialize)]
struct FlatTree {
    feature: Vec<i64>,
    threshold: Vec<f64>,
    left: Vec<usize>,
    right: Vec<usize>,
    value: Vec<Vec<f64>>,
}

impl From<Tree> for FlatTree {
    fn from(tree: Tree) -> Self {
        let n = tree.nodes.len();
        let mut flat = FlatTree {
            feature: Vec::with_capacity(n),
            threshold: Vec::with_capacity(n),
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            value: Vec::with_capacity(n),
        };
        for node in tree.nodes {
            match node {
                Node::Split { feature, threshold, left, right } => {
                    flat.feature.push(feature as i64);
                    flat.threshold.push(threshold);
                    flat.left.push(left);
                    flat.right.push(right);
                    flat.value.push(Vec::new());
                }
                Node::Leaf { value } => {
                    flat.feature.push(-1);
                    flat.threshold.push(0.0);
                    flat.left.push(0);
                    flat.right.push(0);
                    flat.value.push(value);
                }
            }
        }
        flat
    }
}

impl TryFrom<FlatTree> for Tree {
    type Error = String;

    fn try_from(flat: FlatTree) -> std::result::Result<Self, String> {
        let n = flat.feature.len();
        if [flat.threshold.len(), flat.left.len(), flat.right.len(), flat.value.len()].iter().any(|&l| l != n) {
            return Err("tree arrays have different lengths".into());
        }
        if n == 0 {
            return Err("tree has no nodes".into());
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            if flat.feature[i] < 0 {
                nodes.push(Node::Leaf { value: flat.value[i].clone() });
            } else {
                let (left, right) = (flat.left[i], flat.right[i]);
                // children always follow their parent, which also rules out cycles
                if left <= i || right <= i || left >= n || right >= n {
                    return Err(format!("node {i} has invalid children"));
                }
                nodes.push(Node::Split {
                    feature: flat.feature[i] as usize,
                    threshold: flat.threshold[i],
                    left,
                    right,
                });
            }
        }
        Ok(Tree { nodes })
    }
}

impl Tree {
    pub fn leaf(value: Vec<f64>) -> Self {
        Self { nodes: vec![Node::Leaf { value }] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Largest feature index used by any split, if any.
    fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf_value(&self, features: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if features[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// A chosen split: samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Threshold between two consecutive distinct values `a < b`.
///
/// The midpoint, unless rounding pushes it onto `b`, in which case `a`;
/// either way exactly the values `<= a` go left.
pub fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b || m < a || !m.is_finite() {
        a
    } else {
        m
    }
}

/// Gini impurity `1 − Σ pᵢ²` of a class-count vector.
pub fn gini_impurity(counts: &[u64]) -> Result<f64> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::InvalidParameter("gini impurity of an empty node".into()));
    }
    let n = n as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

/// Impurity decrease `G(parent) − n_L/n·G(L) − n_R/n·G(R)` of a split.
///
/// Evaluated as one integer numerator over one integer denominator, so the
/// sign is exact and equal decreases compare equal.
pub fn gini_gain(left: &[u64], right: &[u64]) -> f64 {
    let sq = |c: &[u64]| c.iter().map(|&v| (v as i128) * (v as i128)).sum::<i128>();
    let nl: i128 = left.iter().map(|&v| v as i128).sum();
    let nr: i128 = right.iter().map(|&v| v as i128).sum();
    let np = nl + nr;
    if nl == 0 || nr == 0 {
        return 0.0;
    }
    let (sl, sr) = (sq(left), sq(right));
    let sp: i128 = left.iter().zip(right).map(|(&a, &b)| (a as i128 + b as i128).pow(2)).sum();
    let numerator = sl * nr * np + sr * nl * np - sp * nl * nr;
    numerator as f64 / (nl * nr * np * np) as f64
}

/// Second-order split gain
/// `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − (G_L+G_R)²/(H_L+H_R+λ)] − γ`.
pub fn gbt_split_gain(g_left: f64, h_left: f64, g_right: f64, h_right: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| if h + lambda > 0.0 { g * g / (h + lambda) } else { 0.0 };
    0.5 * (score(g_left, h_left) + score(g_right, h_right) - score(g_left + g_right, h_left + h_right)) - gamma
}

/// Optimal leaf weight `−G/(H+λ)` before shrinkage.
pub fn gbt_leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    if h + lambda > 0.0 {
        -g / (h + lambda)
    } else {
        0.0
    }
}

/// What a split is scored against.
#[derive(Debug, Clone, Copy)]
pub enum SplitCriterion<'a> {
    /// Gini impurity decrease over class labels.
    Gini { labels: &'a [usize], n_classes: usize, min_samples_leaf: usize },
    /// Second-order boosting gain over per-sample gradients and hessians.
    Newton { grad: &'a [f64], hess: &'a [f64], lambda: f64, gamma: f64, min_child_weight: f64 },
}

/// Sufficient statistics of a set of samples under a criterion.
#[derive(Debug, Clone, PartialEq)]
enum Stats {
    Counts(Vec<u64>),
    Newton { g: f64, h: f64 },
}

impl SplitCriterion<'_> {
    fn empty(&self) -> Stats {
        match self {
            Self::Gini { n_classes, .. } => Stats::Counts(vec![0; *n_classes]),
            Self::Newton { .. } => Stats::Newton { g: 0.0, h: 0.0 },
        }
    }

    fn add(&self, stats: &mut Stats, i: usize) {
        match (self, stats) {
            (Self::Gini { labels, .. }, Stats::Counts(c)) => c[labels[i]] += 1,
            (Self::Newton { grad, hess, .. }, Stats::Newton { g, h }) => {
                *g += grad[i];
                *h += hess[i];
            }
            _ => unreachable!("stats always come from the same criterion"),
        }
    }

    fn collect(&self, samples: &[usize]) -> Stats {
        let mut s = self.empty();
        for &i in samples {
            self.add(&mut s, i);
        }
        s
    }

    /// Gain of splitting `parent` into `left` and the remainder, if admissible.
    fn gain(&self, parent: &Stats, left: &Stats, n_left: usize, n_right: usize) -> Option<f64> {
        match (self, parent, left) {
            (Self::Gini { min_samples_leaf, .. }, Stats::Counts(p), Stats::Counts(l)) => {
                if n_left < (*min_samples_leaf).max(1) || n_right < (*min_samples_leaf).max(1) {
                    return None;
                }
                let r: Vec<u64> = p.iter().zip(l).map(|(a, b)| a - b).collect();
                Some(gini_gain(l, &r))
            }
            (
                Self::Newton { lambda, gamma, min_child_weight, .. },
                Stats::Newton { g: gp, h: hp },
                Stats::Newton { g: gl, h: hl },
            ) => {
                let (gr, hr) = (gp - gl, hp - hl);
                if *hl < *min_child_weight || hr < *min_child_weight {
                    return None;
                }
                Some(gbt_split_gain(*gl, *hl, gr, hr, *lambda, *gamma))
            }
            _ => unreachable!("stats always come from the same criterion"),
        }
    }
}

/// Scan one feature whose samples are already sorted by value; returns the
/// best `(threshold, gain)` with positive gain, lowest threshold on ties.
fn scan_sorted(
    x: &Matrix,
    feature: usize,
    sorted: &[usize],
    parent: &Stats,
    criterion: &SplitCriterion,
) -> Option<(f64, f64)> {
    let n = sorted.len();
    let mut left = criterion.empty();
    let mut best: Option<(f64, f64)> = None;
    for pos in 0..n.saturating_sub(1) {
        criterion.add(&mut left, sorted[pos]);
        let (a, b) = (x.get(sorted[pos], feature), x.get(sorted[pos + 1], feature));
        if !(a < b) {
            continue;
        }
        if let Some(gain) = criterion.gain(parent, &left, pos + 1, n - pos - 1) {
            if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((midpoint(a, b), gain));
            }
        }
    }
    best
}

fn sort_by_feature(x: &Matrix, feature: usize, samples: &mut [usize]) {
    samples.sort_by(|&a, &b| x.get(a, feature).total_cmp(&x.get(b, feature)).then(a.cmp(&b)));
}

/// Pick the best of per-feature results, candidates in ascending feature order.
fn pick_best(candidates: impl Iterator<Item = (usize, Option<(f64, f64)>)>) -> Option<Split> {
    let mut best: Option<Split> = None;
    for (feature, found) in candidates {
        if let Some((threshold, gain)) = found {
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Split { feature, threshold, gain });
            }
        }
    }
    best
}

/// Exact greedy split search over `features` for the rows in `samples`.
///
/// Returns `None` when fewer than two samples are given or no admissible
/// split has positive gain.
pub fn best_split(x: &Matrix, samples: &[usize], features: &[usize], criterion: &SplitCriterion) -> Option<Split> {
    if samples.len() < 2 {
        return None;
    }
    let parent = criterion.collect(samples);
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut sorted = samples.to_vec();
    pick_best(features.into_iter().map(|f| {
        sort_by_feature(x, f, &mut sorted);
        (f, scan_sorted(x, f, &sorted, &parent, criterion))
    }))
}

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features drawn per split; `⌈√D⌉` when unset.
    pub features_per_split: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 12, min_samples_leaf: 1, features_per_split: None }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.min_samples_leaf == 0 || self.features_per_split == Some(0) {
            return Err(Error::InvalidParameter(
                "forest: n_trees, min_samples_leaf and features_per_split must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn resolved_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub seed: u64,
    /// Seed of each tree's stream, derived from `(seed, tree index)`.
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub class_names: Vec<String>,
}

impl Classifier for ForestModel {
    fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features, features)?;
        let mut acc = vec![0.0; self.n_classes()];
        for tree in &self.trees {
            for (a, v) in acc.iter_mut().zip(tree.leaf_value(features)) {
                *a += v;
            }
        }
        let n = self.trees.len() as f64;
        Ok(acc.into_iter().map(|a| a / n).collect())
    }
}

struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }
}

fn class_distribution(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

#[allow(clippy::too_many_arguments)]
fn grow_gini(
    builder: &mut TreeBuilder,
    x: &Matrix,
    samples: Vec<usize>,
    depth: usize,
    criterion: &SplitCriterion,
    params: &ForestParams,
    mtry: usize,
    rng: &mut crate::rng::Rng,
) -> usize {
    let Stats::Counts(counts) = criterion.collect(&samples) else { unreachable!() };
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= params.max_depth || samples.len() < 2 * params.min_samples_leaf {
        return builder.push(Node::Leaf { value: class_distribution(&counts) });
    }
    let mut candidates = index::sample(rng, x.cols(), mtry).into_vec();
    candidates.sort_unstable();
    let Some(split) = best_split(x, &samples, &candidates, criterion) else {
        return builder.push(Node::Leaf { value: class_distribution(&counts) });
    };
    let (left, right): (Vec<usize>, Vec<usize>) =
        samples.into_iter().partition(|&i| x.get(i, split.feature) <= split.threshold);
    let id = builder.push(Node::Leaf { value: Vec::new() });
    let l = grow_gini(builder, x, left, depth + 1, criterion, params, mtry, rng);
    let r = grow_gini(builder, x, right, depth + 1, criterion, params, mtry, rng);
    builder.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
    id
}

/// Train one CART tree on a bootstrap sample drawn from `tree_seed`'s stream.
fn fit_forest_tree(dataset: &LabeledDataset, params: &ForestParams, tree_seed: u64) -> Tree {
    let x = dataset.features();
    let n = dataset.n_samples();
    let mut rng = seeded_rng(tree_seed);
    let mut bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    bootstrap.sort_unstable();
    let criterion = SplitCriterion::Gini {
        labels: dataset.labels(),
        n_classes: dataset.n_classes(),
        min_samples_leaf: params.min_samples_leaf,
    };
    let mtry = params.resolved_features_per_split(x.cols());
    let mut builder = TreeBuilder { nodes: Vec::new() };
    if x.cols() == 0 {
        let Stats::Counts(counts) = criterion.collect(&bootstrap) else { unreachable!() };
        return Tree::leaf(class_distribution(&counts));
    }
    grow_gini(&mut builder, x, bootstrap, 0, &criterion, params, mtry, &mut rng);
    Tree { nodes: builder.nodes }
}

/// Train a random forest; trees are fit in parallel from per-tree seeds, so
/// the result does not depend on the thread count.
pub fn train_forest(dataset: &LabeledDataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    params.validate()?;
    if dataset.n_samples() == 0 {
        return Err(Error::InvalidParameter("forest: empty training set".into()));
    }
    let tree_seeds: Vec<u64> = (0..params.n_trees as u64).map(|t| derive_seed(seed, &[t])).collect();
    let trees = tree_seeds.par_iter().map(|&s| fit_forest_tree(dataset, params, s)).collect();
    Ok(ForestModel {
        params: params.clone(),
        seed,
        tree_seeds,
        trees,
        n_features: dataset.n_features(),
        class_names: dataset.class_names().to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self { rounds: 100, max_depth: 6, learning_rate: 0.1, lambda: 1.0, gamma: 0.0, min_child_weight: 1.0 }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gbt: learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.lambda >= 0.0) || !(self.gamma >= 0.0) || !(self.min_child_weight >= 0.0) {
            return Err(Error::InvalidParameter("gbt: lambda, gamma and min_child_weight must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub params: GbtParams,
    /// Initial score for every class (zero: uniform start).
    pub base_score: f64,
    /// `rounds × K` trees; tree `k` of a round only scores class `k`.
    pub trees: Vec<Vec<Tree>>,
    pub n_features: usize,
    pub class_names: Vec<String>,
    /// Mean training log loss before the first round and after every round.
    pub train_log_loss: Vec<f64>,
}

impl GbtModel {
    pub fn raw_scores(&self, features: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features, features)?;
        let mut scores = vec![self.base_score; self.class_names.len()];
        for round in &self.trees {
            for tree in round {
                for (s, v) in scores.iter_mut().zip(tree.leaf_value(features)) {
                    *s += v;
                }
            }
        }
        Ok(scores)
    }
}

impl Classifier for GbtModel {
    fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.raw_scores(features).map(|s| softmax(&s))
    }
}

/// Mean cross-entropy of per-sample raw scores.
pub fn mean_log_loss(scores: &[Vec<f64>], labels: &[usize]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(s, &y)| {
            let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            s.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max - s[y]
        })
        .sum();
    total / labels.len() as f64
}

/// Grows one Newton tree from per-feature presorted sample lists; child
/// lists are stable partitions of the parent's, so no node re-sorts.
struct NewtonGrower<'a> {
    x: &'a Matrix,
    criterion: SplitCriterion<'a>,
    params: &'a GbtParams,
    class: usize,
    n_classes: usize,
    nodes: Vec<Node>,
}

impl NewtonGrower<'_> {
    fn leaf(&mut self, stats: &Stats) -> usize {
        let Stats::Newton { g, h } = stats else { unreachable!() };
        let mut value = vec![0.0; self.n_classes];
        value[self.class] = self.params.learning_rate * gbt_leaf_weight(*g, *h, self.params.lambda);
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    /// `members` is ascending; `sorted[f]` holds the same samples ordered by feature `f`.
    fn grow(&mut self, members: Vec<usize>, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let stats = self.criterion.collect(&members);
        if depth >= self.params.max_depth || members.len() < 2 {
            return self.leaf(&stats);
        }
        let split =
            pick_best(sorted.iter().enumerate().map(|(f, s)| (f, scan_sorted(self.x, f, s, &stats, &self.criterion))));
        let Some(split) = split else {
            return self.leaf(&stats);
        };
        let goes_left = |i: &usize| self.x.get(*i, split.feature) <= split.threshold;
        let (left_members, right_members): (Vec<usize>, Vec<usize>) = members.into_iter().partition(goes_left);
        let (left_sorted, right_sorted): (Vec<Vec<usize>>, Vec<Vec<usize>>) =
            sorted.into_iter().map(|s| s.into_iter().partition(goes_left)).unzip();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: Vec::new() });
        let l = self.grow(left_members, left_sorted, depth + 1);
        let r = self.grow(right_members, right_sorted, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left: l, right: r };
        id
    }
}

/// Train softmax gradient-boosted trees from a zero base score.
pub fn train_gbt(dataset: &LabeledDataset, params: &GbtParams) -> Result<GbtModel> {
    params.validate()?;
    let (x, y) = (dataset.features(), dataset.labels());
    let (n, k) = (dataset.n_samples(), dataset.n_classes());
    if n == 0 {
        return Err(Error::InvalidParameter("gbt: empty training set".into()));
    }
    let base_score = 0.0;
    let presorted: Vec<Vec<usize>> = (0..x.cols())
        .map(|f| {
            let mut s: Vec<usize> = (0..n).collect();
            sort_by_feature(x, f, &mut s);
            s
        })
        .collect();
    let mut scores = vec![vec![base_score; k]; n];
    let mut losses = vec![mean_log_loss(&scores, y)];
    let mut trees = Vec::with_capacity(params.rounds);
    for _ in 0..params.rounds {
        let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax(s)).collect();
        let round: Vec<Tree> = (0..k)
            .into_par_iter()
            .map(|class| {
                let grad: Vec<f64> =
                    probs.iter().zip(y).map(|(p, &yi)| p[class] - if yi == class { 1.0 } else { 0.0 }).collect();
                let hess: Vec<f64> = probs.iter().map(|p| p[class] * (1.0 - p[class])).collect();
                let mut grower = NewtonGrower {
                    x,
                    criterion: SplitCriterion::Newton {
                        grad: &grad,
                        hess: &hess,
                        lambda: params.lambda,
                        gamma: params.gamma,
                        min_child_weight: params.min_child_weight,
                    },
                    params,
                    class,
                    n_classes: k,
                    nodes: Vec::new(),
                };
                grower.grow((0..n).collect(), presorted.clone(), 0);
                Tree { nodes: grower.nodes }
            })
            .collect();
        for (r, s) in scores.iter_mut().enumerate() {
            for tree in &round {
                for (a, v) in s.iter_mut().zip(tree.leaf_value(x.row(r))) {
                    *a += v;
                }
            }
        }
        losses.push(mean_log_loss(&scores, y));
        trees.push(round);
    }
    Ok(GbtModel {
        params: params.clone(),
        base_score,
        trees,
        n_features: dataset.n_features(),
        class_names: dataset.class_names().to_vec(),
        train_log_loss: losses,
    })
}

// ---------------------------------------------------------------------------
// Model specs, dispatch and serialization
// ---------------------------------------------------------------------------

/// Which model to train, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Logistic(LogisticParams),
    Forest(ForestParams),
    Gbt(GbtParams),
}

impl ModelSpec {
    /// The three models with default hyperparameters.
    pub fn defaults() -> Vec<ModelSpec> {
        vec![
            Self::Logistic(LogisticParams::default()),
            Self::Forest(ForestParams::default()),
            Self::Gbt(GbtParams::default()),
        ]
    }

    /// Short identifier used in file names and report keys.
    pub fn key(&self) -> &'static str {
        match self {
            Self::Logistic(_) => "logistic",
            Self::Forest(_) => "forest",
            Self::Gbt(_) => "gbt",
        }
    }

    pub fn display_name(&self) -> &'static str {
        display_name(self.key())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Logistic(p) => p.validate(),
            Self::Forest(p) => p.validate(),
            Self::Gbt(p) => p.validate(),
        }
    }

    /// Train on `dataset`; only the forest consumes the seed.
    pub fn fit(&self, dataset: &LabeledDataset, seed: u64) -> Result<ClassifierModel> {
        Ok(match self {
            Self::Logistic(p) => ClassifierModel::Logistic(train_logistic(dataset, p)?),
            Self::Forest(p) => ClassifierModel::Forest(train_forest(dataset, p, seed)?),
            Self::Gbt(p) => ClassifierModel::Gbt(train_gbt(dataset, p)?),
        })
    }
}

/// Human-readable name for a model key.
pub fn display_name(key: &str) -> &'static str {
    match key {
        "logistic" => "Logistic Regression",
        "forest" => "Random Forest",
        "gbt" => "Gradient Boosted Trees",
        _ => "Unknown",
    }
}

/// A trained model of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierModel {
    Logistic(LogisticModel),
    Forest(ForestModel),
    Gbt(GbtModel),
}

impl ClassifierModel {
    pub fn key(&self) -> &'static str {
        match self {
            Self::Logistic(_) => "logistic",
            Self::Forest(_) => "forest",
            Self::Gbt(_) => "gbt",
        }
    }

    fn inner(&self) -> &(dyn Classifier + Send + Sync) {
        match self {
            Self::Logistic(m) => m,
            Self::Forest(m) => m,
            Self::Gbt(m) => m,
        }
    }

    pub fn class_names(&self) -> &[String] {
        match self {
            Self::Logistic(m) => &m.class_names,
            Self::Forest(m) => &m.class_names,
            Self::Gbt(m) => &m.class_names,
        }
    }

    /// Serialize as a versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            format_version: u32,
            model: &'a ClassifierModel,
        }
        Ok(serde_json::to_string_pretty(&Doc { format_version: MODEL_FORMAT_VERSION, model: self })?)
    }

    /// Parse a document written by [`ClassifierModel::to_json`] and check its structure.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            format_version: u32,
            model: ClassifierModel,
        }
        let doc: Doc = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                doc.format_version
            )));
        }
        doc.model.validate_structure()?;
        Ok(doc.model)
    }

    fn validate_structure(&self) -> Result<()> {
        let (k, d) = (self.n_classes(), self.n_features());
        let bad = |what: &str| Err(Error::InvalidParameter(format!("malformed {} model: {what}", self.key())));
        let check_trees = |trees: Vec<&Tree>| {
            trees.into_iter().all(|t| {
                t.max_feature().is_none_or(|f| f < d)
                    && t.nodes.iter().all(|n| !matches!(n, Node::Leaf { value } if value.len() != k))
            })
        };
        match self {
            Self::Logistic(m) => {
                if m.bias.len() != k || m.weights.iter().any(|w| w.len() != d) || m.weights.len() != k {
                    return bad("weight shape");
                }
            }
            Self::Forest(m) => {
                if m.trees.is_empty() || !check_trees(m.trees.iter().collect()) {
                    return bad("tree structure");
                }
            }
            Self::Gbt(m) => {
                if m.trees.iter().any(|r| r.len() != k) || !check_trees(m.trees.iter().flatten().collect()) {
                    return bad("tree structure");
                }
            }
        }
        Ok(())
    }
}

impl Classifier for ClassifierModel {
    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.inner().predict_proba(features)
    }
}
