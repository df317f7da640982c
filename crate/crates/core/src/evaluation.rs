//! Sliding-window temporal validation and classification metrics.
//!
//! A window trains on a contiguous segment and tests on the segment right
//! after it, so no test sample ever precedes a training sample. Windows are
//! evaluated in parallel; every window's models get seeds derived from
//! `(seed, window, model)`, and results are assembled in window order, so
//! reports do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Classifier, ModelSpec};
use crate::preprocess::{LabeledDataset, MinMaxScaler};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub train_len: usize,
    pub test_len: usize,
    pub step: usize,
}

impl Default for WindowConfig {
    /// 30 days of hourly training data, 7 days of testing, tiled weekly.
    fn default() -> Self {
        Self { train_len: 720, test_len: 168, step: 168 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSplit {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Window `i` trains on `[i·step, i·step + train_len)` and tests on the
/// following `test_len` samples.
pub fn sliding_windows(n_samples: usize, config: &WindowConfig) -> Result<Vec<WindowSplit>> {
    let WindowConfig { train_len, test_len, step } = *config;
    if train_len == 0 || test_len == 0 || step == 0 {
        return Err(Error::InvalidParameter("window lengths and step must be >= 1".into()));
    }
    if n_samples < train_len + test_len {
        return Err(Error::TooFewValues { needed: train_len + test_len, found: n_samples });
    }
    let count = (n_samples - train_len - test_len) / step + 1;
    let windows: Vec<WindowSplit> = (0..count)
        .map(|i| {
            let start = i * step;
            WindowSplit { train: start..start + train_len, test: start + train_len..start + train_len + test_len }
        })
        .collect();
    for w in &windows {
        assert!(w.train.end <= w.test.start && w.test.end <= n_samples, "window leaks: {w:?}");
    }
    Ok(windows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stratification {
    Ok,
    Degenerate { missing_in_train: Vec<usize>, missing_in_test: Vec<usize> },
}

/// Report the classes absent from either segment of a window.
pub fn stratification_check(labels: &[usize], split: &WindowSplit, n_classes: usize) -> Stratification {
    let missing = |range: &Range<usize>| {
        let mut present = vec![false; n_classes];
        for &l in &labels[range.clone()] {
            if l < n_classes {
                present[l] = true;
            }
        }
        (0..n_classes).filter(|&c| !present[c]).collect::<Vec<_>>()
    };
    let (missing_in_train, missing_in_test) = (missing(&split.train), missing(&split.test));
    if missing_in_train.is_empty() && missing_in_test.is_empty() {
        Stratification::Ok
    } else {
        Stratification::Degenerate { missing_in_train, missing_in_test }
    }
}

/// `counts[i][j]` = samples of true class `i` predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        Self { counts: vec![vec![0; n_classes]; n_classes] }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if let Some(row) = counts.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch { expected: k, found: row.len() });
        }
        Ok(Self { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// Elementwise sum, used to pool windows.
    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_classes() != self.n_classes() {
            return Err(Error::DimensionMismatch { expected: self.n_classes(), found: other.n_classes() });
        }
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
        Ok(())
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), found: y_pred.len() });
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if let Some(&label) = [t, p].iter().find(|&&l| l >= n_classes) {
            return Err(Error::LabelOutOfRange { label, n_classes });
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// `trace / total`.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    match cm.total() {
        0 => Err(Error::InvalidParameter("accuracy of an empty confusion matrix".into())),
        total => Ok(cm.trace() as f64 / total as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when a zero denominator forced the score to 0.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Per-class precision, recall and F1 with macro and support-weighted averages.
pub fn report(cm: &ConfusionMatrix) -> Result<ClassificationReport> {
    let acc = accuracy(cm)?;
    let total = cm.total();
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|j| {
            let tp = cm.counts[j][j];
            let (precision, precision_undefined) = ratio(tp, cm.col_sum(j));
            let (recall, recall_undefined) = ratio(tp, cm.row_sum(j));
            let f1_undefined = precision + recall == 0.0;
            let f1 = if f1_undefined { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics {
                precision,
                recall,
                f1,
                support: cm.row_sum(j),
                precision_undefined,
                recall_undefined,
                f1_undefined,
            }
        })
        .collect();
    let k = per_class.len() as f64;
    let macro_avg = Averages {
        precision: per_class.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: per_class.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: per_class.iter().map(|c| c.f1).sum::<f64>() / k,
    };
    let weighted =
        |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total as f64;
    let weighted_avg =
        Averages { precision: weighted(|c| c.precision), recall: weighted(|c| c.recall), f1: weighted(|c| c.f1) };
    Ok(ClassificationReport { per_class, accuracy: acc, macro_avg, weighted_avg, total })
}

/// Binary AUC by the rank statistic, tied scores sharing their mean rank.
///
/// Computed from doubled ranks in integers, so the result equals the
/// concordant-pair count `(concordant + ½·ties)/(P·N)` exactly. `None` when
/// either class is absent.
pub fn binary_auc(positive: &[bool], scores: &[f64]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count() as u128;
    let n_neg = positive.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum of positives; a tie group over ranks s+1..=e has doubled midrank s+e+1
    let mut doubled_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let positives = order[start..end].iter().filter(|&&i| positive[i]).count() as u128;
        doubled_rank_sum += positives * (start as u128 + end as u128 + 1);
        start = end;
    }
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Some(doubled_u as f64 / (2 * n_pos * n_neg) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocAuc {
    /// `None` where the class is absent (or is the only class present).
    pub per_class: Vec<Option<f64>>,
    /// Mean of the defined per-class values.
    pub macro_avg: Option<f64>,
}

/// One-vs-rest AUC of each class's probability column.
pub fn roc_auc_ovr(y_true: &[usize], scores: &[Vec<f64>], n_classes: usize) -> Result<RocAuc> {
    if y_true.len() != scores.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), found: scores.len() });
    }
    if let Some(row) = scores.iter().find(|r| r.len() != n_classes) {
        return Err(Error::DimensionMismatch { expected: n_classes, found: row.len() });
    }
    if let Some(&label) = y_true.iter().find(|&&l| l >= n_classes) {
        return Err(Error::LabelOutOfRange { label, n_classes });
    }
    let per_class: Vec<Option<f64>> = (0..n_classes)
        .map(|c| {
            let positive: Vec<bool> = y_true.iter().map(|&l| l == c).collect();
            let column: Vec<f64> = scores.iter().map(|r| r[c]).collect();
            binary_auc(&positive, &column)
        })
        .collect();
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    let macro_avg = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(RocAuc { per_class, macro_avg })
}

// ---------------------------------------------------------------------------
// Model comparison
// ---------------------------------------------------------------------------

/// The four headline metrics of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl ModelSummary {
    pub fn from_report(name: &str, report: &ClassificationReport) -> Self {
        Self {
            name: name.to_string(),
            accuracy: report.accuracy,
            macro_precision: report.macro_avg.precision,
            macro_recall: report.macro_avg.recall,
            macro_f1: report.macro_avg.f1,
        }
    }
}

/// `100·x` truncated (not rounded) to two decimals, e.g. 0.84027 → "84.02".
pub fn percent_2dp(x: f64) -> String {
    // the nudge keeps values like 0.8402 (stored as 0.84019999…) from dropping a digit
    let hundredths = (x * 10_000.0 + 1e-6).floor() as i64;
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// `100·x` rounded to a whole percent, e.g. 0.85 → "85".
pub fn percent_0dp(x: f64) -> String {
    format!("{}", (x * 100.0).round() as i64)
}

/// Models sorted by accuracy (descending), ties by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ModelSummary>,
}

pub fn compare_models(summaries: &[ModelSummary]) -> Result<ComparisonTable> {
    if summaries.is_empty() {
        return Err(Error::InvalidParameter("no models to compare".into()));
    }
    let mut rows = summaries.to_vec();
    rows.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then_with(|| a.name.cmp(&b.name)));
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    /// Fixed-width text: accuracy as a two-decimal percent, the macro
    /// metrics as whole percents.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max("Model".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>9}  {:>6}  {:>8}",
            "Model", "Accuracy", "Precision", "Recall", "F1-Score"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>8}  {:>9}  {:>6}  {:>8}",
                r.name,
                format!("{}%", percent_2dp(r.accuracy)),
                percent_0dp(r.macro_precision),
                percent_0dp(r.macro_recall),
                percent_0dp(r.macro_f1),
            );
        }
        out
    }

    /// CSV with full-precision fractions.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "accuracy", "macro_precision", "macro_recall", "macro_f1"])?;
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                r.accuracy.to_string(),
                r.macro_precision.to_string(),
                r.macro_recall.to_string(),
                r.macro_f1.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// Result of one model on one window's test segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEvaluation {
    pub confusion: ConfusionMatrix,
    pub report: ClassificationReport,
    pub auc: RocAuc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub index: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
    pub per_model: BTreeMap<String, ModelEvaluation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedWindow {
    pub index: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
    pub missing_in_train: Vec<usize>,
    pub missing_in_test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: serde_json::Value,
    pub seed: u64,
    /// Model keys in configuration order.
    pub models: Vec<String>,
    pub class_names: Vec<String>,
    pub windows: Vec<WindowResult>,
    pub skipped: Vec<SkippedWindow>,
    /// Pooled over all evaluated windows; AUC from the pooled test scores.
    pub aggregate: BTreeMap<String, ModelEvaluation>,
}

impl RunReport {
    /// Headline metrics per model, in configuration order.
    pub fn summaries(&self, name: impl Fn(&str) -> String) -> Vec<ModelSummary> {
        self.models
            .iter()
            .filter_map(|m| self.aggregate.get(m).map(|e| ModelSummary::from_report(&name(m), &e.report)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Something that can be fit on a training segment.
pub trait Trainer: Sync {
    fn key(&self) -> String;
    fn fit(&self, train: &LabeledDataset, seed: u64) -> Result<Box<dyn Classifier + Send + Sync>>;
}

impl Trainer for ModelSpec {
    fn key(&self) -> String {
        ModelSpec::key(self).to_string()
    }

    fn fit(&self, train: &LabeledDataset, seed: u64) -> Result<Box<dyn Classifier + Send + Sync>> {
        Ok(Box::new(ModelSpec::fit(self, train, seed)?))
    }
}

struct WindowOutcome {
    per_model: Vec<(ModelEvaluation, Vec<usize>, Vec<Vec<f64>>)>,
}

fn evaluate_window(
    dataset: &LabeledDataset,
    split: &WindowSplit,
    index: usize,
    trainers: &[&dyn Trainer],
    seed: u64,
) -> Result<WindowOutcome> {
    let train = dataset.subset(split.train.clone());
    let test = dataset.subset(split.test.clone());
    let scaler = MinMaxScaler::fit(train.features());
    let train = train.with_features(scaler.transform(train.features()))?;
    let test = test.with_features(scaler.transform(test.features()))?;
    let k = dataset.n_classes();
    let per_model = trainers
        .iter()
        .enumerate()
        .map(|(m, trainer)| {
            let model = trainer.fit(&train, derive_seed(seed, &[index as u64, m as u64]))?;
            let probs = model.predict_proba_batch(test.features())?;
            let predicted: Vec<usize> = probs.iter().map(|p| crate::models::argmax(p)).collect();
            let cm = confusion(test.labels(), &predicted, k)?;
            let evaluation =
                ModelEvaluation { report: report(&cm)?, auc: roc_auc_ovr(test.labels(), &probs, k)?, confusion: cm };
            Ok((evaluation, test.labels().to_vec(), probs))
        })
        .collect::<Result<_>>()?;
    Ok(WindowOutcome { per_model })
}

/// Sliding-window validation of every trainer.
///
/// Each window min-max scales features with statistics from its training
/// segment only, trains every model there and evaluates on the test segment.
/// Windows missing a class in either segment are skipped with a warning.
pub fn run_cv(
    dataset: &LabeledDataset,
    trainers: &[&dyn Trainer],
    windows: &WindowConfig,
    seed: u64,
    config_echo: serde_json::Value,
) -> Result<RunReport> {
    if trainers.is_empty() {
        return Err(Error::InvalidParameter("no models configured".into()));
    }
    let keys: Vec<String> = trainers.iter().map(|t| t.key()).collect();
    let k = dataset.n_classes();
    let splits = sliding_windows(dataset.n_samples(), windows)?;
    let mut usable = Vec::new();
    let mut skipped = Vec::new();
    for (index, split) in splits.into_iter().enumerate() {
        match stratification_check(dataset.labels(), &split, k) {
            Stratification::Ok => usable.push((index, split)),
            Stratification::Degenerate { missing_in_train, missing_in_test } => {
                log::warn!(
                    "skipping window {index} (train {:?}, test {:?}): classes {missing_in_train:?} missing from train, {missing_in_test:?} from test",
                    split.train,
                    split.test
                );
                skipped.push(SkippedWindow {
                    index,
                    train: split.train,
                    test: split.test,
                    missing_in_train,
                    missing_in_test,
                });
            }
        }
    }
    if usable.is_empty() {
        return Err(Error::NoUsableWindows);
    }
    let outcomes: Vec<WindowOutcome> = usable
        .par_iter()
        .map(|(index, split)| evaluate_window(dataset, split, *index, trainers, seed))
        .collect::<Result<_>>()?;

    let mut results = Vec::with_capacity(usable.len());
    let mut pooled: Vec<(ConfusionMatrix, Vec<usize>, Vec<Vec<f64>>)> =
        keys.iter().map(|_| (ConfusionMatrix::zeros(k), Vec::new(), Vec::new())).collect();
    for ((index, split), outcome) in usable.into_iter().zip(outcomes) {
        let mut per_model = BTreeMap::new();
        for (m, (evaluation, labels, probs)) in outcome.per_model.into_iter().enumerate() {
            pooled[m].0.add(&evaluation.confusion)?;
            pooled[m].1.extend(labels);
            pooled[m].2.extend(probs);
            per_model.insert(keys[m].clone(), evaluation);
        }
        results.push(WindowResult { index, train: split.train, test: split.test, per_model });
    }
    let aggregate = keys
        .iter()
        .zip(pooled)
        .map(|(key, (cm, labels, probs))| {
            Ok((
                key.clone(),
                ModelEvaluation { report: report(&cm)?, auc: roc_auc_ovr(&labels, &probs, k)?, confusion: cm },
            ))
        })
        .collect::<Result<_>>()?;
    Ok(RunReport {
        config: config_echo,
        seed,
        models: keys,
        class_names: dataset.class_names().to_vec(),
        windows: results,
        skipped,
        aggregate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const RF: [[u64; 2]; 2] = [[360289, 13823], [6663, 367448]];
    const XGB: [[u64; 2]; 2] = [[359787, 14325], [6152, 367959]];

    fn cm(m: [[u64; 2]; 2]) -> ConfusionMatrix {
        ConfusionMatrix::from_counts(m.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn r2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn window_counts() {
        let w = sliding_windows(888, &WindowConfig::default()).unwrap();
        assert_eq!(w, vec![WindowSplit { train: 0..720, test: 720..888 }]);
        assert_eq!(sliding_windows(2000, &WindowConfig::default()).unwrap().len(), 7);
        assert!(sliding_windows(887, &WindowConfig::default()).is_err());
    }

    #[test]
    fn stratification() {
        let split = WindowSplit { train: 0..4, test: 4..6 };
        assert_eq!(stratification_check(&[0, 1, 0, 1, 1, 0], &split, 2), Stratification::Ok);
        assert_eq!(
            stratification_check(&[0, 1, 0, 1, 1, 1], &split, 2),
            Stratification::Degenerate { missing_in_train: vec![], missing_in_test: vec![0] }
        );
    }

    #[test]
    fn confusion_examples() {
        let c = confusion(&[0, 0, 1, 1], &[0, 1, 1, 1], 2).unwrap();
        assert_eq!(c.counts, vec![vec![1, 1], vec![0, 2]]);
        assert!(matches!(confusion(&[0, 2], &[0, 1], 2), Err(Error::LabelOutOfRange { label: 2, .. })));
        let d = confusion(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        assert_eq!(accuracy(&d).unwrap(), 1.0);
        assert!(accuracy(&ConfusionMatrix::zeros(2)).is_err());
    }

    #[test]
    fn paper_accuracies() {
        assert!((accuracy(&cm(RF)).unwrap() - 0.9726204620814918).abs() < 1e-12);
        assert!((accuracy(&cm(XGB)).unwrap() - 0.9726324905810166).abs() < 1e-12);
    }

    #[test]
    fn paper_reports() {
        for m in [RF, XGB] {
            let r = report(&cm(m)).unwrap();
            let c0 = &r.per_class[0];
            let c1 = &r.per_class[1];
            assert_eq!((r2(c0.precision), r2(c0.recall), r2(c0.f1)), (0.98, 0.96, 0.97));
            assert_eq!((r2(c1.precision), r2(c1.recall), r2(c1.f1)), (0.96, 0.98, 0.97));
            assert_eq!((c0.support, c1.support), (374112, 374111));
            assert_eq!(r2(r.macro_avg.f1), 0.97);
            assert_eq!(r2(r.weighted_avg.f1), 0.97);
            assert_eq!(r.total, 748223);
        }
    }

    #[test]
    fn zero_denominators_are_flagged() {
        let r = report(&ConfusionMatrix::from_counts(vec![vec![2, 0], vec![1, 0]]).unwrap()).unwrap();
        let c1 = &r.per_class[1];
        assert!(c1.precision_undefined && c1.f1_undefined && !c1.recall_undefined);
        assert_eq!((c1.precision, c1.recall, c1.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn auc_examples() {
        let y = [false, false, true, true];
        assert_eq!(binary_auc(&y, &[0.1, 0.4, 0.35, 0.8]), Some(0.75));
        assert_eq!(binary_auc(&y, &[0.1, 0.2, 0.3, 0.4]), Some(1.0));
        assert_eq!(binary_auc(&y, &[0.5; 4]), Some(0.5));
        assert_eq!(binary_auc(&[true, true], &[0.1, 0.2]), None);
        let ovr = roc_auc_ovr(&[0, 0, 0], &vec![vec![0.5, 0.5]; 3], 2).unwrap();
        assert_eq!(ovr.per_class, vec![None, None]);
        assert_eq!(ovr.macro_avg, None);
    }

    #[test]
    fn fig9_rendering() {
        let s = |name: &str, a, p, r, f| ModelSummary {
            name: name.into(),
            accuracy: a,
            macro_precision: p,
            macro_recall: r,
            macro_f1: f,
        };
        let t = compare_models(&[
            s("Logistic Regression", 0.8402708818093002, 0.85, 0.84, 0.84),
            s("XGBoost", 0.9726324905810166, 0.97, 0.97, 0.97),
            s("Random Forest", 0.9726204620814918, 0.97, 0.97, 0.97),
        ])
        .unwrap();
        let names: Vec<&str> = t.rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["XGBoost", "Random Forest", "Logistic Regression"]);
        let text = t.render();
        let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
        assert_eq!(rows[0], ["XGBoost", "97.26%", "97", "97", "97"]);
        assert_eq!(rows[1], ["Random", "Forest", "97.26%", "97", "97", "97"]);
        assert_eq!(rows[2], ["Logistic", "Regression", "84.02%", "85", "84", "84"]);
        assert!(compare_models(&[]).is_err());
    }

    #[test]
    fn percent_formatting() {
        assert_eq!(percent_2dp(0.8402708818093002), "84.02");
        assert_eq!(percent_2dp(0.8402), "84.02");
        assert_eq!(percent_2dp(1.0), "100.00");
        assert_eq!(percent_0dp(0.85), "85");
    }
}
