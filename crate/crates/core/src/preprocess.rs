//! Preprocessing: imputation, outlier handling, scaling, encoding, lag and
//! window construction, and class-label bucketing.
//!
//! Quantiles everywhere use linear interpolation between closest ranks:
//! for sorted `x` of length `n`, `q(p) = x[⌊h⌋] + (h − ⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋])`
//! with `h = p·(n − 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{Column, ColumnData, TimeSeriesFrame, Timestamp};

/// Quantile of already-sorted data by the closest-ranks interpolation rule.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Non-missing values sorted ascending.
pub fn sorted_present(values: &[Option<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().flatten().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

// ---------------------------------------------------------------------------
// Imputation
// ---------------------------------------------------------------------------

/// Fill gaps by linear interpolation on the time axis. Leading and trailing
/// gaps take the nearest valid value.
pub fn interpolate_linear(timestamps: &[Timestamp], values: &[Option<f64>]) -> Result<Vec<f64>> {
    assert_eq!(timestamps.len(), values.len());
    let known: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    let (&first, &last) = match (known.first(), known.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::AllMissing("series".into())),
    };
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    let mut next = 0usize; // index into `known` of the first known row >= current
    for i in 0..values.len() {
        if let Some(v) = values[i] {
            out.push(v);
            next += 1;
            continue;
        }
        if i < first {
            out.push(values[first].unwrap());
        } else if i > last {
            out.push(values[last].unwrap());
        } else {
            let (a, b) = (known[next - 1], known[next]);
            let (ta, tb, t) = (
                timestamps[a].epoch_seconds() as f64,
                timestamps[b].epoch_seconds() as f64,
                timestamps[i].epoch_seconds() as f64,
            );
            let (va, vb) = (values[a].unwrap(), values[b].unwrap());
            out.push(va + (vb - va) * (t - ta) / (tb - ta));
        }
    }
    Ok(out)
}

/// Carry the most recent value forward. A leading gap is an error.
pub fn forward_fill<T: Clone>(values: &[Option<T>]) -> Result<Vec<T>> {
    let mut last: Option<&T> = None;
    values
        .iter()
        .map(|v| {
            if let Some(v) = v {
                last = Some(v);
            }
            last.cloned().ok_or_else(|| Error::LeadingMissing("series".into()))
        })
        .collect()
}

/// Imputation strategy for one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Imputation {
    Linear,
    ForwardFill,
}

/// Impute one column of a frame in place.
pub fn impute(frame: TimeSeriesFrame, column: &str, how: Imputation) -> Result<TimeSeriesFrame> {
    let rename = |e: Error| match e {
        Error::AllMissing(_) => Error::AllMissing(column.to_string()),
        Error::LeadingMissing(_) => Error::LeadingMissing(column.to_string()),
        other => other,
    };
    let col = frame.column(column)?;
    let data = match (&col.data, how) {
        (ColumnData::Continuous { values, unit }, Imputation::Linear) => ColumnData::Continuous {
            values: interpolate_linear(frame.timestamps(), values).map_err(rename)?.into_iter().map(Some).collect(),
            unit: unit.clone(),
        },
        (ColumnData::Continuous { values, unit }, Imputation::ForwardFill) => ColumnData::Continuous {
            values: forward_fill(values).map_err(rename)?.into_iter().map(Some).collect(),
            unit: unit.clone(),
        },
        (ColumnData::Integer(values), Imputation::ForwardFill) => {
            ColumnData::Integer(forward_fill(values).map_err(rename)?.into_iter().map(Some).collect())
        }
        (ColumnData::Categorical(values), Imputation::ForwardFill) => {
            ColumnData::Categorical(forward_fill(values).map_err(rename)?.into_iter().map(Some).collect())
        }
        (other, Imputation::Linear) => {
            return Err(Error::ColumnKind {
                column: column.to_string(),
                expected: "continuous",
                found: other.kind_name(),
            })
        }
    };
    frame.replace_column(Column { name: column.to_string(), data })
}

// ---------------------------------------------------------------------------
// Outliers
// ---------------------------------------------------------------------------

/// Flags per row for each inspected column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutlierMask {
    pub columns: Vec<(String, Vec<bool>)>,
}

impl OutlierMask {
    pub fn is_empty(&self) -> bool {
        self.columns.iter().all(|(_, m)| !m.iter().any(|&f| f))
    }

    /// Rows flagged in any column.
    pub fn flagged_rows(&self, n_rows: usize) -> Vec<bool> {
        let mut out = vec![false; n_rows];
        for (_, mask) in &self.columns {
            for (o, &f) in out.iter_mut().zip(mask) {
                *o |= f;
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.columns.iter().map(|(_, m)| m.iter().filter(|&&f| f).count()).sum()
    }
}

/// Tukey fences: flag `x < Q1 − k·IQR` or `x > Q3 + k·IQR`. Missing cells are
/// never flagged.
pub fn detect_outliers_iqr(values: &[Option<f64>], k: f64) -> Result<Vec<bool>> {
    let sorted = sorted_present(values);
    if sorted.len() < 4 {
        return Err(Error::TooFewValues { needed: 4, found: sorted.len() });
    }
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - k * iqr, q3 + k * iqr);
    Ok(values.iter().map(|v| v.is_some_and(|x| x < lo || x > hi)).collect())
}

/// Flag `|x − mean| / s > threshold` with `s` the sample standard deviation.
/// Nothing is flagged when fewer than two values exist or `s` is zero.
pub fn detect_outliers_zscore(values: &[Option<f64>], threshold: f64) -> Vec<bool> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    if n < 2 {
        return vec![false; values.len()];
    }
    let mean = present.iter().sum::<f64>() / n as f64;
    let var = present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return vec![false; values.len()];
    }
    values.iter().map(|v| v.is_some_and(|x| (x - mean).abs() / sd > threshold)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OutlierMethod {
    Iqr { k: f64 },
    Zscore { threshold: f64 },
}

/// Run a detector over several continuous columns.
pub fn detect_outliers(frame: &TimeSeriesFrame, columns: &[String], method: OutlierMethod) -> Result<OutlierMask> {
    let columns = columns
        .iter()
        .map(|name| {
            let values = frame.continuous(name)?;
            let mask = match method {
                OutlierMethod::Iqr { k } => detect_outliers_iqr(values, k)?,
                OutlierMethod::Zscore { threshold } => detect_outliers_zscore(values, threshold),
            };
            Ok((name.clone(), mask))
        })
        .collect::<Result<_>>()?;
    Ok(OutlierMask { columns })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairMode {
    RemoveRows,
    ReplaceWithInterpolation,
}

/// Remove flagged rows, or re-impute flagged cells by linear interpolation
/// from their unflagged neighbours. Other missing cells are left alone.
pub fn repair_outliers(frame: &TimeSeriesFrame, mask: &OutlierMask, mode: RepairMode) -> Result<TimeSeriesFrame> {
    for (name, m) in &mask.columns {
        if m.len() != frame.len() {
            return Err(Error::LengthMismatch { column: name.clone(), expected: frame.len(), found: m.len() });
        }
    }
    match mode {
        RepairMode::RemoveRows => {
            let flagged = mask.flagged_rows(frame.len());
            let keep: Vec<bool> = flagged.iter().map(|f| !f).collect();
            Ok(frame.filter_rows(&keep))
        }
        RepairMode::ReplaceWithInterpolation => {
            let mut out = frame.clone();
            for (name, m) in &mask.columns {
                if !m.iter().any(|&f| f) {
                    continue;
                }
                let original = frame.continuous(name)?;
                let masked: Vec<Option<f64>> =
                    original.iter().zip(m).map(|(v, &f)| if f { None } else { *v }).collect();
                let filled =
                    interpolate_linear(frame.timestamps(), &masked).map_err(|_| Error::AllMissing(name.clone()))?;
                let values =
                    original.iter().zip(m).zip(filled).map(|((v, &f), fill)| if f { Some(fill) } else { *v }).collect();
                let unit = match &frame.column(name)?.data {
                    ColumnData::Continuous { unit, .. } => unit.clone(),
                    _ => unreachable!(),
                };
                out = out.replace_column(Column::continuous(name, &unit, values))?;
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

/// Min-max parameters of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub min: f64,
    pub max: f64,
}

impl ScalingParams {
    pub fn fit(values: &[f64]) -> Self {
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if values.is_empty() {
            Self { min: 0.0, max: 0.0 }
        } else {
            Self { min, max }
        }
    }

    /// `(x − min)/(max − min)`; a constant column maps to 0.
    pub fn transform(&self, x: f64) -> f64 {
        let range = self.max - self.min;
        if range > 0.0 {
            (x - self.min) / range
        } else {
            0.0
        }
    }

    pub fn inverse(&self, scaled: f64) -> f64 {
        scaled * (self.max - self.min) + self.min
    }
}

pub fn minmax_fit_transform(values: &[f64]) -> (Vec<f64>, ScalingParams) {
    let params = ScalingParams::fit(values);
    (values.iter().map(|&x| params.transform(x)).collect(), params)
}

pub fn minmax_inverse(scaled: &[f64], params: &ScalingParams) -> Vec<f64> {
    scaled.iter().map(|&x| params.inverse(x)).collect()
}

/// Column-wise min-max scaler over a feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub columns: Vec<ScalingParams>,
}

impl MinMaxScaler {
    pub fn fit(x: &Matrix) -> Self {
        let mut columns = vec![ScalingParams { min: f64::INFINITY, max: f64::NEG_INFINITY }; x.cols()];
        for r in 0..x.rows() {
            for (p, &v) in columns.iter_mut().zip(x.row(r)) {
                p.min = p.min.min(v);
                p.max = p.max.max(v);
            }
        }
        if x.rows() == 0 {
            columns.iter_mut().for_each(|p| *p = ScalingParams { min: 0.0, max: 0.0 });
        }
        Self { columns }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (v, p) in out.row_mut(r).iter_mut().zip(&self.columns) {
                *v = p.transform(*v);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Encoding and feature construction
// ---------------------------------------------------------------------------

/// One 0/1 column per distinct label (sorted lexicographically), named
/// `{column}_{label}`.
pub fn one_hot_encode(column: &str, values: &[Option<String>]) -> Result<Vec<Column>> {
    if let Some(row) = values.iter().position(Option::is_none) {
        return Err(Error::MissingValue { column: column.to_string(), row });
    }
    let mut labels: Vec<&str> = values.iter().flatten().map(String::as_str).collect();
    labels.sort_unstable();
    labels.dedup();
    Ok(labels
        .iter()
        .map(|label| {
            let indicator = values.iter().map(|v| if v.as_deref() == Some(label) { 1.0 } else { 0.0 }).collect();
            Column::dense(&format!("{column}_{label}"), "", indicator)
        })
        .collect())
}

/// Replace a categorical column of `frame` with its one-hot expansion.
pub fn one_hot_frame(frame: TimeSeriesFrame, column: &str) -> Result<TimeSeriesFrame> {
    let encoded = one_hot_encode(column, frame.categorical(column)?)?;
    encoded.into_iter().try_fold(frame.drop_column(column)?, |f, c| f.with_column(c))
}

/// Append `{c}_lag_{l}` = `c[t − l]` for every column and lag, then drop the
/// first `max(lags)` rows.
pub fn make_lag_features(frame: &TimeSeriesFrame, columns: &[String], lags: &[usize]) -> Result<TimeSeriesFrame> {
    if lags.is_empty() || columns.is_empty() {
        return Ok(frame.clone());
    }
    if lags.contains(&0) {
        return Err(Error::InvalidParameter("lags must be >= 1".into()));
    }
    let max_lag = *lags.iter().max().unwrap();
    if frame.len() < max_lag + 1 {
        return Err(Error::TooFewValues { needed: max_lag + 1, found: frame.len() });
    }
    let mut out = frame.clone();
    for name in columns {
        let values = frame.numeric(name)?;
        for &lag in lags {
            let shifted = (0..frame.len()).map(|t| if t >= lag { values[t - lag] } else { None }).collect();
            out = out.with_column(Column::continuous(&format!("{name}_lag_{lag}"), "", shifted))?;
        }
    }
    Ok(out.slice(max_lag, frame.len()))
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, rows: impl IntoIterator<Item = usize>) -> Self {
        let mut data = Vec::new();
        let mut n = 0;
        for r in rows {
            data.extend_from_slice(self.row(r));
            n += 1;
        }
        Self { rows: n, cols: self.cols, data }
    }

    /// Apply `f` to every entry of column `c`.
    pub fn map_column(&mut self, c: usize, f: impl Fn(f64) -> f64) {
        for r in 0..self.rows {
            let v = &mut self.data[r * self.cols + c];
            *v = f(*v);
        }
    }
}

/// Flattened feature windows with their regression targets, before labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSamples {
    /// Timestamp of each sample's target row.
    pub timestamps: Vec<Timestamp>,
    pub features: Matrix,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
}

/// Sample `i` covers rows `[i, i + window_len)` flattened row-major over
/// `feature_columns`; its target is `target[i + window_len + horizon − 1]`.
pub fn make_windows(
    frame: &TimeSeriesFrame,
    feature_columns: &[String],
    target: &str,
    window_len: usize,
    horizon: usize,
) -> Result<WindowedSamples> {
    if window_len == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("window_len and horizon must be >= 1".into()));
    }
    if frame.len() < window_len + horizon {
        return Err(Error::TooFewValues { needed: window_len + horizon, found: frame.len() });
    }
    let dense = |name: &str| -> Result<Vec<f64>> {
        frame
            .numeric(name)?
            .into_iter()
            .enumerate()
            .map(|(row, v)| v.ok_or_else(|| Error::MissingValue { column: name.to_string(), row }))
            .collect()
    };
    let cols: Vec<Vec<f64>> = feature_columns.iter().map(|c| dense(c)).collect::<Result<_>>()?;
    let target_values = dense(target)?;

    let n_samples = frame.len() - window_len - horizon + 1;
    let width = window_len * cols.len();
    let mut data = Vec::with_capacity(n_samples * width);
    for i in 0..n_samples {
        for row in i..i + window_len {
            data.extend(cols.iter().map(|c| c[row]));
        }
    }
    let target_rows = (0..n_samples).map(|i| i + window_len + horizon - 1);
    let feature_names = (0..window_len)
        .flat_map(|k| {
            let back = window_len - k;
            feature_columns.iter().map(move |c| format!("{c}_t-{back}"))
        })
        .collect();
    Ok(WindowedSamples {
        timestamps: target_rows.clone().map(|r| frame.timestamps()[r]).collect(),
        features: Matrix::new(n_samples, width, data)?,
        targets: target_rows.map(|r| target_values[r]).collect(),
        feature_names,
    })
}

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Class boundaries on the target column: `K − 1` ascending cut points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub n_classes: usize,
    pub thresholds: Vec<f64>,
}

impl LabelSpec {
    pub fn new(n_classes: usize, thresholds: Vec<f64>) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 classes, got {n_classes}")));
        }
        if thresholds.len() != n_classes - 1 {
            return Err(Error::InvalidParameter(format!(
                "{n_classes} classes need {} thresholds, got {}",
                n_classes - 1,
                thresholds.len()
            )));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("thresholds must be strictly ascending".into()));
        }
        Ok(Self { n_classes, thresholds })
    }

    /// Number of thresholds strictly below `value`.
    pub fn label(&self, value: f64) -> usize {
        self.thresholds.iter().filter(|&&t| t < value).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LabelMode {
    Quantile,
    Fixed { thresholds: Vec<f64> },
}

/// Bucket regression targets into `k` classes.
pub fn bucket_labels(values: &[f64], k: usize, mode: &LabelMode) -> Result<(Vec<usize>, LabelSpec)> {
    let spec = match mode {
        LabelMode::Fixed { thresholds } => LabelSpec::new(k, thresholds.clone())?,
        LabelMode::Quantile => {
            if k < 2 {
                return Err(Error::InvalidParameter(format!("need at least 2 classes, got {k}")));
            }
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut distinct = sorted.clone();
            distinct.dedup();
            if distinct.len() < k {
                return Err(Error::TooFewValues { needed: k, found: distinct.len() });
            }
            let thresholds: Vec<f64> = (1..k).map(|j| quantile_sorted(&sorted, j as f64 / k as f64)).collect();
            LabelSpec::new(k, thresholds)?
        }
    };
    Ok((values.iter().map(|&v| spec.label(v)).collect(), spec))
}

/// Default display names for `k` classes.
pub fn default_class_names(k: usize) -> Vec<String> {
    match k {
        2 => vec!["low".into(), "high".into()],
        3 => vec!["low".into(), "medium".into(), "high".into()],
        _ => (0..k).map(|i| format!("class_{i}")).collect(),
    }
}

/// Feature matrix with integer class labels: the input to every model.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: features.rows(), found: labels.len() });
        }
        if feature_names.len() != features.cols() {
            return Err(Error::DimensionMismatch { expected: features.cols(), found: feature_names.len() });
        }
        let k = class_names.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 classes, got {k}")));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange { label, n_classes: k });
        }
        if let Some(pos) = features.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::MissingValue {
                column: feature_names[pos % features.cols().max(1)].clone(),
                row: pos / features.cols().max(1),
            });
        }
        Ok(Self { features, labels, feature_names, class_names })
    }

    /// Dataset with generated feature and class names.
    pub fn unnamed(features: Matrix, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let names = (0..features.cols()).map(|j| format!("f{j}")).collect();
        Self::new(features, labels, names, (0..n_classes).map(|k| k.to_string()).collect())
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn subset(&self, rows: impl IntoIterator<Item = usize> + Clone) -> Self {
        Self {
            features: self.features.select_rows(rows.clone()),
            labels: rows.into_iter().map(|r| self.labels[r]).collect(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn with_features(&self, features: Matrix) -> Result<Self> {
        Self::new(features, self.labels.clone(), self.feature_names.clone(), self.class_names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(n: usize) -> Vec<Timestamp> {
        (0..n as i64).map(|i| Timestamp::from_epoch_seconds(i * 3600)).collect()
    }

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn interpolation_examples() {
        assert_eq!(interpolate_linear(&t(3), &[Some(1.0), None, Some(3.0)]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(interpolate_linear(&t(3), &[None, Some(5.0), None]).unwrap(), vec![5.0, 5.0, 5.0]);
        let v = interpolate_linear(&t(4), &[Some(0.0), None, None, Some(9.0)]).unwrap();
        assert_eq!(v, vec![0.0, 3.0, 6.0, 9.0]);
        assert!(matches!(interpolate_linear(&t(2), &[None, None]), Err(Error::AllMissing(_))));
    }

    #[test]
    fn interpolation_uses_time_axis() {
        let ts: Vec<Timestamp> = [0, 1, 4].iter().map(|&h| Timestamp::from_epoch_seconds(h * 3600)).collect();
        let v = interpolate_linear(&ts, &[Some(0.0), None, Some(8.0)]).unwrap();
        assert_eq!(v[1], 2.0);
    }

    #[test]
    fn forward_fill_examples() {
        assert_eq!(forward_fill(&[Some(2), None, None, Some(7)]).unwrap(), vec![2, 2, 2, 7]);
        assert_eq!(forward_fill(&[Some(1.0), Some(2.0)]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(forward_fill(&[Some(3), None, Some(5), None]).unwrap(), vec![3, 3, 5, 5]);
        assert!(matches!(forward_fill::<i32>(&[None, Some(1)]), Err(Error::LeadingMissing(_))));
    }

    #[test]
    fn impute_names_the_column_in_errors() {
        let f = TimeSeriesFrame::new(t(2), vec![Column::continuous("cloud", "", vec![None, Some(1.0)])]).unwrap();
        assert!(matches!(impute(f, "cloud", Imputation::ForwardFill), Err(Error::LeadingMissing(c)) if c == "cloud"));
    }

    #[test]
    fn iqr_examples() {
        let m = detect_outliers_iqr(&some(&[1.0, 2.0, 3.0, 4.0, 100.0]), 1.5).unwrap();
        assert_eq!(m, vec![false, false, false, false, true]);
        assert!(!detect_outliers_iqr(&some(&[4.0; 6]), 1.5).unwrap().contains(&true));
        let uniform: Vec<f64> = (1..=8).map(f64::from).collect();
        assert!(!detect_outliers_iqr(&some(&uniform), 1.5).unwrap().contains(&true));
        assert!(matches!(detect_outliers_iqr(&some(&[1.0, 2.0, 3.0]), 1.5), Err(Error::TooFewValues { .. })));
    }

    #[test]
    fn zscore_examples() {
        assert!(!detect_outliers_zscore(&some(&[3.0; 5]), 3.0).contains(&true));
        let mut v = vec![0.0; 9];
        v.push(100.0);
        // mean 10, s = sqrt(1000) ≈ 31.62, z(100) ≈ 2.846
        assert!(!detect_outliers_zscore(&some(&v), 3.0).contains(&true));
        let at_2_5 = detect_outliers_zscore(&some(&v), 2.5);
        assert_eq!(at_2_5.iter().position(|&f| f), Some(9));
        assert_eq!(at_2_5.iter().filter(|&&f| f).count(), 1);
        let all = detect_outliers_zscore(&some(&[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(all, vec![true, false, true]);
    }

    #[test]
    fn repair_modes() {
        let f = TimeSeriesFrame::new(t(5), vec![Column::dense("x", "W", vec![1.0, 2.0, 50.0, 4.0, 5.0])]).unwrap();
        let empty = OutlierMask { columns: vec![("x".into(), vec![false; 5])] };
        assert_eq!(repair_outliers(&f, &empty, RepairMode::RemoveRows).unwrap(), f);
        assert_eq!(repair_outliers(&f, &empty, RepairMode::ReplaceWithInterpolation).unwrap(), f);
        let mask = OutlierMask { columns: vec![("x".into(), vec![false, false, true, false, false])] };
        let replaced = repair_outliers(&f, &mask, RepairMode::ReplaceWithInterpolation).unwrap();
        assert_eq!(replaced.continuous("x").unwrap()[2], Some(3.0));
        let removed = repair_outliers(&f, &mask, RepairMode::RemoveRows).unwrap();
        assert_eq!(removed.len(), 4);
    }

    #[test]
    fn minmax_examples() {
        let (s, p) = minmax_fit_transform(&[2.0, 4.0, 6.0]);
        assert_eq!(s, vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_inverse(&s, &p), vec![2.0, 4.0, 6.0]);
        assert_eq!(minmax_fit_transform(&[7.0, 7.0]).0, vec![0.0, 0.0]);
    }

    #[test]
    fn one_hot_examples() {
        let v: Vec<Option<String>> = ["clear", "cloudy", "clear"].iter().map(|s| Some(s.to_string())).collect();
        let cols = one_hot_encode("cond", &v).unwrap();
        assert_eq!(cols[0].name, "cond_clear");
        assert_eq!(cols[1].name, "cond_cloudy");
        assert_eq!(cols[0].data, ColumnData::Continuous { values: some(&[1.0, 0.0, 1.0]), unit: String::new() });
        assert_eq!(cols[1].data, ColumnData::Continuous { values: some(&[0.0, 1.0, 0.0]), unit: String::new() });
        let single = one_hot_encode("c", &[Some("a".into()), Some("a".into())]).unwrap();
        assert_eq!(single.len(), 1);
        assert!(matches!(one_hot_encode("c", &[Some("a".into()), None]), Err(Error::MissingValue { row: 1, .. })));
    }

    #[test]
    fn lag_examples() {
        let f = TimeSeriesFrame::new(t(4), vec![Column::dense("power", "", vec![1.0, 2.0, 3.0, 4.0])]).unwrap();
        let lagged = make_lag_features(&f, &["power".into()], &[1]).unwrap();
        assert_eq!(lagged.len(), 3);
        assert_eq!(lagged.continuous("power").unwrap(), &some(&[2.0, 3.0, 4.0])[..]);
        assert_eq!(lagged.continuous("power_lag_1").unwrap(), &some(&[1.0, 2.0, 3.0])[..]);
        assert_eq!(make_lag_features(&f, &["power".into()], &[]).unwrap(), f);
        let five = TimeSeriesFrame::new(t(5), vec![Column::dense("p", "", vec![0.0; 5])]).unwrap();
        assert_eq!(make_lag_features(&five, &["p".into()], &[1, 2]).unwrap().len(), 3);
        assert!(matches!(make_lag_features(&f, &["power".into()], &[4]), Err(Error::TooFewValues { .. })));
    }

    #[test]
    fn window_examples() {
        let f = TimeSeriesFrame::new(t(26), vec![Column::dense("p", "", (0..26).map(f64::from).collect())]).unwrap();
        let w = make_windows(&f, &["p".into()], "p", 24, 1).unwrap();
        assert_eq!(w.features.rows(), 2);
        assert_eq!(w.features.cols(), 24);
        assert_eq!(w.targets, vec![24.0, 25.0]);

        let abc = TimeSeriesFrame::new(t(3), vec![Column::dense("v", "", vec![1.0, 2.0, 3.0])]).unwrap();
        let w = make_windows(&abc, &["v".into()], "v", 1, 1).unwrap();
        assert_eq!(w.features.as_slice(), &[1.0, 2.0]);
        assert_eq!(w.targets, vec![2.0, 3.0]);
        assert_eq!(w.timestamps, abc.timestamps()[1..].to_vec());
        assert!(matches!(make_windows(&abc, &["v".into()], "v", 3, 1), Err(Error::TooFewValues { .. })));
    }

    #[test]
    fn window_flattening_is_row_major() {
        let f = TimeSeriesFrame::new(
            t(3),
            vec![Column::dense("a", "", vec![1.0, 2.0, 3.0]), Column::dense("b", "", vec![10.0, 20.0, 30.0])],
        )
        .unwrap();
        let w = make_windows(&f, &["a".into(), "b".into()], "a", 2, 1).unwrap();
        assert_eq!(w.features.row(0), &[1.0, 10.0, 2.0, 20.0]);
        assert_eq!(w.feature_names, vec!["a_t-2", "b_t-2", "a_t-1", "b_t-1"]);
    }

    #[test]
    fn bucket_examples() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        let (labels, spec) = bucket_labels(&v, 2, &LabelMode::Quantile).unwrap();
        assert_eq!(spec.thresholds, vec![5.5]);
        assert_eq!(labels, [vec![0; 5], vec![1; 5]].concat());

        let v: Vec<f64> = (1..=9).map(f64::from).collect();
        let (labels, _) = bucket_labels(&v, 3, &LabelMode::Quantile).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);

        let (labels, _) = bucket_labels(&[1.0, 2.0], 2, &LabelMode::Fixed { thresholds: vec![10.0] }).unwrap();
        assert_eq!(labels, vec![0, 0]);

        assert!(matches!(bucket_labels(&[1.0, 1.0, 2.0], 3, &LabelMode::Quantile), Err(Error::TooFewValues { .. })));
        assert!(LabelSpec::new(3, vec![2.0, 1.0]).is_err());
    }

    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        sxy / (sxx * syy).sqrt()
    }

    proptest! {
        #[test]
        fn imputation_is_idempotent(v in proptest::collection::vec(proptest::option::of(-100.0f64..100.0), 1..40)) {
            prop_assume!(v.iter().any(Option::is_some));
            let ts = t(v.len());
            let once = interpolate_linear(&ts, &v).unwrap();
            let twice = interpolate_linear(&ts, &some(&once)).unwrap();
            prop_assert_eq!(&once, &twice);
            if v[0].is_some() {
                let ff = forward_fill(&v).unwrap();
                prop_assert_eq!(forward_fill(&some(&ff)).unwrap(), ff);
            }
        }

        #[test]
        fn minmax_round_trip(v in proptest::collection::vec(-1e3f64..1e3, 2..50)) {
            let (s, p) = minmax_fit_transform(&v);
            prop_assert!(s.iter().all(|&x| (0.0..=1.0).contains(&x)));
            if p.max > p.min {
                for (a, b) in minmax_inverse(&s, &p).iter().zip(&v) {
                    prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }

        #[test]
        fn pearson_unchanged_by_minmax(x in proptest::collection::vec(-50.0f64..50.0, 3..40), seed in 0u64..1000) {
            let y: Vec<f64> = x.iter().enumerate().map(|(i, a)| a * 0.3 + ((i as u64 * 7919 + seed) % 13) as f64).collect();
            let (sx, p) = minmax_fit_transform(&x);
            prop_assume!(p.max > p.min);
            let r0 = pearson(&x, &y);
            prop_assume!(r0.is_finite());
            prop_assert!((pearson(&sx, &y) - r0).abs() < 1e-12);
        }

        #[test]
        fn one_hot_rows_sum_to_one(v in proptest::collection::vec("[a-d]", 1..60)) {
            let v: Vec<Option<String>> = v.into_iter().map(Some).collect();
            let cols = one_hot_encode("c", &v).unwrap();
            for row in 0..v.len() {
                let s: f64 = cols.iter().map(|c| c.data.numeric(row).unwrap()).sum();
                prop_assert_eq!(s, 1.0);
            }
        }

        #[test]
        fn window_count_matches_enumeration(rows in 2usize..=50, window in 1usize..=25, horizon in 1usize..=25) {
            prop_assume!(rows >= window + horizon);
            let f = TimeSeriesFrame::new(t(rows), vec![Column::dense("p", "", (0..rows).map(|i| i as f64).collect())]).unwrap();
            let w = make_windows(&f, &["p".into()], "p", window, horizon).unwrap();
            let enumerated = (0..rows).filter(|&i| i + window + horizon - 1 < rows).count();
            prop_assert_eq!(w.features.rows(), enumerated);
            prop_assert_eq!(w.features.cols(), window);
        }

        #[test]
        fn median_split_is_balanced(v in proptest::collection::btree_set(-1000i64..1000, 2..80)) {
            let v: Vec<f64> = v.into_iter().map(|x| x as f64).collect();
            let (labels, _) = bucket_labels(&v, 2, &LabelMode::Quantile).unwrap();
            let ones = labels.iter().filter(|&&l| l == 1).count() as i64;
            prop_assert!((v.len() as i64 - 2 * ones).abs() <= 1);
        }
    }
}
