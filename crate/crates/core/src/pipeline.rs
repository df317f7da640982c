//! Configuration and orchestration of the full pipeline.
//!
//! Stage order is fixed: merge → calendar → impute → outlier repair →
//! encode → lag → window → label. Feature scaling happens inside
//! cross-validation, fit on each training segment only.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{run_cv, RunReport, Trainer, WindowConfig};
use crate::models::ModelSpec;
use crate::preprocess::{
    bucket_labels, default_class_names, detect_outliers, impute, make_lag_features, make_windows, one_hot_frame,
    repair_outliers, Imputation, LabelMode, LabelSpec, LabeledDataset, OutlierMethod, RepairMode, WindowedSamples,
};
use crate::synth::{self, SynthConfig};
use crate::timeseries::{
    extract_calendar, merge_nearest, parse_csv, ColumnData, ColumnKind, Schema, TimeSeriesFrame, CALENDAR_COLUMNS,
};

/// One column of an input CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKindName,
    #[serde(default)]
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKindName {
    Continuous,
    Integer,
    Categorical,
}

fn build_schema(timestamp_column: &str, columns: &[ColumnSpec]) -> Schema {
    columns.iter().fold(Schema::new(timestamp_column), |s, c| {
        let kind = match c.kind {
            ColumnKindName::Continuous => ColumnKind::continuous(&c.unit),
            ColumnKindName::Integer => ColumnKind::Integer,
            ColumnKindName::Categorical => ColumnKind::Categorical,
        };
        s.with(&c.name, kind)
    })
}

/// Where the data comes from. With no `path`, the synthetic generator is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub path: Option<PathBuf>,
    pub timestamp_column: String,
    /// Schema of `path`; the synthetic schema when empty.
    pub columns: Vec<ColumnSpec>,
    /// Optional second source merged onto the first by nearest timestamp.
    pub weather_path: Option<PathBuf>,
    pub weather_columns: Vec<ColumnSpec>,
    pub merge_tolerance_secs: i64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            path: None,
            timestamp_column: synth::TIMESTAMP_COLUMN.to_string(),
            columns: Vec::new(),
            weather_path: None,
            weather_columns: Vec::new(),
            merge_tolerance_secs: 1800,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierConfig {
    #[serde(flatten)]
    pub method: OutlierMethod,
    pub columns: Vec<String>,
    pub repair: RepairMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Column bucketed into classes.
    pub target: String,
    /// Columns flattened into each window. Calendar columns are available.
    pub features: Vec<String>,
    /// Per-column imputation; columns not listed are filled linearly
    /// (continuous) or forward (integer, categorical) when they have gaps.
    pub imputation: BTreeMap<String, Imputation>,
    pub outliers: Option<OutlierConfig>,
    /// Categorical columns expanded into `{column}_{label}` indicator columns.
    pub one_hot: Vec<String>,
    pub lag_columns: Vec<String>,
    pub lags: Vec<usize>,
    /// Rows of history per sample. Defaults to 1: with a full day of
    /// history the cyclic hour (or any diurnal weather series) lets a linear
    /// model represent the day/night band, hiding the difference between
    /// linear and tree models the comparison is meant to show.
    pub window_len: usize,
    pub horizon: usize,
    pub classes: usize,
    pub label_mode: LabelMode,
    /// Defaults to low/high, low/medium/high or class_i.
    pub class_names: Option<Vec<String>>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target: synth::POWER.to_string(),
            features: ["hour", "month", synth::CLOUD_COVER, synth::AMBIENT_TEMP, synth::HUMIDITY, synth::WIND_SPEED]
                .map(String::from)
                .to_vec(),
            imputation: BTreeMap::new(),
            outliers: Some(OutlierConfig {
                method: OutlierMethod::Zscore { threshold: 4.0 },
                columns: vec![synth::WIND_SPEED.to_string()],
                repair: RepairMode::ReplaceWithInterpolation,
            }),
            one_hot: vec![synth::WEATHER_CONDITION.to_string()],
            lag_columns: Vec::new(),
            lags: vec![24],
            // current observations only; see the note on `window_len`
            window_len: 1,
            horizon: 1,
            classes: 2,
            label_mode: LabelMode::Quantile,
            class_names: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsConfig {
    /// Models to run, in report order.
    pub run: Vec<ModelSpec>,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self { run: ModelSpec::defaults() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("runs") }
    }
}

/// Everything a run needs. `seed` drives data generation and training.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub synth: SynthConfig,
    pub ingest: IngestConfig,
    pub preprocess: PreprocessConfig,
    pub models: ModelsConfig,
    pub evaluation: WindowConfig,
    pub output: OutputConfig,
}

impl PipelineConfig {
    /// The run seed; configs without one are rejected rather than defaulted.
    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidParameter("no seed given (set `seed` in the config or pass --seed)".into()))
    }

    /// Synthetic-data config with the run seed applied.
    pub fn synth_config(&self) -> Result<SynthConfig> {
        Ok(SynthConfig { seed: self.seed()?, ..self.synth.clone() })
    }

    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        if self.ingest.path.is_none() {
            self.synth.validate()?;
        }
        for m in &self.models.run {
            m.validate()?;
        }
        if self.models.run.is_empty() {
            return Err(Error::InvalidParameter("models.run is empty".into()));
        }
        let p = &self.preprocess;
        if p.classes < 2 {
            return Err(Error::InvalidParameter(format!("preprocess.classes must be >= 2, got {}", p.classes)));
        }
        if let Some(names) = &p.class_names {
            if names.len() != p.classes {
                return Err(Error::InvalidParameter(format!("{} class names for {} classes", names.len(), p.classes)));
            }
        }
        if p.lags.contains(&0) {
            return Err(Error::InvalidParameter("lags must be >= 1".into()));
        }
        Ok(())
    }

    pub fn class_names(&self) -> Vec<String> {
        self.preprocess.class_names.clone().unwrap_or_else(|| default_class_names(self.preprocess.classes))
    }
}

/// Read the configured CSV source(s), or generate synthetic data.
pub fn load_source(config: &PipelineConfig) -> Result<TimeSeriesFrame> {
    let ingest = &config.ingest;
    let Some(path) = &ingest.path else {
        return synth::generate_dataset(&config.synth_config()?);
    };
    let schema = if ingest.columns.is_empty() {
        synth::schema()
    } else {
        build_schema(&ingest.timestamp_column, &ingest.columns)
    };
    let frame = parse_csv(File::open(path)?, &schema)?;
    match &ingest.weather_path {
        None => Ok(frame),
        Some(weather) => {
            let weather_schema = build_schema(&ingest.timestamp_column, &ingest.weather_columns);
            let right = parse_csv(File::open(weather)?, &weather_schema)?;
            merge_nearest(&frame, &right, ingest.merge_tolerance_secs)
        }
    }
}

/// Output of the feature-engineering stages.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Frame after calendar, imputation, outlier, encoding and lag stages.
    pub frame: TimeSeriesFrame,
    pub windows: WindowedSamples,
    pub dataset: LabeledDataset,
    pub label_spec: LabelSpec,
    pub outliers_repaired: usize,
}

/// Names of the indicator columns a one-hot stage produced for `column`.
fn one_hot_outputs<'a>(frame: &'a TimeSeriesFrame, column: &str) -> impl Iterator<Item = String> + 'a {
    let prefix = format!("{column}_");
    frame.column_names().into_iter().filter(move |n| n.starts_with(&prefix)).map(String::from)
}

/// Run every stage from a raw frame to a labelled dataset.
pub fn prepare(source: &TimeSeriesFrame, config: &PipelineConfig) -> Result<Prepared> {
    let p = &config.preprocess;
    let mut frame = extract_calendar(source)?;

    let gaps: Vec<(String, Imputation)> = frame
        .columns()
        .iter()
        .filter_map(|c| {
            let how = p.imputation.get(&c.name).copied();
            let gappy = (0..c.data.len()).any(|r| c.data.is_missing(r));
            match (how, &c.data) {
                (Some(how), _) => Some((c.name.clone(), how)),
                (None, ColumnData::Continuous { .. }) if gappy => Some((c.name.clone(), Imputation::Linear)),
                (None, _) if gappy => Some((c.name.clone(), Imputation::ForwardFill)),
                _ => None,
            }
        })
        .collect();
    for (name, how) in gaps {
        frame = impute(frame, &name, how)?;
    }

    let mut outliers_repaired = 0;
    if let Some(o) = &p.outliers {
        let mask = detect_outliers(&frame, &o.columns, o.method)?;
        outliers_repaired = mask.count();
        if outliers_repaired > 0 {
            log::info!("repairing {outliers_repaired} outlier cells ({:?})", o.repair);
        }
        frame = repair_outliers(&frame, &mask, o.repair)?;
    }

    // Expanding a categorical feature replaces it with its indicator columns.
    let mut features = Vec::new();
    for name in &p.features {
        if p.one_hot.contains(name) {
            continue;
        }
        features.push(name.clone());
    }
    for column in &p.one_hot {
        frame = one_hot_frame(frame, column)?;
        if p.features.contains(column) {
            features.extend(one_hot_outputs(&frame, column).collect::<Vec<_>>());
        }
    }

    if !p.lag_columns.is_empty() && !p.lags.is_empty() {
        frame = make_lag_features(&frame, &p.lag_columns, &p.lags)?;
        for c in &p.lag_columns {
            features.extend(p.lags.iter().map(|l| format!("{c}_lag_{l}")));
        }
    }

    let windows = make_windows(&frame, &features, &p.target, p.window_len, p.horizon)?;
    let (labels, label_spec) = bucket_labels(&windows.targets, p.classes, &p.label_mode)?;
    let dataset =
        LabeledDataset::new(windows.features.clone(), labels, windows.feature_names.clone(), config.class_names())?;
    Ok(Prepared { frame, windows, dataset, label_spec, outliers_repaired })
}

/// Names usable in `preprocess.features` besides the frame's own columns.
pub fn calendar_columns() -> &'static [&'static str] {
    &CALENDAR_COLUMNS
}

/// Cross-validate every configured model on a prepared dataset.
pub fn evaluate(prepared: &Prepared, config: &PipelineConfig) -> Result<RunReport> {
    let trainers: Vec<&dyn Trainer> = config.models.run.iter().map(|m| m as &dyn Trainer).collect();
    let echo = serde_json::to_value(config)?;
    run_cv(&prepared.dataset, &trainers, &config.evaluation, config.seed()?, echo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PipelineConfig {
        PipelineConfig {
            seed: Some(3),
            synth: SynthConfig { n_hours: 24 * 12, ..Default::default() },
            evaluation: WindowConfig { train_len: 120, test_len: 48, step: 48 },
            models: ModelsConfig {
                run: vec![
                    ModelSpec::Logistic(Default::default()),
                    ModelSpec::Forest(crate::models::ForestParams { n_trees: 5, ..Default::default() }),
                ],
            },
            ..Default::default()
        }
    }

    #[test]
    fn seed_is_required() {
        let c = PipelineConfig::default();
        assert!(c.seed().is_err());
        assert!(c.validate().is_err());
        assert!(small().validate().is_ok());
    }

    #[test]
    fn prepare_produces_expected_shape() {
        let c = small();
        let source = load_source(&c).unwrap();
        let prepared = prepare(&source, &c).unwrap();
        let n = source.len() - 1;
        assert_eq!(prepared.dataset.n_samples(), n);
        // hour, month, cloud, temp, humidity, wind
        assert_eq!(prepared.dataset.n_features(), 6);
        let counts = prepared.dataset.class_counts();
        assert!(counts[0].abs_diff(counts[1]) <= n / 10, "{counts:?}");
    }

    #[test]
    fn one_hot_features_expand() {
        let mut c = small();
        c.preprocess.features.push(synth::WEATHER_CONDITION.to_string());
        c.preprocess.window_len = 2;
        let base = prepare(&load_source(&small()).unwrap(), &small()).unwrap().dataset.n_features();
        assert_eq!(base, 6);
        let prepared = prepare(&load_source(&c).unwrap(), &c).unwrap();
        assert!(prepared.dataset.feature_names().iter().any(|n| n.starts_with("weather_condition_")));
    }

    #[test]
    fn lag_features_are_added() {
        let mut c = small();
        c.preprocess.lag_columns = vec![synth::POWER.to_string()];
        c.preprocess.window_len = 1;
        let source = load_source(&c).unwrap();
        let prepared = prepare(&source, &c).unwrap();
        assert_eq!(prepared.dataset.n_samples(), source.len() - 24 - 1);
        assert!(prepared.dataset.feature_names().contains(&"power_kwh_lag_24_t-1".to_string()));
    }

    #[test]
    fn evaluation_runs_and_is_deterministic() {
        let c = small();
        let prepared = prepare(&load_source(&c).unwrap(), &c).unwrap();
        let a = evaluate(&prepared, &c).unwrap();
        let b = evaluate(&prepared, &c).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.models, ["logistic", "forest"]);
    }
}
