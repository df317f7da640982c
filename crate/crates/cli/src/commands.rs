//! Subcommand implementations. Each reads its inputs from, and writes its
//! outputs to, the run directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use serde::{Deserialize, Serialize};
use solarcast_core::analytics::{
    groupby_mean, hierarchical_rollup, histogram_kde, pearson_matrix, summary_stats, PlotData,
};
use solarcast_core::evaluation::{compare_models, run_cv, sliding_windows, RunReport, Trainer};
use solarcast_core::models::{display_name, ClassifierModel};
use solarcast_core::pipeline::{load_source, prepare, PipelineConfig, Prepared};
use solarcast_core::preprocess::{LabelSpec, LabeledDataset, Matrix, MinMaxScaler, ScalingParams};
use solarcast_core::rng::derive_seed;
use solarcast_core::synth;
use solarcast_core::timeseries::{parse_csv, write_csv, ColumnData, TimeSeriesFrame, Timestamp};

use crate::config::{canonical_json, run_dir};
use crate::summary::emit_report_summary;

pub const DATA_FILE: &str = "data.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const SCALING_FILE: &str = "scaling.json";
pub const LABEL_SPEC_FILE: &str = "label_spec.json";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const COMPARISON_FILE: &str = "comparison.csv";

/// Histogram resolution of the EDA target distribution.
const EDA_BINS: usize = 30;

pub struct Context {
    pub config: PipelineConfig,
    pub dir: PathBuf,
}

impl Context {
    pub fn new(config: PipelineConfig) -> Self {
        let dir = run_dir(&config);
        Self { config, dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Create the run directory and echo the resolved config into it.
    fn prepare_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        write_text(&self.path("config.json"), &(canonical_json(&self.config) + "\n"))
    }

    fn seed(&self) -> Result<u64> {
        Ok(self.config.seed()?)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(plot: &PlotData, path: &Path) -> Result<()> {
    plot.emit(path).with_context(|| format!("writing {}", path.display()))
}

fn require(path: &Path, producer: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{} not found; run `{producer}` first", path.display());
    }
    Ok(())
}

/// The raw input frame: the configured CSV source, or the run's `data.csv`.
fn source_frame(ctx: &Context) -> Result<TimeSeriesFrame> {
    if ctx.config.ingest.path.is_some() {
        return Ok(load_source(&ctx.config)?);
    }
    let path = ctx.path(DATA_FILE);
    require(&path, "synth")?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    parse_csv(file, &synth::schema()).with_context(|| format!("parsing {}", path.display()))
}

fn prepared(ctx: &Context) -> Result<Prepared> {
    Ok(prepare(&source_frame(ctx)?, &ctx.config)?)
}

pub fn synth(ctx: &Context) -> Result<String> {
    let config = ctx.config.synth_config()?;
    let frame = synth::generate_dataset(&config)?;
    ctx.prepare_dir()?;
    let path = ctx.path(DATA_FILE);
    let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    write_csv(&frame, synth::TIMESTAMP_COLUMN, &mut out)?;
    out.flush()?;
    Ok(format!("wrote {} rows to {}\n", frame.len(), path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpecFile {
    pub target: String,
    pub class_names: Vec<String>,
    #[serde(flatten)]
    pub spec: LabelSpec,
    pub outliers_repaired: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub feature: String,
    #[serde(flatten)]
    pub params: ScalingParams,
}

pub fn preprocess(ctx: &Context) -> Result<String> {
    let prepared = prepared(ctx)?;
    ctx.prepare_dir()?;
    let ds = &prepared.dataset;
    let ts = &prepared.windows.timestamps;

    let mut w = csv::Writer::from_path(ctx.path(FEATURES_FILE))?;
    let mut header = vec!["timestamp".to_string()];
    header.extend(ds.feature_names().iter().cloned());
    w.write_record(&header)?;
    for (r, t) in ts.iter().enumerate() {
        let mut rec = vec![t.to_iso8601()];
        rec.extend(ds.features().row(r).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(ctx.path(LABELS_FILE))?;
    w.write_record(["timestamp", "target", "label", "class"])?;
    for (r, t) in ts.iter().enumerate() {
        let label = ds.labels()[r];
        w.write_record([
            t.to_iso8601(),
            prepared.windows.targets[r].to_string(),
            label.to_string(),
            ds.class_names()[label].clone(),
        ])?;
    }
    w.flush()?;

    // Scaling of the first training window, for inspection; every window refits its own.
    let first = sliding_windows(ds.n_samples(), &ctx.config.evaluation)?.remove(0);
    let scaler = MinMaxScaler::fit(&ds.features().select_rows(first.train));
    let scaling: Vec<FeatureScaling> = ds
        .feature_names()
        .iter()
        .zip(&scaler.columns)
        .map(|(f, p)| FeatureScaling { feature: f.clone(), params: *p })
        .collect();
    write_json(&ctx.path(SCALING_FILE), &scaling)?;
    write_json(
        &ctx.path(LABEL_SPEC_FILE),
        &LabelSpecFile {
            target: ctx.config.preprocess.target.clone(),
            class_names: ds.class_names().to_vec(),
            spec: prepared.label_spec.clone(),
            outliers_repaired: prepared.outliers_repaired,
        },
    )?;
    Ok(format!(
        "{} samples, {} features, class counts {:?}, thresholds {:?}\n",
        ds.n_samples(),
        ds.n_features(),
        ds.class_counts(),
        prepared.label_spec.thresholds
    ))
}

/// Read the dataset written by `preprocess`.
pub fn load_dataset(dir: &Path) -> Result<(Vec<Timestamp>, LabeledDataset)> {
    let features_path = dir.join(FEATURES_FILE);
    let labels_path = dir.join(LABELS_FILE);
    let spec_path = dir.join(LABEL_SPEC_FILE);
    for p in [&features_path, &labels_path, &spec_path] {
        require(p, "preprocess")?;
    }
    let spec: LabelSpecFile = read_json(&spec_path)?;

    let mut reader = csv::Reader::from_path(&features_path)?;
    let names: Vec<String> = reader.headers()?.iter().skip(1).map(String::from).collect();
    let mut timestamps = Vec::new();
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record?;
        timestamps.push(Timestamp::parse_iso8601(&record[0])?);
        for cell in record.iter().skip(1) {
            data.push(
                cell.parse::<f64>().with_context(|| format!("bad number {cell:?} in {}", features_path.display()))?,
            );
        }
    }
    let features = Matrix::new(timestamps.len(), names.len(), data)?;

    let mut reader = csv::Reader::from_path(&labels_path)?;
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        labels.push(record[2].parse::<usize>().with_context(|| format!("bad label in {}", labels_path.display()))?);
    }
    Ok((timestamps, LabeledDataset::new(features, labels, names, spec.class_names)?))
}

pub fn eda(ctx: &Context) -> Result<String> {
    let prepared = prepared(ctx)?;
    let frame = &prepared.frame;
    let target = &ctx.config.preprocess.target;
    ctx.prepare_dir()?;
    let dir = ctx.path("eda");
    fs::create_dir_all(&dir)?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(["column", "count", "mean", "std", "min", "q1", "median", "q3", "max"])?;
    for col in frame.columns().iter().filter(|c| c.data.is_numeric()) {
        let s = summary_stats(&frame.numeric(&col.name)?)?;
        w.write_record([
            col.name.clone(),
            s.count.to_string(),
            s.mean.to_string(),
            s.std.to_string(),
            s.min.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.max.to_string(),
        ])?;
    }
    w.flush()?;

    let continuous: Vec<String> = frame
        .columns()
        .iter()
        .filter(|c| matches!(c.data, ColumnData::Continuous { .. }))
        .map(|c| c.name.clone())
        .collect();
    let corr = pearson_matrix(frame, &continuous)?;
    emit(&PlotData::from(&corr), &dir.join("correlation.csv"))?;
    let degenerate: Vec<&String> =
        corr.names.iter().zip(&corr.degenerate).filter(|(_, &d)| d).map(|(n, _)| n).collect();
    if !degenerate.is_empty() {
        log::warn!("zero-variance columns in correlation matrix: {degenerate:?}");
    }

    let hist = histogram_kde(&frame.numeric(target)?, EDA_BINS, true)?;
    if let Some(kde) = &hist.kde {
        let curve = PlotData::Scatter {
            x_name: target.clone(),
            x: kde.x.clone(),
            y_name: "density".into(),
            y: kde.density.clone(),
        };
        emit(&curve, &dir.join(format!("kde_{target}.csv")))?;
    }
    emit(&PlotData::Histogram(hist), &dir.join(format!("histogram_{target}.csv")))?;

    let hourly = groupby_mean(frame, "hour", target)?;
    let mut w = csv::Writer::from_path(dir.join(format!("hourly_mean_{target}.csv")))?;
    w.write_record(["hour", "mean", "count"])?;
    for g in &hourly {
        let key = serde_json::to_value(&g.key)?;
        w.write_record([
            key.to_string().trim_matches('"').to_string(),
            g.mean.map(|m| m.to_string()).unwrap_or_default(),
            g.count.to_string(),
        ])?;
    }
    w.flush()?;

    emit(&PlotData::Rollup(hierarchical_rollup(frame, target)?), &dir.join(format!("rollup_{target}.json")))?;

    for x in [synth::IRRADIANCE, synth::CLOUD_COVER] {
        if frame.has_column(x) && x != target {
            let pairs: Vec<(f64, f64)> =
                frame.numeric(x)?.into_iter().zip(frame.numeric(target)?).filter_map(|(a, b)| Some((a?, b?))).collect();
            let plot = PlotData::Scatter {
                x_name: x.to_string(),
                x: pairs.iter().map(|p| p.0).collect(),
                y_name: target.clone(),
                y: pairs.iter().map(|p| p.1).collect(),
            };
            emit(&plot, &dir.join(format!("scatter_{x}_{target}.csv")))?;
        }
    }

    let week = frame.slice(0, frame.len().min(24 * 7));
    emit(
        &PlotData::TimeSeries { frame: week, columns: vec![target.clone()] },
        &dir.join(format!("first_week_{target}.csv")),
    )?;

    let mut text = String::new();
    if let Some(i) = corr.names.iter().position(|n| n == target) {
        for (j, name) in corr.names.iter().enumerate() {
            if j != i {
                text.push_str(&format!("corr({name}, {target}) = {:.3}\n", corr.values[i][j]));
            }
        }
    }
    Ok(text)
}

pub fn train(ctx: &Context) -> Result<String> {
    let (_, ds) = load_dataset(&ctx.dir)?;
    let windows = sliding_windows(ds.n_samples(), &ctx.config.evaluation)?;
    let (index, last) = (windows.len() - 1, windows[windows.len() - 1].clone());
    let train = ds.subset(last.train.clone());
    let scaler = MinMaxScaler::fit(train.features());
    let train = train.with_features(scaler.transform(train.features()))?;
    let models_dir = ctx.path("models");
    fs::create_dir_all(&models_dir)?;
    let scaling: Vec<FeatureScaling> = ds
        .feature_names()
        .iter()
        .zip(&scaler.columns)
        .map(|(f, p)| FeatureScaling { feature: f.clone(), params: *p })
        .collect();
    write_json(&models_dir.join("scaler.json"), &scaling)?;
    let mut text = format!("training on samples {:?}\n", last.train);
    for (m, spec) in ctx.config.models.run.iter().enumerate() {
        // Same seed as this window gets during evaluation.
        let model = spec.fit(&train, derive_seed(ctx.seed()?, &[index as u64, m as u64]))?;
        let path = models_dir.join(format!("{}.json", spec.key()));
        write_text(&path, &(model.to_json()? + "\n"))?;
        text.push_str(&format!("wrote {}\n", path.display()));
    }
    Ok(text)
}

/// Load a model written by `train`.
pub fn load_model(path: &Path) -> Result<ClassifierModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ClassifierModel::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn evaluate(ctx: &Context) -> Result<String> {
    let (_, ds) = load_dataset(&ctx.dir)?;
    let trainers: Vec<&dyn Trainer> = ctx.config.models.run.iter().map(|m| m as &dyn Trainer).collect();
    let echo: serde_json::Value = serde_json::from_str(&canonical_json(&ctx.config))?;
    let report = run_cv(&ds, &trainers, &ctx.config.evaluation, ctx.seed()?, echo)?;
    write_text(&ctx.path(REPORT_FILE), &(report.to_json()? + "\n"))?;
    for (key, evaluation) in &report.aggregate {
        let values = evaluation.confusion.counts.iter().map(|r| r.iter().map(|&c| c as f64).collect()).collect();
        let plot =
            PlotData::Heatmap { row_labels: ds.class_names().to_vec(), col_labels: ds.class_names().to_vec(), values };
        emit(&plot, &ctx.path(&format!("confusion_{key}.csv")))?;
    }
    let summary = emit_report_summary(&report)?;
    write_text(&ctx.path(SUMMARY_FILE), &summary)?;
    let mut text = format!("{} windows evaluated, {} skipped\n", report.windows.len(), report.skipped.len());
    text.push_str(&summary);
    Ok(text)
}

pub fn compare(ctx: &Context) -> Result<String> {
    let path = ctx.path(REPORT_FILE);
    require(&path, "evaluate")?;
    let report: RunReport = read_json(&path)?;
    let table = compare_models(&report.summaries(|k| display_name(k).to_string()))?;
    write_text(&ctx.path(COMPARISON_FILE), &table.to_csv()?)?;
    Ok(table.render())
}

pub fn pipeline(ctx: &Context) -> Result<String> {
    let mut text = String::new();
    if ctx.config.ingest.path.is_none() {
        text += &synth(ctx)?;
    }
    text += &preprocess(ctx)?;
    text += &eda(ctx)?;
    text += &train(ctx)?;
    text += &evaluate(ctx)?;
    text += &compare(ctx)?;
    text += &format!("outputs in {}\n", ctx.dir.display());
    Ok(text)
}
