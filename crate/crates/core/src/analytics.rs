//! Exploratory statistics and plot-data emission.
//!
//! Everything here is read-only over a frame. Plot data is written as CSV
//! (tabular kinds) or JSON (the calendar rollup) so any charting tool can
//! render it; output bytes are a pure function of the input.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{quantile_sorted, sorted_present};
use crate::timeseries::{ColumnData, TimeSeriesFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn summary_stats(values: &[Option<f64>]) -> Result<SummaryStats> {
    let sorted = sorted_present(values);
    let n = sorted.len();
    if n == 0 {
        return Err(Error::TooFewValues { needed: 1, found: 0 });
    }
    // Summing in sorted order keeps the result independent of row order.
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std =
        if n > 1 { (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(SummaryStats {
        count: n,
        mean,
        std,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
    })
}

/// Pearson correlation of one pair of series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Either series had zero variance (or fewer than two shared rows);
    /// `r` is then reported as 0.
    pub degenerate: bool,
}

/// Pearson r over rows where both values are present.
pub fn pearson(x: &[Option<f64>], y: &[Option<f64>]) -> Correlation {
    let pairs: Vec<(f64, f64)> = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return Correlation { r: 0.0, degenerate: true };
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Correlation { r: 0.0, degenerate: true };
    }
    Correlation { r: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0), degenerate: false }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Per variable: true when it had zero variance against some partner.
    pub degenerate: Vec<bool>,
}

pub fn pearson_matrix(frame: &TimeSeriesFrame, columns: &[String]) -> Result<CorrelationMatrix> {
    if frame.len() < 2 {
        return Err(Error::TooFewValues { needed: 2, found: frame.len() });
    }
    let series: Vec<Vec<Option<f64>>> = columns.iter().map(|c| frame.numeric(c)).collect::<Result<_>>()?;
    let k = columns.len();
    let mut values = vec![vec![0.0; k]; k];
    let mut degenerate = vec![false; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let c = pearson(&series[i], &series[j]);
            values[i][j] = c.r;
            values[j][i] = c.r;
            if c.degenerate {
                degenerate[i] = true;
                degenerate[j] = true;
            }
        }
    }
    Ok(CorrelationMatrix { names: columns.to_vec(), values, degenerate })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupKey {
    Integer(i64),
    Label(String),
}

impl std::fmt::Display for GroupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Integer(i) => write!(f, "{i}"),
            Self::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMean {
    pub key: GroupKey,
    /// `None` when every value in the group is missing.
    pub mean: Option<f64>,
    pub count: usize,
}

/// Mean of `value` per distinct `key`, keys ascending. Rows with a missing key
/// are skipped.
pub fn groupby_mean(frame: &TimeSeriesFrame, key: &str, value: &str) -> Result<Vec<GroupMean>> {
    let keys: Vec<Option<GroupKey>> = match &frame.column(key)?.data {
        ColumnData::Integer(v) => v.iter().map(|k| k.map(GroupKey::Integer)).collect(),
        ColumnData::Categorical(v) => v.iter().map(|k| k.clone().map(GroupKey::Label)).collect(),
        other => {
            return Err(Error::ColumnKind {
                column: key.to_string(),
                expected: "integer or categorical",
                found: other.kind_name(),
            })
        }
    };
    let values = frame.numeric(value)?;
    let mut groups: std::collections::BTreeMap<GroupKey, Vec<f64>> = Default::default();
    for (k, v) in keys.into_iter().zip(values) {
        if let Some(k) = k {
            let entry = groups.entry(k).or_default();
            if let Some(v) = v {
                entry.push(v);
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|(key, mut vals)| {
            vals.sort_by(f64::total_cmp);
            let count = vals.len();
            let mean = (count > 0).then(|| vals.iter().sum::<f64>() / count as f64);
            GroupMean { key, mean, count }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub bandwidth: f64,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    /// `bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub kde: Option<KdeCurve>,
}

/// Grid resolution of the density estimate.
pub const KDE_GRID_POINTS: usize = 256;

/// Equal-width histogram over `[min, max]`, optionally with a Gaussian KDE
/// (Silverman bandwidth `1.06·s·n^(−1/5)`) on a 256-point grid over the data
/// range. The top edge is inclusive.
pub fn histogram_kde(values: &[Option<f64>], bins: usize, kde: bool) -> Result<HistogramSpec> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be >= 1".into()));
    }
    let data = sorted_present(values);
    if data.is_empty() {
        return Err(Error::TooFewValues { needed: 1, found: 0 });
    }
    let (min, max) = (data[0], data[data.len() - 1]);
    let (lo, hi) = if max > min { (min, max) } else { (min - 0.5, max + 0.5) };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
    let mut counts = vec![0usize; bins];
    for &x in &data {
        let idx = (((x - lo) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }

    let kde = if kde {
        let n = data.len();
        if n < 2 {
            return Err(Error::TooFewValues { needed: 2, found: n });
        }
        let stats = summary_stats(values)?;
        if stats.std == 0.0 {
            return Err(Error::InvalidParameter("KDE of a constant column has zero bandwidth".into()));
        }
        let h = 1.06 * stats.std * (n as f64).powf(-0.2);
        let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
        let step = (max - min) / (KDE_GRID_POINTS - 1) as f64;
        let x: Vec<f64> = (0..KDE_GRID_POINTS).map(|i| min + step * i as f64).collect();
        let density = x
            .iter()
            .map(|&g| norm * data.iter().map(|&xi| (-0.5 * ((g - xi) / h).powi(2)).exp()).sum::<f64>())
            .collect();
        Some(KdeCurve { bandwidth: h, x, density })
    } else {
        None
    };
    Ok(HistogramSpec { edges, counts, kde })
}

/// One node of the month → weekday → hour power rollup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollupNode {
    pub name: String,
    pub value: f64,
    /// Quintile (0–4) of the leaf's total among all leaves; `None` on
    /// internal nodes.
    pub bucket: Option<u8>,
    pub children: Vec<RollupNode>,
}

impl RollupNode {
    /// Depth-first `(path, node)` pairs, root first.
    pub fn flatten(&self) -> Vec<(Vec<String>, &RollupNode)> {
        fn walk<'a>(node: &'a RollupNode, path: &mut Vec<String>, out: &mut Vec<(Vec<String>, &'a RollupNode)>) {
            path.push(node.name.clone());
            out.push((path.clone(), node));
            for c in &node.children {
                walk(c, path, out);
            }
            path.pop();
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn leaves(&self) -> Vec<&RollupNode> {
        self.flatten().into_iter().map(|(_, n)| n).filter(|n| n.children.is_empty() && n.bucket.is_some()).collect()
    }
}

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];
const WEEKDAYS: [&str; 7] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];

/// Sum `value_column` over month → weekday → hour using the calendar
/// columns, and assign every leaf a quintile power bucket.
pub fn hierarchical_rollup(frame: &TimeSeriesFrame, value_column: &str) -> Result<RollupNode> {
    let month = frame.integer("month")?;
    let weekday = frame.integer("weekday")?;
    let hour = frame.integer("hour")?;
    let values = frame.numeric(value_column)?;

    type Leaves = std::collections::BTreeMap<(i64, i64, i64), f64>;
    let mut leaves: Leaves = Default::default();
    for row in 0..frame.len() {
        if let (Some(m), Some(w), Some(h), Some(v)) = (month[row], weekday[row], hour[row], values[row]) {
            *leaves.entry((m, w, h)).or_insert(0.0) += v;
        }
    }

    let mut sorted: Vec<f64> = leaves.values().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let cuts: Vec<f64> =
        if sorted.is_empty() { Vec::new() } else { (1..5).map(|j| quantile_sorted(&sorted, j as f64 / 5.0)).collect() };
    let bucket_of = |v: f64| cuts.iter().filter(|&&c| c < v).count() as u8;

    let mut root = RollupNode { name: "all".into(), value: 0.0, bucket: None, children: Vec::new() };
    for (&(m, w, h), &v) in &leaves {
        let month_name = MONTHS.get((m - 1) as usize).map_or_else(|| m.to_string(), |s| s.to_string());
        let weekday_name = WEEKDAYS.get(w as usize).map_or_else(|| w.to_string(), |s| s.to_string());
        if root.children.last().is_none_or(|c| c.name != month_name) {
            root.children.push(RollupNode { name: month_name, value: 0.0, bucket: None, children: Vec::new() });
        }
        let month_node = root.children.last_mut().unwrap();
        if month_node.children.last().is_none_or(|c| c.name != weekday_name) {
            month_node.children.push(RollupNode { name: weekday_name, value: 0.0, bucket: None, children: Vec::new() });
        }
        month_node.children.last_mut().unwrap().children.push(RollupNode {
            name: format!("{h:02}:00"),
            value: v,
            bucket: Some(bucket_of(v)),
            children: Vec::new(),
        });
    }
    // Parents are the sums of their children, bottom-up.
    for m in &mut root.children {
        for w in &mut m.children {
            w.value = w.children.iter().map(|c| c.value).sum();
        }
        m.value = m.children.iter().map(|c| c.value).sum();
    }
    root.value = root.children.iter().map(|c| c.value).sum();
    Ok(root)
}

/// Plot-ready data in one of the supported shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotData {
    /// Timestamp plus the named series.
    TimeSeries {
        frame: TimeSeriesFrame,
        columns: Vec<String>,
    },
    Scatter {
        x_name: String,
        x: Vec<f64>,
        y_name: String,
        y: Vec<f64>,
    },
    /// Written as `(row, col, value)` triples.
    Heatmap {
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Vec<Vec<f64>>,
    },
    Histogram(HistogramSpec),
    Rollup(RollupNode),
}

impl PlotData {
    pub fn is_json(&self) -> bool {
        matches!(self, Self::Rollup(_))
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        if let Self::Rollup(root) = self {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, root)?;
            w.write_all(b"\n")?;
            return Ok(());
        }
        let mut csv = csv::Writer::from_writer(w);
        match self {
            Self::TimeSeries { frame, columns } => {
                let mut header = vec!["timestamp".to_string()];
                header.extend(columns.iter().cloned());
                csv.write_record(&header)?;
                let series: Vec<Vec<Option<f64>>> = columns.iter().map(|c| frame.numeric(c)).collect::<Result<_>>()?;
                for (row, ts) in frame.timestamps().iter().enumerate() {
                    let mut rec = vec![ts.to_iso8601()];
                    rec.extend(series.iter().map(|s| s[row].map(|v| v.to_string()).unwrap_or_default()));
                    csv.write_record(&rec)?;
                }
            }
            Self::Scatter { x_name, x, y_name, y } => {
                if x.len() != y.len() {
                    return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
                }
                csv.write_record([x_name, y_name])?;
                for (a, b) in x.iter().zip(y) {
                    csv.write_record([a.to_string(), b.to_string()])?;
                }
            }
            Self::Heatmap { row_labels, col_labels, values } => {
                csv.write_record(["row", "col", "value"])?;
                for (r, label) in row_labels.iter().enumerate() {
                    for (c, col) in col_labels.iter().enumerate() {
                        csv.write_record([label.clone(), col.clone(), values[r][c].to_string()])?;
                    }
                }
            }
            Self::Histogram(spec) => {
                csv.write_record(["bin_start", "bin_end", "count"])?;
                for (i, count) in spec.counts.iter().enumerate() {
                    csv.write_record([spec.edges[i].to_string(), spec.edges[i + 1].to_string(), count.to_string()])?;
                }
            }
            Self::Rollup(_) => unreachable!(),
        }
        csv.flush()?;
        Ok(())
    }

    /// Write to `path`, replacing any existing file.
    pub fn emit(&self, path: &Path) -> Result<()> {
        let mut file = BufWriter::new(File::create(path)?);
        self.write_to(&mut file)?;
        file.flush()?;
        Ok(())
    }
}

impl From<&CorrelationMatrix> for PlotData {
    fn from(m: &CorrelationMatrix) -> Self {
        Self::Heatmap { row_labels: m.names.clone(), col_labels: m.names.clone(), values: m.values.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{Column, Timestamp};
    use proptest::prelude::*;

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    fn frame(cols: Vec<Column>) -> TimeSeriesFrame {
        let n = cols.first().map_or(0, Column::len);
        TimeSeriesFrame::new((0..n as i64).map(|i| Timestamp::from_epoch_seconds(i * 3600)).collect(), cols).unwrap()
    }

    #[test]
    fn summary_examples() {
        let s = summary_stats(&[Some(5.0)]).unwrap();
        assert_eq!((s.count, s.mean, s.std, s.min, s.max), (1, 5.0, 0.0, 5.0, 5.0));
        let s = summary_stats(&some(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!((s.mean, s.median, s.q1, s.q3), (2.5, 2.5, 1.75, 3.25));
        assert!(summary_stats(&[None]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = some(&[1.0, 2.0, 3.0, 4.0]);
        let affine = some(&[5.0, 7.0, 9.0, 11.0]);
        let neg = some(&[-1.0, -2.0, -3.0, -4.0]);
        assert!((pearson(&x, &affine).r - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).r + 1.0).abs() < 1e-12);
        let r = pearson(&some(&[1.0, 2.0, 3.0]), &some(&[1.0, 3.0, 2.0])).r;
        assert!((r - 0.5).abs() < 1e-12);
        let flat = pearson(&x, &some(&[2.0; 4]));
        assert_eq!((flat.r, flat.degenerate), (0.0, true));
    }

    #[test]
    fn correlation_matrix_shape() {
        let f = frame(vec![
            Column::dense("a", "", vec![1.0, 2.0, 3.0, 5.0]),
            Column::dense("b", "", vec![2.0, 1.0, 4.0, 3.0]),
            Column::dense("c", "", vec![1.0, 1.0, 1.0, 1.0]),
        ]);
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let m = pearson_matrix(&f, &names).unwrap();
        for i in 0..3 {
            assert_eq!(m.values[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(m.values[i][j], m.values[j][i]);
                assert!((-1.0..=1.0).contains(&m.values[i][j]));
            }
        }
        assert_eq!(m.degenerate, vec![true, true, true]);
        assert_eq!(m.values[0][2], 0.0);
        let direct = pearson(&f.numeric("a").unwrap(), &f.numeric("b").unwrap()).r;
        assert_eq!(m.values[0][1], direct);
    }

    #[test]
    fn groupby_examples() {
        let f = frame(vec![
            Column::integer("hour", vec![Some(0), Some(0), Some(1)]),
            Column::dense("p", "", vec![1.0, 3.0, 5.0]),
        ]);
        let g = groupby_mean(&f, "hour", "p").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!((g[0].key.clone(), g[0].mean), (GroupKey::Integer(0), Some(2.0)));
        assert_eq!((g[1].key.clone(), g[1].mean), (GroupKey::Integer(1), Some(5.0)));

        let f = frame(vec![Column::integer("k", vec![Some(1); 3]), Column::dense("p", "", vec![1.0, 2.0, 6.0])]);
        assert_eq!(groupby_mean(&f, "k", "p").unwrap()[0].mean, Some(3.0));

        let f = frame(vec![
            Column::integer("k", vec![Some(1), Some(2)]),
            Column::continuous("p", "", vec![Some(1.0), None]),
        ]);
        let g = groupby_mean(&f, "k", "p").unwrap();
        assert_eq!(g[1].mean, None);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram_kde(&some(&[0.0, 1.0]), 2, false).unwrap();
        assert_eq!(h.counts, vec![1, 1]);
        assert_eq!(h.edges, vec![0.0, 0.5, 1.0]);
        assert!(histogram_kde(&some(&[3.0, 3.0]), 5, true).is_err());
        let h = histogram_kde(&some(&[3.0, 3.0]), 5, false).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 2);
    }

    #[test]
    fn kde_integrates_to_about_one() {
        // deterministic pseudo-normal sample via sums of uniforms
        let mut state = 12345u64;
        let mut uniform = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let data: Vec<Option<f64>> = (0..1000).map(|_| Some((0..12).map(|_| uniform()).sum::<f64>() - 6.0)).collect();
        let h = histogram_kde(&data, 30, true).unwrap();
        let kde = h.kde.unwrap();
        assert!(kde.density.iter().all(|&d| d >= 0.0));
        let area: f64 =
            kde.x.windows(2).zip(kde.density.windows(2)).map(|(x, d)| (x[1] - x[0]) * (d[0] + d[1]) / 2.0).sum();
        assert!((area - 1.0).abs() < 0.05, "area {area}");
    }

    fn calendar_frame(month: Vec<i64>, weekday: Vec<i64>, hour: Vec<i64>, power: Vec<f64>) -> TimeSeriesFrame {
        frame(vec![
            Column::integer("month", month.into_iter().map(Some).collect()),
            Column::integer("weekday", weekday.into_iter().map(Some).collect()),
            Column::integer("hour", hour.into_iter().map(Some).collect()),
            Column::dense("power", "", power),
        ])
    }

    #[test]
    fn rollup_single_path() {
        let f = calendar_frame(vec![11; 3], vec![2; 3], vec![8; 3], vec![1.0, 2.0, 3.5]);
        let root = hierarchical_rollup(&f, "power").unwrap();
        assert_eq!(root.value, 6.5);
        let leaves = root.leaves();
        assert_eq!(leaves.len(), 1);
        assert_eq!(leaves[0].value, 6.5);
        assert_eq!(root.children[0].name, "November");
        assert_eq!(root.children[0].children[0].name, "Wednesday");
    }

    #[test]
    fn rollup_enumeration() {
        // 2 months x 1 weekday x 2 hours, two rows per leaf
        let f = calendar_frame(
            vec![1, 1, 1, 1, 2, 2, 2, 2],
            vec![0; 8],
            vec![7, 7, 8, 8, 7, 7, 8, 8],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        );
        let root = hierarchical_rollup(&f, "power").unwrap();
        let leaf_values: Vec<f64> = root.leaves().iter().map(|l| l.value).collect();
        assert_eq!(leaf_values, vec![3.0, 7.0, 11.0, 15.0]);
        assert_eq!(root.children[0].value, 10.0);
        assert_eq!(root.children[1].value, 26.0);
        assert_eq!(root.value, 36.0);
        let buckets: Vec<u8> = root.leaves().iter().map(|l| l.bucket.unwrap()).collect();
        assert!(buckets.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(buckets[0], 0);
        assert_eq!(buckets[3], 4);
    }

    #[test]
    fn rollup_requires_calendar_columns() {
        let f = frame(vec![Column::dense("power", "", vec![1.0])]);
        assert!(matches!(hierarchical_rollup(&f, "power"), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn plot_data_shapes() {
        let heat = PlotData::Heatmap {
            row_labels: vec!["a".into(), "b".into()],
            col_labels: vec!["a".into(), "b".into()],
            values: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        };
        let mut buf = Vec::new();
        heat.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next(), Some("row,col,value"));
        let mut again = Vec::new();
        heat.write_to(&mut again).unwrap();
        assert_eq!(buf, again);

        let scatter = PlotData::Scatter {
            x_name: "x".into(),
            x: vec![1.0, 2.0, 3.0],
            y_name: "y".into(),
            y: vec![3.0, 2.0, 1.0],
        };
        let mut buf = Vec::new();
        scatter.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn rollup_json_shape() {
        let f = calendar_frame(vec![1], vec![0], vec![0], vec![2.0]);
        let root = hierarchical_rollup(&f, "power").unwrap();
        let mut buf = Vec::new();
        PlotData::Rollup(root).write_to(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["name"], "all");
        assert_eq!(v["children"][0]["children"][0]["children"][0]["bucket"], 0);
        assert!(v["bucket"].is_null());
    }

    proptest! {
        #[test]
        fn histogram_counts_sum_to_n(v in proptest::collection::vec(-1e3f64..1e3, 1..200), bins in 1usize..40) {
            let h = histogram_kde(&some(&v), bins, false).unwrap();
            prop_assert_eq!(h.counts.iter().sum::<usize>(), v.len());
            prop_assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn stats_and_groups_ignore_row_order(
            rows in proptest::collection::vec((0i64..4, -100.0f64..100.0), 1..60),
            perm_seed in any::<u64>(),
        ) {
            let mut shuffled = rows.clone();
            let mut s = perm_seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let mk = |r: &[(i64, f64)]| frame(vec![
                Column::integer("k", r.iter().map(|x| Some(x.0)).collect()),
                Column::dense("v", "", r.iter().map(|x| x.1).collect()),
            ]);
            let (a, b) = (mk(&rows), mk(&shuffled));
            prop_assert_eq!(summary_stats(&a.numeric("v").unwrap()).unwrap(), summary_stats(&b.numeric("v").unwrap()).unwrap());
            prop_assert_eq!(groupby_mean(&a, "k", "v").unwrap(), groupby_mean(&b, "k", "v").unwrap());
        }

        #[test]
        fn rollup_conserves_totals(rows in proptest::collection::vec((1i64..=12, 0i64..7, 0i64..24, 0.0f64..5.0), 1..150)) {
            let f = calendar_frame(
                rows.iter().map(|r| r.0).collect(),
                rows.iter().map(|r| r.1).collect(),
                rows.iter().map(|r| r.2).collect(),
                rows.iter().map(|r| r.3).collect(),
            );
            let root = hierarchical_rollup(&f, "power").unwrap();
            for (_, node) in root.flatten() {
                if !node.children.is_empty() {
                    let s: f64 = node.children.iter().map(|c| c.value).sum();
                    prop_assert!((s - node.value).abs() <= 1e-9 * node.value.abs().max(1.0));
                }
            }
            let direct: f64 = rows.iter().map(|r| r.3).sum();
            prop_assert!((root.value - direct).abs() <= 1e-9 * direct.max(1.0));
        }
    }
}
