//! Human-readable run summary.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use solarcast_core::evaluation::{percent_2dp, ModelSummary, RunReport};
use solarcast_core::models::display_name;

/// Fixed-width table with every metric as a two-decimal percent. Rows keep
/// the given order.
pub fn format_summary(rows: &[ModelSummary]) -> Result<String> {
    if rows.is_empty() {
        bail!("no models in report");
    }
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max("Model".len());
    let mut out = String::new();
    let _ =
        writeln!(out, "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}", "Model", "Accuracy", "Precision", "Recall", "F1-Score");
    for r in rows {
        let pct = |x: f64| format!("{}%", percent_2dp(x));
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}",
            r.name,
            pct(r.accuracy),
            pct(r.macro_precision),
            pct(r.macro_recall),
            pct(r.macro_f1)
        );
    }
    Ok(out)
}

/// Pooled metrics of every model in `report`, in configuration order.
pub fn emit_report_summary(report: &RunReport) -> Result<String> {
    format_summary(&report.summaries(|key| display_name(key).to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, a: f64, p: f64, r: f64, f: f64) -> ModelSummary {
        ModelSummary { name: name.into(), accuracy: a, macro_precision: p, macro_recall: r, macro_f1: f }
    }

    #[test]
    fn fig9_fixture() {
        let text = format_summary(&[
            row("Logistic Regression", 0.8402708818093002, 0.85, 0.84, 0.84),
            row("Random Forest", 0.9726204620814918, 0.97, 0.97, 0.97),
            row("XGBoost", 0.9726324905810166, 0.97, 0.97, 0.97),
        ])
        .unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("Logistic Regression     84.02%"), "{text}");
        assert!(lines[2].starts_with("Random Forest           97.26%"), "{text}");
        assert!(lines[3].starts_with("XGBoost                 97.26%"), "{text}");
        assert!(lines[1].ends_with("85.00%     84.00%     84.00%"), "{text}");
    }

    #[test]
    fn empty_is_an_error() {
        assert!(format_summary(&[]).is_err());
    }
}
