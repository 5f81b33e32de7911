use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, HarnessError, RunResult};

/// Shortest scientific notation that round-trips, e.g. `3.95E-4`.
pub fn sci(v: f64) -> String {
    format!("{v:E}")
}

fn max_runs(results: &[RunResult]) -> usize {
    results.iter().map(|r| r.runs.len()).max().unwrap_or(0)
}

/// `dataset,model,split,mse_avg,mse_std,alpha_run1..alpha_runK`; α cells are
/// empty for integer-order models and failed runs.
pub fn report_csv(results: &[RunResult]) -> String {
    let k = max_runs(results);
    let mut out = String::from("dataset,model,split,mse_avg,mse_std");
    for i in 1..=k {
        let _ = write!(out, ",alpha_run{i}");
    }
    out.push('\n');
    for r in results {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.dataset,
            r.model.as_str(),
            r.split.as_str(),
            sci(r.mse_avg),
            sci(r.mse_std)
        );
        for i in 0..k {
            out.push(',');
            if let Some(a) = r.runs.get(i).and_then(|run| run.outcome.as_ref().ok()).and_then(|s| s.alpha) {
                out.push_str(&sci(a));
            }
        }
        out.push('\n');
    }
    out
}

/// Aligned plain-text table of the same rows, with two-decimal mantissas.
pub fn report_text(results: &[RunResult]) -> String {
    let k = max_runs(results);
    let mut header = vec!["Dataset".to_string(), "Model".into(), "Split".into(), "MSE_avg ± std".into()];
    header.extend((1..=k).map(|i| format!("α run {i}")));
    let mut rows = vec![header];
    for r in results {
        let mut row = vec![
            r.dataset.clone(),
            r.model.as_str().to_string(),
            r.split.as_str().to_string(),
            format!("{:.2E} ± {:.2E}", r.mse_avg, r.mse_std),
        ];
        for i in 0..k {
            row.push(match r.runs.get(i).map(|run| &run.outcome) {
                Some(Ok(s)) => s.alpha.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into()),
                Some(Err(_)) => "failed".into(),
                None => String::new(),
            });
        }
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::from("# std: population standard deviation over successful runs\n");
    for row in &rows {
        let cells: Vec<String> =
            row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}", w = *w)).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    let failures: Vec<String> = results
        .iter()
        .flat_map(|r| r.failures().map(move |(run, e)| format!("# {} run {}: {e}", r.dataset, run + 1)))
        .collect();
    for f in failures {
        out.push_str(&f);
        out.push('\n');
    }
    out
}

/// Write `report.csv` and `report.txt` into `dir`.
pub fn emit_report(results: &[RunResult], dir: &Path) -> Result<(), HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::Usage("no results to report".into()));
    }
    write_file(&dir.join("report.csv"), report_csv(results).as_bytes())?;
    write_file(&dir.join("report.txt"), report_text(results).as_bytes())
}
