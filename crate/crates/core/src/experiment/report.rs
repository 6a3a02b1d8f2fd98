//! CSV output: one curve file per trial and a summary table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::metrics::{RunMetrics, TrialMetrics};
use super::runner::SweepTable;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "na".to_string(), |x| x.to_string())
}

pub fn curve_csv(t: &TrialMetrics) -> String {
    let mut s = String::from("chunk_index,seen_samples,test_accuracy\n");
    for p in &t.curve {
        writeln!(s, "{},{},{}", p.chunk_index, p.seen_samples, p.test_accuracy).unwrap();
    }
    s
}

pub fn summary_csv(runs: &[RunMetrics]) -> String {
    let mut s = String::from("model,gamma,mean_accuracy,tail_std,trials,seed\n");
    for r in runs {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.label,
            opt(r.gamma),
            r.mean_final_accuracy,
            opt(r.tail_std),
            r.trials.len(),
            r.master_seed
        )
        .unwrap();
    }
    s
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let best = table
        .runs
        .iter()
        .find(|r| r.gamma == Some(table.best_gamma))
        .and_then(|r| r.tail_std);
    format!(
        "best_gamma,best_tail_std,no_forget_tail_std,std_ratio\n{},{},{},{}\n",
        table.best_gamma,
        opt(best),
        opt(table.no_forget.tail_std),
        table.std_ratio
    )
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `curve_<label>_<trial>.csv` for every trial and `summary.csv`.
/// Returns the paths written.
pub fn emit_report(runs: &[RunMetrics], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for r in runs {
        for t in &r.trials {
            let name = format!("curve_{}_{}.csv", r.label, t.trial);
            written.push(write(dir.join(name), &curve_csv(t))?);
        }
    }
    written.push(write(dir.join("summary.csv"), &summary_csv(runs))?);
    Ok(written)
}

pub fn emit_sweep(table: &SweepTable, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut written = emit_report(&table.all_runs(), &out_dir)?;
    written.push(write(out_dir.as_ref().join("sweep.csv"), &sweep_csv(table))?);
    Ok(written)
}
