//! Text summary of final performance across runs.

use std::fmt::Write as _;

use crate::runlog::{tail_mean, RunLog};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error("no runs to compare")]
    NoRuns,
    #[error("run `{0}` has no rows")]
    Empty(String),
}

/// Final-window statistics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub name: String,
    pub rows: usize,
    pub post_mean: f64,
    /// Population standard deviation over the window.
    pub post_std: f64,
    pub pre_mean: f64,
    /// `post_mean - pre_mean`.
    pub gap: f64,
}

pub fn summarize(log: &RunLog, k: usize) -> Result<Summary, CompareError> {
    if log.rows.is_empty() {
        return Err(CompareError::Empty(log.name.clone()));
    }
    let k = k.clamp(1, log.rows.len());
    let tail = &log.rows[log.rows.len() - k..];
    let post_mean = tail_mean(tail, k, |m| m.post_return_mean);
    let pre_mean = tail_mean(tail, k, |m| m.pre_return_mean);
    let var = tail.iter().map(|m| (m.post_return_mean - post_mean).powi(2)).sum::<f64>() / k as f64;
    Ok(Summary { name: log.name.clone(), rows: log.rows.len(), post_mean, post_std: var.sqrt(), pre_mean, gap: post_mean - pre_mean })
}

/// One line per run over the last `k` iterations.
pub fn table(runs: &[RunLog], k: usize) -> Result<String, CompareError> {
    if runs.is_empty() {
        return Err(CompareError::NoRuns);
    }
    let sums = runs.iter().map(|r| summarize(r, k)).collect::<Result<Vec<_>, _>>()?;
    let width = sums.iter().map(|s| s.name.len()).max().unwrap_or(0).max(3);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>5}  {:>10}  {:>9}  {:>10}  {:>10}", "run", "rows", "post", "post_std", "pre", "gap");
    for s in &sums {
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}  {:>10.3}  {:>9.3}  {:>10.3}  {:>10.3}",
            s.name, s.rows, s.post_mean, s.post_std, s.pre_mean, s.gap
        );
    }
    Ok(out)
}
