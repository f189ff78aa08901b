use std::fmt::Write as _;

use super::config::Metric;
use super::trace::TraceColumns;
use crate::error::{Error, Result};

/// Cross-seed statistics at one query index.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub t: usize,
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean (sample sd / √n; 0 for a single run).
    pub se: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Picks the series a metric refers to.
///
/// `Auto` prefers absolute error and falls back to the best true value when
/// the objective's minimum is unknown.
pub fn metric_series(cols: &TraceColumns, metric: Metric) -> Result<Vec<f64>> {
    match metric {
        Metric::AbsError => cols
            .abs_error
            .clone()
            .ok_or_else(|| Error::Config("trace has no absolute-error column values".into())),
        Metric::Auto => Ok(cols.abs_error.clone().unwrap_or_else(|| cols.best_true.clone())),
        Metric::BestTrue => Ok(cols.best_true.clone()),
        Metric::BestObserved => Ok(cols.best_observed.clone()),
    }
}

/// Aggregates equal-length per-seed series index by index.
pub fn summarize(series: &[Vec<f64>]) -> Result<Vec<SummaryRow>> {
    let first = series.first().ok_or_else(|| Error::InvalidArgument("no traces to summarize".into()))?;
    let horizon = first.len();
    if let Some(bad) = series.iter().find(|s| s.len() != horizon) {
        return Err(Error::InvalidArgument(format!(
            "traces have mismatched horizons ({horizon} vs {})",
            bad.len()
        )));
    }
    let n = series.len();
    Ok((0..horizon)
        .map(|i| {
            let mut v: Vec<f64> = series.iter().map(|s| s[i]).collect();
            v.sort_by(f64::total_cmp);
            let mean = v.iter().sum::<f64>() / n as f64;
            let se = if n > 1 {
                let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
            SummaryRow {
                t: i + 1,
                n,
                mean,
                se,
                median,
                min: v[0],
                max: v[n - 1],
            }
        })
        .collect())
}

pub fn summary_csv(group: &str, rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{group},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.n, r.mean, r.se, r.median, r.min, r.max
        );
    }
    out
}

pub const SUMMARY_HEADER: &str = "group,t,n,mean,se,median,min,max";
