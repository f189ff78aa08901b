use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One query of a run. Initial-design rows carry no expert.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// 1-based query number.
    pub t: usize,
    pub x: Vec<f64>,
    /// Noisy observation.
    pub y: f64,
    /// Noiseless value at `x`.
    pub f: f64,
    pub expert: Option<usize>,
    pub best_true: f64,
    pub best_observed: f64,
    pub abs_error: Option<f64>,
    pub wall_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub objective: String,
    pub method: String,
    pub seed: u64,
    pub dim: usize,
    pub rows: Vec<TraceRow>,
    /// Final recommendation, `argmin` of the averaged posterior mean.
    pub recommendation: Option<Vec<f64>>,
    /// Set when the run aborted before reaching its horizon.
    pub failure: Option<String>,
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

impl Trace {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn file_name(&self) -> String {
        format!("{}_{}_seed{}.csv", self.objective, self.method, self.seed)
    }

    /// Comma-separated table with a header row; floats use `{:.16e}`.
    ///
    /// Footer comment lines record the recommendation and any failure.
    pub fn to_csv(&self) -> String {
        let with_time = self.rows.iter().any(|r| r.wall_secs.is_some());
        let mut out = String::from("seed,t");
        for j in 0..self.dim {
            let _ = write!(out, ",x{j}");
        }
        out.push_str(",y,f,expert,best_true,best_observed,abs_error");
        if with_time {
            out.push_str(",wall_secs");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{}", self.seed, r.t);
            for v in &r.x {
                let _ = write!(out, ",{}", fmt_f(*v));
            }
            let _ = write!(
                out,
                ",{},{},{},{},{},{}",
                fmt_f(r.y),
                fmt_f(r.f),
                r.expert.map(|e| e.to_string()).unwrap_or_default(),
                fmt_f(r.best_true),
                fmt_f(r.best_observed),
                fmt_opt(r.abs_error)
            );
            if with_time {
                let _ = write!(out, ",{}", fmt_opt(r.wall_secs));
            }
            out.push('\n');
        }
        if let Some(rec) = &self.recommendation {
            let xs: Vec<String> = rec.iter().map(|v| fmt_f(*v)).collect();
            let _ = writeln!(out, "# recommendation,{}", xs.join(","));
        }
        if let Some(msg) = &self.failure {
            let _ = writeln!(out, "# incomplete,{}", msg.replace('\n', " "));
        }
        out
    }

    pub fn write_to(&self, dir: &Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_csv())?;
        Ok(path)
    }
}

/// The columns of a trace file that summaries consume.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceColumns {
    pub best_true: Vec<f64>,
    pub best_observed: Vec<f64>,
    /// `None` when the objective has no known minimum.
    pub abs_error: Option<Vec<f64>>,
    pub complete: bool,
}

/// Reads back the metric columns of a file written by [`Trace::to_csv`].
pub fn read_columns(text: &str) -> Result<TraceColumns> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty trace".into(),
    })?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| {
        names.iter().position(|n| *n == name).ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("missing column {name}"),
        })
    };
    let (bt, bo, ae) = (col("best_true")?, col("best_observed")?, col("abs_error")?);
    let mut cols = TraceColumns {
        best_true: Vec::new(),
        best_observed: Vec::new(),
        abs_error: Some(Vec::new()),
        complete: true,
    };
    for (i, line) in lines {
        if let Some(rest) = line.strip_prefix('#') {
            if rest.trim_start().starts_with("incomplete") {
                cols.complete = false;
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < names.len() {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {} fields, found {}", names.len(), fields.len()),
            });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad number '{s}'"),
            })
        };
        cols.best_true.push(num(fields[bt])?);
        cols.best_observed.push(num(fields[bo])?);
        match (fields[ae], cols.abs_error.as_mut()) {
            ("", _) => cols.abs_error = None,
            (s, Some(v)) => v.push(num(s)?),
            (_, None) => {}
        }
    }
    Ok(cols)
}
