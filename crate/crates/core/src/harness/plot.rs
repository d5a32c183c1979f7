use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::format_scalar;
use crate::trace::{Trace, TraceRow};

use super::median;

/// One observation in long format.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub time: f64,
    pub seed: u64,
    pub value: f64,
    /// Median across seeds at the same time.
    pub median: f64,
}

/// Long-format table of one metric over seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotTable {
    pub time_column: String,
    pub metric: String,
    pub rows: Vec<PlotRow>,
}

impl PlotTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{},seed,value,median", self.time_column)?;
        let integral = self.time_column == "step";
        for r in &self.rows {
            let time = if integral {
                (r.time as u64).to_string()
            } else {
                format_scalar(r.time)
            };
            writeln!(
                out,
                "{time},{},{},{}",
                r.seed,
                format_scalar(r.value),
                format_scalar(r.median)
            )?;
        }
        Ok(())
    }
}

/// Reshapes `metric` from per-seed traces into long format with the
/// across-seed median at each time.
pub fn emit_plot_data(traces: &[(u64, Trace<f64>)], metric: &str) -> Result<PlotTable> {
    let Some((_, first)) = traces.first() else {
        return Err(Error::Precondition("no traces to reshape".into()));
    };
    let mut by_time: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut rows = Vec::new();
    for (seed, trace) in traces {
        let k = trace
            .column_index(metric)
            .ok_or_else(|| Error::UnknownMetric {
                name: metric.to_string(),
                available: trace.columns.join(", "),
            })?;
        for row in &trace.rows {
            by_time
                .entry(row.time.to_bits())
                .or_default()
                .push(row.values[k]);
            rows.push(PlotRow {
                time: row.time,
                seed: *seed,
                value: row.values[k],
                median: f64::NAN,
            });
        }
    }
    let medians: BTreeMap<u64, f64> = by_time.into_iter().map(|(t, v)| (t, median(&v))).collect();
    for r in &mut rows {
        r.median = medians[&r.time.to_bits()];
    }
    Ok(PlotTable {
        time_column: first.time_column.clone(),
        metric: metric.to_string(),
        rows,
    })
}

impl Trace<f64> {
    /// Reads a trace written by [`Trace::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let mut names = headers.iter();
        let time_column = names
            .next()
            .ok_or_else(|| Error::Parse {
                source_name: path.display().to_string(),
                message: "empty header".into(),
            })?
            .to_string();
        let mut trace = Trace::new(&time_column, names.map(str::to_string).collect());
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    source_name: path.display().to_string(),
                    message: format!("row {}: {e}", line + 1),
                })
            };
            let mut fields = record.iter();
            let time = parse(fields.next().unwrap_or_default())?;
            let values = fields.map(parse).collect::<Result<Vec<_>>>()?;
            trace.rows.push(TraceRow { time, values });
        }
        Ok(trace)
    }
}

/// Reads every `trace_seed{N}.csv` in `dir`, ordered by seed.
pub fn load_traces(dir: &Path) -> Result<Vec<(u64, Trace<f64>)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(seed) = name
            .strip_prefix("trace_seed")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            out.push((seed, Trace::read_csv(&path)?));
        }
    }
    out.sort_by_key(|(s, _)| *s);
    Ok(out)
}
