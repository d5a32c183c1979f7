//! Metric traces shared by the discrete learners and the continuous
//! dynamics.

use std::io::Write;

use crate::error::Result;
use crate::scalar::{format_scalar, Scalar};

/// One metric row. `time` is the step count for discrete runs and the
/// integration time for continuous ones.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow<T> {
    pub time: f64,
    pub values: Vec<T>,
}

/// Ordered metric rows with a fixed column schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<T> {
    pub time_column: String,
    pub columns: Vec<String>,
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Scalar> Trace<T> {
    pub fn new(time_column: &str, columns: Vec<String>) -> Self {
        Self {
            time_column: time_column.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, time: f64, values: Vec<T>) {
        debug_assert_eq!(values.len(), self.columns.len());
        debug_assert!(self.rows.last().is_none_or(|r| r.time < time));
        self.rows.push(TraceRow { time, values });
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<T>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn last(&self, name: &str) -> Option<T> {
        let k = self.column_index(name)?;
        self.rows.last().map(|r| r.values[k])
    }

    pub fn header(&self) -> String {
        std::iter::once(self.time_column.as_str())
            .chain(self.columns.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// CSV with the time column first; floats at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.header())?;
        let integral_time = self.time_column == "step";
        for row in &self.rows {
            if integral_time {
                write!(out, "{}", row.time as u64)?;
            } else {
                write!(out, "{}", format_scalar(row.time))?;
            }
            for &v in &row.values {
                write!(out, ",{}", format_scalar(v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}
