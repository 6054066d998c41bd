// SPDX-License-Identifier: Apache-2.0

//! Verification rows, CSV rendering and atomic artifact output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::AppError;

/// How a measured value is compared with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Passes iff `measured ≤ bound + tolerance`.
    AtMost,
    /// Passes iff `measured ≥ bound − tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub id: String,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn compare(
        id: impl Into<String>,
        measured: f64,
        cmp: Comparison,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        let pass = match cmp {
            Comparison::AtMost => measured <= bound + tolerance,
            Comparison::AtLeast => measured >= bound - tolerance,
        };
        CheckRow {
            id: id.into(),
            measured,
            bound,
            tolerance,
            pass,
        }
    }

    /// `measured ≤ bound + tolerance`.
    pub fn at_most(id: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::compare(id, measured, Comparison::AtMost, bound, tolerance)
    }

    /// `measured ≥ bound`, with `tolerance` recorded as the slack.
    pub fn at_least(id: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::compare(id, measured, Comparison::AtLeast, bound, tolerance)
    }

    /// A boolean property: measured is 1 or 0 against bound 1.
    pub fn flag(id: impl Into<String>, holds: bool) -> Self {
        CheckRow {
            id: id.into(),
            measured: if holds { 1.0 } else { 0.0 },
            bound: 1.0,
            tolerance: 0.0,
            pass: holds,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Overall pass iff every row passes; an empty report passes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub rows: Vec<CheckRow>,
}

impl VerificationReport {
    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.rows.extend(other.rows);
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut t = Table::new(&["check_id", "status", "measured", "bound", "tolerance"]);
        for r in &self.rows {
            t.row(&[
                r.id.clone(),
                r.status().into(),
                fmt(r.measured),
                fmt(r.bound),
                fmt(r.tolerance),
            ]);
        }
        t.finish()
    }

    /// One aligned line per row, for the terminal.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.id.len()).max().unwrap_or(0);
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{} {:width$}  measured={:e} bound={:e} tol={:e}",
                r.status(),
                r.id,
                r.measured,
                r.bound,
                r.tolerance
            );
        }
        s
    }
}

/// `max` that lets NaN win, so a NaN measurement fails its check.
pub fn worst_max(acc: f64, v: f64) -> f64 {
    if v.is_nan() || v > acc {
        v
    } else {
        acc
    }
}

/// `min` that lets NaN win.
pub fn worst_min(acc: f64, v: f64) -> f64 {
    if v.is_nan() || v < acc {
        v
    } else {
        acc
    }
}

/// Shortest round-trip decimal form; identical across runs and platforms.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

/// CSV builder with a fixed header and LF line endings.
#[derive(Debug, Clone)]
pub struct Table {
    width: usize,
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table {
            width: header.len(),
            text,
        }
    }

    /// Panics when the row width differs from the header.
    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.width, "row width must match the header");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, AppError> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, &target)?;
    Ok(target)
}
