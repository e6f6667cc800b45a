//! Tables written as CSV or JSON, and the run manifest.
//!
//! CSV files are UTF-8 with a header row, `,` separators and numbers in
//! scientific notation with 17 significant digits. A run that stopped early
//! ends with one comment line starting with `# FAILED:` or `# TRUNCATED:`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use nonlocal_core::analysis::{BoundReport, StudyTable};
use nonlocal_core::integrators::{SolveStatus, TruncationReason};
use nonlocal_core::{ConstantSet, Solution};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Round-trip safe: 17 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Comment line closing the CSV body, without the leading `# `.
    pub trailer: Option<String>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_number(*v),
                    Cell::Text(s) => s.clone(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        if let Some(t) = &self.trailer {
            let _ = writeln!(out, "# {}", t.replace('\n', " "));
        }
        out
    }

    /// `{"rows": [{column: value}], "status": trailer-or-null}`; non-finite
    /// numbers become `null`.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (key, cell) in self.header.iter().zip(row) {
                    let v = match cell {
                        Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
                        Cell::Text(s) => Value::String(s.clone()),
                        Cell::Empty => Value::Null,
                    };
                    obj.insert(key.clone(), v);
                }
                Value::Object(obj)
            })
            .collect();
        json!({ "rows": rows, "status": self.trailer })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("tables serialize");
                s.push('\n');
                s
            }
        }
    }
}

pub fn constants_table(c: &ConstantSet) -> Table {
    let mut t = Table::new(["name", "value"]);
    let entries = [
        ("dimension", c.dimension as f64),
        ("delta", c.delta),
        ("nu", nonlocal_core::profiles::nu(c.dimension)),
        ("c_g", c.c_g),
        ("norm_g_l1", c.norm_g_l1),
        ("norm_ghat_l1", c.norm_ghat_l1),
        ("norm_ghat_prime_l1", c.norm_ghat_prime_l1),
        ("c1_g", c.c1_g),
        ("c2_g", c.c2_g),
        ("c3_g", c.c3_g),
        ("c_d", c.c_d),
    ];
    for (name, value) in entries {
        t.push(vec![name.into(), value.into()]);
    }
    t
}

/// `t, xi_1..xi_d, norm_xi, field_1..field_d, fd_deriv_norm`.
///
/// `fd_deriv_norm` at node `k >= 1` is `|ξ_k - ξ_{k-1}| / dt`; node 0
/// repeats the first difference.
pub fn run_table(solution: &Solution) -> Table {
    let traj = &solution.trajectory;
    let d = traj.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("xi_{i}")));
    header.push("norm_xi".into());
    header.extend((1..=d).map(|i| format!("field_{i}")));
    header.push("fd_deriv_norm".into());
    let mut table = Table::new(header);
    let values = traj.values();
    let dt = traj.dt();
    for (k, (xi, field)) in values.iter().zip(&solution.fields).enumerate() {
        let fd = match k {
            _ if values.len() < 2 => None,
            0 => Some(values[1].distance(&values[0]) / dt),
            _ => Some(values[k].distance(&values[k - 1]) / dt),
        };
        let mut row: Vec<Cell> = vec![traj.time(k).into()];
        row.extend(xi.iter().map(|v| Cell::Num(*v)));
        row.push(xi.norm().into());
        row.extend(field.iter().map(|v| Cell::Num(*v)));
        row.push(fd.into());
        table.push(row);
    }
    table.trailer = match &solution.status {
        SolveStatus::Complete => None,
        SolveStatus::Truncated {
            time,
            reason: TruncationReason::SolverFailure(e),
        } => Some(format!("FAILED: at t = {} ({e})", format_number(*time))),
        SolveStatus::Truncated {
            time,
            reason: TruncationReason::NormFloor { floor },
        } => Some(format!(
            "TRUNCATED: |xi| fell below {} at t = {}",
            format_number(*floor),
            format_number(*time)
        )),
    };
    table
}

/// `h, sup_error, status`; failed rows leave `sup_error` empty.
pub fn study_table(study: &StudyTable) -> Table {
    let mut t = Table::new(["h", "sup_error", "status"]);
    for row in &study.rows {
        match &row.sup_error {
            Ok(e) => t.push(vec![row.h.into(), (*e).into(), "ok".into()]),
            Err(_) => t.push(vec![row.h.into(), Cell::Empty, "failed".into()]),
        }
    }
    t
}

/// `x, observed, envelope, lower, ratio`; `lower` is empty for one-sided bounds.
pub fn bound_table(report: &BoundReport) -> Table {
    let mut t = Table::new(["x", "observed", "envelope", "lower", "ratio"]);
    for s in &report.samples {
        t.push(vec![
            s.x.into(),
            s.observed.into(),
            s.envelope.into(),
            s.lower.into(),
            s.ratio().into(),
        ]);
    }
    t
}

/// `name, applicable, violated, max_ratio, slack`, one row per report.
pub fn bounds_summary(reports: &[BoundReport]) -> Table {
    let mut t = Table::new(["name", "applicable", "violated", "max_ratio", "slack"]);
    for r in reports {
        t.push(vec![
            r.name.as_str().into(),
            if r.applicable { "true" } else { "false" }.into(),
            if r.violated { "true" } else { "false" }.into(),
            r.max_ratio.into(),
            r.slack.into(),
        ]);
    }
    t
}

/// Collects emitted files under one output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> anyhow::Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `<stem>.<csv|json>` and records it.
    pub fn write_table(&mut self, stem: &str, table: &Table) -> anyhow::Result<PathBuf> {
        let name = format!("{stem}.{}", self.format.extension());
        self.write_raw(&name, &table.render(self.format))
    }

    pub fn write_raw(&mut self, name: &str, body: &str) -> anyhow::Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RowRuntime {
    pub h: f64,
    pub seconds: f64,
}

/// Everything needed to audit or repeat a run. Timestamps and wall-clock
/// times appear here and nowhere else.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub format: Format,
    pub config: Config,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_clock_seconds: f64,
    pub row_runtimes: Vec<RowRuntime>,
    /// Files written next to the manifest, excluding the manifest itself.
    pub outputs: Vec<String>,
    pub summary: Value,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}
