//! Result tables: CSV with a `# key: value` metadata header, a JSON
//! sidecar, and a parser for reading tables back.
//!
//! Failed points stay in the table as rows with empty numeric cells and an
//! error code in the `status` column, so no NaN ever reaches the file.

use serde_json::json;
use std::fmt::Write as _;

use crate::config::RunConfig;
use crate::CliError;

pub const ARTIFACT: &str = concat!("coopscatter ", env!("CARGO_PKG_VERSION"));
pub const UNITS: &str = "lengths in λ, detunings and rates in γ, angles in degrees, powers as fractions";

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<Option<f64>>,
    /// `ok`, or the error code of a failed point.
    pub status: String,
}

impl Row {
    pub fn ok(values: Vec<f64>) -> Self {
        Self {
            values: values.into_iter().map(Some).collect(),
            status: "ok".into(),
        }
    }

    /// Leading coordinates kept, the rest left empty.
    pub fn failed(coords: &[f64], width: usize, code: &str) -> Self {
        let mut values: Vec<Option<f64>> = coords.iter().copied().map(Some).collect();
        values.resize(width, None);
        Self {
            values,
            status: code.into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Metadata rendering; floats use the shortest exact form.
pub trait MetaValue {
    fn render(&self) -> String;
}

impl MetaValue for f64 {
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

macro_rules! display_meta {
    ($($t:ty),*) => {$(
        impl MetaValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_meta!(bool, usize, u64, &str, String);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: u.to_string(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    /// Standard header: artifact version, command, config hash, units.
    pub fn stamp(&mut self, cfg: &RunConfig) {
        let mut head = vec![
            ("artifact".to_string(), ARTIFACT.to_string()),
            ("command".to_string(), cfg.command.clone()),
            ("config_hash".to_string(), cfg.hash()),
            ("units".to_string(), UNITS.to_string()),
        ];
        head.append(&mut self.meta);
        self.meta = head;
    }

    pub fn set_meta(&mut self, key: &str, value: impl MetaValue) {
        let value = value.render();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Row) {
        debug_assert_eq!(row.values.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of a column over successful rows.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else {
            return Vec::new();
        };
        self.rows.iter().filter(|r| r.is_ok()).filter_map(|r| r.values[i]).collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {}", v.replace('\n', " "));
        }
        for c in &self.columns {
            let _ = writeln!(s, "# column.{}: {}", c.name, c.unit);
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(s, "{},status", names.join(","));
        for r in &self.rows {
            for v in &r.values {
                if let Some(x) = v {
                    let _ = write!(s, "{x:?}");
                }
                s.push(',');
            }
            s.push_str(&r.status);
            s.push('\n');
        }
        s
    }

    pub fn sidecar(&self, cfg: &RunConfig) -> String {
        let meta: serde_json::Map<String, serde_json::Value> =
            self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let columns: Vec<_> = self
            .columns
            .iter()
            .map(|c| json!({"name": c.name, "unit": c.unit}))
            .collect();
        let doc = json!({
            "config": cfg,
            "meta": meta,
            "columns": columns,
            "rows": self.rows.len(),
            "failures": self.failures(),
        });
        serde_json::to_string_pretty(&doc).expect("sidecar serializes") + "\n"
    }

    pub fn parse_csv(text: &str) -> Result<Self, CliError> {
        let bad = |m: String| CliError::Parse(m);
        let mut t = ResultTable::default();
        let mut units: Vec<(String, String)> = Vec::new();
        let mut header: Option<Vec<String>> = None;
        for (i, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .trim_start()
                    .split_once(':')
                    .ok_or_else(|| bad(format!("line {}: metadata needs `key: value`", i + 1)))?;
                let v = v.strip_prefix(' ').unwrap_or(v);
                match k.strip_prefix("column.") {
                    Some(name) => units.push((name.to_string(), v.to_string())),
                    None => t.meta.push((k.to_string(), v.to_string())),
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            match &header {
                None => {
                    if cells.last() != Some(&"status") {
                        return Err(bad(format!("line {}: header must end with `status`", i + 1)));
                    }
                    let names: Vec<String> = cells[..cells.len() - 1].iter().map(|s| s.to_string()).collect();
                    if names.is_empty() {
                        return Err(bad(format!("line {}: no data columns", i + 1)));
                    }
                    t.columns = names
                        .iter()
                        .map(|n| Column {
                            name: n.clone(),
                            unit: units
                                .iter()
                                .find(|(u, _)| u == n)
                                .map(|(_, v)| v.clone())
                                .unwrap_or_default(),
                        })
                        .collect();
                    header = Some(names);
                }
                Some(names) => {
                    if cells.len() != names.len() + 1 {
                        return Err(bad(format!(
                            "line {}: {} cells, expected {}",
                            i + 1,
                            cells.len(),
                            names.len() + 1
                        )));
                    }
                    let mut values = Vec::with_capacity(names.len());
                    for c in &cells[..names.len()] {
                        values.push(if c.is_empty() {
                            None
                        } else {
                            let v: f64 = c.parse().map_err(|_| bad(format!("line {}: bad number `{c}`", i + 1)))?;
                            if !v.is_finite() {
                                return Err(bad(format!("line {}: non-finite value", i + 1)));
                            }
                            Some(v)
                        });
                    }
                    let status = cells[names.len()].to_string();
                    let code = |c: char| c.is_ascii_alphanumeric() || c == '-' || c == '_';
                    if status.is_empty() || !status.chars().all(code) {
                        return Err(bad(format!("line {}: status must be `ok` or an error code", i + 1)));
                    }
                    t.rows.push(Row { values, status });
                }
            }
        }
        if header.is_none() {
            return Err(bad("no header row".into()));
        }
        Ok(t)
    }
}
