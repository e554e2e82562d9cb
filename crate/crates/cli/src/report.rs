use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA: &str = "hermitia-report/1";

/// One check. When both `residual` and `tolerance` are present, `pass` is
/// exactly `residual <= tolerance`; otherwise it carries the check's own verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    pub value: Value,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Record {
    pub fn check(name: impl Into<String>, value: Value, residual: f64, tolerance: f64) -> Self {
        Record {
            name: name.into(),
            value,
            residual: Some(residual),
            tolerance: Some(tolerance),
            pass: residual <= tolerance,
        }
    }

    pub fn verdict(name: impl Into<String>, value: Value, pass: bool) -> Self {
        Record {
            name: name.into(),
            value,
            residual: None,
            tolerance: None,
            pass,
        }
    }

    pub fn info(name: impl Into<String>, value: Value) -> Self {
        Self::verdict(name, value, true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(config: RunConfig, records: Vec<Record>, wall_time_s: f64) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            config,
            records,
            pass,
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable table for standard output.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let width = self
            .records
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        out.push_str(&format!(
            "{:<width$}  {:>10}  {:>10}  {:>5}  value\n",
            "name", "residual", "tol", "pass"
        ));
        for r in &self.records {
            let num = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3e}"));
            out.push_str(&format!(
                "{:<width$}  {:>10}  {:>10}  {:>5}  {}\n",
                r.name,
                num(r.residual),
                num(r.tolerance),
                if r.pass { "ok" } else { "FAIL" },
                summarize(&r.value)
            ));
        }
        out.push_str(&format!(
            "{} of {} checks pass ({:.2} s)\n",
            self.records.iter().filter(|r| r.pass).count(),
            self.records.len(),
            self.wall_time_s
        ));
        out
    }
}

fn summarize(v: &Value) -> String {
    let s = match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        _ => v.to_string(),
    };
    if s.len() > 60 {
        format!("{}...", &s[..57])
    } else {
        s
    }
}
