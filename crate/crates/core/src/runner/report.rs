//! Report records and their JSON/text emission.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

/// A discrete outcome compared against its expected value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub check: String,
    pub status: Status,
    /// Gated residuals, formatted with [`fmt_residual`].
    pub residuals: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, String>,
    pub expectations: Vec<Expectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// The operation's own report.
    pub detail: Value,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub engine_version: String,
    pub parallel_mode: String,
    pub threads: usize,
    pub os: String,
    pub arch: String,
}

impl Fingerprint {
    pub fn current() -> Fingerprint {
        Fingerprint {
            engine_version: env!("CARGO_PKG_VERSION").into(),
            parallel_mode: match crate::par::mode() {
                crate::par::Mode::Parallel => "parallel".into(),
                crate::par::Mode::Sequential => "sequential".into(),
            },
            threads: crate::par::threads(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario_id: String,
    pub seed: u64,
    pub verdict: Status,
    pub counts: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub fingerprint: Fingerprint,
    pub runtime_ms: f64,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_residual(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::UnsupportedFormat(other.into())),
        }
    }
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Status::Fail => 1,
            _ => 0,
        }
    }

    /// The JSON document without runtime and fingerprint fields; identical
    /// for identical `(scenario, seed)`.
    pub fn stable_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_volatile(&mut v);
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}

/// Removes `runtime_ms` and `fingerprint` keys at every depth.
pub fn strip_volatile(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.remove("fingerprint");
            m.values_mut().for_each(strip_volatile);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_volatile),
        _ => {}
    }
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        Format::Text => text(report),
    }
}

fn text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario {} (seed {}): {}", r.scenario_id, r.seed, r.verdict.label().to_uppercase());
    for w in &r.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
    for c in &r.checks {
        let _ = writeln!(s, "  [{}] {} ({:.0} ms)", c.status.label(), c.name, c.runtime_ms);
        for (k, v) in &c.residuals {
            let tol = c.tolerances.get(k).map(String::as_str).unwrap_or("-");
            let _ = writeln!(s, "      {k} = {v}  (tol {tol})");
        }
        for e in &c.expectations {
            let mark = if e.ok { "ok" } else { "MISMATCH" };
            let _ = writeln!(s, "      {} = {} (expected {}) {mark}", e.name, e.actual, e.expected);
        }
        if let Some(m) = &c.message {
            let _ = writeln!(s, "      {m}");
        }
    }
    let _ = writeln!(
        s,
        "{} pass, {} fail, {} skip",
        r.counts.get("pass").unwrap_or(&0),
        r.counts.get("fail").unwrap_or(&0),
        r.counts.get("skip").unwrap_or(&0)
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_strings_round_trip() {
        for v in [0.0, 1.0 / 3.0, 6.02e23, -1.5e-300, f64::MIN_POSITIVE] {
            let s = fmt_residual(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn formats() {
        assert_eq!(Format::parse("json").unwrap(), Format::Json);
        assert!(matches!(Format::parse("yaml"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn volatile_fields_are_stripped() {
        let mut v = serde_json::json!({"a": 1, "runtime_ms": 3.0, "fingerprint": {}, "xs": [{"runtime_ms": 1}]});
        strip_volatile(&mut v);
        assert_eq!(v, serde_json::json!({"a": 1, "xs": [{}]}));
    }
}
