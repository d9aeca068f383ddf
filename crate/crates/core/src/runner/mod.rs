//! Scenario runner: parse a scenario document, validate every reference,
//! execute the checks and assemble a report in declaration order.

pub mod builtins;
pub mod checks;
pub mod report;
pub mod scenario;

pub use builtins::{builtin_scenario, list_builtins, CatalogItem};
pub use report::{emit_report, CheckResult, Format, Report, Status};
pub use scenario::{CheckSpec, Scenario};

use crate::error::{Error, Result};
use crate::par;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

/// Loads a scenario from `path`, or a built-in suite when `path` names one
/// and no such file exists.
pub fn load_scenario(path: &str) -> Result<Scenario> {
    let p = Path::new(path);
    if !p.exists() {
        if let Some(s) = builtin_scenario(path) {
            return Ok(s);
        }
    }
    Scenario::load(p)
}

pub fn run_scenario(path: &str) -> Result<Report> {
    run(&load_scenario(path)?)
}

/// Validates the whole document first, so configuration errors surface
/// before any check runs. Checks run concurrently; results keep declaration
/// order.
pub fn run(s: &Scenario) -> Result<Report> {
    let started = Instant::now();
    let ctx = scenario::resolve(s)?;
    for t in [s.tol, s.fd_tol].into_iter().flatten() {
        if !(t > 0.0) {
            return Err(Error::ConfigParse("tolerances must be positive".into()));
        }
    }
    let mut tols = Vec::with_capacity(s.checks.len());
    for c in &s.checks {
        checks::validate(&ctx, c)?;
        tols.push(checks::tolerances(c, s.tol, s.fd_tol)?);
    }
    let mut warnings = Vec::new();
    if s.checks.is_empty() {
        warnings.push("scenario declares no checks".to_string());
    }
    let idx: Vec<usize> = (0..s.checks.len()).collect();
    let results = par::map(&idx, |&i| run_check(&ctx, &s.checks[i], tols[i].0, tols[i].1));
    let mut counts = BTreeMap::new();
    for k in ["pass", "fail", "skip"] {
        counts.insert(k.to_string(), 0);
    }
    for r in &results {
        *counts.entry(r.status.label().to_string()).or_insert(0) += 1;
    }
    let verdict = if results.iter().any(|r| r.status == Status::Fail) { Status::Fail } else { Status::Pass };
    Ok(Report {
        schema_version: scenario::SCHEMA_VERSION,
        scenario_id: s.id.clone(),
        seed: s.seed,
        verdict,
        counts,
        warnings,
        checks: results,
        fingerprint: report::Fingerprint::current(),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn run_check(ctx: &scenario::Context, spec: &CheckSpec, tol: f64, fd_tol: f64) -> CheckResult {
    let started = Instant::now();
    let mut res = CheckResult {
        name: spec.name().to_string(),
        check: spec.check.clone(),
        status: Status::Skip,
        residuals: BTreeMap::new(),
        tolerances: BTreeMap::new(),
        expectations: Vec::new(),
        message: None,
        detail: serde_json::Value::Null,
        runtime_ms: 0.0,
    };
    if let Some(reason) = &spec.skip {
        res.message = Some(format!("skipped: {reason}"));
        return res;
    }
    match (checks::execute(ctx, spec, tol, fd_tol), &spec.expect_error) {
        (Ok(out), None) => {
            let ok = out.gates.iter().all(|g| g.ok()) && out.expectations.iter().all(|e| e.ok);
            res.status = if ok { Status::Pass } else { Status::Fail };
            for g in &out.gates {
                res.residuals.insert(g.name.clone(), report::fmt_residual(g.value));
                res.tolerances.insert(g.name.clone(), report::fmt_residual(g.tol));
            }
            res.expectations = out.expectations;
            res.detail = out.detail;
            res.message = out.message;
        }
        (Ok(_), Some(kind)) => {
            res.status = Status::Fail;
            res.message = Some(format!("expected error {kind}, operation succeeded"));
        }
        (Err(e), Some(kind)) if e.kind() == kind => {
            res.status = Status::Pass;
            res.message = Some(format!("failed as expected: {e}"));
        }
        (Err(e), _) if spec.skip_on.iter().any(|k| k == e.kind()) => {
            res.message = Some(format!("skipped: {e}"));
        }
        (Err(e), _) => {
            res.status = Status::Fail;
            res.message = Some(format!("{}: {e}", e.kind()));
        }
    }
    res.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scenario_passes_with_warning() {
        let mut s = builtin_scenario("newton-suite").unwrap();
        s.checks.clear();
        let r = run(&s).unwrap();
        assert_eq!(r.verdict, Status::Pass);
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn configuration_errors() {
        let mut s = builtin_scenario("minkowski-suite").unwrap();
        s.checks = vec![CheckSpec::new("certify").arg("field", "missing")];
        assert!(matches!(run(&s), Err(Error::UnresolvedReference(_))));
        s.checks = vec![CheckSpec::new("no_such_check")];
        assert!(matches!(run(&s), Err(Error::UnknownCheck(_))));
        s.checks = vec![CheckSpec::new("metric_at").arg("bogus", 1)];
        assert!(matches!(run(&s), Err(Error::ConfigParse(_))));
        s.checks = vec![CheckSpec::new("metric_at").tol(-1.0)];
        assert!(matches!(run(&s), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn failing_and_skipped_checks() {
        let mut s = builtin_scenario("minkowski-suite").unwrap();
        let mut skip = CheckSpec::new("metric_at");
        skip.skip = Some("not needed".into());
        s.checks = vec![
            CheckSpec::new("certify").arg("field", "nu").arg("expect_class", "parallel"),
            skip,
            CheckSpec::new("metric_at"),
        ];
        let r = run(&s).unwrap();
        let st: Vec<Status> = r.checks.iter().map(|c| c.status).collect();
        assert_eq!(st, vec![Status::Fail, Status::Skip, Status::Pass]);
        assert_eq!(r.verdict, Status::Fail);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn report_round_trips_and_is_deterministic() {
        let s = builtin_scenario("minkowski-suite").unwrap();
        let a = run(&s).unwrap();
        let json = emit_report(&a, Format::Json);
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        let b = run(&s).unwrap();
        assert_eq!(a.stable_json(), b.stable_json());
    }
}
