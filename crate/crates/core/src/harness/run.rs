use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{CheckName, HarnessConfig, ModelChoice, Outcome, RunSpec};
use super::HarnessError;
use crate::criteria::{hypothesis_report, CheckOptions, CriterionReport, Verdict};
use crate::error::Error;
use crate::index_form::{
    find_conjugate, fredholm_diagnostics, index_form, laplacian_identity_odd, ConjugateSearchParams,
    ConjugateStatus, VariationField,
};
use crate::models::{
    central_force_for, run_axis_even, run_boundary_even, run_linear, run_scenario, JacobiSolution, LinearTarget,
    RunStatus,
};
use crate::scenario::{FixedPointScenario, Location};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: CheckName,
    pub outcome: Outcome,
    pub predicted_bound: Option<f64>,
    pub observed: Option<f64>,
    /// First zero found by the check; log time `s` for the quarter threshold.
    pub first_zero: Option<f64>,
    pub zero_count: Option<u64>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub name: String,
    pub seed: u64,
    pub model: Option<String>,
    pub status: Option<RunStatus>,
    pub model_error: Option<String>,
    pub t_final: Option<f64>,
    pub collapse_time: Option<f64>,
    pub max_constraint_residual: Option<f64>,
    pub checks: Vec<CheckRecord>,
    pub expectation_failures: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub passed: usize,
    pub total: usize,
    pub runs: Vec<RunOutcome>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.passed == self.total
    }
}

/// Writes through a temporary sibling and a rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn solve(spec: &RunSpec) -> Option<Result<JacobiSolution, Error>> {
    let s = &spec.scenario;
    Some(match spec.model {
        ModelChoice::None => return None,
        ModelChoice::Auto => run_scenario(s),
        ModelChoice::AxisEven => run_axis_even(s),
        ModelChoice::BoundaryEven => run_boundary_even(s),
        ModelChoice::LinearGAxis => run_linear(s, LinearTarget::GAxis),
        ModelChoice::LinearGBoundary => run_linear(s, LinearTarget::GBoundary),
        ModelChoice::LinearFOdd => run_linear(s, LinearTarget::FOdd),
        ModelChoice::CentralForce => central_force_for(s).map(|c| c.solution),
    })
}

fn criterion_record(check: CheckName, rep: &CriterionReport) -> CheckRecord {
    CheckRecord {
        check,
        outcome: match rep.verdict {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
            Verdict::Indeterminate => Outcome::Indeterminate,
        },
        predicted_bound: rep.predicted_bound,
        observed: rep.observed,
        first_zero: match check {
            CheckName::QuarterThreshold => rep.diagnostics.get("zeros_s").and_then(|z| z.get(0)).and_then(Value::as_f64),
            _ => rep.observed,
        },
        zero_count: rep.diagnostics.get("zero_count").and_then(Value::as_u64),
        message: None,
    }
}

fn error_record(check: CheckName, outcome: Outcome, msg: String) -> CheckRecord {
    CheckRecord {
        check,
        outcome,
        predicted_bound: None,
        observed: None,
        first_zero: None,
        zero_count: None,
        message: Some(msg),
    }
}

fn default_conjugate(s: &FixedPointScenario) -> ConjugateSearchParams {
    match s.location {
        Location::Axis => ConjugateSearchParams::default(),
        Location::Boundary => ConjugateSearchParams::log_oscillator(),
    }
}

/// Random endpoint-vanishing fields on random subwindows of the solution.
fn positivity(sol: &JacobiSolution, s: &FixedPointScenario, fields: usize, seed: u64) -> Result<Value, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (sol.grid[0], sol.t_final());
    let len = b - a;
    let mut min_value = f64::INFINITY;
    let mut negatives = 0usize;
    for _ in 0..fields {
        let t1 = a + rng.gen::<f64>() * 0.5 * len;
        let t2 = t1 + (0.1 + 0.9 * rng.gen::<f64>()) * (b - t1);
        let v = VariationField::random(&mut rng, t1, t2.min(b), 4, 200);
        let val = index_form(&v, sol, s)?.value;
        min_value = min_value.min(val);
        if val < -1e-9 {
            negatives += 1;
        }
    }
    Ok(json!({"seed": seed, "fields": fields, "min_value": min_value, "negatives": negatives}))
}

fn need_solution<'a>(sol: &'a Option<Result<JacobiSolution, Error>>) -> Result<&'a JacobiSolution, String> {
    match sol {
        Some(Ok(s)) => Ok(s),
        Some(Err(e)) => Err(format!("model failed: {e}")),
        None => Err("check needs a model run".into()),
    }
}

enum Fail {
    Model(Error),
    Out(HarnessError),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Model(e)
    }
}

fn run_check(
    check: CheckName,
    spec: &RunSpec,
    opts: &CheckOptions,
    sol: &Option<Result<JacobiSolution, Error>>,
    seed: u64,
    dir: &Path,
) -> Result<CheckRecord, HarnessError> {
    let s = &spec.scenario;
    let file = dir.join(format!("{}.json", check.name()));
    if let Some(kind) = check.criterion() {
        return match kind.run(s, opts) {
            Ok(rep) => {
                write_json(&file, &rep)?;
                Ok(criterion_record(check, &rep))
            }
            Err(Error::HypothesisNotMet(m)) => {
                write_json(&file, &hypothesis_report(kind, s, &m))?;
                Ok(error_record(check, Outcome::HypothesisNotMet, m))
            }
            Err(e) => {
                write_json(&file, &json!({"criterion": check.name(), "error": e.to_string()}))?;
                Ok(error_record(check, Outcome::Error, e.to_string()))
            }
        };
    }
    let sol = match need_solution(sol) {
        Ok(sol) => sol,
        Err(m) => {
            write_json(&file, &json!({"check": check.name(), "error": m}))?;
            return Ok(error_record(check, Outcome::Error, m));
        }
    };
    let mut rec = error_record(check, Outcome::Computed, String::new());
    rec.message = None;
    let res: Result<(), Fail> = (|| {
        match check {
            CheckName::Conjugate => {
                let p = spec.conjugate.clone().unwrap_or_else(|| default_conjugate(s));
                let r = find_conjugate(sol, s, &p)?;
                rec.outcome = match r.status {
                    ConjugateStatus::Found => Outcome::Found,
                    ConjugateStatus::NoneFound => Outcome::NoneFound,
                };
                rec.observed = r.first().map(|x| x.1);
                rec.zero_count = Some(r.intervals.len() as u64);
                write_json(&file, &json!({"params": p, "report": r})).map_err(Fail::Out)?;
            }
            CheckName::LaplacianOdd => {
                let d = laplacian_identity_odd(sol)?;
                rec.outcome = if d.poincare_holds { Outcome::Holds } else { Outcome::Fails };
                rec.observed = d.int_delta_p.last().copied();
                let mut csv = Vec::new();
                d.write_csv(&mut csv).map_err(|e| Fail::Out(HarnessError::io(dir, e)))?;
                write_atomic(&dir.join("laplacian_odd.csv"), &csv).map_err(Fail::Out)?;
                let summary = json!({
                    "int_delta_p": d.int_delta_p.last(),
                    "poincare_constant": d.poincare_constant,
                    "sup_xi_sq": d.sup_xi_sq,
                    "poincare_holds": d.poincare_holds,
                    "divergence_trend": d.divergence_trend,
                });
                write_json(&file, &summary).map_err(Fail::Out)?;
            }
            CheckName::Fredholm => {
                let r = fredholm_diagnostics(sol, s)?;
                rec.observed = Some(r.final_integral);
                let mut csv = String::from("t,integrand,integral,ratio\n");
                for i in 0..r.t.len() {
                    csv.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        r.t[i], r.integrand[i], r.integral[i], r.ratio[i]
                    ));
                }
                write_atomic(&dir.join("fredholm.csv"), csv.as_bytes()).map_err(Fail::Out)?;
                let summary = json!({
                    "basis": r.basis,
                    "final_integral": r.final_integral,
                    "final_ratio": r.final_ratio,
                    "integral_tail_growth": r.integral_tail_growth,
                    "ratio_tail_change": r.ratio_tail_change,
                });
                write_json(&file, &summary).map_err(Fail::Out)?;
            }
            CheckName::Positivity => {
                let v = positivity(sol, s, spec.positivity_fields, seed)?;
                rec.outcome = if v["negatives"] == 0 { Outcome::Holds } else { Outcome::Fails };
                rec.observed = v["min_value"].as_f64();
                write_json(&file, &v).map_err(Fail::Out)?;
            }
            _ => unreachable!("criteria handled above"),
        }
        Ok(())
    })();
    match res {
        Ok(()) => Ok(rec),
        Err(Fail::Out(e)) => Err(e),
        Err(Fail::Model(e)) => {
            write_json(&file, &json!({"check": check.name(), "error": e.to_string()}))?;
            Ok(error_record(check, Outcome::Error, e.to_string()))
        }
    }
}

fn run_one(spec: &RunSpec, opts: &CheckOptions, seed: u64, out: &Path) -> Result<RunOutcome, HarnessError> {
    let dir = out.join(&spec.name);
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let sol = solve(spec);
    let mut outcome = RunOutcome {
        name: spec.name.clone(),
        seed,
        model: None,
        status: None,
        model_error: None,
        t_final: None,
        collapse_time: None,
        max_constraint_residual: None,
        checks: Vec::new(),
        expectation_failures: Vec::new(),
        pass: false,
    };
    match &sol {
        Some(Ok(js)) => {
            let mut csv = Vec::new();
            js.write_csv(&mut csv).map_err(|e| HarnessError::io(&dir, e))?;
            write_atomic(&dir.join("trajectory.csv"), &csv)?;
            outcome.model = serde_json::to_value(js.model).ok().and_then(|v| v.as_str().map(String::from));
            outcome.status = Some(js.terminated);
            outcome.t_final = Some(js.t_final());
            outcome.collapse_time = js.collapse_time();
            outcome.max_constraint_residual = Some(js.constraint_residual.iter().copied().fold(0.0, f64::max));
        }
        Some(Err(e)) => outcome.model_error = Some(e.to_string()),
        None => {}
    }
    for &check in &spec.checks {
        outcome.checks.push(run_check(check, spec, opts, &sol, seed, &dir)?);
    }

    let e = &spec.expect;
    let mut fails = Vec::new();
    if let Some(m) = &outcome.model_error {
        fails.push(format!("model error: {m}"));
    }
    if let Some(want) = e.status {
        if outcome.status != Some(want) {
            fails.push(format!("status {:?}, expected {want:?}", outcome.status));
        }
    }
    if let Some(want) = e.collapse {
        if outcome.collapse_time.is_some() != want {
            fails.push(format!("collapse {:?}, expected {want}", outcome.collapse_time));
        }
    }
    if let Some(bound) = e.collapse_before {
        if !outcome.collapse_time.is_some_and(|t| t <= bound) {
            fails.push(format!("collapse {:?}, expected before {bound}", outcome.collapse_time));
        }
    }
    for (check, want) in &e.checks {
        match outcome.checks.iter().find(|r| r.check == *check) {
            Some(r) if r.outcome == *want => {}
            Some(r) => fails.push(format!("{}: {}, expected {}", check.name(), r.outcome.label(), want.label())),
            None => fails.push(format!("{}: not run", check.name())),
        }
    }
    outcome.pass = fails.is_empty();
    outcome.expectation_failures = fails;
    write_json(&dir.join("run.json"), &outcome)?;
    Ok(outcome)
}

fn summary_csv(sum: &Summary) -> String {
    let mut s = String::from("name,model,status,t_final,collapse_time,max_constraint_residual,checks,result\n");
    for r in &sum.runs {
        let status = r
            .status
            .and_then(|st| serde_json::to_value(st).ok())
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_else(|| if r.model_error.is_some() { "error".into() } else { String::new() });
        let checks: Vec<String> = r
            .checks
            .iter()
            .map(|c| format!("{}={}", c.check.name(), c.outcome.label()))
            .collect();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.name,
            r.model.as_deref().unwrap_or(""),
            status,
            fmt_opt(r.t_final),
            fmt_opt(r.collapse_time),
            fmt_opt(r.max_constraint_residual),
            checks.join(";"),
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    s
}

/// Runs every scenario of the config, writing one directory per run plus
/// `summary.csv` and `summary.json` under `out`.
pub fn execute(cfg: &HarnessConfig, out: &Path, jobs: Option<usize>) -> Result<Summary, HarnessError> {
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let work = || {
        cfg.runs
            .par_iter()
            .enumerate()
            .map(|(i, spec)| run_one(spec, &cfg.check_options, cfg.seed.wrapping_add(i as u64), out))
            .collect::<Result<Vec<_>, _>>()
    };
    let runs = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Io(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let sum = Summary {
        seed: cfg.seed,
        passed: runs.iter().filter(|r| r.pass).count(),
        total: runs.len(),
        runs,
    };
    write_atomic(&out.join("summary.csv"), summary_csv(&sum).as_bytes())?;
    write_json(&out.join("summary.json"), &sum)?;
    Ok(sum)
}
