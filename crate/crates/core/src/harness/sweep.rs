use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{set_parameter, Expectation, HarnessConfig, Outcome};
use super::run::{execute, fmt_opt, write_atomic, Summary};
use super::HarnessError;

/// One line of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub run: String,
    pub parameter: String,
    pub value: f64,
    /// Observed zero of the first check, else the model's collapse time.
    pub first_zero: Option<f64>,
    pub bound: Option<f64>,
    pub pass: bool,
    pub outcome: String,
    pub zero_count: Option<u64>,
}

/// Runs every config scenario at each value of `param`. Expectations in the
/// config are ignored; the per-point outcomes go to `sweep.csv`.
pub fn sweep(
    cfg: &HarnessConfig,
    param: &str,
    values: &[f64],
    out: &Path,
    jobs: Option<usize>,
) -> Result<(Summary, Vec<SweepRow>), HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Config("empty value range".into()));
    }
    let mut expanded = HarnessConfig {
        seed: cfg.seed,
        check_options: cfg.check_options.clone(),
        runs: Vec::new(),
    };
    let mut keys = Vec::new();
    for r in &cfg.runs {
        for &v in values {
            let mut spec = r.clone();
            spec.scenario = set_parameter(&r.scenario, param, v)?;
            spec.name = format!("{}__{}={}", r.name, param, v);
            spec.expect = Expectation::default();
            expanded.runs.push(spec);
            keys.push((r.name.clone(), v));
        }
    }
    expanded.validate()?;
    let summary = execute(&expanded, out, jobs)?;

    let rows: Vec<SweepRow> = summary
        .runs
        .iter()
        .zip(&keys)
        .map(|(o, (name, v))| {
            let first = o.checks.first();
            SweepRow {
                run: name.clone(),
                parameter: param.to_string(),
                value: *v,
                first_zero: first.and_then(|c| c.first_zero).or(o.collapse_time),
                bound: first.and_then(|c| c.predicted_bound),
                pass: first.is_some_and(|c| matches!(c.outcome, Outcome::Pass | Outcome::Holds | Outcome::Found)),
                outcome: first.map_or("none", |c| c.outcome.label()).to_string(),
                zero_count: first.and_then(|c| c.zero_count),
            }
        })
        .collect();
    let mut csv = String::from("run,parameter,value,first_zero,bound,pass,outcome,zero_count\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{:.16e},{},{},{},{},{}\n",
            r.run,
            r.parameter,
            r.value,
            fmt_opt(r.first_zero),
            fmt_opt(r.bound),
            r.pass,
            r.outcome,
            r.zero_count.map(|z| z.to_string()).unwrap_or_default()
        ));
    }
    write_atomic(&out.join("sweep.csv"), csv.as_bytes())?;
    Ok((summary, rows))
}
