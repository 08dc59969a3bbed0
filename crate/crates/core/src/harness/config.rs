use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::criteria::{CheckKind, CheckOptions};
use crate::index_form::ConjugateSearchParams;
use crate::models::RunStatus;
use crate::scenario::{validate_scenario, FixedPointScenario, VerticalPressure};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    /// Seed for random trial fields; `BLOWUPLAB_SEED` overrides it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub check_options: CheckOptions,
    pub runs: Vec<RunSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    /// By location and parity.
    #[default]
    Auto,
    AxisEven,
    BoundaryEven,
    LinearGAxis,
    LinearGBoundary,
    LinearFOdd,
    CentralForce,
    /// Checks only, no trajectory output.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    SignCriterion,
    QuarterThreshold,
    RotationBlowup,
    MonotonePressure,
    Conjugate,
    LaplacianOdd,
    Fredholm,
    /// Index form of random endpoint-vanishing fields must be nonnegative.
    Positivity,
}

impl CheckName {
    pub fn name(self) -> &'static str {
        match self {
            CheckName::SignCriterion => "sign_criterion",
            CheckName::QuarterThreshold => "quarter_threshold",
            CheckName::RotationBlowup => "rotation_blowup",
            CheckName::MonotonePressure => "monotone_pressure",
            CheckName::Conjugate => "conjugate",
            CheckName::LaplacianOdd => "laplacian_odd",
            CheckName::Fredholm => "fredholm",
            CheckName::Positivity => "positivity",
        }
    }

    pub fn criterion(self) -> Option<CheckKind> {
        Some(match self {
            CheckName::SignCriterion => CheckKind::SignCriterion,
            CheckName::QuarterThreshold => CheckKind::QuarterThreshold,
            CheckName::RotationBlowup => CheckKind::RotationBlowup,
            CheckName::MonotonePressure => CheckKind::MonotonePressure,
            _ => return None,
        })
    }
}

/// Outcome labels a check can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
    HypothesisNotMet,
    Found,
    NoneFound,
    Holds,
    Fails,
    Computed,
    Error,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Indeterminate => "indeterminate",
            Outcome::HypothesisNotMet => "hypothesis_not_met",
            Outcome::Found => "found",
            Outcome::NoneFound => "none_found",
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Computed => "computed",
            Outcome::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub status: Option<RunStatus>,
    /// `true`: some component must vanish or the guard must trip; `false`: neither.
    pub collapse: Option<bool>,
    pub collapse_before: Option<f64>,
    #[serde(default)]
    pub checks: BTreeMap<CheckName, Outcome>,
}

impl Expectation {
    pub fn is_empty(&self) -> bool {
        self.status.is_none() && self.collapse.is_none() && self.collapse_before.is_none() && self.checks.is_empty()
    }
}

fn default_fields() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub name: String,
    pub scenario: FixedPointScenario,
    #[serde(default)]
    pub model: ModelChoice,
    #[serde(default)]
    pub checks: Vec<CheckName>,
    /// Parameters for the `conjugate` check; the family defaults by location.
    #[serde(default)]
    pub conjugate: Option<ConjugateSearchParams>,
    /// Number of random fields for the `positivity` check.
    #[serde(default = "default_fields")]
    pub positivity_fields: usize,
    #[serde(default)]
    pub expect: Expectation,
}

impl HarnessConfig {
    pub fn from_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: HarnessConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs.is_empty() {
            return Err(HarnessError::Config("no runs".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.runs {
            if r.name.is_empty() || r.name.contains(['/', '\\']) || r.name == "." || r.name == ".." {
                return Err(HarnessError::Config(format!("run name {:?} is not a valid directory name", r.name)));
            }
            if !seen.insert(r.name.as_str()) {
                return Err(HarnessError::Config(format!("duplicate run name {:?}", r.name)));
            }
            let report = validate_scenario(&r.scenario);
            if !report.is_empty() {
                return Err(HarnessError::Config(format!("run {:?}: {report}", r.name)));
            }
        }
        Ok(())
    }

    /// Applies a relative tolerance to every scenario.
    pub fn override_tol(&mut self, rel_tol: f64) {
        for r in &mut self.runs {
            r.scenario.tolerances.rel_tol = rel_tol;
        }
    }
}

/// Sets a numeric scenario field by dotted path (`swirl.b0`, `t_end`,
/// `tolerances.rel_tol`, ...) or alias: `H` is the constant inner value of a
/// pole-scaled `pressure_rr`; `a` sets `a0` and, with a prescribed `P_zz`,
/// `c0z = -a`. Changing `a0` keeps `c0z` compatible when `P_zz` is not
/// prescribed.
pub fn set_parameter(s: &FixedPointScenario, param: &str, value: f64) -> Result<FixedPointScenario, HarnessError> {
    let unknown = || HarnessError::Config(format!("unknown or non-numeric parameter {param:?}"));
    let path: Vec<&str> = match param {
        "H" => vec!["pressure_rr", "kind", "inner", "kind", "value"],
        "a" => vec!["a0"],
        p => p.split('.').collect(),
    };
    let mut json = serde_json::to_value(s).expect("scenario serializes");
    let mut slot = &mut json;
    for key in &path {
        slot = slot.get_mut(*key).ok_or_else(unknown)?;
    }
    if !slot.is_number() {
        return Err(unknown());
    }
    *slot = serde_json::Number::from_f64(value)
        .map(Value::Number)
        .ok_or_else(|| HarnessError::Config(format!("value {value} is not finite")))?;
    let mut out: FixedPointScenario =
        serde_json::from_value(json).map_err(|e| HarnessError::Config(format!("{param}: {e}")))?;
    if path == ["a0"] {
        out.c0z = match out.pressure_zz {
            VerticalPressure::Profile(_) if param == "a" => -value,
            VerticalPressure::Profile(_) => out.c0z,
            _ => out.compatible_c0z(),
        };
    }
    Ok(out)
}

/// Parses `0.2,0.25,0.3`.
pub fn parse_values(list: &str) -> Result<Vec<f64>, HarnessError> {
    let vals: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|e| HarnessError::Config(format!("value {x:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if vals.is_empty() {
        return Err(HarnessError::Config("empty value range".into()));
    }
    Ok(vals)
}
