//! Executable versions of the blowup criteria. Each checker runs the relevant
//! model on the scenario window and compares the observed collapse with the
//! predicted bound. "For all time" hypotheses are only ever checked on the
//! sampled window `[0, t_end]`, which every report states.

mod quarter;
mod rotation;
mod sturm;

pub use quarter::check_quarter_threshold;
pub use rotation::{check_rotation_blowup, rotation_envelope, rotation_ratio_limit, threshold_k};
pub use sturm::{sturm_compare, ComparisonReport, CoshEnvelope};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::models::{run_linear, LinearTarget};
use crate::ode::{integrate, EventSpec, SecondOrderIvp};
use crate::profile::CoefficientProfile;
use crate::scenario::{validate_scenario, FixedPointScenario, Location, Parity, VerticalPressure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Marginal case, or a window too short to decide.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    /// Window on which hypotheses and conclusions were sampled.
    pub hypothesis_window: (f64, f64),
    pub predicted_bound: Option<f64>,
    pub observed: Option<f64>,
    pub pass: bool,
    pub verdict: Verdict,
    pub diagnostics: Map<String, Value>,
}

impl CriterionReport {
    fn new(criterion: &str, window: (f64, f64)) -> Self {
        CriterionReport {
            criterion: criterion.into(),
            hypothesis_window: window,
            predicted_bound: None,
            observed: None,
            pass: false,
            verdict: Verdict::Indeterminate,
            diagnostics: Map::new(),
        }
    }

    fn set_verdict(&mut self, v: Verdict) {
        self.verdict = v;
        self.pass = v == Verdict::Pass;
    }

    fn diag(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.into(), value.into());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Knobs shared by the checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    /// Slack allowed when comparing an observed zero with a predicted bound.
    pub bound_slack: f64,
    /// Length of the log-time window for the quarter-threshold test.
    pub quarter_s_window: f64,
    /// `|limsup H - 1/4|` at or below this is reported as marginal.
    pub quarter_marginal_tol: f64,
    /// Tolerance on zero spacing in log time.
    pub spacing_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            bound_slack: 1e-6,
            quarter_s_window: 50.0,
            quarter_marginal_tol: 1e-12,
            spacing_tol: 1e-6,
        }
    }
}

fn ensure_valid(s: &FixedPointScenario) -> Result<()> {
    let report = validate_scenario(s);
    if report.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidScenario(report))
    }
}

/// `(min, max)` of the profile over its sampling grid on `[a, b]`, with the
/// time of the minimum.
fn profile_range(p: &CoefficientProfile, a: f64, b: f64, per_unit: u32) -> Result<(f64, f64, f64)> {
    let mut lo = (f64::INFINITY, a);
    let mut hi = f64::NEG_INFINITY;
    for t in p.sample_times(a, b, per_unit) {
        let v = p.value(t)?;
        if v < lo.0 {
            lo = (v, t);
        }
        hi = hi.max(v);
    }
    Ok((lo.0, hi, lo.1))
}

/// Comparison with the free solution: if `Q >= 0` then `y'' = -Q y`,
/// `y(0) = 1`, `y'(0) < 0` vanishes no later than `-1/y'(0)`.
///
/// Uses `g` with `Q = P_zz` when `P_zz` is prescribed and `c0z < 0`; otherwise
/// an axis scenario without swirl uses `f` with `Q = P_rr` and `f'(0) = -a0`.
pub fn check_sign_criterion(s: &FixedPointScenario, opts: &CheckOptions) -> Result<CriterionReport> {
    ensure_valid(s)?;
    let window = (0.0, s.t_end);
    let per_unit = s.tolerances.quad_points_per_unit;
    let mut rep = CriterionReport::new("sign_criterion", window);

    let (q, slope, target, branch) = match &s.pressure_zz {
        VerticalPressure::Profile(q) if s.c0z < 0.0 => {
            let target = match s.location {
                Location::Axis => LinearTarget::GAxis,
                Location::Boundary => LinearTarget::GBoundary,
            };
            (q, s.c0z, target, "vertical")
        }
        _ if s.location == Location::Axis && s.swirl.b0 == 0.0 && s.a0 > 0.0 => {
            (&s.pressure_rr, s.fp0(), LinearTarget::FOdd, "radial")
        }
        _ => {
            return Err(Error::HypothesisNotMet(
                "need a prescribed P_zz with g'(0) < 0, or a swirl-free axis scenario with f'(0) < 0"
                    .into(),
            ))
        }
    };
    let (qmin, _, tmin) = profile_range(q, 0.0, s.t_end, per_unit)?;
    if qmin < 0.0 {
        return Err(Error::HypothesisNotMet(format!(
            "coefficient is negative ({qmin}) at t = {tmin}"
        )));
    }

    let sol = run_linear(s, target)?;
    let bound = -1.0 / slope;
    let observed = match target {
        LinearTarget::FOdd => sol.first_zero_f,
        _ => sol.first_zero_g,
    };
    rep.predicted_bound = Some(bound);
    rep.observed = observed;
    rep.diag("branch", branch);
    rep.diag("coefficient_min", qmin);
    let verdict = match observed {
        Some(t) if t <= bound + opts.bound_slack => Verdict::Pass,
        Some(_) => Verdict::Fail,
        None if s.t_end >= bound + opts.bound_slack => Verdict::Fail,
        None => {
            rep.diag("note", "window ends before the predicted bound");
            Verdict::Indeterminate
        }
    };
    rep.set_verdict(verdict);
    Ok(rep)
}

/// Which coefficient and slope the monotone-pressure check uses: prescribed
/// `P_zz` with `g'(0) = c0z`, or `P_rr` with `f'(0) = -a0` for odd swirl.
fn monotone_target(s: &FixedPointScenario) -> Result<(&CoefficientProfile, f64, &'static str)> {
    match (&s.pressure_zz, s.parity) {
        (VerticalPressure::Profile(q), _) => Ok((q, s.c0z, "g")),
        (_, Parity::OddSwirl) => Ok((&s.pressure_rr, s.fp0(), "f")),
        _ => Err(Error::HypothesisNotMet(
            "monotone-pressure check needs a prescribed P_zz or an odd-swirl scenario".into(),
        )),
    }
}

/// Nondecreasing `Q` with `Q(0) < 0` and `nu^2 = a^2 + Q(0) > 0`, where
/// `y'(0) = -a < 0`: `y` vanishes before `1/nu` and stays below `1 - nu t`.
/// Also tracks the energy `y'^2 + Q y^2 - ∫ Q' y^2`, which must stay `nu^2`.
pub fn check_monotone_pressure(s: &FixedPointScenario, opts: &CheckOptions) -> Result<CriterionReport> {
    ensure_valid(s)?;
    let (q, slope, which) = monotone_target(s)?;
    let a = -slope;
    let per_unit = s.tolerances.quad_points_per_unit;
    let q0 = q.value(0.0)?;
    if !(q0 < 0.0) {
        return Err(Error::HypothesisNotMet(format!("Q(0) = {q0} is not negative")));
    }
    if !(a > 0.0) {
        return Err(Error::HypothesisNotMet(format!("initial slope {slope} is not negative")));
    }
    let nu2 = a * a + q0;
    if !(nu2 > 0.0) {
        return Err(Error::HypothesisNotMet(format!("nu^2 = a^2 + Q(0) = {nu2} is not positive")));
    }
    let ts = q.sample_times(0.0, s.t_end, per_unit);
    let mut prev = q0;
    for &t in &ts {
        let v = q.value(t)?;
        if v < prev || q.derivative(t)? < 0.0 {
            return Err(Error::HypothesisNotMet(format!("Q decreases at t = {t}")));
        }
        prev = v;
    }

    let ivp = SecondOrderIvp::new(
        |t, y, _, ypp| {
            ypp[0] = -q.value(t)? * y[0];
            Ok(())
        },
        vec![1.0],
        vec![slope],
        (0.0, s.t_end),
    )
    .with_integral("drain", |t, y, _| q.derivative(t).unwrap_or(f64::NAN) * y[0] * y[0]);
    let traj = integrate(&ivp, &s.tolerances, &[EventSpec::component_zero("zero", 0)])?.into_result()?;
    let drain = traj.integral_index("drain").expect("registered");

    let nu = nu2.sqrt();
    let bound = 1.0 / nu;
    let zero = traj.events.first().map(|e| e.t);
    let horizon = zero.unwrap_or(traj.t_final());
    let mut drift: f64 = 0.0;
    let mut envelope_excess = f64::NEG_INFINITY;
    for (t, x) in traj.t.iter().zip(&traj.states) {
        let e = x[1] * x[1] + q.value(*t)? * x[0] * x[0] - x[drain];
        drift = drift.max((e - nu2).abs() / nu2);
        if *t <= horizon {
            envelope_excess = envelope_excess.max(x[0] - (1.0 - nu * t));
        }
    }

    let mut rep = CriterionReport::new("monotone_pressure", (0.0, s.t_end));
    rep.predicted_bound = Some(bound);
    rep.observed = zero;
    rep.diag("component", which);
    rep.diag("nu", nu);
    rep.diag("energy_drift_rel", drift);
    rep.diag("envelope_excess", envelope_excess);
    let envelope_ok = envelope_excess <= opts.bound_slack;
    let verdict = match zero {
        Some(t) if t <= bound + opts.bound_slack && envelope_ok => Verdict::Pass,
        Some(_) => Verdict::Fail,
        None if s.t_end >= bound + opts.bound_slack => Verdict::Fail,
        None => {
            rep.diag("note", "window ends before the predicted bound");
            if envelope_ok {
                Verdict::Indeterminate
            } else {
                Verdict::Fail
            }
        }
    };
    rep.set_verdict(verdict);
    Ok(rep)
}

/// Named checks for the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    SignCriterion,
    QuarterThreshold,
    RotationBlowup,
    MonotonePressure,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::SignCriterion => "sign_criterion",
            CheckKind::QuarterThreshold => "quarter_threshold",
            CheckKind::RotationBlowup => "rotation_blowup",
            CheckKind::MonotonePressure => "monotone_pressure",
        }
    }

    pub fn run(self, s: &FixedPointScenario, opts: &CheckOptions) -> Result<CriterionReport> {
        match self {
            CheckKind::SignCriterion => check_sign_criterion(s, opts),
            CheckKind::QuarterThreshold => check_quarter_threshold(s, opts),
            CheckKind::RotationBlowup => check_rotation_blowup(s, opts),
            CheckKind::MonotonePressure => check_monotone_pressure(s, opts),
        }
    }
}

/// Report for a checker whose hypotheses fail, so batch runs can record it
/// instead of aborting.
pub fn hypothesis_report(kind: CheckKind, s: &FixedPointScenario, reason: &str) -> CriterionReport {
    let mut rep = CriterionReport::new(kind.name(), (0.0, s.t_end));
    rep.diagnostics
        .insert("hypothesis_not_met".into(), json!(reason));
    rep
}
