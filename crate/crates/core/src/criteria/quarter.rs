use std::f64::consts::PI;

use super::{ensure_valid, CheckOptions, CriterionReport, Verdict};
use crate::error::{Error, Result};
use crate::models::{central_force_for, run_axis_even};
use crate::ode::{integrate, EventSpec, SecondOrderIvp};
use crate::profile::{CoefficientProfile, ProfileKind};
use crate::scenario::{FixedPointScenario, Location, Parity};

/// For `P_rr = H(s)/(T - t)^2` the substitution `f = sqrt(T - t) j(s)`,
/// `s = -ln(T - t)` turns the linear radial equation into
/// `j'' = (1/4 - H(s)) j`. Oscillation of `j` (and thus divergence of the
/// winding) needs `limsup H >= 1/4`.
///
/// The limsup is approximated by the maximum of `H` over the last 20% of the
/// log-time window `[0, quarter_s_window]`.
pub fn check_quarter_threshold(s: &FixedPointScenario, opts: &CheckOptions) -> Result<CriterionReport> {
    if s.location != Location::Axis || s.parity != Parity::EvenSwirl {
        return Err(Error::WrongModel("quarter threshold applies on the axis with even swirl".into()));
    }
    ensure_valid(s)?;
    let ProfileKind::PoleScaled { pole, inner } = &s.pressure_rr.kind else {
        return Err(Error::HypothesisNotMet("pressure_rr must be pole-scaled".into()));
    };
    if s.swirl.b0 == 0.0 {
        return Err(Error::HypothesisNotMet("b0 must be nonzero".into()));
    }
    let h: &CoefficientProfile = inner;
    let window = opts.quarter_s_window;
    if !(window > 0.0) {
        return Err(Error::InvalidArgument(format!("quarter_s_window = {window}")));
    }

    let ivp = SecondOrderIvp::new(
        |u, y, _, ypp| {
            ypp[0] = (0.25 - h.value(u)?) * y[0];
            Ok(())
        },
        vec![0.0],
        vec![1.0],
        (0.0, window),
    );
    let traj = integrate(&ivp, &s.tolerances, &[EventSpec::component_zero("j_zero", 0)])?.into_result()?;
    let zeros: Vec<f64> = traj.events.iter().map(|e| e.t).collect();
    let spacings: Vec<f64> = zeros.windows(2).map(|w| w[1] - w[0]).collect();

    let tail_start = 0.8 * window;
    let per_unit = s.tolerances.quad_points_per_unit;
    let (mut h_inf, mut h_sup) = (f64::INFINITY, f64::NEG_INFINITY);
    for u in h.sample_times(tail_start, window, per_unit) {
        let v = h.value(u)?;
        h_inf = h_inf.min(v);
        h_sup = h_sup.max(v);
    }
    let (mut all_inf, mut all_sup) = (f64::INFINITY, f64::NEG_INFINITY);
    for u in h.sample_times(0.0, window, per_unit) {
        let v = h.value(u)?;
        all_inf = all_inf.min(v);
        all_sup = all_sup.max(v);
    }

    let mut rep = CriterionReport::new("quarter_threshold", (0.0, window));
    rep.diag("pole", *pole);
    rep.diag("h_limsup", h_sup);
    rep.diag("h_liminf", h_inf);
    rep.diag("zero_count", zeros.len());
    rep.diag("zeros_s", zeros.clone());
    rep.diag("spacings_s", spacings.clone());
    let tail_zeros = zeros.iter().filter(|&&z| z >= tail_start).count();
    rep.diag("tail_zero_count", tail_zeros);

    let verdict = if (h_sup - 0.25).abs() <= opts.quarter_marginal_tol {
        rep.diag("regime", "marginal");
        rep.observed = Some(zeros.len() as f64);
        Verdict::Indeterminate
    } else if h_sup < 0.25 {
        rep.diag("regime", "non_oscillatory");
        rep.observed = Some(zeros.len() as f64);
        if tail_zeros == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    } else if h_inf > 0.25 {
        rep.diag("regime", "oscillatory");
        let constant = all_sup - all_inf <= opts.quarter_marginal_tol;
        // Sturm comparison brackets the spacing between the extreme constant cases
        let (lo, hi) = if constant {
            let d = PI / (h_sup - 0.25).sqrt();
            rep.predicted_bound = Some(d);
            (d, d)
        } else {
            (PI / (h_sup - 0.25).sqrt(), PI / (h_inf - 0.25).sqrt())
        };
        let checked: Vec<f64> = if constant {
            spacings.clone()
        } else {
            zeros
                .windows(2)
                .filter(|w| w[0] >= tail_start)
                .map(|w| w[1] - w[0])
                .collect()
        };
        if !checked.is_empty() {
            rep.observed = Some(checked.iter().sum::<f64>() / checked.len() as f64);
        }
        let err = checked
            .iter()
            .map(|d| (lo - d).max(d - hi).max(0.0))
            .fold(0.0, f64::max);
        rep.diag("spacing_bracket", vec![lo, hi]);
        rep.diag("max_spacing_error", err);
        if checked.is_empty() {
            Verdict::Indeterminate
        } else if err <= opts.spacing_tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    } else {
        rep.diag("regime", "mixed");
        rep.observed = Some(zeros.len() as f64);
        Verdict::Indeterminate
    };
    rep.set_verdict(verdict);

    cross_check_time_domain(s, *pole, rep.predicted_bound, &mut rep);
    Ok(rep)
}

/// Compares the Ermakov–Pinney run with the planar oracle on `[0, t_end]` and
/// measures the log-time spacing of zeros of the oracle's `x(t)`.
fn cross_check_time_domain(s: &FixedPointScenario, pole: f64, spacing: Option<f64>, rep: &mut CriterionReport) {
    let (sol, oracle) = match (run_axis_even(s), central_force_for(s)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            rep.diag("time_domain_error", e.to_string());
            return;
        }
    };
    let horizon = sol.t_final().min(oracle.solution.t_final());
    let max_dev = oracle
        .solution
        .grid
        .iter()
        .zip(&oracle.solution.f)
        .filter(|(t, _)| **t <= horizon)
        .map(|(t, rho)| (sol.f_at(*t) - rho).abs())
        .fold(0.0, f64::max);
    rep.diag("time_domain_t_end", horizon);
    rep.diag("time_domain_max_f_minus_rho", max_dev);
    let x_zeros_s: Vec<f64> = oracle.x_zeros().iter().map(|t| -(pole - t).ln()).collect();
    if let Some(d) = spacing {
        let err = x_zeros_s
            .windows(2)
            .map(|w| (w[1] - w[0] - d).abs())
            .fold(0.0, f64::max);
        rep.diag("time_domain_spacing_error", err);
    }
    rep.diag("time_domain_x_zeros_s", x_zeros_s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{SolverTolerances, SwirlConstants, VerticalPressure};

    fn pole_scenario(h: f64) -> FixedPointScenario {
        FixedPointScenario {
            location: Location::Axis,
            parity: Parity::EvenSwirl,
            swirl: SwirlConstants::axis(1.0),
            a0: 0.0,
            c0z: 0.0,
            pressure_rr: CoefficientProfile::pole_scaled(1.0, CoefficientProfile::constant(h)),
            pressure_zz: VerticalPressure::Constraint,
            t_end: 1.0 - 1e-4,
            tolerances: SolverTolerances::default(),
        }
    }

    #[test]
    fn constant_h_classification() {
        let o = CheckOptions::default();
        let r = check_quarter_threshold(&pole_scenario(0.2), &o).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.diagnostics["zero_count"].as_u64().unwrap() <= 1);
        let r = check_quarter_threshold(&pole_scenario(0.25), &o).unwrap();
        assert_eq!(r.verdict, Verdict::Indeterminate);
        let r = check_quarter_threshold(&pole_scenario(0.5), &o).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.observed.unwrap() - 2.0 * PI).abs() < 1e-6);
        assert_eq!(r.diagnostics["zero_count"].as_u64().unwrap(), 7);
    }
}
