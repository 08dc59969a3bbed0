use std::f64::consts::LN_2;

use super::{ensure_valid, profile_range, CheckOptions, CriterionReport, Verdict};
use crate::error::{Error, Result};
use crate::models::run_boundary_even;
use crate::scenario::{FixedPointScenario, Location, Parity};

/// Positive root of `k (k + a) = c2 ln 2`.
pub fn threshold_k(a: f64, c2: f64) -> f64 {
    (-a + (a * a + 4.0 * c2 * LN_2).sqrt()) / 2.0
}

/// Limit of the ratio bound `f / y1` as `t -> inf`.
pub fn rotation_ratio_limit(a: f64, k: f64, c2: f64) -> f64 {
    (k * k - a * k - c2 * LN_2) / (k * k)
}

/// Upper bound for `f(t) / cosh(kt)` obtained from variation of parameters
/// with `y1 <= cosh(kt)`; tends to [`rotation_ratio_limit`].
pub fn rotation_envelope(t: f64, a: f64, k: f64, c2: f64) -> f64 {
    let kt = k * t;
    1.0 - (a / k) * kt.tanh() - c2 * LN_2 / (k * k)
        + (c2 / (k * k)) * (-2.0 * kt).exp().ln_1p()
        + 2.0 * c2 * t / (k * (1.0 + (2.0 * kt).exp()))
}

/// Boundary-circle collapse driven by a swirl jet with
/// `2 b1 (b1 + b2) = -c^2 < 0` and `f'(0) = -a0 < 0`.
///
/// With `F = P_rr + 3 b1^2`:
/// * `F >= 0`: `f <= 1 - a0 t - c^2 t^2 / 2`, so `f` vanishes before that root;
/// * `-k^2 <= F <= 0` with `k(k - a0) = c^2 ln 2`: `f` eventually turns
///   negative, with no explicit time bound.
pub fn check_rotation_blowup(s: &FixedPointScenario, opts: &CheckOptions) -> Result<CriterionReport> {
    if s.location != Location::Boundary || s.parity != Parity::EvenSwirl {
        return Err(Error::WrongModel("rotation blowup applies on the boundary with even swirl".into()));
    }
    ensure_valid(s)?;
    let (b1, b2) = (s.swirl.b1, s.swirl.b2);
    let c2 = -2.0 * b1 * (b1 + b2);
    if !(c2 > 0.0) {
        return Err(Error::HypothesisNotMet(format!("2 b1 (b1 + b2) = {} is not negative", -c2)));
    }
    let a0 = s.a0;
    if !(a0 > 0.0) {
        return Err(Error::HypothesisNotMet(format!("f'(0) = {} is not negative", -a0)));
    }
    // the strain enters the threshold through f'(0) = -a0
    let k = threshold_k(-a0, c2);
    let shift = 3.0 * b1 * b1;
    let (pmin, pmax, tmin) = profile_range(&s.pressure_rr, 0.0, s.t_end, s.tolerances.quad_points_per_unit)?;
    let (fmin, fmax) = (pmin + shift, pmax + shift);
    let edge_tol = 1e-12 * (1.0 + k * k);

    let mut rep = CriterionReport::new("rotation_blowup", (0.0, s.t_end));
    rep.diag("c2", c2);
    rep.diag("k", k);
    rep.diag("forcing_min", fmin);
    rep.diag("forcing_max", fmax);

    let branch = if fmin >= 0.0 {
        2
    } else if fmin >= -k * k - edge_tol && fmax <= 0.0 {
        1
    } else {
        return Err(Error::HypothesisNotMet(format!(
            "P_rr + 3 b1^2 leaves both branches at t = {tmin} (min {fmin}, max {fmax}, -k^2 = {})",
            -k * k
        )));
    };
    rep.diag("branch", branch);

    let sol = run_boundary_even(s)?;
    let observed = sol.first_zero_f.or(sol.blowup_time);
    rep.observed = observed;

    let verdict = if branch == 2 {
        let bound = (-a0 + (a0 * a0 + 2.0 * c2).sqrt()) / c2;
        rep.predicted_bound = Some(bound);
        match observed {
            Some(t) if t <= bound + opts.bound_slack => Verdict::Pass,
            Some(_) => Verdict::Fail,
            None if s.t_end >= bound + opts.bound_slack => Verdict::Fail,
            None => Verdict::Indeterminate,
        }
    } else {
        rep.diag("asymptotic_ratio_bound", rotation_ratio_limit(a0, k, c2));
        if (fmin + k * k).abs() <= edge_tol && (fmax + k * k).abs() <= edge_tol {
            // y1 = cosh(kt) exactly at the band edge
            let horizon = observed.unwrap_or(sol.t_final());
            let excess = sol
                .grid
                .iter()
                .zip(&sol.f)
                .filter(|(t, _)| **t <= horizon)
                .map(|(t, f)| f / (k * t).cosh() - rotation_envelope(*t, a0, k, c2))
                .fold(f64::NEG_INFINITY, f64::max);
            rep.diag("envelope_excess", excess);
        }
        match observed {
            Some(_) => Verdict::Pass,
            None => Verdict::Indeterminate,
        }
    };
    rep.set_verdict(verdict);
    Ok(rep)
}
