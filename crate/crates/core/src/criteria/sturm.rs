use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, EventSpec, SecondOrderIvp, Termination, Trajectory};
use crate::profile::CoefficientProfile;
use crate::scenario::SolverTolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoshEnvelope {
    pub k: f64,
    /// `max (y1 / cosh(kt) - 1)`; non-positive when the envelope holds.
    pub max_excess: f64,
    pub min_value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub window: (f64, f64),
    pub zeros_q1: Vec<f64>,
    pub zeros_q2: Vec<f64>,
    /// Consecutive zeros of the `Q2` solution with no `Q1` zero between them.
    pub separation_violations: Vec<(f64, f64)>,
    pub separation_holds: bool,
    /// Present when `Q1 <= 0` on the window.
    pub envelope: Option<CoshEnvelope>,
    /// `sup |y1 ∫ ds/y1^2 - y2|` against the directly integrated second
    /// solution, for each coefficient whose `(1, 0)` solution stays positive.
    pub reduction_residual_q1: Option<f64>,
    pub reduction_residual_q2: Option<f64>,
}

fn solve(q: &CoefficientProfile, data: (f64, f64), span: (f64, f64), tol: &SolverTolerances) -> Result<Trajectory> {
    let ivp = SecondOrderIvp::new(
        |t, y, _, ypp| {
            ypp[0] = -q.value(t)? * y[0];
            Ok(())
        },
        vec![data.0],
        vec![data.1],
        span,
    );
    Ok(integrate(&ivp, tol, &[EventSpec::component_zero("zero", 0)])?.into_result()?)
}

/// Second solution by reduction of order from the `(1, 0)` solution,
/// compared with direct integration from `(0, 1)` data.
fn reduction_residual(q: &CoefficientProfile, span: (f64, f64), tol: &SolverTolerances) -> Result<(Option<f64>, Trajectory)> {
    let ivp = SecondOrderIvp::new(
        |t, y, _, ypp| {
            let qv = q.value(t)?;
            ypp[0] = -qv * y[0];
            ypp[1] = -qv * y[1];
            Ok(())
        },
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        span,
    )
    .with_integral("inv_sq", |_, y, _| 1.0 / (y[0] * y[0]))
    .with_guard("y1", |_, y, _| y[0]);
    let traj = integrate(&ivp, tol, &[])?;
    if !matches!(traj.termination, Termination::Completed) {
        return Ok((None, traj));
    }
    let i = traj.integral_index("inv_sq").expect("registered");
    let res = traj
        .states
        .iter()
        .map(|x| (x[0] * x[i] - x[1]).abs())
        .fold(0.0, f64::max);
    Ok((Some(res), traj))
}

/// Sturm comparison of `y'' = -Q1 y` against `y'' = -Q2 y` for `Q1 >= Q2`.
///
/// Both equations start from `data = (y(t0), y'(t0))`. Between consecutive
/// zeros of the `Q2` solution there must be a zero of the `Q1` solution.
pub fn sturm_compare(
    q1: &CoefficientProfile,
    q2: &CoefficientProfile,
    data: (f64, f64),
    span: (f64, f64),
    tol: &SolverTolerances,
) -> Result<ComparisonReport> {
    let (a, b) = span;
    if !(b > a) {
        return Err(Error::InvalidArgument(format!("empty span ({a}, {b})")));
    }
    let mut ts = q1.sample_times(a, b, tol.quad_points_per_unit);
    ts.extend(q2.breakpoints(a, b));
    let (mut q1_min, mut q1_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &ts {
        let (v1, v2) = (q1.value(t)?, q2.value(t)?);
        if v1 < v2 {
            return Err(Error::OrderingViolated { t });
        }
        q1_min = q1_min.min(v1);
        q1_max = q1_max.max(v1);
    }

    let y1 = solve(q1, data, span, tol)?;
    let y2 = solve(q2, data, span, tol)?;
    let zeros_q1: Vec<f64> = y1.events.iter().map(|e| e.t).collect();
    let zeros_q2: Vec<f64> = y2.events.iter().map(|e| e.t).collect();
    let slack = 10.0 * tol.zero_bisect_tol;
    let separation_violations: Vec<(f64, f64)> = zeros_q2
        .windows(2)
        .filter(|w| !zeros_q1.iter().any(|&z| z >= w[0] - slack && z <= w[1] + slack))
        .map(|w| (w[0], w[1]))
        .collect();

    let (reduction_residual_q1, base1) = reduction_residual(q1, span, tol)?;
    let (reduction_residual_q2, _) = reduction_residual(q2, span, tol)?;

    let envelope = if q1_max <= 0.0 {
        let k = (-q1_min).sqrt();
        let mut max_excess = f64::NEG_INFINITY;
        let mut min_value = f64::INFINITY;
        for (t, x) in base1.t.iter().zip(&base1.states) {
            max_excess = max_excess.max(x[0] / (k * (t - a)).cosh() - 1.0);
            min_value = min_value.min(x[0]);
        }
        let rel = 100.0 * tol.rel_tol;
        Some(CoshEnvelope {
            k,
            max_excess,
            min_value,
            holds: max_excess <= rel && min_value >= 1.0 - rel,
        })
    } else {
        None
    };

    Ok(ComparisonReport {
        window: span,
        separation_holds: separation_violations.is_empty(),
        zeros_q1,
        zeros_q2,
        separation_violations,
        envelope,
        reduction_residual_q1,
        reduction_residual_q2,
    })
}
