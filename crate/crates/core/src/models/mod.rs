//! The fixed-point ODE systems for the radial and vertical stretches `f`, `g`
//! and the planar central-force system they derive from.

mod oracle;
mod solution;

pub use oracle::{central_force_for, central_force_oracle, CentralForceSolution};
pub use solution::{JacobiSolution, ModelKind, RunStatus, SolutionEvent};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, EventSpec, SecondOrderIvp};
use crate::scenario::{validate_scenario, FixedPointScenario, Location, Parity, VerticalPressure};
use solution::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearTarget {
    /// `g'' = -P_zz g` on the axis
    GAxis,
    /// `g'' = -P_zz g` on the boundary circle
    GBoundary,
    /// `f'' = -P_rr f` for odd swirl
    FOdd,
}

fn ensure_valid(s: &FixedPointScenario) -> Result<()> {
    let report = validate_scenario(s);
    if report.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidScenario(report))
    }
}

fn ensure_kind(s: &FixedPointScenario, loc: Location, parity: Parity, what: &str) -> Result<()> {
    if s.location != loc || s.parity != parity {
        return Err(Error::WrongModel(format!(
            "{what} needs a {loc:?}/{parity:?} scenario, got {:?}/{:?}",
            s.location, s.parity
        )));
    }
    Ok(())
}

/// Ermakov–Pinney radial stretch on the axis,
/// `f'' = b0^2/f^3 - P_rr f`, with `g` from the chosen [`VerticalPressure`]
/// mode. Halts with [`RunStatus::BlowupDetected`] once `f < f_stop`.
pub fn run_axis_even(s: &FixedPointScenario) -> Result<JacobiSolution> {
    ensure_kind(s, Location::Axis, Parity::EvenSwirl, "run_axis_even")?;
    ensure_valid(s)?;
    let b0 = s.swirl.b0;
    let c = b0 * b0;
    let prr = &s.pressure_rr;
    let span = (0.0, s.t_end);
    let winding = |_: f64, y: &[f64], _: &[f64]| 1.0 / (y[0] * y[0]);
    let guard = |_: f64, y: &[f64], _: &[f64]| y[0];

    let (ivp, layout) = match &s.pressure_zz {
        VerticalPressure::Constraint => (
            SecondOrderIvp::new(
                move |t, y, _, ypp| {
                    let f = y[0];
                    ypp[0] = c / (f * f * f) - prr.value(t)? * f;
                    Ok(())
                },
                vec![1.0],
                vec![s.fp0()],
                span,
            ),
            Layout::FOnly { p: 2 },
        ),
        VerticalPressure::DerivedFromTrace => (
            SecondOrderIvp::new(
                move |t, y, yp, ypp| {
                    let (f, g, fp) = (y[0], y[1], yp[0]);
                    let p = prr.value(t)?;
                    ypp[0] = c / (f * f * f) - p * f;
                    let pzz = -2.0 * p - 6.0 * fp * fp / (f * f) + 2.0 * c / f.powi(4);
                    ypp[1] = -pzz * g;
                    Ok(())
                },
                vec![1.0, 1.0],
                vec![s.fp0(), s.c0z],
                span,
            ),
            Layout::Both,
        ),
        VerticalPressure::Profile(q) => (
            SecondOrderIvp::new(
                move |t, y, _, ypp| {
                    let f = y[0];
                    ypp[0] = c / (f * f * f) - prr.value(t)? * f;
                    ypp[1] = -q.value(t)? * y[1];
                    Ok(())
                },
                vec![1.0, 1.0],
                vec![s.fp0(), s.c0z],
                span,
            ),
            Layout::Both,
        ),
    };
    let ivp = ivp.with_integral("winding", winding).with_guard("f", guard);
    let events = zero_events(layout);
    let traj = integrate(&ivp, &s.tolerances, &events)?;
    Ok(JacobiSolution::from_trajectory(
        ModelKind::AxisEven,
        traj,
        layout,
        2.0 * b0.abs(),
        |f, g| (f * f * g - 1.0).abs(),
    ))
}

/// Radial stretch on the boundary circle,
/// `f'' = 2 b1 (b1 + b2) - 3 b1^2 f - P_rr f`.
pub fn run_boundary_even(s: &FixedPointScenario) -> Result<JacobiSolution> {
    ensure_kind(s, Location::Boundary, Parity::EvenSwirl, "run_boundary_even")?;
    ensure_valid(s)?;
    let (b1, b2) = (s.swirl.b1, s.swirl.b2);
    let forcing = 2.0 * b1 * (b1 + b2);
    let b1sq = b1 * b1;
    let prr = &s.pressure_rr;
    let span = (0.0, s.t_end);

    let (ivp, layout) = match &s.pressure_zz {
        VerticalPressure::Constraint => (
            SecondOrderIvp::new(
                move |t, y, _, ypp| {
                    ypp[0] = forcing - (3.0 * b1sq + prr.value(t)?) * y[0];
                    Ok(())
                },
                vec![1.0],
                vec![s.fp0()],
                span,
            ),
            Layout::FOnly { p: 1 },
        ),
        VerticalPressure::DerivedFromTrace => (
            SecondOrderIvp::new(
                move |t, y, yp, ypp| {
                    let (f, g, fp) = (y[0], y[1], yp[0]);
                    let p = prr.value(t)?;
                    ypp[0] = forcing - (3.0 * b1sq + p) * f;
                    let pzz = -p - 3.0 * b1sq + forcing / f - 2.0 * fp * fp / (f * f);
                    ypp[1] = -pzz * g;
                    Ok(())
                },
                vec![1.0, 1.0],
                vec![s.fp0(), s.c0z],
                span,
            ),
            Layout::Both,
        ),
        VerticalPressure::Profile(q) => (
            SecondOrderIvp::new(
                move |t, y, _, ypp| {
                    ypp[0] = forcing - (3.0 * b1sq + prr.value(t)?) * y[0];
                    ypp[1] = -q.value(t)? * y[1];
                    Ok(())
                },
                vec![1.0, 1.0],
                vec![s.fp0(), s.c0z],
                span,
            ),
            Layout::Both,
        ),
    };
    let ivp = ivp
        .with_integral("winding", |_, y, _| 1.0 / y[0])
        .with_guard("f", |_, y, _| y[0]);
    let events = zero_events(layout);
    let traj = integrate(&ivp, &s.tolerances, &events)?;
    Ok(JacobiSolution::from_trajectory(
        ModelKind::BoundaryEven,
        traj,
        layout,
        (b1 + b2).abs(),
        |f, g| (f * g - 1.0).abs(),
    ))
}

/// Linear equation `y'' = -Q y` with `y(0) = 1`. The `g` targets take
/// `Q = P_zz` (which must be prescribed) and `y'(0) = c0z`; [`LinearTarget::FOdd`]
/// takes `Q = P_rr` and `y'(0) = -a0`. The run continues through zeros; no
/// guard is applied.
pub fn run_linear(s: &FixedPointScenario, which: LinearTarget) -> Result<JacobiSolution> {
    ensure_valid(s)?;
    let (q, yp0, layout, model, scale) = match which {
        LinearTarget::GAxis | LinearTarget::GBoundary => {
            let VerticalPressure::Profile(q) = &s.pressure_zz else {
                return Err(Error::WrongModel(
                    "linear g runs need a prescribed pressure_zz profile".into(),
                ));
            };
            if which == LinearTarget::GAxis {
                (q, s.c0z, Layout::GOnly { p: 2 }, ModelKind::LinearGAxis, 2.0 * s.swirl.b0.abs())
            } else {
                (
                    q,
                    s.c0z,
                    Layout::GOnly { p: 1 },
                    ModelKind::LinearGBoundary,
                    (s.swirl.b1 + s.swirl.b2).abs(),
                )
            }
        }
        LinearTarget::FOdd => (
            &s.pressure_rr,
            s.fp0(),
            Layout::FOnly { p: 1 },
            ModelKind::LinearFOdd,
            s.swirl.b3.abs(),
        ),
    };
    let ivp = SecondOrderIvp::new(
        move |t, y, _, ypp| {
            ypp[0] = -q.value(t)? * y[0];
            Ok(())
        },
        vec![1.0],
        vec![yp0],
        (0.0, s.t_end),
    )
    .with_integral("winding", |_, y, _| y[0].abs());
    let events = zero_events(layout);
    let traj = integrate(&ivp, &s.tolerances, &events)?;
    Ok(JacobiSolution::from_trajectory(model, traj, layout, scale, |_, _| 0.0))
}

/// Dispatches on location and parity to the matching model.
pub fn run_scenario(s: &FixedPointScenario) -> Result<JacobiSolution> {
    match (s.location, s.parity) {
        (Location::Axis, Parity::EvenSwirl) => run_axis_even(s),
        (Location::Boundary, Parity::EvenSwirl) => run_boundary_even(s),
        (_, Parity::OddSwirl) => run_linear(s, LinearTarget::FOdd),
    }
}

fn zero_events(layout: Layout) -> Vec<EventSpec<'static>> {
    match layout {
        Layout::Both => vec![
            EventSpec::component_zero("f_zero", 0),
            EventSpec::component_zero("g_zero", 1),
        ],
        Layout::FOnly { .. } | Layout::Polar => vec![EventSpec::component_zero("f_zero", 0)],
        Layout::GOnly { .. } => vec![EventSpec::component_zero("g_zero", 0)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::CoefficientProfile;
    use crate::scenario::{SolverTolerances, SwirlConstants};
    use std::f64::consts::PI;

    pub(crate) fn axis(b0: f64, prr: f64, a0: f64, mode: VerticalPressure, t_end: f64) -> FixedPointScenario {
        FixedPointScenario {
            location: Location::Axis,
            parity: Parity::EvenSwirl,
            swirl: SwirlConstants::axis(b0),
            a0,
            c0z: 2.0 * a0,
            pressure_rr: CoefficientProfile::constant(prr),
            pressure_zz: mode,
            t_end,
            tolerances: SolverTolerances::default(),
        }
    }

    fn boundary(b1: f64, b2: f64, prr: f64, a0: f64, mode: VerticalPressure, t_end: f64) -> FixedPointScenario {
        FixedPointScenario {
            location: Location::Boundary,
            parity: Parity::EvenSwirl,
            swirl: SwirlConstants::boundary_even(b1, b2),
            a0,
            c0z: a0,
            pressure_rr: CoefficientProfile::constant(prr),
            pressure_zz: mode,
            t_end,
            tolerances: SolverTolerances::default(),
        }
    }

    fn linear_g(q: CoefficientProfile, c0z: f64, t_end: f64) -> FixedPointScenario {
        FixedPointScenario {
            location: Location::Axis,
            parity: Parity::EvenSwirl,
            swirl: SwirlConstants::default(),
            a0: 0.0,
            c0z,
            pressure_rr: CoefficientProfile::constant(0.0),
            pressure_zz: VerticalPressure::Profile(q),
            t_end,
            tolerances: SolverTolerances::default(),
        }
    }

    #[test]
    fn axis_equilibrium_is_steady() {
        let s = axis(1.0, 1.0, 0.0, VerticalPressure::DerivedFromTrace, 5.0);
        let sol = run_axis_even(&s).unwrap();
        assert_eq!(sol.terminated, RunStatus::Completed);
        for i in 0..sol.len() {
            assert!((sol.f[i] - 1.0).abs() < 1e-12);
            assert!((sol.g[i] - 1.0).abs() < 1e-12);
        }
        assert!((sol.winding_integral.last().unwrap() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn axis_closed_form_elliptic_orbit() {
        let s = axis(1.0, 4.0, 0.0, VerticalPressure::Constraint, 1.0);
        let sol = run_axis_even(&s).unwrap();
        assert!((sol.f_at(PI / 4.0) - 0.5).abs() < 1e-8);
        let t = 0.3f64;
        let exact = ((2.0 * t).cos().powi(2) + 0.25 * (2.0 * t).sin().powi(2)).sqrt();
        assert!((sol.f_at(t) - exact).abs() < 1e-8);
        assert!((sol.g_at(t) - 1.0 / (exact * exact)).abs() < 1e-7);
    }

    #[test]
    fn axis_linear_collapse_hits_guard() {
        let mut s = axis(0.0, 0.0, 1.0, VerticalPressure::Constraint, 2.0);
        s.tolerances.f_stop = 1e-10;
        let sol = run_axis_even(&s).unwrap();
        assert_eq!(sol.terminated, RunStatus::BlowupDetected);
        assert!((sol.blowup_time.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_equilibrium_is_steady() {
        let s = boundary(1.0, 1.0, 1.0, 0.0, VerticalPressure::DerivedFromTrace, 4.0);
        let sol = run_boundary_even(&s).unwrap();
        assert!(sol.f.iter().chain(&sol.g).all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn trace_mode_keeps_constraint() {
        let s = axis(0.7, 0.3, 0.4, VerticalPressure::DerivedFromTrace, 2.0);
        let sol = run_axis_even(&s).unwrap();
        let worst = sol.constraint_residual.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        let s = boundary(0.5, 0.2, 0.1, 0.3, VerticalPressure::DerivedFromTrace, 2.0);
        let sol = run_boundary_even(&s).unwrap();
        let worst = sol.constraint_residual.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn linear_zero_times() {
        let sol = run_linear(&linear_g(CoefficientProfile::constant(0.0), -0.5, 3.0), LinearTarget::GAxis).unwrap();
        assert!((sol.first_zero_g.unwrap() - 2.0).abs() < 1e-10);
        let sol = run_linear(&linear_g(CoefficientProfile::constant(-1.0), -2.0, 2.0), LinearTarget::GAxis).unwrap();
        assert!((sol.first_zero_g.unwrap() - 0.5f64.atanh()).abs() < 1e-8);
        let sol = run_linear(&linear_g(CoefficientProfile::constant(1.0), -0.5, 2.0), LinearTarget::GAxis).unwrap();
        assert!((sol.first_zero_g.unwrap() - 2f64.atan()).abs() < 1e-8);
    }

    #[test]
    fn wrong_model_is_rejected() {
        let s = boundary(1.0, 1.0, 1.0, 0.0, VerticalPressure::Constraint, 1.0);
        assert!(matches!(run_axis_even(&s), Err(Error::WrongModel(_))));
        let s = axis(1.0, 1.0, 0.0, VerticalPressure::Constraint, 1.0);
        assert!(matches!(run_linear(&s, LinearTarget::GAxis), Err(Error::WrongModel(_))));
    }
}
