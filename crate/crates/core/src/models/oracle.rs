use std::f64::consts::PI;
use std::sync::Arc;

use super::solution::{JacobiSolution, Layout, ModelKind};
use crate::error::Result;
use crate::ode::{integrate, EventSpec, SecondOrderIvp};
use crate::profile::CoefficientProfile;
use crate::scenario::{FixedPointScenario, SolverTolerances};

/// Planar motion `x'' = -F x, y'' = -F y` whose radius obeys the
/// Ermakov–Pinney equation with constant `b0 = x y' - x' y`.
#[derive(Debug, Clone)]
pub struct CentralForceSolution {
    /// `f = rho`, `g = 1/rho^2`, winding `= ∫ dt/rho^2`.
    pub solution: JacobiSolution,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xp: Vec<f64>,
    pub yp: Vec<f64>,
    /// `theta = b0 ∫ dt/rho^2`
    pub theta: Vec<f64>,
    pub angular_momentum: Vec<f64>,
}

impl CentralForceSolution {
    pub fn rho_at(&self, t: f64) -> f64 {
        self.solution.f_at(t)
    }

    /// Polar angle of `(x, y)` unwrapped along the stored grid; independent
    /// of the running integral in [`Self::theta`].
    pub fn unwrapped_angle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.x.len());
        let mut prev = 0.0;
        let mut offset = 0.0;
        for (x, y) in self.x.iter().zip(&self.y) {
            let a = y.atan2(*x);
            let d = a - prev;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
            out.push(a + offset);
            prev = a;
        }
        out
    }

    /// Zeros of the Cartesian component `x(t)` on the run window.
    pub fn x_zeros(&self) -> Vec<f64> {
        self.solution
            .events
            .iter()
            .filter(|e| e.name == "x_zero")
            .map(|e| e.t)
            .collect()
    }
}

/// Integrates the linear planar system with `x(0) = 1, x'(0) = fp0,
/// y(0) = 0, y'(0) = b0`. Halts once `rho < f_stop`.
pub fn central_force_oracle(
    b0: f64,
    fp0: f64,
    force: &CoefficientProfile,
    t_end: f64,
    tol: &SolverTolerances,
) -> Result<CentralForceSolution> {
    let ivp = SecondOrderIvp::new(
        |t, y, _, ypp| {
            let f = force.value(t)?;
            ypp[0] = -f * y[0];
            ypp[1] = -f * y[1];
            Ok(())
        },
        vec![1.0, 0.0],
        vec![fp0, b0],
        (0.0, t_end),
    )
    .with_integral("winding", |_, y, _| 1.0 / (y[0] * y[0] + y[1] * y[1]))
    .with_guard("rho", |_, y, _| y[0].hypot(y[1]));
    let events = [EventSpec::component_zero("x_zero", 0)];
    let traj = integrate(&ivp, tol, &events)?;

    let wi = traj.integral_index("winding").expect("winding integral registered");
    let mut out = CentralForceSolution {
        solution: JacobiSolution::from_trajectory(
            ModelKind::CentralForce,
            traj,
            Layout::Polar,
            2.0 * b0.abs(),
            |f, g| (f * f * g - 1.0).abs(),
        ),
        x: Vec::new(),
        y: Vec::new(),
        xp: Vec::new(),
        yp: Vec::new(),
        theta: Vec::new(),
        angular_momentum: Vec::new(),
    };
    let traj = Arc::clone(out.solution.dense.as_ref().expect("dense output retained"));
    for s in &traj.states {
        out.x.push(s[0]);
        out.y.push(s[1]);
        out.xp.push(s[2]);
        out.yp.push(s[3]);
        out.theta.push(b0 * s[wi]);
        out.angular_momentum.push(s[0] * s[3] - s[2] * s[1]);
    }
    Ok(out)
}

/// Oracle for an axis scenario: `F = P_rr`, `f'(0) = -a0`.
pub fn central_force_for(s: &FixedPointScenario) -> Result<CentralForceSolution> {
    central_force_oracle(s.swirl.b0, s.fp0(), &s.pressure_rr, s.t_end, &s.tolerances)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_orbit() {
        let w = 1.7;
        let o = central_force_oracle(w, 0.0, &CoefficientProfile::constant(w * w), 3.0, &SolverTolerances::default())
            .unwrap();
        for (i, &t) in o.solution.grid.iter().enumerate() {
            assert!((o.solution.f[i] - 1.0).abs() < 1e-9);
            assert!((o.theta[i] - w * t).abs() < 1e-8);
        }
    }

    #[test]
    fn elliptic_and_free_orbits() {
        let tol = SolverTolerances::default();
        let o = central_force_oracle(1.0, 0.0, &CoefficientProfile::constant(4.0), 1.0, &tol).unwrap();
        assert!((o.rho_at(PI / 4.0) - 0.5).abs() < 1e-8);
        let o = central_force_oracle(1.0, 0.0, &CoefficientProfile::constant(0.0), 4.0, &tol).unwrap();
        for (i, &t) in o.solution.grid.iter().enumerate() {
            assert!((o.solution.f[i] - (1.0 + t * t).sqrt()).abs() < 1e-9);
            assert!((o.angular_momentum[i] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unwrapped_angle_matches_integral() {
        let tol = SolverTolerances::default();
        let o = central_force_oracle(0.8, -0.3, &CoefficientProfile::constant(2.0), 12.0, &tol).unwrap();
        let a = o.unwrapped_angle();
        for (x, y) in a.iter().zip(&o.theta) {
            assert!((x - y).abs() < 1e-7, "{x} {y}");
        }
    }
}
