//! Fixed-point scenarios: where the trajectory sits, the swirl jet there, the
//! initial strain, and the hypothesised pressure Hessian.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::profile::CoefficientProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    /// `r = 0, z = 0`
    Axis,
    /// `r = 1, z = 0`
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    EvenSwirl,
    OddSwirl,
}

/// Jet of the initial swirl at the fixed point.
///
/// * `b0`: radial derivative of the swirl on the axis (axis, even swirl)
/// * `b1`: swirl value on the boundary circle (boundary, even swirl)
/// * `b2`: radial derivative of the swirl on the boundary (boundary, even swirl)
/// * `b3`: vertical derivative of the swirl on the boundary (boundary, odd swirl)
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwirlConstants {
    #[serde(default)]
    pub b0: f64,
    #[serde(default)]
    pub b1: f64,
    #[serde(default)]
    pub b2: f64,
    #[serde(default)]
    pub b3: f64,
}

impl SwirlConstants {
    pub fn axis(b0: f64) -> Self {
        SwirlConstants {
            b0,
            ..Default::default()
        }
    }

    pub fn boundary_even(b1: f64, b2: f64) -> Self {
        SwirlConstants {
            b1,
            b2,
            ..Default::default()
        }
    }

    pub fn boundary_odd(b3: f64) -> Self {
        SwirlConstants {
            b3,
            ..Default::default()
        }
    }
}

/// How the vertical stretch `g` and `P_zz` are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VerticalPressure {
    /// `g` follows from incompressibility (`f^2 g = 1` on the axis, `f g = 1`
    /// on the boundary); `P_zz` is not needed.
    Constraint,
    /// `P_zz` comes from the pressure-trace identity along the running
    /// solution and `g` is integrated independently.
    DerivedFromTrace,
    /// `P_zz` is prescribed.
    Profile(CoefficientProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverTolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integration halts once the guarded stretch drops below this value.
    pub f_stop: f64,
    pub zero_bisect_tol: f64,
    pub quad_points_per_unit: u32,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            f_stop: 1e-6,
            zero_bisect_tol: 1e-12,
            quad_points_per_unit: 200,
        }
    }
}

impl SolverTolerances {
    pub fn problems(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("f_stop", self.f_stop),
            ("zero_bisect_tol", self.zero_bisect_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(Violation::new(
                    format!("tolerances.{name}"),
                    format!("must be strictly positive, got {v}"),
                ));
            }
        }
        if self.quad_points_per_unit == 0 {
            out.push(Violation::new(
                "tolerances.quad_points_per_unit",
                "must be strictly positive",
            ));
        }
        if !(self.f_stop < 1.0) {
            out.push(Violation::new(
                "tolerances.f_stop",
                format!("must be below 1, got {}", self.f_stop),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointScenario {
    pub location: Location,
    pub parity: Parity,
    #[serde(default)]
    pub swirl: SwirlConstants,
    /// Initial radial strain, `a0 = -f'(0)`.
    pub a0: f64,
    /// Initial vertical strain, `c0z = g'(0)`.
    #[serde(default)]
    pub c0z: f64,
    pub pressure_rr: CoefficientProfile,
    pub pressure_zz: VerticalPressure,
    pub t_end: f64,
    #[serde(default)]
    pub tolerances: SolverTolerances,
}

impl FixedPointScenario {
    /// `f'(0)`
    pub fn fp0(&self) -> f64 {
        -self.a0
    }

    /// `g'(0)` forced by incompressibility at first order.
    pub fn compatible_c0z(&self) -> f64 {
        match self.location {
            Location::Axis => 2.0 * self.a0,
            Location::Boundary => self.a0,
        }
    }

    /// Initial vorticity vector at the fixed point in the `(e_r, e_theta, e_z)`
    /// frame.
    pub fn initial_vorticity(&self) -> [f64; 3] {
        let b = &self.swirl;
        match (self.location, self.parity) {
            (Location::Axis, Parity::EvenSwirl) => [0.0, 0.0, 2.0 * b.b0],
            (Location::Axis, Parity::OddSwirl) => [0.0, 0.0, 0.0],
            (Location::Boundary, Parity::EvenSwirl) => [0.0, 0.0, b.b1 + b.b2],
            // the swirl is b3 z near the circle, so curl has r-component -b3
            (Location::Boundary, Parity::OddSwirl) => [-b.b3, 0.0, 0.0],
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field.starts_with(field))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}

const COMPAT_TOL: f64 = 1e-12;

/// Lists every violated invariant; an empty report means the scenario is runnable.
pub fn validate_scenario(s: &FixedPointScenario) -> ValidationReport {
    let mut v = s.tolerances.problems();

    if !(s.t_end > 0.0 && s.t_end.is_finite()) {
        v.push(Violation::new("t_end", format!("must be positive, got {}", s.t_end)));
    }
    if !s.a0.is_finite() || !s.c0z.is_finite() {
        v.push(Violation::new("a0", "initial strains must be finite"));
    }

    let b = &s.swirl;
    let allowed: [(&str, f64, bool); 4] = {
        let (e0, e1, e2, e3) = match (s.location, s.parity) {
            (Location::Axis, Parity::EvenSwirl) => (true, false, false, false),
            (Location::Axis, Parity::OddSwirl) => (false, false, false, false),
            (Location::Boundary, Parity::EvenSwirl) => (false, true, true, false),
            (Location::Boundary, Parity::OddSwirl) => (false, false, false, true),
        };
        [("b0", b.b0, e0), ("b1", b.b1, e1), ("b2", b.b2, e2), ("b3", b.b3, e3)]
    };
    for (name, value, ok) in allowed {
        if !value.is_finite() {
            v.push(Violation::new(format!("swirl.{name}"), "must be finite"));
        } else if value != 0.0 && !ok {
            v.push(Violation::new(
                format!("swirl.{name}"),
                format!(
                    "constant does not belong to a {:?}/{:?} scenario",
                    s.location, s.parity
                ),
            ));
        }
    }

    for p in s.pressure_rr.problems() {
        v.push(Violation::new("pressure_rr", p));
    }
    if let Some(pole) = s.pressure_rr.pole() {
        if pole > 0.0 && s.t_end >= pole {
            v.push(Violation::new(
                "t_end",
                format!("must stay before the pressure pole T = {pole}"),
            ));
        }
    }

    match &s.pressure_zz {
        VerticalPressure::Profile(p) => {
            for msg in p.problems() {
                v.push(Violation::new("pressure_zz", msg));
            }
            if let Some(pole) = p.pole() {
                if pole > 0.0 && s.t_end >= pole {
                    v.push(Violation::new(
                        "t_end",
                        format!("must stay before the P_zz pole T = {pole}"),
                    ));
                }
            }
        }
        VerticalPressure::Constraint | VerticalPressure::DerivedFromTrace => {
            let want = s.compatible_c0z();
            if (s.c0z - want).abs() > COMPAT_TOL * (1.0 + want.abs()) {
                v.push(Violation::new(
                    "c0z",
                    format!(
                        "incompressibility requires g'(0) = {want} for this location, got {}",
                        s.c0z
                    ),
                ));
            }
        }
    }

    ValidationReport { violations: v }
}
