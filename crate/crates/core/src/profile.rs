//! Prescribed scalar coefficients of time.
//!
//! Pressure Hessian components enter the fixed-point equations only through
//! these profiles; they are hypotheses supplied by the caller, never solved for.

use serde::{Deserialize, Serialize};

use crate::error::ProfileError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientProfile {
    pub kind: ProfileKind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileKind {
    Constant {
        value: f64,
    },
    /// Linear interpolation between `(t, value)` knots, held constant outside.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
    /// `F(t) = H(s) / (T - t)^2` with log-time `s = -ln(T - t)`.
    PoleScaled {
        pole: f64,
        inner: Box<CoefficientProfile>,
    },
    /// A constant `value` declared to lie in `[lower, upper]`.
    BandConstant {
        lower: f64,
        upper: f64,
        value: f64,
    },
}

impl CoefficientProfile {
    pub fn constant(value: f64) -> Self {
        ProfileKind::Constant { value }.into()
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Self {
        ProfileKind::PiecewiseLinear { knots }.into()
    }

    pub fn pole_scaled(pole: f64, inner: CoefficientProfile) -> Self {
        ProfileKind::PoleScaled {
            pole,
            inner: Box::new(inner),
        }
        .into()
    }

    pub fn band(lower: f64, upper: f64, value: f64) -> Self {
        ProfileKind::BandConstant {
            lower,
            upper,
            value,
        }
        .into()
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn value(&self, t: f64) -> Result<f64, ProfileError> {
        let v = match &self.kind {
            ProfileKind::Constant { value } => *value,
            ProfileKind::BandConstant { value, .. } => *value,
            ProfileKind::PiecewiseLinear { knots } => {
                let (i, w) = locate(knots, t)?;
                match w {
                    None => knots[i].1,
                    Some(w) => knots[i].1 + w * (knots[i + 1].1 - knots[i].1),
                }
            }
            ProfileKind::PoleScaled { pole, inner } => {
                let gap = pole_gap(*pole, t)?;
                inner.value(-gap.ln())? / (gap * gap)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ProfileError::NonFinite(t))
        }
    }

    /// Right derivative in t.
    pub fn derivative(&self, t: f64) -> Result<f64, ProfileError> {
        Ok(match &self.kind {
            ProfileKind::Constant { .. } | ProfileKind::BandConstant { .. } => 0.0,
            ProfileKind::PiecewiseLinear { knots } => {
                let (i, w) = locate(knots, t)?;
                match w {
                    None => 0.0,
                    Some(_) => (knots[i + 1].1 - knots[i].1) / (knots[i + 1].0 - knots[i].0),
                }
            }
            ProfileKind::PoleScaled { pole, inner } => {
                // d/dt [H(s)/x^2] with x = T - t and ds/dt = 1/x
                let gap = pole_gap(*pole, t)?;
                let s = -gap.ln();
                (inner.derivative(s)? + 2.0 * inner.value(s)?) / gap.powi(3)
            }
        })
    }

    /// Times in `(a, b)` where the profile (or its derivative) is not smooth.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        match &self.kind {
            ProfileKind::PiecewiseLinear { knots } => knots
                .iter()
                .map(|k| k.0)
                .filter(|&t| t > a && t < b)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Structural checks; an empty list means every evaluation on the declared
    /// domain is well defined.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.kind {
            ProfileKind::Constant { value } => {
                if !value.is_finite() {
                    out.push("constant value is not finite".into());
                }
            }
            ProfileKind::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    out.push(ProfileError::EmptyKnots.to_string());
                }
                if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    out.push("knot with non-finite coordinate".into());
                }
                if let Some(i) = (1..knots.len()).find(|&i| knots[i].0 <= knots[i - 1].0) {
                    out.push(ProfileError::UnorderedKnots(i).to_string());
                }
            }
            ProfileKind::PoleScaled { pole, inner } => {
                if !(*pole > 0.0) || !pole.is_finite() {
                    out.push(ProfileError::InvalidPole(*pole).to_string());
                }
                out.extend(inner.problems().into_iter().map(|p| format!("inner: {p}")));
            }
            ProfileKind::BandConstant {
                lower,
                upper,
                value,
            } => {
                if !(lower.is_finite() && upper.is_finite() && value.is_finite()) {
                    out.push("band bounds must be finite".into());
                } else if !(lower <= value && value <= upper) {
                    out.push(format!(
                        "band value {value} outside [{lower}, {upper}]"
                    ));
                }
            }
        }
        out
    }

    /// Sampling times on `[a, b]`: a uniform grid with `per_unit` points per
    /// unit time, plus interior breakpoints and both ends.
    pub fn sample_times(&self, a: f64, b: f64, per_unit: u32) -> Vec<f64> {
        let n = (((b - a) * per_unit as f64).ceil() as usize).max(1);
        let mut ts: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        ts.extend(self.breakpoints(a, b));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    pub fn pole(&self) -> Option<f64> {
        match &self.kind {
            ProfileKind::PoleScaled { pole, .. } => Some(*pole),
            _ => None,
        }
    }
}

impl From<ProfileKind> for CoefficientProfile {
    fn from(kind: ProfileKind) -> Self {
        CoefficientProfile {
            kind,
            description: String::new(),
        }
    }
}

fn pole_gap(pole: f64, t: f64) -> Result<f64, ProfileError> {
    if !(pole > 0.0) {
        return Err(ProfileError::InvalidPole(pole));
    }
    let gap = pole - t;
    if gap > 0.0 {
        Ok(gap)
    } else {
        Err(ProfileError::BeyondPole { t, pole })
    }
}

/// Knot index and interpolation weight; `None` weight means clamped.
fn locate(knots: &[(f64, f64)], t: f64) -> Result<(usize, Option<f64>), ProfileError> {
    let n = knots.len();
    if n == 0 {
        return Err(ProfileError::EmptyKnots);
    }
    if t < knots[0].0 || n == 1 {
        return Ok((0, None));
    }
    if t >= knots[n - 1].0 {
        return Ok((n - 1, None));
    }
    // first knot strictly greater than t
    let hi = knots.partition_point(|k| k.0 <= t);
    let lo = hi - 1;
    let span = knots[hi].0 - knots[lo].0;
    if span <= 0.0 {
        return Err(ProfileError::UnorderedKnots(hi));
    }
    Ok((lo, Some((t - knots[lo].0) / span)))
}
