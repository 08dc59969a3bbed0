//! Adaptive second-order IVP integration with dense output, sign-change events,
//! a singularity guard and running integrals.
//!
//! A system `y'' = F(t, y, y')` of dimension `d` is flattened into the state
//! `[y_0..y_d, y'_0..y'_d, I_0..I_k]` where each `I_j` is a running integral
//! `∫ w_j(t, y, y') dt` carried along as an extra component, so integrals are
//! accumulated to the same order as the solution itself.

mod csv;
mod dopri5;
mod zeros;

pub use csv::write_trajectory_csv;
pub use dopri5::DenseSegment;
pub use zeros::{bisect_on_dense, count_zeros, find_zeros};

use serde::{Deserialize, Serialize};

use crate::error::{OdeError, ProfileError};
use crate::scenario::SolverTolerances;
use dopri5::{A, C, E};

pub type SecondOrderRhs<'a> =
    Box<dyn Fn(f64, &[f64], &[f64], &mut [f64]) -> Result<(), ProfileError> + Send + Sync + 'a>;
pub type StateFunctional<'a> = Box<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'a>;

pub struct RunningIntegral<'a> {
    pub name: String,
    pub integrand: StateFunctional<'a>,
}

/// Quantity that must stay at or above `f_stop`.
pub struct Guard<'a> {
    pub name: String,
    pub quantity: StateFunctional<'a>,
}

pub struct SecondOrderIvp<'a> {
    pub dim: usize,
    pub rhs: SecondOrderRhs<'a>,
    pub y0: Vec<f64>,
    pub yp0: Vec<f64>,
    pub t_span: (f64, f64),
    pub integrals: Vec<RunningIntegral<'a>>,
    pub guard: Option<Guard<'a>>,
}

impl<'a> SecondOrderIvp<'a> {
    pub fn new(
        rhs: impl Fn(f64, &[f64], &[f64], &mut [f64]) -> Result<(), ProfileError> + Send + Sync + 'a,
        y0: Vec<f64>,
        yp0: Vec<f64>,
        t_span: (f64, f64),
    ) -> Self {
        assert_eq!(y0.len(), yp0.len(), "y0 and yp0 dimensions differ");
        SecondOrderIvp {
            dim: y0.len(),
            rhs: Box::new(rhs),
            y0,
            yp0,
            t_span,
            integrals: Vec::new(),
            guard: None,
        }
    }

    pub fn with_integral(
        mut self,
        name: impl Into<String>,
        integrand: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        self.integrals.push(RunningIntegral {
            name: name.into(),
            integrand: Box::new(integrand),
        });
        self
    }

    pub fn with_guard(
        mut self,
        name: impl Into<String>,
        quantity: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        self.guard = Some(Guard {
            name: name.into(),
            quantity: Box::new(quantity),
        });
        self
    }

    fn state_len(&self) -> usize {
        2 * self.dim + self.integrals.len()
    }

    fn derivative(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), ProfileError> {
        let d = self.dim;
        let (y, rest) = x.split_at(d);
        let yp = &rest[..d];
        out[..d].copy_from_slice(yp);
        (self.rhs)(t, y, yp, &mut out[d..2 * d])?;
        for (j, integral) in self.integrals.iter().enumerate() {
            out[2 * d + j] = (integral.integrand)(t, y, yp);
        }
        Ok(())
    }

    fn guard_value(&self, t: f64, x: &[f64]) -> Option<f64> {
        let d = self.dim;
        self.guard
            .as_ref()
            .map(|g| (g.quantity)(t, &x[..d], &x[d..2 * d]))
    }
}

/// Sign change of a scalar functional of the flattened state.
pub struct EventSpec<'a> {
    pub name: String,
    pub functional: Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync + 'a>,
    pub terminal: bool,
}

impl<'a> EventSpec<'a> {
    pub fn new(name: impl Into<String>, functional: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'a) -> Self {
        EventSpec {
            name: name.into(),
            functional: Box::new(functional),
            terminal: false,
        }
    }

    /// Zero crossing of state component `index`.
    pub fn component_zero(name: impl Into<String>, index: usize) -> EventSpec<'static> {
        EventSpec {
            name: name.into(),
            functional: Box::new(move |_, x: &[f64]| x[index]),
            terminal: false,
        }
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventHit {
    pub name: String,
    pub t: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The guard fell below `f_stop`; `t` is where it crossed, located on the
    /// dense output.
    BlowupDetected { t: f64 },
    StepFailure { t: f64 },
    TerminalEvent { t: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct IntegrateOptions {
    pub max_step: Option<f64>,
    /// Disables error control and uses this step throughout.
    pub fixed_step: Option<f64>,
}

/// Output of [`integrate`]: accepted steps, their continuous extensions and
/// the located events.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: usize,
    pub integral_names: Vec<String>,
    pub t: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub segments: Vec<DenseSegment>,
    pub events: Vec<EventHit>,
    pub termination: Termination,
    pub n_rejected: usize,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_final(&self) -> f64 {
        *self.t.last().expect("trajectory has at least one point")
    }

    pub fn state_len(&self) -> usize {
        self.states[0].len()
    }

    pub fn y_index(&self, i: usize) -> usize {
        i
    }

    pub fn yp_index(&self, i: usize) -> usize {
        self.dim + i
    }

    pub fn integral_index(&self, name: &str) -> Option<usize> {
        self.integral_names
            .iter()
            .position(|n| n == name)
            .map(|j| 2 * self.dim + j)
    }

    fn segment_for(&self, t: f64) -> Option<&DenseSegment> {
        if self.segments.is_empty() {
            return None;
        }
        let i = self.segments.partition_point(|s| s.t1() < t);
        Some(&self.segments[i.min(self.segments.len() - 1)])
    }

    /// Dense evaluation of the flattened state; `t` is clamped to the
    /// integrated window.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(self.t_start(), self.t_final());
        match self.segment_for(t) {
            None => self.states[0].clone(),
            Some(seg) => {
                let mut out = vec![0.0; self.state_len()];
                seg.eval_into(t, &mut out);
                out
            }
        }
    }

    pub fn eval_component(&self, t: f64, index: usize) -> f64 {
        let t = t.clamp(self.t_start(), self.t_final());
        match self.segment_for(t) {
            None => self.states[0][index],
            Some(seg) => seg.eval_component(t, index),
        }
    }

    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[index]).collect()
    }

    pub fn events_named<'s>(&'s self, name: &'s str) -> impl Iterator<Item = &'s EventHit> + 's {
        self.events.iter().filter(move |e| e.name == name)
    }

    /// Converts an abnormal termination into the matching [`OdeError`].
    pub fn into_result(self) -> Result<Trajectory, OdeError> {
        match self.termination {
            Termination::StepFailure { t } => Err(OdeError::StepFailure {
                t,
                h: self.segments.last().map_or(0.0, |s| s.h),
            }),
            Termination::BlowupDetected { t } => Err(OdeError::SingularityGuard { t }),
            _ => Ok(self),
        }
    }
}

pub fn integrate(
    ivp: &SecondOrderIvp<'_>,
    tol: &SolverTolerances,
    events: &[EventSpec<'_>],
) -> Result<Trajectory, OdeError> {
    integrate_with(ivp, tol, events, &IntegrateOptions::default())
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const EVENT_PROBES: usize = 4;

pub fn integrate_with(
    ivp: &SecondOrderIvp<'_>,
    tol: &SolverTolerances,
    events: &[EventSpec<'_>],
    opts: &IntegrateOptions,
) -> Result<Trajectory, OdeError> {
    let (t0, t_end) = ivp.t_span;
    if !(t_end > t0) {
        return Err(OdeError::EmptySpan { t_start: t0, t_end });
    }
    let n = ivp.state_len();
    let d = ivp.dim;
    let mut x = Vec::with_capacity(n);
    x.extend_from_slice(&ivp.y0);
    x.extend_from_slice(&ivp.yp0);
    x.resize(n, 0.0);

    let mut traj = Trajectory {
        dim: d,
        integral_names: ivp.integrals.iter().map(|i| i.name.clone()).collect(),
        t: vec![t0],
        states: vec![x.clone()],
        segments: Vec::new(),
        events: Vec::new(),
        termination: Termination::Completed,
        n_rejected: 0,
    };

    if let Some(g) = ivp.guard_value(t0, &x) {
        if g < tol.f_stop {
            traj.termination = Termination::BlowupDetected { t: t0 };
            return Ok(traj);
        }
    }

    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    ivp.derivative(t0, &x, &mut k[0])?;
    let max_step = opts.max_step.unwrap_or(t_end - t0).min(t_end - t0);
    let mut h = match opts.fixed_step {
        Some(h) => h,
        None => initial_step(ivp, tol, t0, &x, &k[0], max_step)?,
    };

    let mut t = t0;
    let mut stage = vec![0.0; n];
    let mut x1 = vec![0.0; n];
    let mut ev_prev: Vec<f64> = events.iter().map(|e| (e.functional)(t0, &x)).collect();

    while t < t_end {
        h = h.min(max_step);
        if t + h >= t_end || (t_end - (t + h)) < 1e-12 * t_end.abs().max(1.0) {
            h = t_end - t;
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            traj.termination = Termination::StepFailure { t };
            return Ok(traj);
        }

        // stages 2..7; stage 7 is evaluated at the candidate solution (FSAL)
        let mut finite = true;
        for s in 1..7 {
            for i in 0..n {
                let acc: f64 = (0..s).map(|j| A[s][j] * k[j][i]).sum();
                stage[i] = x[i] + h * acc;
            }
            if s == 6 {
                x1.copy_from_slice(&stage);
            }
            ivp.derivative(t + C[s] * h, &stage, &mut k[s])?;
            if k[s].iter().any(|v| !v.is_finite()) {
                finite = false;
                break;
            }
        }

        let err = if !finite {
            f64::INFINITY
        } else if opts.fixed_step.is_some() {
            0.0
        } else {
            let mut acc = 0.0;
            for i in 0..n {
                let e: f64 = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
                let sk = tol.abs_tol + tol.rel_tol * x[i].abs().max(x1[i].abs());
                acc += (e / sk).powi(2);
            }
            (acc / n as f64).sqrt()
        };

        if !(err <= 1.0) {
            traj.n_rejected += 1;
            if opts.fixed_step.is_some() {
                traj.termination = Termination::StepFailure { t };
                return Ok(traj);
            }
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).max(FAC_MIN)
            } else {
                0.25
            };
            h *= fac.min(1.0);
            continue;
        }

        let seg = DenseSegment::new(t, h, &x, &x1, &k);
        let t_new = t + h;

        // guard: probe the continuous extension so a dip inside the step is caught
        let mut stop_at: Option<(f64, Termination)> = None;
        if ivp.guard.is_some() {
            let mut buf = vec![0.0; n];
            let guard_at = |tt: f64, buf: &mut Vec<f64>| {
                seg.eval_into(tt, buf);
                ivp.guard_value(tt, buf).unwrap() - tol.f_stop
            };
            let mut lo = t;
            for p in 1..=EVENT_PROBES {
                let tp = if p == EVENT_PROBES { t_new } else { t + h * p as f64 / EVENT_PROBES as f64 };
                let g = if p == EVENT_PROBES {
                    ivp.guard_value(t_new, &x1).unwrap() - tol.f_stop
                } else {
                    guard_at(tp, &mut buf)
                };
                if g < 0.0 {
                    let tc = bisect_on_dense(lo, tp, tol.zero_bisect_tol, |tt| guard_at(tt, &mut buf));
                    stop_at = Some((tc, Termination::BlowupDetected { t: tc }));
                    break;
                }
                lo = tp;
            }
        }

        // events
        let horizon = stop_at.map_or(t_new, |(tc, _)| tc);
        let mut hits: Vec<(usize, f64)> = Vec::new();
        {
            let mut buf = vec![0.0; n];
            for (ei, ev) in events.iter().enumerate() {
                let mut a = t;
                let mut ga = ev_prev[ei];
                for p in 1..=EVENT_PROBES {
                    let tp = t + (horizon - t) * p as f64 / EVENT_PROBES as f64;
                    seg.eval_into(tp, &mut buf);
                    let gp = (ev.functional)(tp, &buf);
                    if ga != 0.0 && gp != 0.0 && ga.signum() != gp.signum() {
                        let tc = bisect_on_dense(a, tp, tol.zero_bisect_tol, |tt| {
                            seg.eval_into(tt, &mut buf);
                            (ev.functional)(tt, &buf)
                        });
                        hits.push((ei, tc));
                    }
                    if gp != 0.0 {
                        ga = gp;
                    }
                    a = tp;
                }
                ev_prev[ei] = ga;
            }
        }
        hits.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut buf = vec![0.0; n];
        for (ei, tc) in hits {
            if let Some((ts, _)) = stop_at {
                if tc > ts {
                    break;
                }
            }
            seg.eval_into(tc, &mut buf);
            traj.events.push(EventHit {
                name: events[ei].name.clone(),
                t: tc,
                state: buf.clone(),
            });
            if events[ei].terminal {
                stop_at = Some((tc, Termination::TerminalEvent { t: tc }));
                break;
            }
        }

        traj.segments.push(seg);
        if let Some((ts, term)) = stop_at {
            let last = traj.segments.last().unwrap();
            let mut xs = vec![0.0; n];
            last.eval_into(ts, &mut xs);
            traj.t.push(ts);
            traj.states.push(xs);
            traj.termination = term;
            return Ok(traj);
        }

        traj.t.push(t_new);
        traj.states.push(x1.clone());
        x.copy_from_slice(&x1);
        let k6 = k[6].clone();
        k[0] = k6;
        t = t_new;

        if opts.fixed_step.is_none() {
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            h *= fac;
        }
    }
    Ok(traj)
}

fn initial_step(
    ivp: &SecondOrderIvp<'_>,
    tol: &SolverTolerances,
    t0: f64,
    x0: &[f64],
    f0: &[f64],
    max_step: f64,
) -> Result<f64, OdeError> {
    let n = x0.len();
    let scale: Vec<f64> = x0.iter().map(|v| tol.abs_tol + tol.rel_tol * v.abs()).collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = norm(x0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(max_step);
    let x1: Vec<f64> = x0.iter().zip(f0).map(|(x, f)| x + h0 * f).collect();
    let mut f1 = vec![0.0; n];
    ivp.derivative(t0 + h0, &x1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let h = (100.0 * h0).min(h1).min(max_step);
    Ok(if h.is_finite() && h > 0.0 { h } else { 1e-6_f64.min(max_step) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> SolverTolerances {
        SolverTolerances::default()
    }

    fn harmonic(y0: f64, yp0: f64, t_end: f64) -> SecondOrderIvp<'static> {
        SecondOrderIvp::new(
            |_, y, _, ypp| {
                ypp[0] = -y[0];
                Ok(())
            },
            vec![y0],
            vec![yp0],
            (0.0, t_end),
        )
    }

    #[test]
    fn linear_decay_zero_at_one() {
        let ivp = SecondOrderIvp::new(
            |_, _, _, ypp| {
                ypp[0] = 0.0;
                Ok(())
            },
            vec![1.0],
            vec![-1.0],
            (0.0, 2.0),
        );
        let tr = integrate(&ivp, &tol(), &[EventSpec::component_zero("y", 0)]).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert!((tr.events[0].t - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sine_has_three_interior_zeros() {
        let ivp = harmonic(0.0, 1.0, 3.0 * PI + 0.1);
        let tr = integrate(&ivp, &tol(), &[EventSpec::component_zero("y", 0)]).unwrap();
        let z: Vec<f64> = tr.events.iter().map(|e| e.t).collect();
        assert_eq!(z.len(), 3);
        for (k, t) in z.iter().enumerate() {
            assert!((t - (k as f64 + 1.0) * PI).abs() < 1e-8, "{t}");
        }
    }

    #[test]
    fn hyperbolic_zero() {
        // y = cosh t - 2 sinh t vanishes at artanh(1/2)
        let ivp = SecondOrderIvp::new(
            |_, y, _, ypp| {
                ypp[0] = y[0];
                Ok(())
            },
            vec![1.0],
            vec![-2.0],
            (0.0, 1.0),
        );
        let tr = integrate(&ivp, &tol(), &[EventSpec::component_zero("y", 0)]).unwrap();
        assert!((tr.events[0].t - 0.5f64.atanh()).abs() < 1e-8);
    }

    #[test]
    fn running_integral_of_cosine() {
        let ivp = harmonic(1.0, 0.0, 2.0).with_integral("int_y", |_, y, _| y[0]);
        let tr = integrate(&ivp, &tol(), &[]).unwrap();
        let idx = tr.integral_index("int_y").unwrap();
        assert!((tr.states.last().unwrap()[idx] - 2f64.sin()).abs() < 1e-9);
        // dense output between steps
        assert!((tr.eval_component(1.2345, idx) - 1.2345f64.sin()).abs() < 1e-9);
        assert!((tr.eval_component(1.2345, 0) - 1.2345f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn guard_halts_before_zero() {
        let ivp = SecondOrderIvp::new(
            |_, _, _, ypp| {
                ypp[0] = 0.0;
                Ok(())
            },
            vec![1.0],
            vec![-1.0],
            (0.0, 2.0),
        )
        .with_guard("y", |_, y, _| y[0]);
        let tr = integrate(&ivp, &tol(), &[]).unwrap();
        match tr.termination {
            Termination::BlowupDetected { t } => assert!((t - (1.0 - 1e-6)).abs() < 1e-11),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(tr.into_result(), Err(OdeError::SingularityGuard { .. })));
    }

    #[test]
    fn empty_span_is_rejected() {
        let ivp = harmonic(1.0, 0.0, 0.0);
        assert!(matches!(
            integrate(&ivp, &tol(), &[]),
            Err(OdeError::EmptySpan { .. })
        ));
    }

    #[test]
    fn fixed_step_order() {
        // terminal error of the hyperbolic example shrinks by at least 4x when h halves
        let exact = 1f64.cosh() - 2.0 * 1f64.sinh();
        let run = |h: f64| {
            let ivp = SecondOrderIvp::new(
                |_, y, _, ypp| {
                    ypp[0] = y[0];
                    Ok(())
                },
                vec![1.0],
                vec![-2.0],
                (0.0, 1.0),
            );
            let opts = IntegrateOptions {
                fixed_step: Some(h),
                ..Default::default()
            };
            let tr = integrate_with(&ivp, &tol(), &[], &opts).unwrap();
            (tr.states.last().unwrap()[0] - exact).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        assert!(e1 / e2 >= 4.0, "{e1} {e2}");
    }
}
