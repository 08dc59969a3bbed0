use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::form::{index_form, VariationField};
use crate::error::{Error, Result};
use crate::models::{JacobiSolution, RunStatus};
use crate::ode::bisect_on_dense;
use crate::scenario::{FixedPointScenario, Location, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialFamily {
    /// `f = sin(mπ (s - s1)/Δs)` in the winding time `s = ∫ dt/f^2` (axis).
    SineInRescaledTime,
    /// `f = (T - t)^{-1/2} cos((ψ/2) ln(T - t) + φ)` lobes (boundary).
    LogOscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogParams {
    pub zeta: f64,
    pub q: f64,
    pub psi: f64,
    pub phi: f64,
}

impl LogParams {
    /// `ζ^2 = 4 b1 (b1 + b2)`, `ψ = sqrt(ζ^2/q^2 - 1)`; `None` unless `ζ^2 > q^2`.
    pub fn for_boundary(s: &FixedPointScenario, q: f64, phi: f64) -> Option<Self> {
        let zeta2 = 4.0 * s.swirl.b1 * (s.swirl.b1 + s.swirl.b2);
        if !(zeta2 > q * q) || q == 0.0 {
            return None;
        }
        Some(LogParams {
            zeta: zeta2.sqrt(),
            q: q.abs(),
            psi: (zeta2 / (q * q) - 1.0).sqrt(),
            phi,
        })
    }

    fn consistent(&self) -> bool {
        let want = self.zeta * self.zeta / (self.q * self.q) - 1.0;
        (self.psi * self.psi - want).abs() <= 1e-9 * (1.0 + want.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjugateSearchParams {
    pub mode_counts: Vec<u32>,
    pub family: TrialFamily,
    pub log_params: Option<LogParams>,
    pub mean_zero: bool,
    pub tol_negative: f64,
    /// Scan starts here.
    pub t_start: f64,
    /// Quadrature doublings allowed before a candidate is dropped.
    pub max_refinements: u32,
    /// Change in `I` under one doubling that counts as converged.
    pub refine_tol: f64,
}

impl Default for ConjugateSearchParams {
    fn default() -> Self {
        ConjugateSearchParams {
            mode_counts: vec![2],
            family: TrialFamily::SineInRescaledTime,
            log_params: None,
            mean_zero: true,
            tol_negative: 1e-6,
            t_start: 0.0,
            max_refinements: 8,
            refine_tol: 1e-7,
        }
    }
}

impl ConjugateSearchParams {
    pub fn log_oscillator() -> Self {
        ConjugateSearchParams {
            mode_counts: vec![4, 8],
            family: TrialFamily::LogOscillator,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugateStatus {
    Found,
    NoneFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateReport {
    pub status: ConjugateStatus,
    pub family: TrialFamily,
    /// Disjoint windows `(t1, t2, I)` each carrying a negative index form,
    /// in time order.
    pub intervals: Vec<(f64, f64, f64)>,
    /// `Σ 2/(t2 - t1)` over the intervals.
    pub gap_sum: f64,
    pub diagnostics: Map<String, Value>,
}

impl ConjugateReport {
    fn new(family: TrialFamily) -> Self {
        ConjugateReport {
            status: ConjugateStatus::NoneFound,
            family,
            intervals: Vec::new(),
            gap_sum: 0.0,
            diagnostics: Map::new(),
        }
    }

    pub fn first(&self) -> Option<(f64, f64, f64)> {
        self.intervals.first().copied()
    }

    fn note(&mut self, msg: &str) {
        self.diagnostics.insert("note".into(), msg.into());
    }

    fn finish(mut self) -> Self {
        self.gap_sum = self.intervals.iter().map(|(a, b, _)| 2.0 / (b - a)).sum();
        if !self.intervals.is_empty() {
            self.status = ConjugateStatus::Found;
        }
        self
    }
}

/// `I` with doubling until successive values differ by less than
/// `refine_tol`; `None` if that never happens.
fn converged_index(
    build: impl Fn(usize) -> VariationField,
    n0: usize,
    sol: &JacobiSolution,
    s: &FixedPointScenario,
    p: &ConjugateSearchParams,
) -> Result<Option<(f64, u32)>> {
    let mut n = n0;
    let mut prev = index_form(&build(n), sol, s)?.value;
    for r in 1..=p.max_refinements {
        n *= 2;
        let cur = index_form(&build(n), sol, s)?.value;
        if (cur - prev).abs() < p.refine_tol {
            return Ok(Some((cur, r)));
        }
        prev = cur;
    }
    Ok(None)
}

fn points_for(s: &FixedPointScenario, len: f64) -> usize {
    ((s.tolerances.quad_points_per_unit as f64 * len).ceil() as usize).max(64)
}

/// Time at which the winding reaches `target`.
fn winding_inverse(sol: &JacobiSolution, lo: f64, target: f64, tol: f64) -> f64 {
    bisect_on_dense(lo, sol.t_final(), tol, |t| sol.winding_at(t) - target)
}

/// Axis trial on `[t1, t2]`: `h = 0`, `f` a sine with `m` half-periods in the
/// winding time and `g' = k - w f/α^2` with `k` making `g(t2) = 0`.
pub fn axis_sine_trial(sol: &JacobiSolution, s: &FixedPointScenario, t1: f64, t2: f64, m: u32, n: usize) -> VariationField {
    let w = s.initial_vorticity()[2];
    let s1 = sol.winding_at(t1);
    let ds = sol.winding_at(t2) - s1;
    let omega = m as f64 * PI / ds;
    let l = t2 - t1;
    let k = w * (1.0 - (m as f64 * PI).cos()) / (omega * l);
    VariationField::from_fn(t1, t2, n, |t| {
        let a = sol.f_at(t);
        let ph = omega * (sol.winding_at(t) - s1);
        let (sn, cs) = ph.sin_cos();
        let f = sn;
        let df = omega * cs / (a * a);
        let g = k * (t - t1) - w * (1.0 - cs) / omega;
        let dg = k - w * f / (a * a);
        ([f, g, 0.0], [df, dg, 0.0])
    })
}

/// Paired log-oscillator lobes on `u = -ln(T - t) ∈ [ua, ua + 2X]`,
/// `X = 2π/ψ`, with the second lobe scaled so `∫ f dt = 0`, and
/// `g' = k - b1 f - b2 (t f)'`. With `mean_zero = false` a single lobe is used.
pub fn boundary_lobe_trial(
    s: &FixedPointScenario,
    pole: f64,
    psi: f64,
    ua: f64,
    mean_zero: bool,
    n: usize,
) -> VariationField {
    let (b1, b2) = (s.swirl.b1, s.swirl.b2);
    let b = psi / 2.0;
    let x_lobe = 2.0 * PI / psi;
    let lambda = (PI / psi).exp();
    let denom = 0.25 + b * b;
    let base = (-ua / 2.0).exp();
    // ∫_{ua}^{ua+x} e^{-σ/2} sin(b(σ-ua)) dσ
    let prim = |x: f64| base * ((-x / 2.0).exp() * (-0.5 * (b * x).sin() - b * (b * x).cos()) + b) / denom;
    let t_of = |u: f64| pole - (-u).exp();
    let lobes: &[(f64, f64)] = if mean_zero { &[(0.0, 1.0), (1.0, lambda)] } else { &[(0.0, 1.0)] };
    let t1 = t_of(ua);
    let t2 = t_of(ua + lobes.len() as f64 * x_lobe);
    let big_f_end = if mean_zero { prim(x_lobe) + lambda * (prim(2.0 * x_lobe) - prim(x_lobe)) } else { prim(x_lobe) };
    let k = b1 * big_f_end / (t2 - t1);

    let mut field = VariationField::empty();
    for &(start, scale) in lobes {
        let ta = t_of(ua + start * x_lobe);
        let tb = t_of(ua + (start + 1.0) * x_lobe);
        let piece = VariationField::from_fn(ta, tb, n, |t| {
            let x = if t == ta {
                start * x_lobe
            } else if t == tb {
                (start + 1.0) * x_lobe
            } else {
                -(pole - t).ln() - ua
            };
            let u = ua + x;
            let (sn, cs) = (b * x).sin_cos();
            // exact zeros at lobe ends
            let sn = if t == ta || t == tb { 0.0 } else { sn };
            let eu2 = (u / 2.0).exp();
            let f = scale * eu2 * sn;
            let df = scale * eu2 * (0.5 * sn + b * cs) * u.exp();
            let big_f = if start == 0.0 { prim(x) } else { prim(x_lobe) + scale * (prim(x) - prim(x_lobe)) };
            let g = k * (t - t1) - b1 * big_f - b2 * t * f;
            let dg = k - b1 * f - b2 * (f + t * df);
            ([f, g, 0.0], [df, dg, 0.0])
        });
        field.append(&piece);
    }
    field
}

/// Scans for windows where a trial variation has negative index form.
pub fn find_conjugate(sol: &JacobiSolution, s: &FixedPointScenario, p: &ConjugateSearchParams) -> Result<ConjugateReport> {
    if !(p.tol_negative >= 0.0) || p.mode_counts.is_empty() || p.mode_counts.contains(&0) {
        return Err(Error::InvalidArgument("conjugate search needs positive modes and tol_negative >= 0".into()));
    }
    if let Some(lp) = &p.log_params {
        if p.family == TrialFamily::LogOscillator && lp.zeta > lp.q && !lp.consistent() {
            return Err(Error::InvalidArgument(format!(
                "log_params psi = {} disagrees with sqrt(zeta^2/q^2 - 1)",
                lp.psi
            )));
        }
    }
    match (s.location, s.parity, p.family) {
        (Location::Axis, Parity::EvenSwirl, TrialFamily::SineInRescaledTime) => scan_axis(sol, s, p),
        (Location::Boundary, Parity::EvenSwirl, TrialFamily::LogOscillator) => scan_boundary(sol, s, p),
        (_, Parity::OddSwirl, family) => {
            let mut r = ConjugateReport::new(family);
            r.note("odd swirl: the localized index form is a sum of squares, no trial can be negative");
            Ok(r.finish())
        }
        (_, _, family) => {
            let mut r = ConjugateReport::new(family);
            r.note("trial family does not apply at this location");
            Ok(r.finish())
        }
    }
}

fn scan_axis(sol: &JacobiSolution, s: &FixedPointScenario, p: &ConjugateSearchParams) -> Result<ConjugateReport> {
    let mut rep = ConjugateReport::new(TrialFamily::SineInRescaledTime);
    let w = s.initial_vorticity()[2];
    if w == 0.0 {
        rep.note("zero vorticity on the axis");
        return Ok(rep.finish());
    }
    let modes: Vec<u32> = p
        .mode_counts
        .iter()
        .copied()
        .filter(|m| !p.mean_zero || m % 2 == 0)
        .collect();
    if modes.is_empty() {
        rep.note("mean_zero requires even mode counts");
        return Ok(rep.finish());
    }
    let s_end = sol.winding_at(sol.t_final());
    rep.diagnostics.insert("winding_total".into(), s_end.into());
    let tol = s.tolerances.zero_bisect_tol;
    let mut t1 = p.t_start.max(sol.grid[0]);
    let mut used_modes = Vec::new();
    'outer: loop {
        let s1 = sol.winding_at(t1);
        let mut found = None;
        'scan: for j in 1..=40 {
            for &m in &modes {
                let ds = m as f64 * PI / w.abs() * (1.0 + 0.05 * j as f64);
                if s1 + ds > s_end {
                    continue;
                }
                let t2 = winding_inverse(sol, t1, s1 + ds, tol);
                let n0 = points_for(s, t2 - t1);
                let res = converged_index(|n| axis_sine_trial(sol, s, t1, t2, m, n), n0, sol, s, p)?;
                if let Some((value, _)) = res {
                    if value < -p.tol_negative {
                        found = Some((t2, value, m));
                        break 'scan;
                    }
                }
            }
            if modes.iter().all(|&m| s1 + m as f64 * PI / w.abs() * (1.0 + 0.05 * j as f64) > s_end) {
                break;
            }
        }
        match found {
            Some((t2, value, m)) => {
                rep.intervals.push((t1, t2, value));
                used_modes.push(m);
                t1 = t2;
            }
            None => break 'outer,
        }
    }
    rep.diagnostics.insert("modes".into(), used_modes.into());
    Ok(rep.finish())
}

fn scan_boundary(sol: &JacobiSolution, s: &FixedPointScenario, p: &ConjugateSearchParams) -> Result<ConjugateReport> {
    let mut rep = ConjugateReport::new(TrialFamily::LogOscillator);
    let t_last = sol.t_final();
    let [f_last, fp_last, _, _] = sol.state_at(t_last);
    let (q, source) = match &p.log_params {
        Some(lp) => (lp.q, "scenario"),
        None => (fp_last.abs(), "estimated_from_last_point"),
    };
    rep.diagnostics.insert("q".into(), q.into());
    rep.diagnostics.insert("q_source".into(), source.into());
    if sol.terminated != RunStatus::BlowupDetected || q == 0.0 {
        rep.note("no collapse inside the window; blowup time unknown");
        return Ok(rep.finish());
    }
    let pole = t_last + f_last / q;
    rep.diagnostics.insert("blowup_time_estimate".into(), pole.into());
    let phi = p.log_params.map_or(0.0, |lp| lp.phi);
    let Some(lp) = LogParams::for_boundary(s, q, phi) else {
        rep.note("4 b1 (b1 + b2) <= q^2: the dominant form is nonnegative");
        return Ok(rep.finish());
    };
    rep.diagnostics.insert("psi".into(), lp.psi.into());
    rep.diagnostics.insert("zeta".into(), lp.zeta.into());

    let u_lo = -(pole - p.t_start.max(sol.grid[0])).ln();
    let u_hi = -(pole - t_last).ln();
    let lobes = if p.mean_zero { 2.0 } else { 1.0 };
    let mut used_modes = Vec::new();
    // phase offset in units of the lobe length of the slowest trial
    let slowest = p.mode_counts.iter().map(|&m| lp.psi * m as f64 / (m as f64 + 1.0)).fold(f64::INFINITY, f64::min);
    let mut ua = u_lo + phi.rem_euclid(PI) * 2.0 / slowest;
    loop {
        let mut hit = None;
        let mut any_fits = false;
        for &m in &p.mode_counts {
            let psi_m = lp.psi * m as f64 / (m as f64 + 1.0);
            let span = lobes * 2.0 * PI / psi_m;
            if ua + span > u_hi {
                continue;
            }
            any_fits = true;
            let t1 = pole - (-ua).exp();
            let t2 = pole - (-(ua + span)).exp();
            let n0 = points_for(s, (t2 - t1) / lobes);
            let res = converged_index(|n| boundary_lobe_trial(s, pole, psi_m, ua, p.mean_zero, n), n0, sol, s, p)?;
            if let Some((value, _)) = res {
                if value < -p.tol_negative {
                    hit = Some((t1, t2, value, m, span));
                    break;
                }
            }
        }
        if !any_fits {
            break;
        }
        match hit {
            Some((t1, t2, value, m, span)) => {
                rep.intervals.push((t1, t2, value));
                used_modes.push(m);
                ua += span;
            }
            None => ua += 0.25 * 2.0 * PI / slowest,
        }
    }
    rep.diagnostics.insert("modes".into(), used_modes.into());
    Ok(rep.finish())
}

/// `Σ 2/(t_{n+1} - t_n)` over consecutive conjugate times.
pub fn curvature_gap_sum(times: &[f64]) -> Result<f64> {
    if let Some(i) = (1..times.len()).find(|&i| !(times[i] > times[i - 1])) {
        return Err(Error::NonMonotoneTimes(i));
    }
    Ok(times.windows(2).map(|w| 2.0 / (w[1] - w[0])).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_sum_examples() {
        assert_eq!(curvature_gap_sum(&[0.5, 0.75, 0.875]).unwrap(), 24.0);
        assert_eq!(curvature_gap_sum(&[0.3]).unwrap(), 0.0);
        let times: Vec<f64> = (1..=10).map(|n| 1.0 - 0.5f64.powi(n)).collect();
        assert_eq!(curvature_gap_sum(&times).unwrap(), 4088.0);
        assert!(matches!(curvature_gap_sum(&[0.1, 0.1]), Err(Error::NonMonotoneTimes(1))));
    }
}
