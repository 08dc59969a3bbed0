use std::io::Write;

use serde::{Deserialize, Serialize};

use super::stretch::{build_stretch, StretchMatrix};
use crate::error::{Error, Result};
use crate::models::JacobiSolution;
use crate::scenario::{FixedPointScenario, Location, Parity};

/// Running integral of samples by piecewise quadratic interpolation over
/// neighbouring triples. Exact for quadratics on any grid.
pub fn cumulative_integral(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        let piece = if n < 3 {
            0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1])
        } else {
            // nodes j, j+1, j+2 with [t_{i-1}, t_i] among them
            let j = if i >= 2 { i - 2 } else { 0 };
            quad_piece(&t[j..j + 3], &y[j..j + 3], t[i - 1], t[i])
        };
        out[i] = out[i - 1] + piece;
    }
    out
}

/// `∫_a^b` of the quadratic through three nodes.
fn quad_piece(ts: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    // Gauss-Legendre with two points integrates the quadratic exactly
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    let x = r / 3f64.sqrt();
    let p = |t: f64| {
        (0..3)
            .map(|k| {
                let mut l = ys[k];
                for j in 0..3 {
                    if j != k {
                        l *= (t - ts[j]) / (ts[k] - ts[j]);
                    }
                }
                l
            })
            .sum::<f64>()
    };
    r * (p(m - x) + p(m + x))
}

/// Pressure-Laplacian identity along the odd-swirl boundary trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub t: Vec<f64>,
    /// `-2 (f'/f)^2`
    pub delta_p: Vec<f64>,
    pub int_delta_p: Vec<f64>,
    /// `ln f`
    pub xi: Vec<f64>,
    pub int_f: Vec<f64>,
    /// `C` in `∫ ΔP ≤ -C sup ξ^2`; `2/T` from `ξ(0) = 0` and Cauchy-Schwarz.
    pub poincare_constant: f64,
    pub sup_xi_sq: f64,
    pub poincare_holds: bool,
    /// Over the final quarter `∫ f` grows while `∫ ΔP` falls.
    pub divergence_trend: bool,
}

impl DiagnosticSeries {
    /// Builds the series from samples of `f` and `f'`.
    pub fn from_samples(t: &[f64], f: &[f64], fp: &[f64]) -> Result<Self> {
        if t.len() < 2 || f.len() != t.len() || fp.len() != t.len() {
            return Err(Error::InvalidArgument("series need matching lengths >= 2".into()));
        }
        if let Some(i) = (1..t.len()).find(|&i| !(t[i] > t[i - 1])) {
            return Err(Error::NonMonotoneTimes(i));
        }
        if let Some(i) = f.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::NonpositiveF(t[i]));
        }
        let delta_p: Vec<f64> = f.iter().zip(fp).map(|(f, fp)| -2.0 * (fp / f).powi(2)).collect();
        let xi: Vec<f64> = f.iter().map(|f| f.ln()).collect();
        let int_delta_p = cumulative_integral(t, &delta_p);
        let int_f = cumulative_integral(t, f);
        let span = t[t.len() - 1] - t[0];
        let poincare_constant = 2.0 / span;
        let sup_xi_sq = xi.iter().map(|x| x * x).fold(0.0, f64::max);
        let total = *int_delta_p.last().unwrap();
        let slack = 1e-9 * (1.0 + total.abs());
        let poincare_holds = total <= -poincare_constant * sup_xi_sq + slack;
        let q = t.partition_point(|&x| x < t[0] + 0.75 * span).min(t.len() - 1);
        let last = t.len() - 1;
        let divergence_trend = int_f[last] > int_f[q] && int_delta_p[last] < int_delta_p[q] - 1e-12;
        Ok(DiagnosticSeries {
            t: t.to_vec(),
            delta_p,
            int_delta_p,
            xi,
            int_f,
            poincare_constant,
            sup_xi_sq,
            poincare_holds,
            divergence_trend,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,delta_p,int_delta_p,xi,int_f")?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[i], self.delta_p[i], self.int_delta_p[i], self.xi[i], self.int_f[i]
            )?;
        }
        Ok(())
    }
}

/// Samples per unit time used by [`laplacian_identity_odd`].
pub const DIAGNOSTIC_POINTS_PER_UNIT: u32 = 200;

/// Grid of the solution with each step split into at least two pieces and
/// no piece longer than `1/per_unit`; values come from the continuous
/// extension.
fn refined_grid(sol: &JacobiSolution, per_unit: u32) -> Vec<f64> {
    let mut ts = Vec::with_capacity(2 * sol.grid.len());
    for w in sol.grid.windows(2) {
        if w[1] > w[0] {
            let k = ((w[1] - w[0]) * per_unit as f64).ceil().max(2.0) as usize;
            ts.extend((0..k).map(|j| w[0] + (w[1] - w[0]) * j as f64 / k as f64));
        }
    }
    ts.push(sol.t_final());
    ts
}

/// `ΔP = -2 (f'/f)^2` and the Poincaré-type check along a boundary-odd run.
pub fn laplacian_identity_odd(sol: &JacobiSolution) -> Result<DiagnosticSeries> {
    let t = refined_grid(sol, DIAGNOSTIC_POINTS_PER_UNIT);
    let (mut f, mut fp) = (Vec::with_capacity(t.len()), Vec::with_capacity(t.len()));
    for &x in &t {
        let st = sol.state_at(x);
        f.push(st[0]);
        fp.push(st[1]);
    }
    DiagnosticSeries::from_samples(&t, &f, &fp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    /// Frame labels ordered so the third axis is along `ω0`.
    pub basis: [String; 3],
    pub t: Vec<f64>,
    /// `Λ_33 / (Λ^11 + Λ^22)` with upper indices from the inverse.
    pub integrand: Vec<f64>,
    pub integral: Vec<f64>,
    /// `∫ Λ^11 / ∫ Λ^22`.
    pub ratio: Vec<f64>,
    pub final_integral: f64,
    pub final_ratio: f64,
    /// Growth of the integral and drift of the ratio over the final quarter.
    pub integral_tail_growth: f64,
    pub ratio_tail_change: f64,
}

/// Basis permutation putting `ω0` on the third axis.
pub fn aligned_permutation(s: &FixedPointScenario) -> Result<([usize; 3], [&'static str; 3])> {
    let w = s.initial_vorticity();
    if w.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVorticity);
    }
    Ok(match (s.location, s.parity) {
        (Location::Boundary, Parity::OddSwirl) => ([1, 2, 0], ["theta", "z", "r"]),
        _ => ([0, 1, 2], ["r", "theta", "z"]),
    })
}

/// Pure version over given stretch matrices, already in the aligned basis.
pub fn fredholm_from_stretch(times: &[f64], mats: &[StretchMatrix], basis: [&str; 3]) -> Result<DiagnosticReport> {
    if times.len() != mats.len() || times.is_empty() {
        return Err(Error::InvalidArgument("need one matrix per time".into()));
    }
    if let Some(i) = (1..times.len()).find(|&i| !(times[i] > times[i - 1])) {
        return Err(Error::NonMonotoneTimes(i));
    }
    let mut integrand = Vec::with_capacity(times.len());
    let (mut up11, mut up22) = (Vec::new(), Vec::new());
    for m in mats {
        let inv = m
            .inverse()
            .ok_or_else(|| Error::InvalidArgument(format!("singular stretch at t = {}", m.time)))?;
        integrand.push(m.entries[2][2] / (inv[0][0] + inv[1][1]));
        up11.push(inv[0][0]);
        up22.push(inv[1][1]);
    }
    let integral = cumulative_integral(times, &integrand);
    let c11 = cumulative_integral(times, &up11);
    let c22 = cumulative_integral(times, &up22);
    let ratio: Vec<f64> = c11
        .iter()
        .zip(&c22)
        .zip(&up11)
        .zip(&up22)
        .map(|(((a, b), u1), u2)| if *b > 0.0 { a / b } else { u1 / u2 })
        .collect();
    let last = times.len() - 1;
    let span = times[last] - times[0];
    let q = times.partition_point(|&x| x < times[0] + 0.75 * span).min(last);
    Ok(DiagnosticReport {
        basis: basis.map(String::from),
        final_integral: integral[last],
        final_ratio: ratio[last],
        integral_tail_growth: integral[last] - integral[q],
        ratio_tail_change: ratio[last] - ratio[q],
        t: times.to_vec(),
        integrand,
        integral,
        ratio,
    })
}

/// `∫ Λ_33/(Λ^11 + Λ^22)` and `∫Λ^11 / ∫Λ^22` along the run, in the basis
/// aligned with the initial vorticity.
pub fn fredholm_diagnostics(sol: &JacobiSolution, s: &FixedPointScenario) -> Result<DiagnosticReport> {
    let (perm, labels) = aligned_permutation(s)?;
    let t = refined_grid(sol, s.tolerances.quad_points_per_unit);
    let mats: Vec<StretchMatrix> = t.iter().map(|&x| build_stretch(sol, s, x).permuted(perm)).collect();
    fredholm_from_stretch(&t, &mats, labels)
}
