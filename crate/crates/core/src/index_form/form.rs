use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stretch::build_stretch;
use crate::error::{Error, Result};
use crate::models::JacobiSolution;
use crate::scenario::FixedPointScenario;

/// Endpoint values above this count as nonzero.
pub const ENDPOINT_TOL: f64 = 1e-9;

/// Variation `v(t) = f e_r + g e_θ + h e_z` sampled on a grid.
///
/// A repeated grid time marks a junction where `v` is continuous but `v'` may
/// jump; quadrature never straddles it. Derivative series are optional; when
/// absent they are taken from local 5-point interpolants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationField {
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub df: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dg: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dh: Vec<f64>,
    pub endpoint_zero: bool,
}

impl VariationField {
    /// Uniform grid with `n` subintervals (rounded up to even), values and
    /// derivatives from `eval(t) -> (v, v')`.
    pub fn from_fn(t1: f64, t2: f64, n: usize, mut eval: impl FnMut(f64) -> ([f64; 3], [f64; 3])) -> Self {
        let n = (n.max(2) + 1) & !1;
        let mut v = VariationField::empty();
        for i in 0..=n {
            let t = if i == n { t2 } else { t1 + (t2 - t1) * i as f64 / n as f64 };
            let (x, dx) = eval(t);
            v.push(t, x, dx);
        }
        v.endpoint_zero = v.endpoint_norm() <= ENDPOINT_TOL;
        v
    }

    pub(crate) fn empty() -> Self {
        VariationField {
            grid: Vec::new(),
            f: Vec::new(),
            g: Vec::new(),
            h: Vec::new(),
            df: Vec::new(),
            dg: Vec::new(),
            dh: Vec::new(),
            endpoint_zero: false,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: [f64; 3], dx: [f64; 3]) {
        self.grid.push(t);
        self.f.push(x[0]);
        self.g.push(x[1]);
        self.h.push(x[2]);
        self.df.push(dx[0]);
        self.dg.push(dx[1]);
        self.dh.push(dx[2]);
    }

    /// Appends `other`, repeating the shared junction time.
    pub(crate) fn append(&mut self, other: &VariationField) {
        self.grid.extend_from_slice(&other.grid);
        self.f.extend_from_slice(&other.f);
        self.g.extend_from_slice(&other.g);
        self.h.extend_from_slice(&other.h);
        self.df.extend_from_slice(&other.df);
        self.dg.extend_from_slice(&other.dg);
        self.dh.extend_from_slice(&other.dh);
        self.endpoint_zero = self.endpoint_norm() <= ENDPOINT_TOL;
    }

    /// Sum of sines `Σ_k c_k sin(kπ (t - t1)/L)` per component.
    pub fn sine_series(t1: f64, t2: f64, coeffs: &[[f64; 3]], n: usize) -> Self {
        let l = t2 - t1;
        VariationField::from_fn(t1, t2, n, |t| {
            let mut x = [0.0; 3];
            let mut dx = [0.0; 3];
            for (k, c) in coeffs.iter().enumerate() {
                let w = (k + 1) as f64 * std::f64::consts::PI / l;
                let (s, co) = (w * (t - t1)).sin_cos();
                for i in 0..3 {
                    x[i] += c[i] * s;
                    dx[i] += c[i] * w * co;
                }
            }
            // exact zeros at the ends
            if t == t1 || t == t2 {
                x = [0.0; 3];
            }
            (x, dx)
        })
    }

    /// Random sine series with `modes` terms and coefficients in `[-1, 1]`.
    pub fn random<R: Rng>(rng: &mut R, t1: f64, t2: f64, modes: usize, n: usize) -> Self {
        let coeffs: Vec<[f64; 3]> = (0..modes)
            .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
            .collect();
        VariationField::sine_series(t1, t2, &coeffs, n)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let m = |v: &Vec<f64>| v.iter().map(|x| c * x).collect::<Vec<f64>>();
        VariationField {
            grid: self.grid.clone(),
            f: m(&self.f),
            g: m(&self.g),
            h: m(&self.h),
            df: m(&self.df),
            dg: m(&self.dg),
            dh: m(&self.dh),
            endpoint_zero: self.endpoint_zero,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().expect("non-empty grid"))
    }

    pub fn endpoint_norm(&self) -> f64 {
        let n = self.grid.len();
        if n == 0 {
            return 0.0;
        }
        [0, n - 1]
            .iter()
            .map(|&i| self.f[i].abs().max(self.g[i].abs()).max(self.h[i].abs()))
            .fold(0.0, f64::max)
    }

    fn derivatives(&self) -> [Vec<f64>; 3] {
        let n = self.grid.len();
        if self.df.len() == n && self.dg.len() == n && self.dh.len() == n {
            return [self.df.clone(), self.dg.clone(), self.dh.clone()];
        }
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (lo, hi) in segments(&self.grid) {
            for i in lo..=hi {
                let a = i.saturating_sub(2).max(lo).min(hi.saturating_sub(4).max(lo));
                let b = (a + 4).min(hi);
                let ts = &self.grid[a..=b];
                for (c, series) in [&self.f, &self.g, &self.h].into_iter().enumerate() {
                    out[c][i] = lagrange_derivative(ts, &series[a..=b], self.grid[i]);
                }
            }
        }
        out
    }
}

/// Maximal index ranges `[lo, hi]` without a repeated time.
fn segments(grid: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut lo = 0;
    for i in 1..grid.len() {
        if grid[i] == grid[i - 1] {
            out.push((lo, i - 1));
            lo = i;
        }
    }
    if !grid.is_empty() {
        out.push((lo, grid.len() - 1));
    }
    out
}

fn lagrange_derivative(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = ts.len();
    let mut d = 0.0;
    for j in 0..n {
        // derivative of the j-th Lagrange basis polynomial at t
        let mut lj = 0.0;
        for m in 0..n {
            if m == j {
                continue;
            }
            let mut term = 1.0 / (ts[j] - ts[m]);
            for k in 0..n {
                if k != j && k != m {
                    term *= (t - ts[k]) / (ts[j] - ts[k]);
                }
            }
            lj += term;
        }
        d += ys[j] * lj;
    }
    d
}

/// Composite Simpson rule on a possibly non-uniform grid, restarting at
/// repeated times. A trailing odd interval uses the quadratic through the
/// last three nodes.
pub fn simpson(grid: &[f64], values: &[f64]) -> f64 {
    let mut total = 0.0;
    for (lo, hi) in segments(grid) {
        let mut i = lo;
        while i + 2 <= hi {
            total += simpson_pair(&grid[i..i + 3], &values[i..i + 3]);
            i += 2;
        }
        if i + 1 == hi {
            if hi >= lo + 2 {
                total += last_interval(&grid[hi - 2..=hi], &values[hi - 2..=hi]);
            } else {
                total += 0.5 * (grid[hi] - grid[i]) * (values[hi] + values[i]);
            }
        }
    }
    total
}

fn simpson_pair(t: &[f64], y: &[f64]) -> f64 {
    let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
    let hs = h0 + h1;
    hs / 6.0 * ((2.0 - h1 / h0) * y[0] + hs * hs / (h0 * h1) * y[1] + (2.0 - h0 / h1) * y[2])
}

/// `∫_{t1}^{t2}` of the quadratic through three nodes.
fn last_interval(t: &[f64], y: &[f64]) -> f64 {
    let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
    let w2 = h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
    let w1 = h1 * (h1 + 3.0 * h0) / (6.0 * h0);
    let w0 = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    w0 * y[0] + w1 * y[1] + w2 * y[2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexFormResult {
    pub value: f64,
    /// `∫ <Λ v', v'>`
    pub kinetic_term: f64,
    /// `∫ <ω0 × v, v'>`
    pub rotation_term: f64,
    pub decomposition_valid: bool,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `I(v, v) = ∫ <Λ v', v'> + <ω0 × v, v'> dt` over the grid of `v`.
pub fn index_form(v: &VariationField, sol: &JacobiSolution, s: &FixedPointScenario) -> Result<IndexFormResult> {
    let n = v.grid.len();
    if n < 3 {
        return Err(Error::InvalidArgument("variation needs at least 3 grid points".into()));
    }
    let end = v.endpoint_norm();
    if end > ENDPOINT_TOL {
        return Err(Error::EndpointNonzero(end));
    }
    let (t1, t2) = v.interval();
    let cover = (sol.grid[0], sol.t_final());
    if t1 < cover.0 || t2 > cover.1 {
        return Err(Error::InvalidArgument(format!(
            "variation window [{t1}, {t2}] exceeds solution coverage [{}, {}]",
            cover.0, cover.1
        )));
    }
    let w0 = s.initial_vorticity();
    let [df, dg, dh] = v.derivatives();
    let mut kin = Vec::with_capacity(n);
    let mut rot = Vec::with_capacity(n);
    for i in 0..n {
        let lam = build_stretch(sol, s, v.grid[i]);
        let x = [v.f[i], v.g[i], v.h[i]];
        let dx = [df[i], dg[i], dh[i]];
        kin.push(lam.quad(dx));
        let c = cross(w0, x);
        rot.push(c[0] * dx[0] + c[1] * dx[1] + c[2] * dx[2]);
    }
    let total: Vec<f64> = kin.iter().zip(&rot).map(|(a, b)| a + b).collect();
    let kinetic_term = simpson(&v.grid, &kin);
    let rotation_term = simpson(&v.grid, &rot);
    let value = simpson(&v.grid, &total);
    let scale = kinetic_term.abs() + rotation_term.abs();
    Ok(IndexFormResult {
        value,
        kinetic_term,
        rotation_term,
        decomposition_valid: (value - kinetic_term - rotation_term).abs() <= 1e-12 * (1.0 + scale),
    })
}

/// Axis form after integrating the rotation term by parts and completing the
/// square:
/// `∫ (α g' + w f/α)^2 + α^2 f'^2 - w^2 f^2/α^2 + γ^2 h'^2 dt`, `w = |ω0|`
/// signed along `e_z`.
pub fn completed_square_axis(v: &VariationField, sol: &JacobiSolution, s: &FixedPointScenario) -> Result<f64> {
    let end = v.endpoint_norm();
    if end > ENDPOINT_TOL {
        return Err(Error::EndpointNonzero(end));
    }
    let w = s.initial_vorticity()[2];
    let [df, dg, dh] = v.derivatives();
    let vals: Vec<f64> = (0..v.grid.len())
        .map(|i| {
            let [a, _, gam, _] = sol.state_at(v.grid[i]);
            let f = v.f[i];
            (a * dg[i] + w * f / a).powi(2) + a * a * df[i] * df[i] - w * w * f * f / (a * a) + gam * gam * dh[i] * dh[i]
        })
        .collect();
    Ok(simpson(&v.grid, &vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exactness() {
        let exact = |t: f64| t.powi(4) / 4.0 - t * t + t;
        let grid2: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
        let vals2: Vec<f64> = grid2.iter().map(|t| t * t * t - 2.0 * t + 1.0).collect();
        assert!((simpson(&grid2, &vals2) - (exact(2.0) - exact(0.0))).abs() < 1e-13);
        // non-uniform pairs, a junction and an odd tail
        let grid = [0.0, 0.1, 0.35, 0.5, 0.9, 1.0, 1.0, 1.4, 2.0];
        let q: Vec<f64> = grid.iter().map(|t| 3.0 * t * t - t).collect();
        assert!((simpson(&grid, &q) - 6.0).abs() < 1e-13);
    }

    #[test]
    fn lagrange_derivative_of_quartic() {
        let ts: [f64; 5] = [0.0, 0.3, 0.5, 0.9, 1.2];
        let ys: Vec<f64> = ts.iter().map(|t| t.powi(4)).collect();
        assert!((lagrange_derivative(&ts, &ys, 0.7) - 4.0 * 0.7f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn sine_series_vanishes_at_ends() {
        let v = VariationField::sine_series(0.5, 2.0, &[[1.0, -0.3, 0.2], [0.5, 0.1, 0.0]], 64);
        assert!(v.endpoint_zero);
        assert_eq!(v.endpoint_norm(), 0.0);
        assert_eq!(v.grid.len() % 2, 1);
    }
}
