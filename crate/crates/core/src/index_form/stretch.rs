use serde::{Deserialize, Serialize};

use crate::models::JacobiSolution;
use crate::scenario::{FixedPointScenario, Location, Parity};

/// `Λ(t) = Dη(t)^T Dη(t)` at a fixed point, in the `(e_r, e_θ, e_z)` frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchMatrix {
    pub entries: [[f64; 3]; 3],
    /// `A` with `Λ = AᵀA`, when known. Near collapse `Λ11 = f² + (b2 t)²`
    /// no longer carries `f²`, so the determinant is taken from `A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<[[f64; 3]; 3]>,
    pub time: f64,
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl StretchMatrix {
    pub fn identity(time: f64) -> Self {
        let mut e = [[0.0; 3]; 3];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        StretchMatrix { entries: e, factor: Some(e), time }
    }

    pub fn from_entries(entries: [[f64; 3]; 3], time: f64) -> Self {
        StretchMatrix { entries, factor: None, time }
    }

    /// `Λ = AᵀA`.
    pub fn from_factor(a: [[f64; 3]; 3], time: f64) -> Self {
        let mut e = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                e[i][j] = (0..3).map(|k| a[k][i] * a[k][j]).sum();
            }
        }
        StretchMatrix { entries: e, factor: Some(a), time }
    }

    /// Stretch built from the radial/vertical stretches `f`, `g` and the swirl
    /// jet at time `t`.
    pub fn at_fixed_point(s: &FixedPointScenario, t: f64, f: f64, g: f64) -> Self {
        let mut a = [[0.0; 3]; 3];
        a[1][1] = 1.0;
        a[2][2] = g;
        a[0][0] = f;
        match (s.location, s.parity) {
            (Location::Axis, _) => a[1][1] = f,
            (Location::Boundary, Parity::EvenSwirl) => a[1][0] = s.swirl.b2 * t,
            (Location::Boundary, Parity::OddSwirl) => a[1][2] = s.swirl.b3 * t,
        }
        Self::from_factor(a, t)
    }

    pub fn det(&self) -> f64 {
        match &self.factor {
            Some(a) => det3(a).powi(2),
            None => det3(&self.entries),
        }
    }

    /// Cofactor expansion of the stored entries.
    pub fn entry_det(&self) -> f64 {
        det3(&self.entries)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = &self.entries;
        (0..3).all(|i| (0..3).all(|j| (m[i][j] - m[j][i]).abs() <= tol * (1.0 + m[i][j].abs())))
    }

    /// Leading principal minors all positive.
    pub fn is_positive_definite(&self) -> bool {
        let m = &self.entries;
        m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0 && self.det() > 0.0
    }

    pub fn inverse(&self) -> Option<[[f64; 3]; 3]> {
        let m = &self.entries;
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
            }
        }
        Some(inv)
    }

    /// Conjugation by a permutation of the basis: entry `(i, j)` of the result
    /// is entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut e = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                e[i][j] = self.entries[perm[i]][perm[j]];
            }
        }
        let factor = self.factor.map(|a| {
            let mut p = [[0.0; 3]; 3];
            for k in 0..3 {
                for i in 0..3 {
                    p[k][i] = a[k][perm[i]];
                }
            }
            p
        });
        StretchMatrix { entries: e, factor, time: self.time }
    }

    pub fn quad(&self, v: [f64; 3]) -> f64 {
        let m = &self.entries;
        (0..3).map(|i| (0..3).map(|j| v[i] * m[i][j] * v[j]).sum::<f64>()).sum()
    }
}

/// Stretch at time `t` along the solution (`f`, `g` from its continuous
/// extension).
pub fn build_stretch(sol: &JacobiSolution, s: &FixedPointScenario, t: f64) -> StretchMatrix {
    let [f, _, g, _] = sol.state_at(t);
    StretchMatrix::at_fixed_point(s, t, f, g)
}
