use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ode::{Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    AxisEven,
    BoundaryEven,
    LinearGAxis,
    LinearGBoundary,
    LinearFOdd,
    CentralForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowupDetected,
    StepFailure,
}

impl From<Termination> for RunStatus {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Completed | Termination::TerminalEvent { .. } => RunStatus::Completed,
            Termination::BlowupDetected { .. } => RunStatus::BlowupDetected,
            Termination::StepFailure { .. } => RunStatus::StepFailure,
        }
    }
}

/// Where `f` and `g` live in the integrated state; the missing one follows
/// from `f^p g = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Layout {
    Both,
    FOnly { p: i32 },
    GOnly { p: i32 },
    /// Planar `(x, y)` state with `f = sqrt(x^2 + y^2)` and `g = 1/f^2`.
    Polar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEvent {
    pub name: String,
    pub t: f64,
}

/// Sampled fixed-point stretches with their running diagnostics.
///
/// The series are taken at accepted integrator steps. Values between steps
/// come from the retained continuous extension via [`JacobiSolution::f_at`]
/// and friends (absent after deserialization).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JacobiSolution {
    pub model: ModelKind,
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub g: Vec<f64>,
    pub gp: Vec<f64>,
    pub first_zero_f: Option<f64>,
    pub first_zero_g: Option<f64>,
    pub winding_integral: Vec<f64>,
    pub vorticity_integral: Vec<f64>,
    pub constraint_residual: Vec<f64>,
    pub terminated: RunStatus,
    /// Time at which the singularity guard fired.
    pub blowup_time: Option<f64>,
    pub events: Vec<SolutionEvent>,
    #[serde(skip)]
    pub(crate) dense: Option<Arc<Trajectory>>,
    #[serde(skip, default = "default_layout")]
    pub(crate) layout: Layout,
    /// `|omega| = vorticity_scale * d(winding)/dt`
    #[serde(default)]
    pub vorticity_scale: f64,
}

fn default_layout() -> Layout {
    Layout::Both
}

impl JacobiSolution {
    pub(crate) fn from_trajectory(
        model: ModelKind,
        traj: Trajectory,
        layout: Layout,
        vorticity_scale: f64,
        residual: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let winding_idx = traj.integral_index("winding");
        let mut sol = JacobiSolution {
            model,
            grid: traj.t.clone(),
            f: Vec::with_capacity(traj.t.len()),
            fp: Vec::with_capacity(traj.t.len()),
            g: Vec::with_capacity(traj.t.len()),
            gp: Vec::with_capacity(traj.t.len()),
            first_zero_f: None,
            first_zero_g: None,
            winding_integral: Vec::with_capacity(traj.t.len()),
            vorticity_integral: Vec::with_capacity(traj.t.len()),
            constraint_residual: Vec::with_capacity(traj.t.len()),
            terminated: traj.termination.into(),
            blowup_time: match traj.termination {
                Termination::BlowupDetected { t } => Some(t),
                _ => None,
            },
            events: traj
                .events
                .iter()
                .map(|e| SolutionEvent {
                    name: e.name.clone(),
                    t: e.t,
                })
                .collect(),
            dense: None,
            layout,
            vorticity_scale,
        };
        for x in &traj.states {
            let [f, fp, g, gp] = unpack(layout, traj.dim, x);
            sol.f.push(f);
            sol.fp.push(fp);
            sol.g.push(g);
            sol.gp.push(gp);
            let w = winding_idx.map_or(0.0, |i| x[i]);
            sol.winding_integral.push(w);
            sol.vorticity_integral.push(vorticity_scale * w);
            sol.constraint_residual.push(residual(f, g));
        }
        sol.first_zero_f = traj.events_named("f_zero").next().map(|e| e.t);
        sol.first_zero_g = traj.events_named("g_zero").next().map(|e| e.t);
        sol.dense = Some(Arc::new(traj));
        sol
    }

    pub fn t_final(&self) -> f64 {
        *self.grid.last().expect("solution grid is non-empty")
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// First zero of `f`, else of `g`, else the guard time.
    pub fn collapse_time(&self) -> Option<f64> {
        self.first_zero_f.or(self.first_zero_g).or(self.blowup_time)
    }

    pub fn trajectory(&self) -> Option<&Trajectory> {
        self.dense.as_deref()
    }

    /// `[f, f', g, g']` at time `t` from the continuous extension, or by
    /// linear interpolation of the stored series when it is not available.
    pub fn state_at(&self, t: f64) -> [f64; 4] {
        match &self.dense {
            Some(tr) => unpack(self.layout, tr.dim, &tr.eval(t)),
            None => {
                let i = self.grid.partition_point(|&s| s < t).clamp(1, self.grid.len() - 1);
                let (t0, t1) = (self.grid[i - 1], self.grid[i]);
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                let lerp = |v: &[f64]| v[i - 1] + w * (v[i] - v[i - 1]);
                [lerp(&self.f), lerp(&self.fp), lerp(&self.g), lerp(&self.gp)]
            }
        }
    }

    pub fn f_at(&self, t: f64) -> f64 {
        self.state_at(t)[0]
    }

    pub fn fp_at(&self, t: f64) -> f64 {
        self.state_at(t)[1]
    }

    pub fn g_at(&self, t: f64) -> f64 {
        self.state_at(t)[2]
    }

    pub fn winding_at(&self, t: f64) -> f64 {
        match &self.dense {
            Some(tr) => tr
                .integral_index("winding")
                .map_or(0.0, |i| tr.eval_component(t, i)),
            None => {
                let i = self.grid.partition_point(|&s| s < t).min(self.grid.len() - 1);
                self.winding_integral[i]
            }
        }
    }

    /// Writes `t,f,g,fp,gp,winding,vorticity_int,constraint_res,event`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,f,g,fp,gp,winding,vorticity_int,constraint_res,event")?;
        let mut rows: Vec<(f64, [f64; 7], &str)> = (0..self.grid.len())
            .map(|i| {
                (
                    self.grid[i],
                    [
                        self.f[i],
                        self.g[i],
                        self.fp[i],
                        self.gp[i],
                        self.winding_integral[i],
                        self.vorticity_integral[i],
                        self.constraint_residual[i],
                    ],
                    "",
                )
            })
            .collect();
        for e in &self.events {
            let [f, fp, g, gp] = self.state_at(e.t);
            let wv = self.winding_at(e.t);
            rows.push((
                e.t,
                [f, g, fp, gp, wv, self.vorticity_scale * wv, f64::NAN],
                e.name.as_str(),
            ));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, v, ev) in rows {
            write!(w, "{t:.16e}")?;
            for x in v {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w, ",{ev}")?;
        }
        Ok(())
    }
}

fn unpack(layout: Layout, dim: usize, x: &[f64]) -> [f64; 4] {
    match layout {
        Layout::Both => [x[0], x[dim], x[1], x[dim + 1]],
        Layout::FOnly { p } => {
            let (f, fp) = (x[0], x[dim]);
            let g = f.powi(-p);
            [f, fp, g, -(p as f64) * g / f * fp]
        }
        Layout::GOnly { p } => {
            let (g, gp) = (x[0], x[dim]);
            let f = g.powf(-1.0 / p as f64);
            [f, -f / (p as f64 * g) * gp, g, gp]
        }
        Layout::Polar => {
            let (x, y, xp, yp) = (x[0], x[1], x[dim], x[dim + 1]);
            let rho = x.hypot(y);
            let rhop = (x * xp + y * yp) / rho;
            [rho, rhop, 1.0 / (rho * rho), -2.0 * rhop / rho.powi(3)]
        }
    }
}
