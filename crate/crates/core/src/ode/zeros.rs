use super::Trajectory;

/// Bisection for a sign change of `g` on `[a, b]`; `g(a)` and `g(b)` must
/// differ in sign (otherwise `b` is returned).
pub fn bisect_on_dense(mut a: f64, mut b: f64, tol: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let mut ga = g(a);
    let gb = g(b);
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 || ga.signum() == gb.signum() {
        return b;
    }
    let tol = tol.max(4.0 * f64::EPSILON * b.abs().max(1.0));
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Transversal zeros of a state component on `[t1, t2]`, located on the dense
/// output. A zero exactly at `t1` (a prescribed initial zero) is not counted.
pub fn find_zeros(traj: &Trajectory, index: usize, window: (f64, f64), tol: f64) -> Vec<f64> {
    let (t1, t2) = (window.0.max(traj.t_start()), window.1.min(traj.t_final()));
    if !(t2 > t1) {
        return Vec::new();
    }
    const PROBES: usize = 4;
    let mut out = Vec::new();
    let mut prev_t = t1;
    let mut prev_v = traj.eval_component(t1, index);
    for seg in &traj.segments {
        if seg.t1() <= t1 || seg.t0 >= t2 {
            continue;
        }
        let lo = seg.t0.max(t1);
        let hi = seg.t1().min(t2);
        for p in 1..=PROBES {
            let tp = lo + (hi - lo) * p as f64 / PROBES as f64;
            let v = seg.eval_component(tp, index);
            if prev_v != 0.0 && v != 0.0 && prev_v.signum() != v.signum() {
                out.push(bisect_on_dense(prev_t, tp, tol, |t| traj.eval_component(t, index)));
            }
            if v != 0.0 {
                prev_v = v;
                prev_t = tp;
            }
        }
    }
    out
}

pub fn count_zeros(traj: &Trajectory, index: usize, window: (f64, f64), tol: f64) -> usize {
    find_zeros(traj, index, window, tol).len()
}
