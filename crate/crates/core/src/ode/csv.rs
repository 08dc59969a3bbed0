use std::io::Write;

use super::Trajectory;

/// Writes accepted steps and event points in time order as
/// `t,y..,yp..,integrals..,event`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, names: &[&str], mut w: W) -> std::io::Result<()> {
    let d = traj.dim;
    let mut header = vec!["t".to_string()];
    for i in 0..d {
        header.push(names.get(i).map_or(format!("y{i}"), |s| s.to_string()));
    }
    for i in 0..d {
        header.push(
            names
                .get(i)
                .map_or(format!("yp{i}"), |s| format!("{s}p")),
        );
    }
    header.extend(traj.integral_names.iter().cloned());
    header.push("event".into());
    writeln!(w, "{}", header.join(","))?;

    let mut rows: Vec<(f64, &[f64], &str)> = traj
        .t
        .iter()
        .zip(&traj.states)
        .map(|(t, x)| (*t, x.as_slice(), ""))
        .collect();
    rows.extend(traj.events.iter().map(|e| (e.t, e.state.as_slice(), e.name.as_str())));
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (t, x, ev) in rows {
        write!(w, "{t:.16e}")?;
        for v in x {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w, ",{ev}")?;
    }
    Ok(())
}
