use std::io::Write;

use super::{EnsembleStats, Trajectory};

/// `time,z1,z2,event`; the first row is the initial state with event `init`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "z1", "z2", "event"])?;
    w.write_record([
        "0".to_string(),
        traj.initial.z1.to_string(),
        traj.initial.z2.to_string(),
        "init".into(),
    ])?;
    for e in &traj.events {
        w.write_record([
            e.time.to_string(),
            e.state.z1.to_string(),
            e.state.z2.to_string(),
            e.kind.label(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const ENSEMBLE_CSV_HEADER: [&str; 10] = [
    "t",
    "mean_z1",
    "se_z1",
    "mean_z2",
    "se_z2",
    "mean_ratio",
    "se_ratio",
    "survivors",
    "extinction_frequency",
    "capped",
];

/// One row per grid point; `mean_ratio`/`se_ratio` are empty when no
/// replicate has `z1 > 0`.
pub fn write_ensemble_csv<W: Write>(stats: &EnsembleStats, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ENSEMBLE_CSV_HEADER)?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for g in &stats.points {
        w.write_record([
            g.t.to_string(),
            g.mean_z1.to_string(),
            g.se_z1.to_string(),
            g.mean_z2.to_string(),
            g.se_z2.to_string(),
            opt(g.mean_ratio),
            opt(g.se_ratio),
            g.survivors.to_string(),
            g.extinction_frequency.to_string(),
            g.capped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
