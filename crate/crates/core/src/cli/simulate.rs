use clap::Args;
use serde::{Deserialize, Serialize};

use super::{csv_bytes, opt_str, to_json, CliError, Format, Resolved};
use crate::error::Result;
use crate::model::{limiting_ratio, mean_matrix, TwoTypeParams};
use crate::simulator::{
    empirical_limiting_ratio_with, ensemble_with_cap, simulate_with, PopulationState, RatioEstimate, RatioOptions,
    SimOptions, StopReason, DEFAULT_CAP,
};

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Initial counts `z1,z2`
    #[arg(long, value_name = "Z1,Z2")]
    pub init: Option<String>,
    /// Sampling grid `start:end:points`
    #[arg(long, value_name = "START:END:POINTS")]
    pub grid: Option<String>,
    /// Population cap per run
    #[arg(long)]
    pub cap: Option<u64>,
    /// Estimate the limiting ratio at `--horizon` instead of sampling a grid
    #[arg(long)]
    pub limiting_ratio: bool,
}

fn parse_init(s: &str) -> Result<PopulationState, CliError> {
    let bad = || CliError::usage(format!("init `{s}`: expected two non-negative integers z1,z2"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(PopulationState::new(
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::usage(format!(
            "grid `{s}`: expected start:end:points with 0 <= start < end and points >= 2"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(a >= 0.0 && b > a && b.is_finite() && n >= 2) {
        return Err(bad());
    }
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// Ensemble summary at one grid time beside the analytic mean `init · M(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub t: f64,
    pub mean_z1: f64,
    pub se_z1: f64,
    pub mean_z2: f64,
    pub se_z2: f64,
    pub analytic_z1: f64,
    pub analytic_z2: f64,
    pub mean_ratio: Option<f64>,
    pub se_ratio: Option<f64>,
    pub survivors: usize,
    pub extinction_frequency: f64,
    pub capped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub params: TwoTypeParams,
    pub init: PopulationState,
    pub replicates: usize,
    pub seed: u64,
    pub cap: u64,
    pub points: Vec<SimPoint>,
}

pub fn simulate_report(
    params: &TwoTypeParams,
    init: PopulationState,
    grid: &[f64],
    replicates: usize,
    seed: u64,
    cap: u64,
) -> Result<SimulateReport> {
    let st = ensemble_with_cap(params, init, grid, replicates, seed, cap)?;
    let points = st
        .points
        .iter()
        .map(|g| {
            let m = mean_matrix(params, g.t)?;
            let (z1, z2) = (init.z1 as f64, init.z2 as f64);
            Ok(SimPoint {
                t: g.t,
                mean_z1: g.mean_z1,
                se_z1: g.se_z1,
                mean_z2: g.mean_z2,
                se_z2: g.se_z2,
                analytic_z1: z1 * m[(0, 0)] + z2 * m[(1, 0)],
                analytic_z2: z1 * m[(0, 1)] + z2 * m[(1, 1)],
                mean_ratio: g.mean_ratio,
                se_ratio: g.se_ratio,
                survivors: g.survivors,
                extinction_frequency: g.extinction_frequency,
                capped: g.capped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulateReport {
        params: *params,
        init,
        replicates,
        seed,
        cap,
        points,
    })
}

pub const ENSEMBLE_HEADER: [&str; 12] = [
    "t",
    "mean_z1",
    "se_z1",
    "mean_z2",
    "se_z2",
    "analytic_z1",
    "analytic_z2",
    "mean_ratio",
    "se_ratio",
    "survivors",
    "extinction_frequency",
    "capped",
];

fn ensemble_csv(r: &SimulateReport) -> Vec<u8> {
    let rows = r.points.iter().map(|p| {
        vec![
            p.t.to_string(),
            p.mean_z1.to_string(),
            p.se_z1.to_string(),
            p.mean_z2.to_string(),
            p.se_z2.to_string(),
            p.analytic_z1.to_string(),
            p.analytic_z2.to_string(),
            opt_str(p.mean_ratio),
            opt_str(p.se_ratio),
            p.survivors.to_string(),
            p.extinction_frequency.to_string(),
            p.capped.to_string(),
        ]
    });
    csv_bytes(&ENSEMBLE_HEADER, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time: f64,
    pub z1: u64,
    pub z2: u64,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub params: TwoTypeParams,
    pub seed: u64,
    pub horizon: f64,
    pub stop: StopReason,
    pub end_time: f64,
    pub events: Vec<TrajectoryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub params: TwoTypeParams,
    pub init: PopulationState,
    pub horizon: f64,
    pub seed: u64,
    pub analytic: f64,
    pub estimate: RatioEstimate,
}

pub(super) fn run(res: &Resolved, args: &SimulateArgs) -> Result<(), CliError> {
    let params = res.params()?;
    let init_spec = args
        .init
        .clone()
        .or_else(|| res.file.raw("init").map(str::to_string))
        .unwrap_or_else(|| "1,0".into());
    let init = parse_init(&init_spec)?;
    let replicates: usize = res.get("replicates", res.common.replicates, 1000)?;
    let seed = res.seed()?;
    let cap: u64 = res.get("cap", args.cap, DEFAULT_CAP)?;
    let horizon: f64 = res.get("horizon", res.common.horizon, 10.0)?;
    let format = res.format()?;
    if replicates == 0 {
        return Err(CliError::usage("replicates must be >= 1"));
    }

    if args.limiting_ratio {
        let opts = RatioOptions {
            cap,
            ..RatioOptions::default()
        };
        let estimate = empirical_limiting_ratio_with(&params, init, horizon, replicates, seed, &opts)?;
        let report = RatioReport {
            params,
            init,
            horizon,
            seed,
            analytic: limiting_ratio(&params)?,
            estimate,
        };
        let bytes = match format {
            Format::Json => to_json(&report),
            Format::Csv => {
                let e = &report.estimate;
                let row = [horizon, report.analytic, e.estimate, e.se, e.ci_low, e.ci_high, e.level]
                    .iter()
                    .map(f64::to_string)
                    .chain([e.survivors.to_string(), e.replicates.to_string(), e.capped.to_string()])
                    .collect();
                csv_bytes(
                    &[
                        "horizon",
                        "analytic",
                        "estimate",
                        "se",
                        "ci_low",
                        "ci_high",
                        "level",
                        "survivors",
                        "replicates",
                        "capped",
                    ],
                    [row],
                )
            }
        };
        return res.emit(&bytes);
    }

    if replicates == 1 {
        let traj = simulate_with(&params, init, &SimOptions::new(horizon).with_cap(cap), seed)?;
        let mut events = vec![TrajectoryRow {
            time: 0.0,
            z1: init.z1,
            z2: init.z2,
            event: "init".into(),
        }];
        events.extend(traj.events.iter().map(|e| TrajectoryRow {
            time: e.time,
            z1: e.state.z1,
            z2: e.state.z2,
            event: e.kind.label(),
        }));
        let report = TrajectoryReport {
            params,
            seed,
            horizon,
            stop: traj.stop,
            end_time: traj.end_time,
            events,
        };
        let bytes = match format {
            Format::Json => to_json(&report),
            Format::Csv => csv_bytes(
                &["time", "z1", "z2", "event"],
                report
                    .events
                    .iter()
                    .map(|e| vec![e.time.to_string(), e.z1.to_string(), e.z2.to_string(), e.event.clone()]),
            ),
        };
        return res.emit(&bytes);
    }

    let grid_spec = args
        .grid
        .clone()
        .or_else(|| res.file.raw("grid").map(str::to_string))
        .unwrap_or_else(|| "0:10:11".into());
    let grid = parse_grid(&grid_spec)?;
    let report = simulate_report(&params, init, &grid, replicates, seed, cap)?;
    let bytes = match format {
        Format::Json => to_json(&report),
        Format::Csv => ensemble_csv(&report),
    };
    res.emit(&bytes)
}
