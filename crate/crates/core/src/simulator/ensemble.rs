use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_inputs, run, PopulationState, SimOptions, StopReason, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::model::{build_generator, classify, spectrum, Criticality, TwoTypeParams};
use crate::rng::{stream, substream};
use crate::stats::{bootstrap_mean_ci, Welford};

/// Summary of all replicates at one grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStats {
    pub t: f64,
    pub mean_z1: f64,
    pub se_z1: f64,
    pub mean_z2: f64,
    pub se_z2: f64,
    /// Mean of `z2 / z1` over replicates with `z1 > 0`.
    pub mean_ratio: Option<f64>,
    pub se_ratio: Option<f64>,
    /// Replicates with a non-empty population.
    pub survivors: usize,
    pub extinction_frequency: f64,
    /// Replicates that hit the population cap before this time; their
    /// counts are frozen at the cap.
    pub capped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub params: TwoTypeParams,
    pub init: PopulationState,
    pub replicates: usize,
    pub base_seed: u64,
    pub cap: u64,
    pub points: Vec<GridStats>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "time grid must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// States of one replicate at each grid time, and the first grid index
/// not reached because the cap was hit.
fn sample_replicate(
    params: &TwoTypeParams,
    init: PopulationState,
    grid: &[f64],
    opts: &SimOptions,
    index: u64,
    base_seed: u64,
) -> (Vec<PopulationState>, Option<usize>) {
    let mut out = Vec::with_capacity(grid.len());
    while out.len() < grid.len() && grid[out.len()] == 0.0 {
        out.push(init);
    }
    if out.len() == grid.len() {
        return (out, None);
    }
    let mut rng = stream(base_seed, index);
    let end = run(params, init, opts, &mut rng, |before, e| {
        while out.len() < grid.len() && grid[out.len()] < e.time {
            out.push(before);
        }
    });
    let capped = (end.stop == StopReason::Cap && out.len() < grid.len()).then_some(out.len());
    out.resize(grid.len(), end.state);
    (out, capped)
}

/// Runs `replicates` independent trajectories and summarises them on
/// `grid`. Replicate `r` draws from [`stream`]`(base_seed, r)`.
pub fn ensemble(
    params: &TwoTypeParams,
    init: PopulationState,
    grid: &[f64],
    replicates: usize,
    base_seed: u64,
) -> Result<EnsembleStats> {
    ensemble_with_cap(params, init, grid, replicates, base_seed, DEFAULT_CAP)
}

pub fn ensemble_with_cap(
    params: &TwoTypeParams,
    init: PopulationState,
    grid: &[f64],
    replicates: usize,
    base_seed: u64,
    cap: u64,
) -> Result<EnsembleStats> {
    check_grid(grid)?;
    if replicates == 0 {
        return Err(Error::Domain("replicates must be >= 1".into()));
    }
    let horizon = *grid.last().expect("non-empty");
    let opts = SimOptions::new(horizon.max(f64::MIN_POSITIVE)).with_cap(cap);
    check_inputs(params, init, &opts)?;

    let samples: Vec<(Vec<PopulationState>, Option<usize>)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| sample_replicate(params, init, grid, &opts, r, base_seed))
        .collect();

    let points = grid
        .iter()
        .enumerate()
        .map(|(g, &t)| {
            let mut z1 = Welford::new();
            let mut z2 = Welford::new();
            let mut ratio = Welford::new();
            let mut survivors = 0;
            let mut capped = 0;
            for (states, cap_from) in &samples {
                let s = states[g];
                z1.push(s.z1 as f64);
                z2.push(s.z2 as f64);
                if !s.is_extinct() {
                    survivors += 1;
                }
                if s.z1 > 0 {
                    ratio.push(s.z2 as f64 / s.z1 as f64);
                }
                if cap_from.is_some_and(|c| g >= c) {
                    capped += 1;
                }
            }
            let (e1, e2, er) = (z1.estimate(), z2.estimate(), ratio.estimate());
            GridStats {
                t,
                mean_z1: e1.mean,
                se_z1: e1.se,
                mean_z2: e2.mean,
                se_z2: e2.se,
                mean_ratio: (er.n > 0).then_some(er.mean),
                se_ratio: (er.n > 0).then_some(er.se),
                survivors,
                extinction_frequency: (replicates - survivors) as f64 / replicates as f64,
                capped,
            }
        })
        .collect();

    Ok(EnsembleStats {
        params: *params,
        init,
        replicates,
        base_seed,
        cap,
        points,
    })
}

/// End states of `replicates` independent runs to `horizon`.
pub fn final_states(
    params: &TwoTypeParams,
    init: PopulationState,
    horizon: f64,
    replicates: usize,
    base_seed: u64,
) -> Result<Vec<PopulationState>> {
    let opts = SimOptions::new(horizon);
    check_inputs(params, init, &opts)?;
    Ok((0..replicates as u64)
        .into_par_iter()
        .map(|r| run(params, init, &opts, &mut stream(base_seed, r), |_, _| {}).state)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioOptions {
    pub cap: u64,
    /// Two-sided coverage of the bootstrap interval.
    pub level: f64,
    pub resamples: usize,
    /// Upper bound on `exp(-gap * horizon)`.
    pub max_transient: f64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            level: 0.95,
            resamples: 2000,
            max_transient: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// Replicates with `z1 > 0` at the end of the run.
    pub survivors: usize,
    pub replicates: usize,
    /// Survivors that stopped at the cap before the horizon.
    pub capped: usize,
}

impl RatioEstimate {
    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

pub fn empirical_limiting_ratio(
    params: &TwoTypeParams,
    init: PopulationState,
    horizon: f64,
    replicates: usize,
    base_seed: u64,
) -> Result<RatioEstimate> {
    empirical_limiting_ratio_with(params, init, horizon, replicates, base_seed, &RatioOptions::default())
}

/// Mean of `z2/z1` at the horizon over replicates with `z1 > 0`, with a
/// percentile bootstrap interval. A replicate that reaches the cap first
/// contributes its ratio at that moment.
pub fn empirical_limiting_ratio_with(
    params: &TwoTypeParams,
    init: PopulationState,
    horizon: f64,
    replicates: usize,
    base_seed: u64,
    options: &RatioOptions,
) -> Result<RatioEstimate> {
    let gen = build_generator(params)?;
    let s = spectrum(&gen);
    if classify(params)? != Criticality::Supercritical {
        return Err(Error::NotSupercritical {
            sigma_plus: s.sigma_plus,
        });
    }
    let residual = (-s.gap * horizon).exp();
    if residual >= options.max_transient {
        return Err(Error::HorizonTooShort {
            horizon,
            residual,
            limit: options.max_transient,
        });
    }
    let opts = SimOptions::new(horizon).with_cap(options.cap);
    check_inputs(params, init, &opts)?;

    let ends: Vec<_> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| run(params, init, &opts, &mut stream(base_seed, r), |_, _| {}))
        .collect();

    let mut ratios = Vec::new();
    let mut capped = 0;
    for end in &ends {
        if end.state.z1 > 0 {
            ratios.push(end.state.z2 as f64 / end.state.z1 as f64);
            if end.stop == StopReason::Cap {
                capped += 1;
            }
        }
    }
    if ratios.is_empty() {
        return Err(Error::AllExtinct);
    }
    let w: Welford = ratios.iter().copied().collect();
    let mut boot_rng = substream(base_seed, 0xB007, 0);
    let (ci_low, ci_high) = bootstrap_mean_ci(&ratios, options.resamples, options.level, &mut boot_rng);
    Ok(RatioEstimate {
        estimate: w.mean(),
        se: w.estimate().se,
        ci_low,
        ci_high,
        level: options.level,
        survivors: ratios.len(),
        replicates,
        capped,
    })
}
