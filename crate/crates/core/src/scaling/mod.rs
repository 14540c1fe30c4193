//! Encounter-rate scaling under contraction of the hosts' world.
//!
//! Two hosts move as independent standard Brownian motions in a world `S`;
//! the mean time `t*` until they meet sets the encounter rate `λ ∝ 1/t*`.
//! Shrinking the world to `εS` changes `t*` by a power law in one and three
//! dimensions and by a log-corrected law in two:
//!
//! * 1D, `[0, ε]` with reflection: `t*(ε) = ε² t*(1)` ([`one_d`]).
//! * 2D, unit sphere, meeting radius `η`: the cosine of the angular distance
//!   is a one-dimensional diffusion whose mean hitting time has a closed
//!   form ([`two_d`]).
//! * 3D, reflecting cube `[0, ε]³`, meeting radius `δ`: `t* ∝ ε³/δ`
//!   ([`three_d`]).
//!
//! Reflection is realised by [`fold`], applied coordinatewise to free
//! Brownian paths.

mod experiment;
mod fit;
pub mod one_d;
pub mod three_d;
pub mod two_d;

pub use experiment::{run_scaling, ScalingConfig, ScalingPoint, ScalingResult};
pub use fit::{fit_exponent, ExponentFit};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::stats::Welford;

/// Reflection of the real line onto `[0, 1]`: identity on `[0, 1]`, even
/// about every integer, 2-periodic.
pub fn fold(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y <= 1.0 {
        y
    } else {
        2.0 - y
    }
}

/// Default per-path time limit.
pub const DEFAULT_HORIZON: f64 = 1e4;

/// Discretisation settings shared by the path simulators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathOptions {
    pub dt: f64,
    /// Paths still running at this time fail with `MaxTimeExceeded`.
    pub horizon: f64,
    /// Brownian-bridge correction: between grid points, count a crossing
    /// with the bridge's crossing probability.
    pub bridge: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            horizon: DEFAULT_HORIZON,
            bridge: false,
        }
    }
}

impl PathOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: self.dt,
                constraint: "must be > 0",
            });
        }
        if self.horizon.is_nan() || self.horizon <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: self.horizon,
                constraint: "must be > 0",
            });
        }
        Ok(())
    }
}

/// Monte Carlo mean of a first-passage time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    /// Paths that finished and enter the mean.
    pub paths: usize,
    /// Paths dropped for exceeding the horizon.
    pub excluded: usize,
}

impl McEstimate {
    /// More than 1% of paths were dropped; the mean is biased low.
    pub fn horizon_biased(&self) -> bool {
        self.excluded * 100 > self.paths + self.excluded
    }

    pub fn within_se(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Runs `paths` independent copies of `one`, path `i` on `stream(seed, i)`,
/// and averages the finished ones in path order.
pub(crate) fn monte_carlo<F>(paths: usize, rng_for: impl Fn(u64) -> SimRng + Sync, one: F) -> Result<McEstimate>
where
    F: Fn(&mut SimRng) -> Result<f64> + Sync,
{
    if paths == 0 {
        return Err(Error::Domain("paths must be >= 1".into()));
    }
    let times: Vec<Result<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| one(&mut rng_for(i)))
        .collect();
    let mut w = Welford::new();
    let mut excluded = 0;
    for t in times {
        match t {
            Ok(t) => w.push(t),
            Err(Error::MaxTimeExceeded(_)) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if w.count() == 0 {
        return Err(Error::MaxTimeExceeded(f64::NAN));
    }
    let e = w.estimate();
    Ok(McEstimate {
        mean: e.mean,
        se: e.se,
        paths: e.n,
        excluded,
    })
}

/// Probability that a Brownian bridge with variance rate `var` over a step
/// of length `dt` touches a level at distances `d0, d1 >= 0` from its ends.
pub(crate) fn bridge_crossing(d0: f64, d1: f64, var: f64, dt: f64) -> f64 {
    (-2.0 * d0 * d1 / (var * dt)).exp()
}
