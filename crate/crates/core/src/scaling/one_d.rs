//! Two reflected Brownian hosts on `[0, ε]`.
//!
//! Host positions are `ε φ(x0 + W0(t)/ε)` and `ε φ(y0 + W1(t)/ε)` with
//! `x0, y0` in unit coordinates, which is standard Brownian motion in
//! `[0, ε]` reflected at both ends. With `a = x0 + W0/ε`, `b = y0 + W1/ε` the
//! hosts coincide exactly when `a - b` or `a + b` is an even integer. Both
//! are independent Brownian motions with variance rate `2/ε²`, so a meeting
//! is a crossing of the lattice `2ℤ` by either of them.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{bridge_crossing, monte_carlo, McEstimate, PathOptions};
use crate::error::{Error, Result};
use crate::rng::{stream, SimRng};

fn check(eps: f64, x0: f64, y0: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: eps,
            constraint: "must lie in (0, 1]",
        });
    }
    for (name, v) in [("x0", x0), ("y0", y0)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                constraint: "must lie in [0, 1]",
            });
        }
    }
    Ok(())
}

/// Crossing state of one unfolded coordinate.
struct Lattice {
    x: f64,
    cell: f64,
}

impl Lattice {
    fn new(x: f64) -> Self {
        Self {
            x,
            cell: (x / 2.0).floor(),
        }
    }

    fn on_lattice(&self) -> bool {
        self.x == 2.0 * self.cell
    }

    /// Advances by `dx`; returns the probability that `2ℤ` was hit during
    /// the step (1 for a detected crossing).
    fn step(&mut self, dx: f64, var: f64, dt: f64, bridge: bool) -> f64 {
        let x0 = self.x;
        self.x += dx;
        let cell = (self.x / 2.0).floor();
        if cell != self.cell || self.on_lattice() {
            self.cell = cell;
            return 1.0;
        }
        if !bridge {
            return 0.0;
        }
        let lo = 2.0 * cell;
        let hi = lo + 2.0;
        let miss = (1.0 - bridge_crossing(x0 - lo, self.x - lo, var, dt))
            * (1.0 - bridge_crossing(hi - x0, hi - self.x, var, dt));
        1.0 - miss
    }
}

/// One meeting time drawn from `rng`.
pub fn sample_meeting_time(eps: f64, x0: f64, y0: f64, opts: &PathOptions, rng: &mut SimRng) -> Result<f64> {
    check(eps, x0, y0)?;
    opts.validate()?;
    let mut diff = Lattice::new(x0 - y0);
    let mut sum = Lattice::new(x0 + y0);
    if diff.on_lattice() || sum.on_lattice() {
        return Ok(0.0);
    }
    let var = 2.0 / (eps * eps);
    let sd = (var * opts.dt).sqrt();
    let mut n: u64 = 0;
    loop {
        n += 1;
        let t = n as f64 * opts.dt;
        if t > opts.horizon {
            return Err(Error::MaxTimeExceeded(opts.horizon));
        }
        let zd: f64 = rng.sample(StandardNormal);
        let zs: f64 = rng.sample(StandardNormal);
        let p1 = diff.step(sd * zd, var, opts.dt, opts.bridge);
        let p2 = sum.step(sd * zs, var, opts.dt, opts.bridge);
        if p1 == 1.0 || p2 == 1.0 {
            return Ok(t);
        }
        if opts.bridge && rng.random::<f64>() < 1.0 - (1.0 - p1) * (1.0 - p2) {
            return Ok(t);
        }
    }
}

/// Meeting time of a single path seeded with `seed`.
pub fn meeting_time_1d(eps: f64, x0: f64, y0: f64, opts: &PathOptions, seed: u64) -> Result<f64> {
    sample_meeting_time(eps, x0, y0, opts, &mut stream(seed, 0))
}

/// Mean meeting time over `paths` paths; path `i` uses `stream(seed, i)`.
pub fn mean_meeting_time_1d(
    eps: f64,
    x0: f64,
    y0: f64,
    opts: &PathOptions,
    paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    check(eps, x0, y0)?;
    opts.validate()?;
    monte_carlo(
        paths,
        |i| stream(seed, i),
        |rng| sample_meeting_time(eps, x0, y0, opts, rng),
    )
}

/// Exact mean meeting time. `a - b` and `a + b` start inside cells of
/// `2ℤ` of length `L = 2` and exit independently, each with survival
/// `S(t) = Σ_{n odd} 4/(nπ) sin(nπx/L) exp(-n²π² D t / L²)`, `D = 1/ε²`
/// (half the variance rate). The mean of the minimum is `∫ S_d S_s dt`.
pub fn mean_meeting_time_1d_exact(eps: f64, x0: f64, y0: f64) -> Result<f64> {
    check(eps, x0, y0)?;
    let pos = |x: f64| x.rem_euclid(2.0);
    let (u, v) = (pos(x0 - y0), pos(x0 + y0));
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    use std::f64::consts::PI;
    const TERMS: usize = 4000;
    let coef = |x: f64| -> Vec<f64> {
        (0..TERMS)
            .map(|i| {
                let n = (2 * i + 1) as f64;
                4.0 / (n * PI) * (n * PI * x / 2.0).sin()
            })
            .collect()
    };
    let (cu, cv) = (coef(u), coef(v));
    let mut total = 0.0;
    for (i, a) in cu.iter().enumerate() {
        let m = (2 * i + 1) as f64;
        for (j, b) in cv.iter().enumerate() {
            let n = (2 * j + 1) as f64;
            total += a * b / ((m * m + n * n) * PI * PI / 4.0);
        }
    }
    Ok(total * eps * eps)
}
