//! Meeting on the unit sphere through the projected diffusion.
//!
//! If the relative position of two hosts is a standard spherical Brownian
//! motion started at angular distance `θ0`, then `V = cos θ` solves
//! `dV = -V/2 dt + sqrt((1 - V²)/2) dW`, and the hosts meet (angular
//! distance `η`) when `V` first reaches `r = cos η`. The mean hitting time
//! from `V(0) = z` is `v(z) = 4 ln((1 - z)/(1 - r))`.
//!
//! On a sphere contracted by `ε` with the same meeting distance `δ`, the
//! angular radius is `δ/ε` and time runs `ε²` times faster.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{bridge_crossing, monte_carlo, McEstimate, PathOptions};
use crate::error::{Error, Result};
use crate::rng::{stream, SimRng};

/// `1 - cos η`, accurate for small `η`.
fn one_minus_cos(eta: f64) -> f64 {
    2.0 * (eta / 2.0).sin().powi(2)
}

fn check(z: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            constraint: "must lie in (0, π/2)",
        });
    }
    let r = eta.cos();
    if !(-1.0..=r).contains(&z) {
        return Err(Error::InvalidParameter {
            name: "z",
            value: z,
            constraint: "must lie in [-1, cos eta]",
        });
    }
    Ok(r)
}

/// Mean hitting time of `cos η` from `z`.
pub fn sphere_hitting_analytic(z: f64, eta: f64) -> Result<f64> {
    check(z, eta)?;
    Ok(4.0 * ((1.0 - z) / one_minus_cos(eta)).ln())
}

/// `v(z) / (8 |ln η|)`, which tends to 1 as `η → 0`.
pub fn small_radius_ratio(z: f64, eta: f64) -> Result<f64> {
    Ok(sphere_hitting_analytic(z, eta)? / (8.0 * eta.ln().abs()))
}

fn drift(v: f64) -> f64 {
    -0.5 * v
}

fn variance(v: f64) -> f64 {
    (0.5 * (1.0 - v * v)).max(0.0)
}

/// One Euler–Maruyama step, clamped to `[-1, 1]`.
pub fn projected_step(v: f64, dt: f64, normal: f64) -> f64 {
    (v + drift(v) * dt + (variance(v) * dt).sqrt() * normal).clamp(-1.0, 1.0)
}

pub fn sample_hitting_time(z0: f64, eta: f64, opts: &PathOptions, rng: &mut SimRng) -> Result<f64> {
    let r = check(z0, eta)?;
    opts.validate()?;
    if z0 >= r {
        return Ok(0.0);
    }
    let mut v = z0;
    let mut n: u64 = 0;
    loop {
        n += 1;
        let t = n as f64 * opts.dt;
        if t > opts.horizon {
            return Err(Error::MaxTimeExceeded(opts.horizon));
        }
        let prev = v;
        v = projected_step(v, opts.dt, rng.sample(StandardNormal));
        if v >= r {
            return Ok(t);
        }
        if opts.bridge {
            let p = bridge_crossing(r - prev, r - v, variance(prev), opts.dt);
            if rng.random::<f64>() < p {
                return Ok(t);
            }
        }
    }
}

/// Hitting time of a single path seeded with `seed`.
pub fn simulate_projected_diffusion(z0: f64, eta: f64, opts: &PathOptions, seed: u64) -> Result<f64> {
    sample_hitting_time(z0, eta, opts, &mut stream(seed, 0))
}

pub fn mean_hitting_time_2d(z0: f64, eta: f64, opts: &PathOptions, paths: usize, seed: u64) -> Result<McEstimate> {
    check(z0, eta)?;
    opts.validate()?;
    monte_carlo(
        paths,
        |i| stream(seed, i),
        |rng| sample_hitting_time(z0, eta, opts, rng),
    )
}

/// Predicted `λ(ε)/λ(1)` for meeting distance `δ`:
/// `ε⁻² |ln δ| / (|ln δ| - |ln ε|)`. Requires `10 δ <= ε <= 1`.
pub fn rate_scaling_2d(eps: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            constraint: "must lie in (0, 1)",
        });
    }
    if !(eps <= 1.0 && eps >= 10.0 * delta) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: eps,
            constraint: "must lie in [10 delta, 1]",
        });
    }
    let ld = delta.ln().abs();
    Ok(ld / (eps * eps * (ld - eps.ln().abs())))
}

/// Exact-model counterpart of [`rate_scaling_2d`]: `t*(1)/t*(ε)` from the
/// closed-form hitting time, with `z` the starting cosine on both spheres.
pub fn rate_ratio_exact_2d(eps: f64, delta: f64, z: f64) -> Result<f64> {
    Ok(sphere_hitting_analytic(z, delta)? / (eps * eps * sphere_hitting_analytic(z, delta / eps)?))
}
