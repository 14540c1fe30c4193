//! Two reflected Brownian hosts in the cube `[0, ε]³`.
//!
//! Each coordinate is `ε φ(p + W/ε)` for a free Brownian motion `W`, so the
//! positions at any set of times are sampled exactly whatever the step. The
//! only discretisation error is an encounter missed between two samples.
//! Steps are therefore sized from the current gap `d - δ`: the relative
//! displacement over a step of length `h` has RMS `sqrt(6h)`, and `h` is
//! chosen so that the gap is [`SAFETY`] such RMS lengths. Folding is
//! 1-Lipschitz, so folded hosts never move farther than the free ones.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{fold, monte_carlo, McEstimate, PathOptions};
use crate::error::{Error, Result};
use crate::rng::{stream, SimRng};

/// Gap in units of the per-step RMS relative displacement.
pub const SAFETY: f64 = 5.0;
/// A gap below this fraction of `δ` counts as an encounter.
pub const CONTACT_TOLERANCE: f64 = 1e-3;

/// Default starts in unit coordinates: opposite corners of the inner cube.
pub const DEFAULT_STARTS: ([f64; 3], [f64; 3]) = ([0.25; 3], [0.75; 3]);

fn distance(a: &[f64; 3], b: &[f64; 3], eps: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        let d = eps * (fold(a[k]) - fold(b[k]));
        s += d * d;
    }
    s.sqrt()
}

fn check(eps: f64, delta: f64, p: &[f64; 3], q: &[f64; 3]) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: eps,
            constraint: "must lie in (0, 1]",
        });
    }
    if !(delta > 0.0 && delta < eps) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            constraint: "must lie in (0, epsilon)",
        });
    }
    if p.iter().chain(q).any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::Domain("start coordinates must lie in [0, 1]".into()));
    }
    Ok(())
}

/// First time the hosts come within `delta`. `p, q` are unit coordinates;
/// `opts.dt` caps the step length and `opts.bridge` is ignored.
pub fn sample_meeting_time_3d(
    eps: f64,
    delta: f64,
    p: [f64; 3],
    q: [f64; 3],
    opts: &PathOptions,
    rng: &mut SimRng,
) -> Result<f64> {
    check(eps, delta, &p, &q)?;
    opts.validate()?;
    let (mut a, mut b) = (p, q);
    let mut t = 0.0;
    loop {
        let gap = distance(&a, &b, eps) - delta;
        if gap <= CONTACT_TOLERANCE * delta {
            return Ok(t);
        }
        if t > opts.horizon {
            return Err(Error::MaxTimeExceeded(opts.horizon));
        }
        let h = ((gap / SAFETY).powi(2) / 6.0).min(opts.dt);
        let sd = h.sqrt() / eps;
        for k in 0..3 {
            a[k] += sd * rng.sample::<f64, _>(StandardNormal);
            b[k] += sd * rng.sample::<f64, _>(StandardNormal);
        }
        t += h;
    }
}

pub fn mean_meeting_time_3d_from(
    eps: f64,
    delta: f64,
    p: [f64; 3],
    q: [f64; 3],
    opts: &PathOptions,
    paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    check(eps, delta, &p, &q)?;
    opts.validate()?;
    monte_carlo(
        paths,
        |i| stream(seed, i),
        |rng| sample_meeting_time_3d(eps, delta, p, q, opts, rng),
    )
}

/// Mean encounter time from [`DEFAULT_STARTS`].
pub fn meeting_time_3d(eps: f64, delta: f64, opts: &PathOptions, paths: usize, seed: u64) -> Result<McEstimate> {
    let (p, q) = DEFAULT_STARTS;
    mean_meeting_time_3d_from(eps, delta, p, q, opts, paths, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> PathOptions {
        PathOptions {
            dt: 1e-2,
            ..PathOptions::default()
        }
    }

    #[test]
    fn start_within_radius_is_zero() {
        let t = sample_meeting_time_3d(1.0, 0.1, [0.5; 3], [0.52, 0.5, 0.5], &coarse(), &mut stream(0, 0)).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn rejects_bad_geometry() {
        let o = coarse();
        assert!(meeting_time_3d(1.0, 1.5, &o, 10, 0).is_err());
        assert!(meeting_time_3d(1.2, 0.1, &o, 10, 0).is_err());
        assert!(mean_meeting_time_3d_from(1.0, 0.1, [1.1, 0.0, 0.0], [0.5; 3], &o, 10, 0).is_err());
    }

    #[test]
    fn positions_stay_in_cube() {
        let eps: f64 = 0.3;
        for x in [-7.3, -0.1, 0.0, 0.4, 1.0, 5.9] {
            let y = eps * fold(x);
            assert!((0.0..=eps).contains(&y));
        }
    }

    /// Capping the step far below the adaptive size must not move the mean:
    /// the adaptive rule is the only source of missed encounters.
    #[test]
    fn step_cap_does_not_shift_mean() {
        let free = meeting_time_3d(
            1.0,
            0.1,
            &PathOptions {
                dt: 1.0,
                ..PathOptions::default()
            },
            1500,
            4,
        )
        .unwrap();
        let capped = meeting_time_3d(
            1.0,
            0.1,
            &PathOptions {
                dt: 1e-4,
                ..PathOptions::default()
            },
            1500,
            5,
        )
        .unwrap();
        let se = (free.se.powi(2) + capped.se.powi(2)).sqrt();
        assert!((free.mean - capped.mean).abs() < 3.0 * se, "{free:?} vs {capped:?}");
    }

    /// Small radius: encounters arrive at the Smoluchowski rate
    /// `4π D δ / V` with relative diffusivity `D = 1`, up to `O(δ)` terms.
    #[test]
    fn small_radius_rate_is_smoluchowski() {
        let delta = 0.03;
        let est = meeting_time_3d(
            1.0,
            delta,
            &PathOptions {
                dt: 1.0,
                ..PathOptions::default()
            },
            1500,
            6,
        )
        .unwrap();
        let predicted = 1.0 / (4.0 * std::f64::consts::PI * delta);
        assert!((est.mean / predicted - 1.0).abs() < 0.2, "{est:?} vs {predicted}");
    }
}
