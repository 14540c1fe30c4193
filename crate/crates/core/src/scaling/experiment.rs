use serde::{Deserialize, Serialize};

use super::{fit_exponent, one_d, three_d, two_d, ExponentFit, McEstimate, PathOptions};
use crate::error::{Error, Result};
use crate::rng::splitmix64;

/// One contraction experiment across several `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub dimension: u8,
    pub epsilons: Vec<f64>,
    /// Meeting distance `δ` (2D geodesic, 3D Euclidean); unused in 1D.
    pub radius: f64,
    /// 1D starts in unit coordinates.
    pub x0: f64,
    pub y0: f64,
    /// 2D starting cosine of the angular distance.
    pub z0: f64,
    /// 3D starts in unit coordinates.
    pub p0: [f64; 3],
    pub q0: [f64; 3],
    pub paths: usize,
    pub seed: u64,
    pub path: PathOptions,
    /// Coverage of the exponent interval.
    pub level: f64,
}

impl ScalingConfig {
    pub fn new(dimension: u8, epsilons: Vec<f64>) -> Self {
        let (p0, q0) = three_d::DEFAULT_STARTS;
        Self {
            dimension,
            epsilons,
            radius: match dimension {
                3 => 0.02,
                _ => 0.01,
            },
            x0: 0.2,
            y0: 0.8,
            z0: 0.0,
            p0,
            q0,
            paths: 1000,
            seed: 0,
            path: PathOptions::default(),
            level: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::Domain(format!(
                "dimension must be 1, 2 or 3, got {}",
                self.dimension
            )));
        }
        if self.epsilons.is_empty() {
            return Err(Error::Domain("no contraction factors given".into()));
        }
        for &e in &self.epsilons {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: "epsilon",
                    value: e,
                    constraint: "must lie in (0, 1]",
                });
            }
        }
        if self.paths < 100 {
            return Err(Error::Domain(format!("paths must be >= 100, got {}", self.paths)));
        }
        self.path.validate()?;
        if self.dimension > 1 {
            // world diameter: π on the unit sphere, sqrt(3) for the cube
            let diameter = if self.dimension == 2 {
                std::f64::consts::PI
            } else {
                3f64.sqrt()
            };
            let e_min = self.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
            if !(self.radius > 0.0 && self.radius < e_min * diameter / 4.0) {
                return Err(Error::InvalidParameter {
                    name: "radius",
                    value: self.radius,
                    constraint: "must be positive and below epsilon * diameter / 4",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub epsilon: f64,
    pub mean_time: f64,
    pub se: f64,
    pub paths: usize,
    pub excluded: usize,
    /// Exact mean time where a closed form exists (1D series, 2D formula).
    pub analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub config: ScalingConfig,
    pub points: Vec<ScalingPoint>,
    /// Log–log slope of mean time against `ε`; absent with fewer than three
    /// distinct `ε`.
    pub fit: Option<ExponentFit>,
    /// Power law predicted for the slope (2 in 1D, 3 in 3D).
    pub predicted_exponent: Option<f64>,
    /// 2D only: measured `t*(1)/t*(ε)` beside the log-corrected prediction.
    pub rate_ratios: Option<Vec<(f64, f64, f64)>>,
}

fn point(epsilon: f64, est: McEstimate, analytic: Option<f64>) -> ScalingPoint {
    ScalingPoint {
        epsilon,
        mean_time: est.mean,
        se: est.se,
        paths: est.paths,
        excluded: est.excluded,
        analytic,
    }
}

/// Runs every `ε` of `config`; `ε` number `k` uses base seed
/// `splitmix64(seed ^ splitmix64(k))`, so the estimates are independent.
pub fn run_scaling(config: &ScalingConfig) -> Result<ScalingResult> {
    config.validate()?;
    let c = config;
    let mut points = Vec::with_capacity(c.epsilons.len());
    for (k, &eps) in c.epsilons.iter().enumerate() {
        let seed = splitmix64(c.seed ^ splitmix64(k as u64));
        let p = match c.dimension {
            1 => {
                let est = one_d::mean_meeting_time_1d(eps, c.x0, c.y0, &c.path, c.paths, seed)?;
                point(eps, est, Some(one_d::mean_meeting_time_1d_exact(eps, c.x0, c.y0)?))
            }
            2 => {
                let eta = c.radius / eps;
                let est = two_d::mean_hitting_time_2d(c.z0, eta, &c.path, c.paths, seed)?;
                let s = eps * eps;
                let scaled = McEstimate {
                    mean: est.mean * s,
                    se: est.se * s,
                    ..est
                };
                point(eps, scaled, Some(s * two_d::sphere_hitting_analytic(c.z0, eta)?))
            }
            _ => {
                let est = three_d::mean_meeting_time_3d_from(eps, c.radius, c.p0, c.q0, &c.path, c.paths, seed)?;
                point(eps, est, None)
            }
        };
        points.push(p);
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.mean_time)).collect();
    let fit = match fit_exponent(&pairs, c.level) {
        Ok(f) => Some(f),
        Err(Error::DegenerateDesign(_)) if pairs.len() < 3 || has_duplicates(&c.epsilons) => None,
        Err(e) => return Err(e),
    };
    let predicted_exponent = match c.dimension {
        1 => Some(2.0),
        3 => Some(3.0),
        _ => None,
    };
    let rate_ratios = if c.dimension == 2 {
        let base = points.iter().find(|p| p.epsilon == 1.0).map(|p| p.mean_time);
        match base {
            Some(t1) => Some(
                points
                    .iter()
                    .filter(|p| p.epsilon >= 10.0 * c.radius)
                    .map(|p| {
                        Ok((
                            p.epsilon,
                            t1 / p.mean_time,
                            two_d::rate_scaling_2d(p.epsilon, c.radius)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        }
    } else {
        None
    };
    Ok(ScalingResult {
        config: c.clone(),
        points,
        fit,
        predicted_exponent,
        rate_ratios,
    })
}

fn has_duplicates(xs: &[f64]) -> bool {
    xs.iter().enumerate().any(|(i, a)| xs[..i].contains(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ScalingConfig::new(4, vec![1.0]).validate().is_err());
        assert!(ScalingConfig::new(1, vec![]).validate().is_err());
        assert!(ScalingConfig::new(1, vec![1.5]).validate().is_err());
        let mut c = ScalingConfig::new(3, vec![1.0, 0.1]);
        c.radius = 0.05;
        assert!(c.validate().is_err());
        c.epsilons = vec![1.0, 0.5];
        assert!(c.validate().is_ok());
        c.paths = 10;
        assert!(c.validate().is_err());
    }

    #[test]
    fn one_d_experiment_reports_exponent() {
        let mut c = ScalingConfig::new(1, vec![1.0, 0.7, 0.5]);
        c.paths = 400;
        c.path.dt = 1e-4;
        c.seed = 9;
        let r = run_scaling(&c).unwrap();
        assert_eq!(r.points.len(), 3);
        let f = r.fit.unwrap();
        assert!((f.slope - 2.0).abs() < 0.5, "{f:?}");
        for p in &r.points {
            assert!(p.mean_time > 0.0 && p.se > 0.0 && p.excluded == 0);
        }
        assert_eq!(run_scaling(&c).unwrap(), r);
    }

    #[test]
    fn two_d_experiment_has_rate_ratios() {
        let mut c = ScalingConfig::new(2, vec![1.0, 0.5]);
        c.radius = 0.03;
        c.paths = 100;
        c.path.dt = 1e-3;
        let r = run_scaling(&c).unwrap();
        assert!(r.fit.is_none());
        let rr = r.rate_ratios.unwrap();
        assert_eq!(rr.len(), 2);
        assert_eq!((rr[0].1, rr[0].2), (1.0, 1.0));
        assert!(rr[1].1 > 2.0, "{rr:?}");
    }
}
