use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares fit of `ln t = intercept + slope · ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub points: usize,
}

impl ExponentFit {
    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Fits the log–log slope of `(x, t)` pairs with a two-sided Student-t
/// interval at `level`. Needs at least three points, two distinct `x`, and
/// positive values throughout.
pub fn fit_exponent(pairs: &[(f64, f64)], level: f64) -> Result<ExponentFit> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::DegenerateDesign("need at least three points"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter {
            name: "level",
            value: level,
            constraint: "must lie in (0, 1)",
        });
    }
    if pairs
        .iter()
        .any(|&(x, t)| !(x > 0.0 && t > 0.0 && x.is_finite() && t.is_finite()))
    {
        return Err(Error::DegenerateDesign("log-log fit needs positive finite values"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * nf * (1.0 + mx * mx) {
        return Err(Error::DegenerateDesign("abscissae are not distinct"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, nf - 2.0)
        .expect("df >= 1")
        .inverse_cdf(0.5 + level / 2.0);
    Ok(ExponentFit {
        slope,
        intercept,
        se,
        ci_low: slope - q * se,
        ci_high: slope + q * se,
        level,
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    const EPS: [f64; 5] = [1.0, 0.7, 0.5, 0.35, 0.25];

    #[test]
    fn exact_power_laws() {
        for k in [2.0, 3.0, -1.0] {
            let pairs: Vec<_> = EPS.iter().map(|&e: &f64| (e, 1.7 * e.powf(k))).collect();
            let f = fit_exponent(&pairs, 0.95).unwrap();
            assert!((f.slope - k).abs() < 1e-12);
            assert!((f.intercept - 1.7f64.ln()).abs() < 1e-12);
            assert!(f.se < 1e-7);
        }
    }

    #[test]
    fn noisy_quadratic_covers_two() {
        let mut covered = 0;
        for s in 0..200 {
            let mut rng = crate::rng::stream(s, 0);
            let pairs: Vec<_> = EPS
                .iter()
                .map(|&e: &f64| (e, e * e * (0.01 * rng.sample::<f64, _>(StandardNormal)).exp()))
                .collect();
            let f = fit_exponent(&pairs, 0.95).unwrap();
            covered += usize::from(f.covers(2.0));
        }
        // 95% interval: 190 expected, binomial sd about 3.
        assert!(covered >= 180, "{covered}");
    }

    /// Interval width against a hand-computed case: three points with
    /// residuals (+1, -2, +1)·0.01 around slope 2; t(0.975, 1) = 12.7062.
    #[test]
    fn interval_width_hand_case() {
        let xs = [1.0f64, 2.0, 3.0];
        let r = [0.01, -0.02, 0.01];
        let pairs: Vec<_> = xs.iter().zip(r).map(|(&x, e)| (x.exp(), (2.0 * x + e).exp())).collect();
        let f = fit_exponent(&pairs, 0.95).unwrap();
        // residuals are orthogonal to (1, x), so the slope is unchanged
        assert!((f.slope - 2.0).abs() < 1e-12);
        let se = (0.0006f64 / 1.0 / 2.0).sqrt();
        assert!((f.se - se).abs() < 1e-12);
        assert!((f.ci_high - f.slope - 12.706_204_736 * se).abs() < 1e-8);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_exponent(&[(1.0, 1.0), (0.5, 0.25)], 0.95).is_err());
        assert!(fit_exponent(&[(0.5, 1.0), (0.5, 2.0), (0.5, 3.0)], 0.95).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (0.5, -1.0), (0.2, 0.1)], 0.95).is_err());
    }
}
