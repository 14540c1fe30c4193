//! Small summary-statistics helpers shared by the Monte Carlo drivers.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// `|mean - target| <= k * se`.
    pub fn within_se(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Running mean and variance (Welford). Summation order is the push order,
/// so feeding samples in a fixed order gives bit-identical results.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n == 0 {
            f64::NAN
        } else {
            (self.variance() / self.n as f64).sqrt()
        };
        Estimate {
            mean: self.mean,
            se,
            n: self.n,
        }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::new();
        for x in iter {
            w.push(x);
        }
        w
    }
}

/// Percentile bootstrap confidence interval for the mean of `samples`.
///
/// Returns `(low, high)` at two-sided coverage `level`.
pub fn bootstrap_mean_ci<R: Rng>(samples: &[f64], resamples: usize, level: f64, rng: &mut R) -> (f64, f64) {
    let n = samples.len();
    assert!(n > 0, "bootstrap needs at least one sample");
    assert!(resamples > 0 && level > 0.0 && level < 1.0);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let s: f64 = (0..n).map(|_| samples[rng.random_range(0..n)]).sum();
            s / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile_sorted(&means, tail), quantile_sorted(&means, 1.0 - tail))
}

/// Linear-interpolated quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let w: Welford = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((w.mean() - mean).abs() < 1e-14);
        assert!((w.variance() - var).abs() < 1e-12);
        assert_eq!(w.count(), 5);
    }

    #[test]
    fn single_sample_has_zero_se() {
        let w: Welford = [3.0].into_iter().collect();
        assert_eq!(w.estimate().se, 0.0);
    }

    #[test]
    fn bootstrap_ci_brackets_mean() {
        let xs: Vec<f64> = (0..200).map(|i| (i % 17) as f64).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let (lo, hi) = bootstrap_mean_ci(&xs, 500, 0.95, &mut stream(1, 0));
        assert!(lo < mean && mean < hi);
        let (lo99, hi99) = bootstrap_mean_ci(&xs, 500, 0.99, &mut stream(1, 0));
        assert!(lo99 <= lo && hi99 >= hi);
    }

    #[test]
    fn quantile_interpolates() {
        let s = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile_sorted(&s, 0.0), 0.0);
        assert_eq!(quantile_sorted(&s, 1.0), 3.0);
        assert!((quantile_sorted(&s, 0.5) - 1.5).abs() < 1e-15);
    }
}
