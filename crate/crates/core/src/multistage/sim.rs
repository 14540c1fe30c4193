use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MultistageChain;
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::stats::Welford;

/// Empirical distribution of the absorption step from level 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    pub runs: usize,
    /// `counts[n - 1]`: runs absorbed at step `n`.
    pub counts: Vec<u64>,
    pub mean: f64,
    pub se: f64,
    pub min_step: usize,
}

impl ChainSample {
    /// Empirical `P(step = n)` with its binomial standard error.
    pub fn frequency(&self, n: usize) -> (f64, f64) {
        let c = n.checked_sub(1).and_then(|i| self.counts.get(i)).copied().unwrap_or(0);
        let p = c as f64 / self.runs as f64;
        (p, (p * (1.0 - p) / self.runs as f64).sqrt())
    }
}

/// Simulates the chain step by step from level 0 until absorption. Run `i`
/// draws from `stream(seed, i)`.
pub fn simulate_chain(c: &MultistageChain, runs: usize, seed: u64) -> Result<ChainSample> {
    if runs == 0 {
        return Err(Error::Domain("runs must be >= 1".into()));
    }
    let steps: Vec<usize> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let (mut level, mut n) = (0, 0);
            while level < c.k_star {
                n += 1;
                if rng.random::<f64>() < c.advance[level] {
                    level += 1;
                }
            }
            n
        })
        .collect();
    let max = steps.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u64; max];
    let mut w = Welford::new();
    for &n in &steps {
        counts[n - 1] += 1;
        w.push(n as f64);
    }
    let e = w.estimate();
    Ok(ChainSample {
        runs,
        counts,
        mean: e.mean,
        se: e.se,
        min_step: steps.iter().copied().min().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multistage::{build_chain, expected_absorption, LadderParams};

    #[test]
    fn fair_single_level_mean_two() {
        let c = MultistageChain::from_rho(vec![1.0]).unwrap();
        let s = simulate_chain(&c, 100_000, 1).unwrap();
        assert!((s.mean - 2.0).abs() < 3.0 * s.se, "{} ± {}", s.mean, s.se);
        assert_eq!(s.counts.iter().sum::<u64>(), 100_000);
    }

    #[test]
    fn ladder_mean_matches_analytic() {
        let c = build_chain(&LadderParams::example()).unwrap();
        let s = simulate_chain(&c, 100_000, 2).unwrap();
        let m = expected_absorption(&c)[0];
        assert!((s.mean - m).abs() < 3.0 * s.se, "{} ± {} vs {m}", s.mean, s.se);
        assert!(s.min_step >= c.k_star);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = MultistageChain::from_rho(vec![2.0, 1.0, 0.5]).unwrap();
        assert_eq!(
            simulate_chain(&c, 1000, 3).unwrap(),
            simulate_chain(&c, 1000, 3).unwrap()
        );
        assert_ne!(
            simulate_chain(&c, 1000, 3).unwrap(),
            simulate_chain(&c, 1000, 4).unwrap()
        );
    }
}
