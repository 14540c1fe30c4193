//! Lethality ladder across successive enclosures.
//!
//! Level `k` of the ladder is the two-strain model with lethalities
//! `(r^k α, r^{k+1} α)` and common `β`, `μ`, `λ`. When a host population is
//! replaced, the pathogen carried over is the lethal strain with probability
//! `ρ_k/(1 + ρ_k)`, where `ρ_k` is the limiting ratio at level `k`. The chain
//! climbs until the first level `k*` whose Malthusian parameter is negative;
//! from there on the epidemic cannot sustain itself.

mod chain;
mod sim;

pub use chain::{
    absorption_pgf, absorption_pgf_all, absorption_pgf_derivative, absorption_pmf, absorption_pmf_to_mass, build_chain,
    expected_absorption, expected_absorption_dense, MultistageChain,
};
pub use sim::{simulate_chain, ChainSample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::params::{positive, probability};
use crate::model::{ktype_spectrum, KTypeGenerator, TwoTypeParams};

/// Default search limit for `k*`.
pub const DEFAULT_K_CAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderParams {
    pub alpha0: f64,
    /// Lethality multiplier between neighbouring levels.
    pub r: f64,
    pub beta: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl LadderParams {
    /// Example ladder used throughout the documentation and tests.
    pub const fn example() -> Self {
        Self {
            alpha0: 0.5,
            r: 2.0,
            beta: 0.5,
            mu: 0.2,
            lambda: 6.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha0", self.alpha0)?;
        if !(self.r.is_finite() && self.r > 1.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: self.r,
                constraint: "must be > 1",
            });
        }
        probability("beta", self.beta)?;
        probability("mu", self.mu)?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                constraint: "must be >= 0",
            });
        }
        Ok(())
    }

    /// Lethalities `(r^k α, r^{k+1} α)` of level `k`.
    pub fn lethalities(&self, k: usize) -> (f64, f64) {
        let a = self.alpha0 * self.r.powi(k as i32);
        (a, a * self.r)
    }

    pub fn level_params(&self, k: usize) -> TwoTypeParams {
        let (alpha1, alpha2) = self.lethalities(k);
        TwoTypeParams {
            alpha1,
            alpha2,
            beta1: self.beta,
            beta2: self.beta,
            mu1: self.mu,
            mu2: self.mu,
            lambda: self.lambda,
        }
    }

    pub fn sigma_plus(&self, k: usize) -> f64 {
        let (a1, a2) = self.lethalities(k);
        sigma_plus_unchecked(a1, a2, self.beta, self.mu, self.lambda)
    }

    /// `ρ_k`, the limiting lethal-to-mild ratio at level `k`.
    pub fn rho(&self, k: usize) -> Result<f64> {
        let (a1, a2) = self.lethalities(k);
        ratio_common(a1, a2, self.beta, self.mu, self.lambda)
    }
}

fn sigma_plus_unchecked(a1: f64, a2: f64, beta: f64, mu: f64, lambda: f64) -> f64 {
    let bl = beta * lambda;
    0.5 * (2.0 * (1.0 - mu) * bl - a1 - a2 + ((a1 - a2).powi(2) + 4.0 * (mu * bl).powi(2)).sqrt())
}

/// Malthusian parameter of the two-strain model with common transmission
/// and mutation probabilities.
pub fn sigma_plus_common(a1: f64, a2: f64, beta: f64, mu: f64, lambda: f64) -> Result<f64> {
    positive("alpha1", a1)?;
    positive("alpha2", a2)?;
    probability("beta", beta)?;
    probability("mu", mu)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            constraint: "must be >= 0",
        });
    }
    Ok(sigma_plus_unchecked(a1, a2, beta, mu, lambda))
}

/// Limiting ratio with common `β`, `μ`: with `d = a2 - a1` and `δ = μβλ`,
/// `R = (Δ - d)/(2δ) = 2δ/(Δ + d)`, `Δ = sqrt(d² + 4δ²)`. The second form
/// avoids cancellation when `d ≫ δ`.
fn ratio_common(a1: f64, a2: f64, beta: f64, mu: f64, lambda: f64) -> Result<f64> {
    let delta = mu * beta * lambda;
    if delta <= 0.0 {
        return Err(Error::DegenerateMutation);
    }
    let d = a2 - a1;
    let gap = d.hypot(2.0 * delta);
    Ok(if d >= 0.0 {
        2.0 * delta / (gap + d)
    } else {
        (gap - d) / (2.0 * delta)
    })
}

/// `ρ_0, …, ρ_{k_max}`.
pub fn rho_sequence(lp: &LadderParams, k_max: usize) -> Result<Vec<f64>> {
    lp.validate()?;
    (0..=k_max).map(|k| lp.rho(k)).collect()
}

/// First level with `σ+ < 0`, by a linear scan. Returns `Ok(0)` when level
/// 0 is already subcritical.
pub fn find_kstar(lp: &LadderParams, k_cap: usize) -> Result<usize> {
    lp.validate()?;
    (0..=k_cap)
        .find(|&k| lp.sigma_plus(k) < 0.0)
        .ok_or(Error::NeverSubcritical(k_cap))
}

/// Same as [`find_kstar`], by doubling then bisection on the monotone
/// predicate `σ+(k) < 0`.
pub fn find_kstar_bisect(lp: &LadderParams, k_cap: usize) -> Result<usize> {
    lp.validate()?;
    let sub = |k: usize| lp.sigma_plus(k) < 0.0;
    if sub(0) {
        return Ok(0);
    }
    let mut lo = 0;
    let mut hi = 1;
    while !sub(hi.min(k_cap)) {
        if hi >= k_cap {
            return Err(Error::NeverSubcritical(k_cap));
        }
        lo = hi;
        hi *= 2;
    }
    hi = hi.min(k_cap);
    // sub(lo) false, sub(hi) true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if sub(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Drift of the two-sided chain at level `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanStep {
    pub k: usize,
    pub sigma_plus: f64,
    /// Long-run shares of lethalities `(r^{k-1} α, r^k α, r^{k+1} α)`.
    pub shares: [f64; 3],
    /// `π_3 - π_1`: expected move of the lethality level per enclosure.
    pub mean_step: f64,
}

/// Three-strain version of the ladder: the pathogen at level `k` can mutate
/// one rung down or up, with `μ` split evenly between the two directions.
/// Reports the sign of the expected level change for `k = 0..=k_max`.
pub fn mean_step_map(lp: &LadderParams, k_max: usize) -> Result<Vec<MeanStep>> {
    lp.validate()?;
    (0..=k_max)
        .map(|k| {
            let x = lp.alpha0 * lp.r.powi(k as i32 - 1);
            let gen = KTypeGenerator::lethality_ladder(x, lp.r, lp.beta, lp.mu, lp.lambda, 3)?;
            let s = ktype_spectrum(&gen)?;
            let shares = [s.shares[0], s.shares[1], s.shares[2]];
            Ok(MeanStep {
                k,
                sigma_plus: s.sigma_plus,
                shares,
                mean_step: shares[2] - shares[0],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_generator, limiting_ratio, spectrum};
    use proptest::prelude::*;

    #[test]
    fn sigma_plus_limits() {
        for (beta, lambda) in [(0.5, 6.0), (0.1, 2.0), (1.0, 0.3)] {
            let s = sigma_plus_unchecked(0.0, 0.0, beta, 0.3, lambda);
            assert!((s - beta * lambda).abs() < 1e-12);
        }
        let mut prev = f64::INFINITY;
        for a in [1.0, 10.0, 100.0, 1e4, 1e8] {
            let s = sigma_plus_common(a, 2.0 * a, 0.5, 0.2, 6.0).unwrap();
            assert!(s < prev);
            prev = s;
        }
        assert!(prev < -1e7);
    }

    #[test]
    fn rho_near_unit_multiplier_is_one() {
        let lp = LadderParams {
            r: 1.0001,
            ..LadderParams::example()
        };
        for rho in rho_sequence(&lp, 5).unwrap() {
            assert!((rho - 1.0).abs() < 1e-3, "{rho}");
        }
    }

    #[test]
    fn example_rho_strictly_decreasing() {
        let rho = rho_sequence(&LadderParams::example(), 3).unwrap();
        assert!(rho.windows(2).all(|w| w[1] < w[0]), "{rho:?}");
    }

    #[test]
    fn rho_matches_core_limiting_ratio() {
        let lp = LadderParams::example();
        for k in 0..8 {
            let direct = lp.rho(k).unwrap();
            let core = limiting_ratio(&lp.level_params(k)).unwrap();
            assert!(
                (direct - core).abs() <= 1e-12 * direct.max(1.0),
                "k={k}: {direct} vs {core}"
            );
        }
    }

    #[test]
    fn zero_mutation_has_no_ratio() {
        let lp = LadderParams {
            mu: 0.0,
            ..LadderParams::example()
        };
        assert_eq!(rho_sequence(&lp, 2), Err(Error::DegenerateMutation));
    }

    #[test]
    fn kstar_example() {
        let lp = LadderParams::example();
        let k = find_kstar(&lp, DEFAULT_K_CAP).unwrap();
        assert_eq!(k, find_kstar_bisect(&lp, DEFAULT_K_CAP).unwrap());
        assert!(k >= 1);
        assert!(lp.sigma_plus(k - 1) >= 0.0 && lp.sigma_plus(k) < 0.0);
        for j in k..k + 20 {
            assert!(lp.sigma_plus(j) < 0.0);
        }
    }

    #[test]
    fn kstar_edge_cases() {
        let lethal = LadderParams {
            alpha0: 100.0,
            ..LadderParams::example()
        };
        assert_eq!(find_kstar(&lethal, 10), Ok(0));
        assert_eq!(find_kstar_bisect(&lethal, 10), Ok(0));
        let slow = LadderParams {
            alpha0: 1e-9,
            ..LadderParams::example()
        };
        assert_eq!(find_kstar(&slow, 5), Err(Error::NeverSubcritical(5)));
        assert_eq!(find_kstar_bisect(&slow, 5), Err(Error::NeverSubcritical(5)));
        assert!(LadderParams {
            r: 1.0,
            ..LadderParams::example()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn mean_step_map_shape() {
        let map = mean_step_map(&LadderParams::example(), 4).unwrap();
        assert_eq!(map.len(), 5);
        for m in &map {
            assert!((m.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(m.shares.iter().all(|&p| p > 0.0));
        }
        // climbing the ladder shifts weight towards milder strains
        assert!(map.windows(2).all(|w| w[1].mean_step < w[0].mean_step));
    }

    fn arb_ladder() -> impl Strategy<Value = LadderParams> {
        (0.01f64..3.0, 1.05f64..4.0, 0.01f64..=1.0, 0.01f64..=1.0, 0.1f64..20.0).prop_map(
            |(alpha0, r, beta, mu, lambda)| LadderParams {
                alpha0,
                r,
                beta,
                mu,
                lambda,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn common_sigma_matches_core(a1 in 0.01f64..5.0, a2 in 0.01f64..5.0, beta in 0.0f64..=1.0,
                                     mu in 0.0f64..=1.0, lambda in 0.0f64..20.0) {
            let p = TwoTypeParams { alpha1: a1, alpha2: a2, beta1: beta, beta2: beta, mu1: mu, mu2: mu, lambda };
            let core = spectrum(&build_generator(&p).unwrap()).sigma_plus;
            let here = sigma_plus_common(a1, a2, beta, mu, lambda).unwrap();
            prop_assert!((core - here).abs() <= 1e-12 * (1.0 + core.abs()));
        }

        #[test]
        fn rho_and_sigma_decrease_with_level(lp in arb_ladder()) {
            for k in 0..6 {
                prop_assert!(lp.rho(k + 1).unwrap() < lp.rho(k).unwrap());
                prop_assert!(lp.sigma_plus(k + 1) < lp.sigma_plus(k));
            }
        }

        #[test]
        fn scan_and_bisection_agree(lp in arb_ladder()) {
            prop_assert_eq!(find_kstar(&lp, 200), find_kstar_bisect(&lp, 200));
        }
    }
}
