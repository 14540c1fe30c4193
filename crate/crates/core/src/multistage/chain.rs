use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{find_kstar, LadderParams, DEFAULT_K_CAP};
use crate::error::{Error, Result};

/// Enclosure chain on levels `0..k*` with `k*` absorbing. From level `k` the
/// chain stays with probability `1/(1 + ρ_k)` and climbs otherwise, so the
/// transient block `T` is upper bidiagonal and only the last level exits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistageChain {
    pub k_star: usize,
    pub rho: Vec<f64>,
    /// `p_{k,k}`.
    pub stay: Vec<f64>,
    /// `p_{k,k+1}`; the last entry is the exit probability into `k*`.
    pub advance: Vec<f64>,
}

impl MultistageChain {
    /// Chain with the given `ρ_0..ρ_{k*-1}`, all positive and finite.
    pub fn from_rho(rho: Vec<f64>) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::AlreadySubcritical);
        }
        for &x in &rho {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "rho",
                    value: x,
                    constraint: "must be positive and finite",
                });
            }
        }
        let stay = rho.iter().map(|x| 1.0 / (1.0 + x)).collect();
        let advance = rho.iter().map(|x| x / (1.0 + x)).collect();
        Ok(Self {
            k_star: rho.len(),
            rho,
            stay,
            advance,
        })
    }

    /// Transient block `T` (`k* × k*`).
    pub fn t_matrix(&self) -> DMatrix<f64> {
        let k = self.k_star;
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = self.stay[i];
            if i + 1 < k {
                t[(i, i + 1)] = self.advance[i];
            }
        }
        t
    }

    /// Exit vector `r̂`: one-step absorption probabilities.
    pub fn exit_vector(&self) -> DVector<f64> {
        let mut r = DVector::zeros(self.k_star);
        r[self.k_star - 1] = self.advance[self.k_star - 1];
        r
    }

    /// Full transition matrix `[[T, r̂ᵀ], [0, 1]]`.
    pub fn q_matrix(&self) -> DMatrix<f64> {
        let k = self.k_star;
        let mut q = DMatrix::zeros(k + 1, k + 1);
        q.view_mut((0, 0), (k, k)).copy_from(&self.t_matrix());
        q.view_mut((0, k), (k, 1)).copy_from(&self.exit_vector());
        q[(k, k)] = 1.0;
        q
    }

    /// Probability of absorbing in exactly `k*` steps: `Π p_{k,k+1}`.
    pub fn fastest_absorption_probability(&self) -> f64 {
        self.advance.iter().product()
    }
}

/// Chain of a lethality ladder. Errors with `AlreadySubcritical` when level
/// 0 is subcritical.
pub fn build_chain(lp: &LadderParams) -> Result<MultistageChain> {
    let k_star = find_kstar(lp, DEFAULT_K_CAP)?;
    if k_star == 0 {
        return Err(Error::AlreadySubcritical);
    }
    let rho = (0..k_star).map(|k| lp.rho(k)).collect::<Result<Vec<_>>>()?;
    MultistageChain::from_rho(rho)
}

/// `T x` for the bidiagonal block.
fn apply_t(c: &MultistageChain, x: &[f64]) -> Vec<f64> {
    let k = c.k_star;
    (0..k)
        .map(|i| c.stay[i] * x[i] + if i + 1 < k { c.advance[i] * x[i + 1] } else { 0.0 })
        .collect()
}

/// Solves `(I - zT) x = b` by back-substitution.
fn solve_shifted(c: &MultistageChain, z: f64, b: &[f64]) -> Result<Vec<f64>> {
    let k = c.k_star;
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let diag = 1.0 - z * c.stay[i];
        if diag == 0.0 {
            return Err(Error::Singular);
        }
        let upper = if i + 1 < k { z * c.advance[i] * x[i + 1] } else { 0.0 };
        x[i] = (b[i] + upper) / diag;
    }
    Ok(x)
}

/// `f(1..=n_max)`: probability that absorption from level 0 happens at step
/// `n`, `f(n) = (T^{n-1} r̂ᵀ)_0`.
pub fn absorption_pmf(c: &MultistageChain, n_max: usize) -> Vec<f64> {
    let mut x: Vec<f64> = c.exit_vector().iter().copied().collect();
    let mut f = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        f.push(x[0]);
        x = apply_t(c, &x);
    }
    f
}

/// Pmf extended until the missing mass drops below `tol` (or `n_cap` terms).
pub fn absorption_pmf_to_mass(c: &MultistageChain, tol: f64, n_cap: usize) -> Vec<f64> {
    let mut x: Vec<f64> = c.exit_vector().iter().copied().collect();
    let mut f = Vec::new();
    let mut mass = 0.0;
    while f.len() < n_cap && (f.len() < c.k_star || 1.0 - mass >= tol) {
        f.push(x[0]);
        mass += x[0];
        x = apply_t(c, &x);
    }
    f
}

fn check_z(z: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::InvalidParameter {
            name: "z",
            value: z,
            constraint: "must lie in [-1, 1]",
        });
    }
    Ok(())
}

/// Generating function of the absorption step from every starting level:
/// `f*_j(z) = z [(I - zT)⁻¹ r̂ᵀ]_j`.
pub fn absorption_pgf_all(c: &MultistageChain, z: f64) -> Result<Vec<f64>> {
    check_z(z)?;
    let r: Vec<f64> = c.exit_vector().iter().copied().collect();
    Ok(solve_shifted(c, z, &r)?.into_iter().map(|x| z * x).collect())
}

/// `f*(z)` from level 0.
pub fn absorption_pgf(c: &MultistageChain, z: f64) -> Result<f64> {
    Ok(absorption_pgf_all(c, z)?[0])
}

/// `d f*(z)/dz` from level 0: with `x = (I - zT)⁻¹ r̂ᵀ`, the derivative of
/// `z x` is `x + z (I - zT)⁻¹ T x`. At `z = 1` this is the mean step.
pub fn absorption_pgf_derivative(c: &MultistageChain, z: f64) -> Result<f64> {
    check_z(z)?;
    let r: Vec<f64> = c.exit_vector().iter().copied().collect();
    let x = solve_shifted(c, z, &r)?;
    let y = solve_shifted(c, z, &apply_t(c, &x))?;
    Ok(x[0] + z * y[0])
}

/// `E(T | X_0 = j)` for `j = 0..k*`, solving `(I - T) m = 1`.
pub fn expected_absorption(c: &MultistageChain) -> Vec<f64> {
    let ones = vec![1.0; c.k_star];
    solve_shifted(c, 1.0, &ones).expect("every advance probability is positive")
}

/// Dense solve of `(I - T) m = 1` for an arbitrary substochastic `T`.
pub fn expected_absorption_dense(t: &DMatrix<f64>) -> Result<DVector<f64>> {
    if !t.is_square() {
        return Err(Error::Domain("transient block must be square".into()));
    }
    let k = t.nrows();
    let lu = (DMatrix::identity(k, k) - t).lu();
    lu.solve(&DVector::from_element(k, 1.0)).ok_or(Error::Singular)
}
