use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::params::{positive, probability, TwoTypeParams};
use super::spectrum::build_generator;
use crate::error::{Error, Result};

/// Largest generator handled by the dense eigensolver.
pub const MAX_TYPES: usize = 16;

/// Lifetime rate and offspring law of one type in a K-type process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSpec {
    pub lifetime_rate: f64,
    /// `(offspring counts per type, probability)`; probabilities sum to 1.
    pub offspring: Vec<(Vec<u32>, f64)>,
}

/// Mean-semigroup generator of a K-type Markov branching process:
/// `A_ij = a_i (m_ij - [i == j])`, `m_ij` the mean number of type-`j`
/// children of a type-`i` particle.
#[derive(Debug, Clone, PartialEq)]
pub struct KTypeGenerator {
    matrix: DMatrix<f64>,
}

impl KTypeGenerator {
    pub fn from_offspring(types: &[TypeSpec]) -> Result<Self> {
        let k = types.len();
        let mut a = DMatrix::zeros(k, k);
        for (i, spec) in types.iter().enumerate() {
            positive("lifetime_rate", spec.lifetime_rate)?;
            let total: f64 = spec.offspring.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "offspring",
                    value: total,
                    constraint: "probabilities must sum to 1",
                });
            }
            for (counts, p) in &spec.offspring {
                probability("offspring probability", *p)?;
                if counts.len() != k {
                    return Err(Error::Domain(format!(
                        "offspring vector of length {} for a {k}-type process",
                        counts.len()
                    )));
                }
                for (j, &c) in counts.iter().enumerate() {
                    a[(i, j)] += spec.lifetime_rate * p * f64::from(c);
                }
            }
            a[(i, i)] -= spec.lifetime_rate;
        }
        Self::from_matrix(a)
    }

    /// Wraps an explicit rate matrix. Off-diagonal entries must be `>= 0`.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::Domain("generator must be square with K >= 2".into()));
        }
        for ((i, j), &v) in matrix
            .iter()
            .enumerate()
            .map(|(n, v)| ((n % matrix.nrows(), n / matrix.nrows()), v))
        {
            if !v.is_finite() || (i != j && v < 0.0) {
                return Err(Error::InvalidParameter {
                    name: "generator entry",
                    value: v,
                    constraint: "must be finite, off-diagonal entries >= 0",
                });
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_two_type(params: &TwoTypeParams) -> Result<Self> {
        let g = build_generator(params)?;
        Self::from_matrix(DMatrix::from_row_slice(2, 2, &[g.gamma1, g.delta1, g.delta2, g.gamma2]))
    }

    /// Lethality ladder `(x, r x, ..., r^{K-1} x)` with common `beta`, `mu`
    /// and `lambda`. A transmitted pathogen mutates with probability `mu`,
    /// split evenly between the two neighbouring rungs; the end rungs send
    /// all of it to their single neighbour.
    pub fn lethality_ladder(x: f64, r: f64, beta: f64, mu: f64, lambda: f64, k: usize) -> Result<Self> {
        positive("x", x)?;
        if !(r.is_finite() && r > 1.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                constraint: "must be > 1",
            });
        }
        probability("beta", beta)?;
        probability("mu", mu)?;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                constraint: "must be >= 0",
            });
        }
        if k < 2 {
            return Err(Error::Domain("ladder needs at least two rungs".into()));
        }
        let transmit = beta * lambda;
        let mut a = DMatrix::zeros(k, k);
        for i in 0..k {
            let alpha = x * r.powi(i as i32);
            a[(i, i)] = (1.0 - mu) * transmit - alpha;
            let neighbours: Vec<usize> = [i.checked_sub(1), (i + 1 < k).then_some(i + 1)]
                .into_iter()
                .flatten()
                .collect();
            let share = mu * transmit / neighbours.len() as f64;
            for j in neighbours {
                a[(i, j)] = share;
            }
        }
        Self::from_matrix(a)
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Every type reaches every other through positive off-diagonal rates.
    pub fn is_irreducible(&self) -> bool {
        let k = self.size();
        let reach_all = |transpose: bool| {
            let mut seen = vec![false; k];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for (j, s) in seen.iter_mut().enumerate() {
                    let v = if transpose {
                        self.matrix[(j, i)]
                    } else {
                        self.matrix[(i, j)]
                    };
                    if i != j && v > 0.0 && !*s {
                        *s = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach_all(false) && reach_all(true)
    }

    /// Eigenvalue of maximal real part. Defined for reducible generators too.
    pub fn malthusian_parameter(&self) -> Result<f64> {
        if self.size() > MAX_TYPES {
            return Err(Error::TooManyTypes(self.size()));
        }
        Ok(self
            .matrix
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Perron root and normalised left eigenvector (long-run type shares).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSpectrum {
    pub sigma_plus: f64,
    pub shares: Vec<f64>,
}

pub fn ktype_spectrum(gen: &KTypeGenerator) -> Result<KSpectrum> {
    if gen.size() > MAX_TYPES {
        return Err(Error::TooManyTypes(gen.size()));
    }
    if !gen.is_irreducible() {
        return Err(Error::ReducibleGenerator);
    }
    let sigma = gen.malthusian_parameter()?;
    let k = gen.size();
    // Left null vector of (A - sigma I): right singular vector of the
    // smallest singular value of (A - sigma I)^T.
    let shifted = gen.matrix.transpose() - DMatrix::identity(k, k) * sigma;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::Singular)?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::Singular)?;
    let mut v: DVector<f64> = v_t.row(idx).transpose();
    let sum = v.sum();
    if sum == 0.0 {
        return Err(Error::Singular);
    }
    v /= sum;
    // Perron vector of an irreducible quasi-positive matrix is positive;
    // clip round-off below zero.
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let sum = v.sum();
    Ok(KSpectrum {
        sigma_plus: sigma,
        shares: v.iter().map(|x| x / sum).collect(),
    })
}
