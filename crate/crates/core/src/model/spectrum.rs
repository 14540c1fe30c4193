use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::params::TwoTypeParams;
use crate::error::{Error, Result};

/// Infinitesimal generator of the mean semigroup,
/// `A = [[gamma1, delta1], [delta2, gamma2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl Generator {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.gamma1, self.delta1, self.delta2, self.gamma2)
    }
}

/// `gamma_k = (1 - mu_k) beta_k lambda - alpha_k`, `delta_k = mu_k beta_k lambda`.
pub fn build_generator(params: &TwoTypeParams) -> Result<Generator> {
    params.validate()?;
    let p = params;
    Ok(Generator {
        gamma1: (1.0 - p.mu1) * p.beta1 * p.lambda - p.alpha1,
        gamma2: (1.0 - p.mu2) * p.beta2 * p.lambda - p.alpha2,
        delta1: p.mu1 * p.beta1 * p.lambda,
        delta2: p.mu2 * p.beta2 * p.lambda,
    })
}

/// Right eigenvector slopes `u±`: the eigenvectors are `(u±, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvectors {
    pub u_plus: f64,
    pub u_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    /// `sigma_plus - sigma_minus`.
    pub gap: f64,
    /// `None` when `delta2 = 0`.
    pub slopes: Option<Eigenvectors>,
    /// Left eigenvector of `sigma_plus`, non-negative and summing to 1.
    pub left: [f64; 2],
}

impl Spectrum {
    pub fn eigenvectors(&self) -> Result<Eigenvectors> {
        self.slopes.ok_or(Error::DegenerateMutation)
    }
}

pub fn spectrum(gen: &Generator) -> Spectrum {
    let Generator {
        gamma1,
        gamma2,
        delta1,
        delta2,
    } = *gen;
    let diff = gamma1 - gamma2;
    let gap = diff.hypot(2.0 * (delta1 * delta2).sqrt());
    let sigma_plus = 0.5 * (gamma1 + gamma2 + gap);
    let sigma_minus = 0.5 * (gamma1 + gamma2 - gap);

    // u+ u- = -delta1/delta2: take whichever root has no cancellation and
    // recover the other from the product.
    let slopes = (delta2 > 0.0).then(|| {
        if diff >= 0.0 {
            let u_plus = (diff + gap) / (2.0 * delta2);
            let u_minus = if diff + gap > 0.0 {
                -2.0 * delta1 / (diff + gap)
            } else {
                0.0
            };
            Eigenvectors { u_plus, u_minus }
        } else {
            let u_minus = (diff - gap) / (2.0 * delta2);
            Eigenvectors {
                u_plus: 2.0 * delta1 / (gap - diff),
                u_minus,
            }
        }
    });

    let raw = if delta2 > 0.0 {
        // (delta2, sigma+ - gamma1), sigma+ - gamma1 = (gap - diff)/2 >= 0
        [delta2, 0.5 * (gap - diff)]
    } else if delta1 > 0.0 {
        [0.5 * (gap + diff), delta1]
    } else if gamma1 >= gamma2 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let total = raw[0] + raw[1];
    let left = if total > 0.0 {
        [raw[0] / total, raw[1] / total]
    } else {
        // gamma1 == gamma2 with a single zero off-diagonal: v = e_j of the
        // column that receives no transfer.
        if delta2 > 0.0 {
            [0.0, 1.0]
        } else {
            [1.0, 0.0]
        }
    };

    Spectrum {
        sigma_plus,
        sigma_minus,
        gap,
        slopes,
        left,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{build_offspring_table, Strain};
    use nalgebra::Vector2;
    use proptest::prelude::*;

    fn reference_gen(lambda: f64) -> Generator {
        build_generator(&TwoTypeParams::reference(lambda)).unwrap()
    }

    #[test]
    fn reference_generator_entries() {
        let g = reference_gen(2.0);
        assert!((g.gamma1 + 0.02).abs() < 1e-15);
        assert!((g.gamma2 + 0.54).abs() < 1e-15);
        assert!((g.delta1 - 0.12).abs() < 1e-15);
        assert!((g.delta2 - 0.24).abs() < 1e-15);
    }

    #[test]
    fn generator_matches_offspring_means() {
        // A_ij = a_i (E[children of type j] - [i == j]), the h -> 0 limit of (M(h) - I)/h.
        let p = TwoTypeParams::reference(2.0);
        let t = build_offspring_table(&p).unwrap();
        let g = build_generator(&p).unwrap().matrix();
        for i in Strain::BOTH {
            for j in Strain::BOTH {
                let kron = if i == j { 1.0 } else { 0.0 };
                let a = t.lifetime_rate[i.index()] * (t.mean_offspring(i, j) - kron);
                assert!((a - g[(i.index(), j.index())]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn no_encounters_and_no_mutation() {
        let g = reference_gen(0.0);
        assert_eq!((g.gamma1, g.gamma2, g.delta1, g.delta2), (-0.5, -1.5, 0.0, 0.0));
        let p = TwoTypeParams {
            mu1: 0.0,
            mu2: 0.0,
            ..TwoTypeParams::reference(3.0)
        };
        let g = build_generator(&p).unwrap();
        assert_eq!((g.delta1, g.delta2), (0.0, 0.0));
    }

    #[test]
    fn reference_spectrum_is_supercritical() {
        let s = spectrum(&reference_gen(2.0));
        let expected_gap = (0.52f64 * 0.52 + 4.0 * 0.12 * 0.24).sqrt();
        assert!((s.gap - expected_gap).abs() < 1e-14);
        assert!((s.gap - 0.62097).abs() < 1e-5);
        assert!((s.sigma_plus - 0.03049).abs() < 1e-5);
        assert!(s.sigma_plus > 0.0);
    }

    #[test]
    fn symmetric_generator() {
        let s = spectrum(&Generator {
            gamma1: -0.3,
            gamma2: -0.3,
            delta1: 0.7,
            delta2: 0.7,
        });
        assert!((s.sigma_plus - 0.4).abs() < 1e-15);
        assert!((s.sigma_minus + 1.0).abs() < 1e-15);
        let e = s.eigenvectors().unwrap();
        assert!((e.u_plus - 1.0).abs() < 1e-15);
        assert!((e.u_minus + 1.0).abs() < 1e-15);
        assert!((s.left[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn decoupled_gap_is_gamma_difference() {
        let s = spectrum(&Generator {
            gamma1: 0.2,
            gamma2: -0.5,
            delta1: 0.3,
            delta2: 0.0,
        });
        assert!((s.gap - 0.7).abs() < 1e-15);
        assert_eq!(s.eigenvectors(), Err(Error::DegenerateMutation));
        let s = spectrum(&Generator {
            gamma1: 0.2,
            gamma2: -0.5,
            delta1: 0.0,
            delta2: 0.4,
        });
        assert!((s.gap - 0.7).abs() < 1e-15);
        assert!(s.slopes.is_some());
    }

    fn arb_gen() -> impl Strategy<Value = Generator> {
        (-3.0f64..3.0, -3.0f64..3.0, 0.0f64..2.0, 1e-3f64..2.0).prop_map(|(g1, g2, d1, d2)| Generator {
            gamma1: g1,
            gamma2: g2,
            delta1: d1,
            delta2: d2,
        })
    }

    proptest! {
        #[test]
        fn eigen_residuals(g in arb_gen()) {
            let s = spectrum(&g);
            let a = g.matrix();
            let scale = a.abs().max().max(s.sigma_plus.abs()).max(1.0);
            let disc = (g.gamma1 - g.gamma2).powi(2) + 4.0 * g.delta1 * g.delta2;
            prop_assert!((s.gap * s.gap - disc).abs() <= 1e-10 * disc.max(1e-300) + 1e-14);
            prop_assert!(s.sigma_plus >= s.sigma_minus);
            let e = s.eigenvectors().unwrap();
            for (u, sigma) in [(e.u_plus, s.sigma_plus), (e.u_minus, s.sigma_minus)] {
                let v = Vector2::new(u, 1.0);
                let r = a * v - v * sigma;
                prop_assert!(r.amax() <= 1e-9 * scale * v.amax());
            }
            prop_assert!(e.u_plus > 0.0 || g.delta1 == 0.0);
            prop_assert!(e.u_minus <= 0.0);
            let v = nalgebra::RowVector2::new(s.left[0], s.left[1]);
            let r = v * a - v * s.sigma_plus;
            prop_assert!(r.amax() <= 1e-9 * scale);
            prop_assert!(s.left[0] >= 0.0 && s.left[1] >= 0.0);
            prop_assert!((s.left[0] + s.left[1] - 1.0).abs() < 1e-12);
        }
    }
}
