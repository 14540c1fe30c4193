use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::params::TwoTypeParams;
use super::spectrum::{build_generator, spectrum, Generator};
use crate::error::{Error, Result};

/// `|sigma+|` below this is classified as critical.
pub const CRITICAL_BAND: f64 = 1e-12;

/// Mean matrix `M(t)`, `M_ij(t) = E[Z_j(t) | Z(0) = e_i]`.
///
/// With mutation in both directions this is the eigendecomposition closed
/// form. If either off-diagonal rate vanishes the generator is triangular
/// and the exponential is written out directly.
pub fn mean_matrix(params: &TwoTypeParams, t: f64) -> Result<Matrix2<f64>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            constraint: "must be finite and >= 0",
        });
    }
    let gen = build_generator(params)?;
    Ok(mean_matrix_of(&gen, t))
}

pub(crate) fn mean_matrix_of(gen: &Generator, t: f64) -> Matrix2<f64> {
    let s = spectrum(gen);
    if gen.delta1 > 0.0 && gen.delta2 > 0.0 {
        let e = s.eigenvectors().expect("delta2 > 0");
        let (up, um) = (e.u_plus, e.u_minus);
        let ep = (s.sigma_plus * t).exp();
        let em = (s.sigma_minus * t).exp();
        // e+ - e- without cancellation for small gap * t
        let d = ep * -(-s.gap * t).exp_m1();
        let scale = 1.0 / (up - um);
        Matrix2::new(
            scale * (up * ep - um * em),
            -scale * up * um * d,
            scale * d,
            scale * (up * em - um * ep),
        )
    } else {
        let e1 = (gen.gamma1 * t).exp();
        let e2 = (gen.gamma2 * t).exp();
        let cross = divided_exp(gen.gamma1, gen.gamma2, t);
        Matrix2::new(e1, gen.delta1 * cross, gen.delta2 * cross, e2)
    }
}

/// `(e^{a t} - e^{b t}) / (a - b)`, continuous at `a = b`.
fn divided_exp(a: f64, b: f64, t: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let w = hi - lo;
    if w * t == 0.0 {
        t * (hi * t).exp()
    } else {
        (hi * t).exp() * -(-w * t).exp_m1() / w
    }
}

/// Mean strain ratios from a single ancestor: `R1(t) = M12/M11` (strain 1
/// ancestor) and `R2(t) = M22/M21` (strain 2 ancestor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPair {
    pub r1: f64,
    /// `+inf` at `t = 0`.
    pub r2: f64,
}

pub fn ratio_trajectories(params: &TwoTypeParams, t: f64) -> Result<RatioPair> {
    let gen = build_generator(params)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            constraint: "must be finite and >= 0",
        });
    }
    let s = spectrum(&gen);
    let e = s.eigenvectors()?;
    if t == 0.0 {
        return Ok(RatioPair {
            r1: 0.0,
            r2: f64::INFINITY,
        });
    }
    if s.gap > 0.0 {
        // Divide M through by e^{sigma+ t}; x = e^{-gap t}.
        let x = (-s.gap * t).exp();
        let one_minus_x = -(-s.gap * t).exp_m1();
        let r1 = gen.delta1 / gen.delta2 * one_minus_x / (e.u_plus - e.u_minus * x);
        let r2 = (e.u_plus * x - e.u_minus) / one_minus_x;
        Ok(RatioPair { r1, r2 })
    } else {
        let m = mean_matrix_of(&gen, t);
        Ok(RatioPair {
            r1: m[(0, 1)] / m[(0, 0)],
            r2: m[(1, 1)] / m[(1, 0)],
        })
    }
}

/// Limiting ratio of mean strain-2 to strain-1 counts,
/// `R = |u-| = (gamma2 - gamma1 + gap) / (2 delta2)`.
pub fn limiting_ratio(params: &TwoTypeParams) -> Result<f64> {
    let gen = build_generator(params)?;
    let e = spectrum(&gen).eigenvectors()?;
    Ok(-e.u_minus)
}

/// Partial derivatives of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivities {
    pub d_lambda: f64,
    pub d_alpha1: f64,
    pub d_alpha2: f64,
}

/// Closed-form derivatives of `R`.
///
/// With `gamma2 - gamma1 + gap = 2 delta2 R`:
/// `dR/dalpha1 = (1 - (gamma1 - gamma2)/gap) / (2 delta2) = R / gap`,
/// `dR/dalpha2 = -dR/dalpha1`, and, since `R` is invariant under
/// `(alpha, lambda) -> (c alpha, c lambda)`,
/// `dR/dlambda = (alpha2 - alpha1)(gamma2 - gamma1 + gap) / (2 delta2 gap lambda)`.
pub fn sensitivities(params: &TwoTypeParams) -> Result<Sensitivities> {
    let gen = build_generator(params)?;
    let s = spectrum(&gen);
    let r = -s.eigenvectors()?.u_minus;
    if s.gap <= 0.0 {
        return Err(Error::SingularSensitivity);
    }
    let d_alpha1 = r / s.gap;
    Ok(Sensitivities {
        d_lambda: (params.alpha2 - params.alpha1) * r / (s.gap * params.lambda),
        d_alpha1,
        d_alpha2: -d_alpha1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Criticality {
    Supercritical,
    Critical,
    Subcritical,
}

pub fn classify(params: &TwoTypeParams) -> Result<Criticality> {
    classify_with_band(params, CRITICAL_BAND)
}

pub fn classify_with_band(params: &TwoTypeParams, band: f64) -> Result<Criticality> {
    let sigma = spectrum(&build_generator(params)?).sigma_plus;
    Ok(if sigma.abs() < band {
        Criticality::Critical
    } else if sigma > 0.0 {
        Criticality::Supercritical
    } else {
        Criticality::Subcritical
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: truncated power series of `exp(tA)`, stopped once
    /// the term norm drops below 1e-16 relative to the partial sum.
    pub(crate) fn series_exp(a: &Matrix2<f64>, t: f64) -> Matrix2<f64> {
        // Scale and square keeps the series short and well conditioned.
        let norm = a.abs().row_sum().max() * t;
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let at = a * (t / f64::from(2u32.pow(squarings)));
        let mut sum = Matrix2::identity();
        let mut term = Matrix2::identity();
        for k in 1..200 {
            term = term * at / k as f64;
            sum += term;
            if term.amax() < 1e-16 * sum.amax() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }

    fn rel_close(a: &Matrix2<f64>, b: &Matrix2<f64>, tol: f64) -> bool {
        a.iter()
            .zip(b.iter())
            .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-300))
    }

    #[test]
    fn identity_at_zero() {
        for p in [
            TwoTypeParams::reference(2.0),
            TwoTypeParams {
                mu2: 0.0,
                ..TwoTypeParams::reference(2.0)
            },
        ] {
            assert_eq!(mean_matrix(&p, 0.0).unwrap(), Matrix2::identity());
        }
    }

    #[test]
    fn semigroup_reference() {
        let p = TwoTypeParams::reference(2.0);
        let m = |t| mean_matrix(&p, t).unwrap();
        let lhs = m(1.0);
        let rhs = m(0.3) * m(0.7);
        assert!(rel_close(&lhs, &rhs, 1e-9));
    }

    #[test]
    fn matches_series_at_t5() {
        let p = TwoTypeParams::reference(2.0);
        let a = build_generator(&p).unwrap().matrix();
        assert!(rel_close(&mean_matrix(&p, 5.0).unwrap(), &series_exp(&a, 5.0), 1e-9));
    }

    #[test]
    fn triangular_regimes_match_series() {
        for p in [
            TwoTypeParams {
                mu2: 0.0,
                ..TwoTypeParams::reference(2.0)
            },
            TwoTypeParams {
                mu1: 0.0,
                ..TwoTypeParams::reference(2.0)
            },
            TwoTypeParams {
                mu1: 0.0,
                mu2: 0.0,
                ..TwoTypeParams::reference(2.0)
            },
            TwoTypeParams::reference(0.0),
        ] {
            let a = build_generator(&p).unwrap().matrix();
            for t in [0.1, 1.0, 5.0] {
                let m = mean_matrix(&p, t).unwrap();
                let s = series_exp(&a, t);
                assert!((m - s).amax() <= 1e-9 * s.amax(), "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn equal_diagonal_triangular() {
        let g = Generator {
            gamma1: -0.4,
            gamma2: -0.4,
            delta1: 0.3,
            delta2: 0.0,
        };
        let m = mean_matrix_of(&g, 2.0);
        assert!((m[(0, 1)] - 0.3 * 2.0 * (-0.8f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_time() {
        assert!(mean_matrix(&TwoTypeParams::reference(2.0), -1.0).is_err());
    }

    #[test]
    fn ratios_at_origin() {
        let r = ratio_trajectories(&TwoTypeParams::reference(2.0), 0.0).unwrap();
        assert_eq!(r.r1, 0.0);
        assert!(r.r2.is_infinite());
    }

    #[test]
    fn ratios_converge_to_limit() {
        let p = TwoTypeParams::reference(6.0);
        let gap = spectrum(&build_generator(&p).unwrap()).gap;
        let r = limiting_ratio(&p).unwrap();
        let pair = ratio_trajectories(&p, 20.0).unwrap();
        let scale = (-gap * 20.0).exp() * 10.0 * r;
        assert!((pair.r1 - r).abs() <= scale);
        assert!((pair.r2 - r).abs() <= scale);
        assert!((r - 1.076).abs() < 5e-4);
    }

    #[test]
    fn ratios_monotone_on_grid() {
        let p = TwoTypeParams::reference(2.0);
        let at = |t| ratio_trajectories(&p, t).unwrap();
        let (a, b, c) = (at(1.0), at(2.0), at(4.0));
        assert!(a.r1 < b.r1 && b.r1 < c.r1);
        assert!(a.r2 > b.r2 && b.r2 > c.r2);
        assert!(c.r1 < c.r2);
    }

    #[test]
    fn ratios_agree_with_mean_matrix() {
        let p = TwoTypeParams::reference(10.0);
        for t in [0.05, 0.5, 3.0] {
            let m = mean_matrix(&p, t).unwrap();
            let r = ratio_trajectories(&p, t).unwrap();
            assert!((r.r1 - m[(0, 1)] / m[(0, 0)]).abs() < 1e-12 * r.r1);
            assert!((r.r2 - m[(1, 1)] / m[(1, 0)]).abs() < 1e-10 * r.r2);
        }
    }

    #[test]
    fn ratio_requires_back_mutation() {
        let p = TwoTypeParams {
            mu2: 0.0,
            ..TwoTypeParams::reference(2.0)
        };
        assert_eq!(ratio_trajectories(&p, 1.0), Err(Error::DegenerateMutation));
        assert_eq!(limiting_ratio(&p), Err(Error::DegenerateMutation));
        assert_eq!(
            limiting_ratio(&TwoTypeParams::reference(0.0)),
            Err(Error::DegenerateMutation)
        );
    }

    #[test]
    fn reference_limiting_ratios() {
        for (lambda, expected) in [(2.0, 0.210), (6.0, 1.076), (10.0, 1.500), (14.0, 1.699)] {
            let r = limiting_ratio(&TwoTypeParams::reference(lambda)).unwrap();
            assert!((r - expected).abs() < 5e-4, "lambda={lambda}: {r}");
        }
        let r10 = limiting_ratio(&TwoTypeParams::reference(10.0)).unwrap();
        assert!((r10 - 1.5).abs() < 1e-14);
    }

    #[test]
    fn full_symmetry_gives_unit_ratio() {
        let p = TwoTypeParams {
            alpha1: 0.8,
            alpha2: 0.8,
            beta1: 0.4,
            beta2: 0.4,
            mu1: 0.3,
            mu2: 0.3,
            lambda: 5.0,
        };
        assert!((limiting_ratio(&p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_lethality_ratio_ignores_density() {
        let p = TwoTypeParams {
            alpha2: 0.5,
            ..TwoTypeParams::reference(3.0)
        };
        let r1 = limiting_ratio(&p).unwrap();
        let r2 = limiting_ratio(&p.with_lambda(6.0)).unwrap();
        assert!((r1 - r2).abs() < 1e-12);
        assert_eq!(sensitivities(&p).unwrap().d_lambda, 0.0);
    }

    pub(crate) fn central_difference(p: &TwoTypeParams, field: &str, h: f64) -> f64 {
        let mut up = *p;
        let mut down = *p;
        *up.field_mut(field).unwrap() += h;
        *down.field_mut(field).unwrap() -= h;
        (limiting_ratio(&up).unwrap() - limiting_ratio(&down).unwrap()) / (2.0 * h)
    }

    #[test]
    fn sensitivities_match_finite_differences() {
        let p = TwoTypeParams::reference(6.0);
        let s = sensitivities(&p).unwrap();
        assert!(s.d_lambda > 0.0);
        for (field, analytic) in [("lambda", s.d_lambda), ("alpha1", s.d_alpha1), ("alpha2", s.d_alpha2)] {
            let fd = central_difference(&p, field, 1e-5);
            assert!(
                (fd - analytic).abs() <= 1e-5 * analytic.abs(),
                "{field}: {fd} vs {analytic}"
            );
        }
        assert_eq!(s.d_alpha2, -s.d_alpha1);
        // R rises with the lethality of strain 1 and falls with that of strain 2.
        assert!(s.d_alpha1 > 0.0 && s.d_alpha2 < 0.0);
    }

    #[test]
    fn classification() {
        assert_eq!(
            classify(&TwoTypeParams::reference(2.0)).unwrap(),
            Criticality::Supercritical
        );
        assert_eq!(
            classify(&TwoTypeParams::reference(0.0)).unwrap(),
            Criticality::Subcritical
        );
        let p = TwoTypeParams {
            beta1: 0.0,
            beta2: 0.0,
            ..TwoTypeParams::reference(5.0)
        };
        assert_eq!(classify(&p).unwrap(), Criticality::Subcritical);
        // sigma+ = beta*lambda - alpha = 0 exactly when strains coincide
        let p = TwoTypeParams {
            alpha1: 1.0,
            alpha2: 1.0,
            beta1: 0.5,
            beta2: 0.5,
            mu1: 0.1,
            mu2: 0.1,
            lambda: 2.0,
        };
        assert_eq!(classify(&p).unwrap(), Criticality::Critical);
        assert_eq!(
            classify_with_band(&TwoTypeParams::reference(2.0), 0.1).unwrap(),
            Criticality::Critical
        );
    }

    fn arb_mutating() -> impl Strategy<Value = TwoTypeParams> {
        (
            0.05f64..3.0,
            0.05f64..3.0,
            0.05f64..1.0,
            0.05f64..1.0,
            0.02f64..1.0,
            0.02f64..1.0,
            0.1f64..8.0,
        )
            .prop_map(|(alpha1, alpha2, beta1, beta2, mu1, mu2, lambda)| TwoTypeParams {
                alpha1,
                alpha2,
                beta1,
                beta2,
                mu1,
                mu2,
                lambda,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn closed_form_matches_series(p in arb_mutating(), t in 0.0f64..10.0) {
            let a = build_generator(&p).unwrap().matrix();
            prop_assert!(rel_close(&mean_matrix(&p, t).unwrap(), &series_exp(&a, t), 1e-9));
        }

        #[test]
        fn semigroup(p in arb_mutating(), s in 0.0f64..5.0, t in 0.0f64..5.0) {
            let m = |t| mean_matrix(&p, t).unwrap();
            let lhs = m(s + t);
            let diff = (lhs - m(s) * m(t)).abs().row_sum().max();
            prop_assert!(diff < 1e-9 * lhs.abs().row_sum().max());
        }

        #[test]
        fn ratio_monotonicity(p in arb_mutating(), t0 in 0.01f64..3.0, dt in 0.01f64..3.0) {
            let a = ratio_trajectories(&p, t0).unwrap();
            let b = ratio_trajectories(&p, t0 + dt).unwrap();
            prop_assert!(a.r1 < b.r1);
            prop_assert!(a.r2 > b.r2);
            prop_assert!(b.r1 < b.r2);
        }

        #[test]
        fn density_favours_lethal_strain(p in arb_mutating(), l1 in 0.1f64..10.0, dl in 0.05f64..10.0) {
            prop_assume!(p.alpha2 > p.alpha1);
            let r1 = limiting_ratio(&p.with_lambda(l1)).unwrap();
            let r2 = limiting_ratio(&p.with_lambda(l1 + dl)).unwrap();
            prop_assert!(r1 < r2);
            prop_assert!(sensitivities(&p).unwrap().d_lambda > 0.0);
        }

        #[test]
        fn sensitivities_vs_finite_differences(p in arb_mutating()) {
            let s = sensitivities(&p).unwrap();
            let gap = spectrum(&build_generator(&p).unwrap()).gap;
            prop_assume!(gap > 1e-2);
            for (field, analytic) in [("lambda", s.d_lambda), ("alpha1", s.d_alpha1), ("alpha2", s.d_alpha2)] {
                let fd = central_difference(&p, field, 1e-5);
                prop_assert!((fd - analytic).abs() <= 1e-5 * analytic.abs().max(1e-3), "{} {} {}", field, fd, analytic);
            }
        }
    }
}
