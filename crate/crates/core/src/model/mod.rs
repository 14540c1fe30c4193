//! Analytic engine for the two-type model: parameters, offspring table,
//! generator, spectrum, mean matrix, type ratios and sensitivities, plus a
//! dense K-type generator for ladders of more than two strains.

mod dynamics;
mod ktype;
pub(crate) mod params;
mod spectrum;

pub use dynamics::{
    classify, classify_with_band, limiting_ratio, mean_matrix, ratio_trajectories, sensitivities, Criticality,
    RatioPair, Sensitivities, CRITICAL_BAND,
};
pub use ktype::{ktype_spectrum, KSpectrum, KTypeGenerator, TypeSpec, MAX_TYPES};
pub use params::{build_offspring_table, OffspringTable, Strain, TwoTypeParams, OUTCOMES};
pub use spectrum::{build_generator, spectrum, Eigenvectors, Generator, Spectrum};
