//! Two-type continuous-time Markov branching model of parasite-host dynamics.
//!
//! Infected hosts carry one of two pathogen strains that differ in lethality
//! (death rate `alpha`) and transmissibility (`beta`), and a transmitted
//! pathogen mutates to the other strain with probability `mu`. Infected hosts
//! meet susceptibles at rate `lambda`, the proxy for host density.
//!
//! The crate is split into:
//!
//! * [`model`]: generator, spectrum, closed-form mean matrix `M(t)`, the
//!   limiting strain ratio `R`, sensitivities and a K-type generalisation.
//! * [`simulator`]: exact event-driven simulation and ensemble statistics.
//! * [`scaling`]: Brownian encounter-time experiments behind the
//!   encounter-rate scaling laws in one, two and three dimensions.
//! * [`multistage`]: the enclosure-to-enclosure lethality ladder chain and
//!   its absorption-time distribution.
//! * [`cli`]: the `virulence` command-line front end.

pub mod cli;
pub mod error;
pub mod model;
pub mod multistage;
pub mod rng;
pub mod scaling;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use model::{Criticality, Generator, Spectrum, TwoTypeParams};
