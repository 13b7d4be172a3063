//! Simulation and analytic toolkit for deep thermalization (DT) and
//! holographic deep thermalization (HDT).
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`]: dense statevectors, density matrices, unitaries, Haar sampling.
//! * [`protocols`]: the DT/HDT measure-and-reset processes and their projected ensembles.
//! * [`metrics`]: frame potentials, moment operators, PoP histograms, Pauli purity.
//! * [`perm`]: symmetric-group and Weingarten calculus, chain partition sums.
//! * [`theory`]: closed-form predictions and resource formulas.
//! * [`security`]: reference-entanglement (mutual information) experiments.
//! * [`qml`]: per-step training of parameterised HDT unitaries.

pub mod error;
pub mod metrics;
pub mod perm;
pub mod protocols;
pub mod qml;
pub mod quantum;
pub mod rng;
pub mod security;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
