//! Driven multiphoton Jaynes–Cummings cavity QED as an open quantum system.
//!
//! A two-level atom exchanges `N` photons per transition with a lossy cavity
//! mode that is probed by an `M`-photon drive. The crate builds the
//! operators and Liouvillian on a truncated Fock space, integrates the
//! master equation, solves for steady states and provides the analytics
//! for Fock-space rotations, Fock-state filtering and the absorption
//! spectrum of the probe.

// `!(x < tol)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fock_algebra;
pub mod lindblad;
pub mod model;
pub mod protocols;
pub mod scenario;
pub mod sparse;

pub use error::{Error, Result};
pub use fock_algebra::{Atom, DensityMatrix, HilbertDims, Operator};
pub use lindblad::{CutoffPolicy, InitialState, IntegratorOptions, TrajectoryResult};
pub use model::{ModelParams, PulseEnvelope};
