//! Simulation of two distinguishable particles travelling through a pair of
//! three-stage beam-splitter interferometers whose first-stage paths may
//! intersect, annihilating the pair into radiation.
//!
//! The crate covers:
//!
//! * [`state`]: sparse two-particle joint states, including radiation ("gamma") kets.
//! * [`circuit`]: wing circuits, annihilation geometry and the two built-in schemes.
//! * [`evolution`]: stage-by-stage propagation, outcome statistics, post-selection,
//!   Bell overlaps and a dense brute-force oracle.
//! * [`dsl`]: a small text format for schemes with positioned diagnostics.
//! * [`lhv`]: local-hidden-variable feasibility by exact or floating-point LP with
//!   Farkas certificates.
//! * [`sampling`]: seeded, chunk-reproducible Monte Carlo runs.
//!
//! State, circuit and evolution code is generic over a floating-point [`Scalar`]
//! (`f32` or `f64`); the LP is generic over an ordered field and runs either on
//! `f64` or on exact big rationals. The aliases below fix the everyday `f64`
//! instantiation.

pub mod circuit;
pub mod dsl;
pub mod error;
pub mod evolution;
pub mod lhv;
pub mod numfmt;
pub mod sampling;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use state::{BasisKet, PathId, Wing};

/// Complex amplitude in double precision.
pub type Amplitude = num_complex::Complex<f64>;
/// Joint state in double precision.
pub type JointState = state::JointState<f64>;
/// Joint state in single precision.
pub type JointStateF32 = state::JointState<f32>;
/// Beam splitter in double precision.
pub type BeamSplitter = circuit::BeamSplitter<f64>;
/// Phase settings in double precision.
pub type PhaseSettings = circuit::PhaseSettings<f64>;
/// Wing circuit in double precision.
pub type WingCircuit = circuit::WingCircuit<f64>;
/// Scheme in double precision.
pub type Scheme = circuit::Scheme<f64>;
/// Scheme in single precision.
pub type SchemeF32 = circuit::Scheme<f32>;
/// Outcome distribution in double precision.
pub type OutcomeDistribution = evolution::OutcomeDistribution<f64>;
/// Exact rational used by the LP path.
pub type Rational = num_rational::BigRational;
