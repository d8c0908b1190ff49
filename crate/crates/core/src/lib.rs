//! Channel polarization analysis for binary-input channels whose additive
//! noise is a first-order Markov process.
//!
//! The crate is organised bottom-up:
//!
//! * [`noise`] — stationary noise models (bivariate Gaussian, bivariate
//!   Student, Gilbert–Elliott) with exact densities and samplers.
//! * [`channel`] — the binary-input channel `W`, its genie-aided companion
//!   `W̃`, and reduction of either to a [`channel::FiniteStateChannel`].
//! * [`metrics`] — quadrature and enumeration of scalar information
//!   quantities (I(W), Z(W), Z_g(W), pairwise mutual informations, I†).
//! * [`polar`] — the polar transform, bit-index sets and frozen-set selection.
//! * [`trellis`] — exact and Monte-Carlo evaluation of the polarized
//!   subchannels over finite-state channels and state-aware SC decoding.
//! * [`ratebounds`] — extremal recursions and bounding processes for the
//!   polarization rate.

// Index loops mirror the summations they implement; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod estimate;
pub mod metrics;
pub mod noise;
pub mod polar;
pub mod quadrature;
pub mod ratebounds;
pub mod rng;
pub mod trellis;

pub use error::{Error, Result};
pub use estimate::{EstimateWithCI, Method};
