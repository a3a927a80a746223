//! Frame-based verification engine for conformal Killing-Yano calculus.
//!
//! The crate evaluates tensor fields on complexified charts through
//! second-order jets, builds the associated null frames and curvature,
//! and measures the residuals of the structural equations that tie
//! 2-forms, distributions, Weyl curvature and pure spinors together.
//! Everything is organized around a catalog of concrete metrics that
//! exercise each identity at randomly sampled chart points.

pub mod catalog;
pub mod cky;
pub mod error;
pub mod exterior;
pub mod foliation;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod spin;
pub mod suite;
pub mod weyltype;

pub use error::CoreError;
pub use jet::{Jet1, Jet2, Point, ScalarField};
pub use suite::{run, RunConfig, Suite, VerificationReport};

/// Complex scalar used across the engine.
pub type C64 = num_complex::Complex64;
