//! Numerical laboratory for measures generated by hyperbolic recurrent
//! iterated function systems.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`markov`]: row-stochastic matrices, irreducibility, stationary vectors.
//! * [`ifs`]: contraction maps with two-sided distortion bounds, attractor
//!   approximation and separation checks.
//! * [`symbolic`]: admissible words, cylinder weights, finite maximal
//!   antichains, chaos-game sampling and ergodic averages.
//! * [`measure`]: cylinder discretizations with rigorous radius bounds,
//!   two-sided ball-measure enclosures and the Frostman exponent check.
//! * [`quantizer`]: enclosures of the geometric-mean quantization objective,
//!   codebook optimizers and quantization curves.
//! * [`dims`]: closed-form dimension bounds and the local / quantization
//!   dimension estimators built on top of everything else.
//!
//! Words are stored with zero-based letters; everything user-facing (CSV,
//! `Display`) prints them one-based.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

#[cfg(test)]
mod testing;

pub mod dims;
mod error;
pub mod ifs;
pub mod linalg;
pub mod markov;
pub mod measure;
pub mod quantizer;
pub mod rng;
pub mod stats;
pub mod symbolic;

pub use error::{Error, Result};

/// A point of the ambient space, one coordinate per axis.
pub type Point = alloc::vec::Vec<f64>;
