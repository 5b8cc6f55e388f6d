//! Probability law of the sum `S(t) = X₁(t) + X₂(t)` of two independent
//! Goldstein–Kac telegraph processes.
//!
//! The crate evaluates the closed-form atoms, absolutely continuous density,
//! distribution function and characteristic functions of `S(t)`, the single
//! process law it is built from, and the general case (unequal parameters,
//! shifted start points) by numeric Fourier inversion. Every closed form is
//! paired with an independent route in [`numerics`] (adaptive quadrature,
//! inversion, finite differences) and in [`mc`] (Monte Carlo with exact atom
//! detection).
//!
//! Parallel loops use rayon when the `parallel` feature is enabled (the
//! default). Without it every [`Execution`] falls back to a sequential loop
//! with identical results.

#![forbid(unsafe_code)]

mod error;
pub mod mc;
pub mod numerics;
mod par;
pub mod specfun;
pub mod sumdist;
pub mod table;
pub mod telegraph;
pub mod verify;

pub use error::{Error, Result};
pub use par::Execution;
pub use specfun::SeriesControl;
pub use sumdist::SumParams;
pub use telegraph::{Atom, MixedDistribution, TelegraphParams};

pub use num_complex::Complex64;
