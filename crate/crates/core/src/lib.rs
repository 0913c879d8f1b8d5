//! Numerical models of face pareidolia.
//!
//! The crate is organised by subsystem:
//!
//! - [`stimuli`]: band-limited random images built by Gaussian-envelope
//!   filtering of white noise in the Fourier domain, plus radial spectra.
//! - [`gaussian_model`]: closed-form per-mode match density and the
//!   probability-vs-complexity curve.
//! - [`feature_model`]: Poisson feature-count model and its analytic peak.
//! - [`montecarlo`]: brute-force oracles for both models and a normalized
//!   cross-correlation face detector run on generated stimuli.
//! - [`evalkit`]: annotation ingestion, Average Precision, dataset statistics
//!   and average-face rendering.
//! - [`psycho`]: trial cleaning, aggregation and model fitting for counting
//!   experiments.
//!
//! Data-parallel loops go through [`Execution`]; with the `parallel` feature
//! (on by default) they run on rayon, otherwise sequentially. Results are
//! bit-identical either way.

pub mod curve;
pub mod error;
pub mod evalkit;
mod exec;
pub mod feature_model;
pub mod fft2d;
pub mod gaussian_model;
pub mod montecarlo;
pub mod psycho;
pub mod raster;
pub mod rng;
pub mod stimuli;

pub use curve::{Curve, CurvePoint};
pub use error::{Error, Result};
pub use exec::Execution;
