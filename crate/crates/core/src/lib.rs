//! Distribution matching with empirical characteristic functions.
//!
//! A generator is trained to minimize the distance between the empirical
//! characteristic function (ECF) of its samples and that of a target sample
//! set. The frequencies at which the two ECFs are compared are not fixed:
//! a learned sampler moves them toward the regions where the ECFs disagree
//! most, and the generator is then updated against those points. Three
//! samplers are provided (fixed Gaussian, per-point MLP, and a k-nearest
//! neighbour graph network).
//!
//! Modules, bottom up:
//!
//! - [`autodiff`]: tensors and a reverse-mode tape.
//! - [`cf`]: ECFs, the CF distance and its amplitude/phase split.
//! - [`samplers`]: query-point proposal mechanisms.
//! - [`nets`]: generator and autoencoder MLPs.
//! - [`training`]: Adam and the alternating sampler/generator loop.
//! - [`experiments`]: the surface benchmark, toy datasets, latent-space
//!   generation and evaluation metrics.
//! - [`cli`]: config parsing and the command runner behind the binary.

pub mod autodiff;
pub mod cf;
pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod nets;
pub mod params;
pub mod rng;
pub mod samplers;
pub mod training;

pub use autodiff::{Tape, Tensor, Var};
pub use error::{Error, Result};
