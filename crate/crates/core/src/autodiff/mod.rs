//! Minimal reverse-mode automatic differentiation over dense `f64` tensors.
//!
//! A [`Tape`] records operations as they execute. Every reduction runs in a
//! fixed sequential order, so a forward/backward pass is bit-reproducible.
//! Complex quantities are carried as separate real and imaginary tensors by
//! the callers.

mod check;
mod tape;
mod tensor;

pub use check::finite_diff_check;
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

