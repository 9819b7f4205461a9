//! Named groups of trainable tensors.

use crate::autodiff::{Gradients, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// An ordered collection of named parameter tensors with a group-level
/// freeze flag.
///
/// A frozen group binds onto tapes as constants and refuses optimizer
/// updates, so its values stay bit-identical for as long as it is frozen.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    entries: Vec<(String, Tensor)>,
    frozen: bool,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a tensor under `name`. The tensor gets a gradient buffer.
    pub fn push(&mut self, name: impl Into<String>, t: Tensor) {
        let t = if t.requires_grad() { t } else { t.with_grad() };
        self.entries.push((name.into(), t));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn unfreeze(&mut self) {
        self.frozen = false;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.entries.iter_mut().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Tensor> {
        self.entries.iter().map(|(_, t)| t)
    }

    pub(crate) fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.entries.iter_mut().map(|(_, t)| t)
    }

    /// Records every tensor on `tape`, as differentiable leaves unless the
    /// group is frozen.
    pub fn bind(&self, tape: &mut Tape) -> Vec<Var> {
        self.entries
            .iter()
            .map(|(_, t)| {
                if self.frozen {
                    tape.constant(t)
                } else {
                    tape.param(t)
                }
            })
            .collect()
    }

    /// Records every tensor on `tape` as a constant.
    pub fn bind_constant(&self, tape: &mut Tape) -> Vec<Var> {
        self.entries.iter().map(|(_, t)| tape.constant(t)).collect()
    }

    /// Copies gradients for the vars returned by [`ParamSet::bind`] into the
    /// tensors' gradient buffers.
    pub fn absorb_grads(&mut self, grads: &Gradients, vars: &[Var]) -> Result<()> {
        if vars.len() != self.entries.len() {
            return Err(Error::shape(
                "absorb_grads",
                format!("{} vars for {} tensors", vars.len(), self.entries.len()),
            ));
        }
        if self.frozen {
            return Ok(());
        }
        for ((_, t), &v) in self.entries.iter_mut().zip(vars) {
            grads.write_into(v, t)?;
        }
        Ok(())
    }

    /// Flattened copy of every parameter value, in insertion order.
    pub fn flat_values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|(_, t)| t.values().iter().copied())
            .collect()
    }

    /// Overwrites all parameter values from a flat vector.
    pub fn set_flat_values(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_scalars() {
            return Err(Error::shape(
                "set_flat_values",
                format!("{} values for {} parameters", flat.len(), self.num_scalars()),
            ));
        }
        let mut offset = 0;
        for (_, t) in self.entries.iter_mut() {
            let n = t.len();
            t.values_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Zeros every tensor whose name starts with `prefix`.
    pub fn zero_prefix(&mut self, prefix: &str) {
        for (n, t) in self.entries.iter_mut() {
            if n.starts_with(prefix) {
                t.values_mut().iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
}
