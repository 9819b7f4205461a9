use crate::error::{Error, Result};

/// Dense row-major array of `f64` with an optional gradient buffer.
///
/// Tensors are plain data. Computation happens on a [`Tape`](super::Tape),
/// which copies tensors in as leaves and hands gradients back after the
/// backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    values: Vec<f64>,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_shape(&shape, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { op: "Tensor::new" });
        }
        Ok(Tensor {
            shape,
            values,
            grad: None,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            values: vec![0.0; n],
            grad: None,
        }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: vec![1],
            values: vec![v],
            grad: None,
        }
    }

    /// Builds a `rows x cols` matrix from row slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::shape("from_rows", "ragged rows"));
        }
        Tensor::new(vec![r, c], rows.iter().flatten().copied().collect())
    }

    /// Marks the tensor as trainable, allocating a zeroed gradient buffer.
    pub fn with_grad(mut self) -> Self {
        self.grad = Some(vec![0.0; self.values.len()]);
        self
    }

    pub fn requires_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    /// Overwrites the gradient buffer. Fails if the tensor is not trainable
    /// or the lengths differ.
    pub fn set_grad(&mut self, g: &[f64]) -> Result<()> {
        let n = self.values.len();
        match self.grad.as_mut() {
            None => Err(Error::Contract(
                "set_grad on a tensor without requires_grad".into(),
            )),
            Some(_) if g.len() != n => Err(Error::shape(
                "set_grad",
                format!("gradient length {} vs {} values", g.len(), n),
            )),
            Some(buf) => {
                buf.copy_from_slice(g);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of rows of a 2-D tensor (or the length of a 1-D one).
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Trailing extent; 1 for a 1-D tensor.
    pub fn cols(&self) -> usize {
        if self.shape.len() >= 2 {
            self.shape[self.shape.len() - 1]
        } else {
            1
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i).to_vec()).collect()
    }

    /// Selects rows by index into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Tensor {
        let c = self.cols();
        let mut values = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Tensor {
            shape: vec![idx.len(), c],
            values,
            grad: None,
        }
    }
}

pub(crate) fn check_shape(shape: &[usize], len: usize) -> Result<()> {
    if shape.is_empty() || shape.iter().any(|&d| d == 0) {
        return Err(Error::shape(
            "Tensor",
            format!("extents must be positive, got {shape:?}"),
        ));
    }
    let n: usize = shape.iter().product();
    if n != len {
        return Err(Error::shape(
            "Tensor",
            format!("shape {shape:?} holds {n} values, got {len}"),
        ));
    }
    Ok(())
}
