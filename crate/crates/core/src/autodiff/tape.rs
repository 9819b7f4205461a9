use super::tensor::{check_shape, Tensor};
use crate::error::{Error, Result};

/// Handle to a node recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// How the right operand of an elementwise op lines up with the left one.
#[derive(Debug, Clone, Copy)]
enum Bcast {
    Same,
    /// Right operand is a row vector repeated over every row of the left.
    Row,
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(Var, Var, Bcast),
    Sub(Var, Var, Bcast),
    Mul(Var, Var, Bcast),
    MatMul(Var, Var),
    Transpose(Var),
    Sum(Var),
    Mean(Var),
    SumLast(Var),
    MeanLast(Var),
    Sin(Var),
    Cos(Var),
    Exp(Var),
    Sqrt(Var),
    Tanh(Var),
    Relu(Var),
    Square(Var),
    Scale(Var, f64),
    AddScalar(Var),
    Concat(Var, Var),
    Reshape(Var),
}

#[derive(Debug)]
struct Node {
    shape: Vec<usize>,
    value: Vec<f64>,
    requires_grad: bool,
    op: Op,
}

/// Define-by-run recording of tensor operations for reverse-mode
/// differentiation.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order. [`Tape::backward`] consumes the tape: one backward
/// pass per forward recording.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records a leaf. Whether it is differentiated follows
    /// [`Tensor::requires_grad`].
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push_leaf(t.shape().to_vec(), t.values().to_vec(), t.requires_grad())
    }

    /// Records a leaf that is never differentiated.
    pub fn constant(&mut self, t: &Tensor) -> Var {
        self.push_leaf(t.shape().to_vec(), t.values().to_vec(), false)
    }

    /// Records a differentiable leaf regardless of the tensor's flag.
    pub fn param(&mut self, t: &Tensor) -> Var {
        self.push_leaf(t.shape().to_vec(), t.values().to_vec(), true)
    }

    /// Records a leaf from raw parts.
    pub fn input(&mut self, shape: Vec<usize>, values: Vec<f64>, requires_grad: bool) -> Result<Var> {
        check_shape(&shape, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { op: "input" });
        }
        Ok(self.push_leaf(shape, values, requires_grad))
    }

    fn push_leaf(&mut self, shape: Vec<usize>, value: Vec<f64>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            shape,
            value,
            requires_grad,
            op: Op::Leaf,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Copies a node's value out as a plain tensor.
    pub fn tensor(&self, v: Var) -> Tensor {
        let n = &self.nodes[v.0];
        Tensor::new(n.shape.clone(), n.value.clone()).expect("tape values are finite")
    }

    /// Value of a single-element node.
    pub fn scalar(&self, v: Var) -> Result<f64> {
        let n = &self.nodes[v.0];
        if n.value.len() != 1 {
            return Err(Error::shape("scalar", format!("shape {:?}", n.shape)));
        }
        Ok(n.value[0])
    }

    fn push(&mut self, op: &'static str, shape: Vec<usize>, value: Vec<f64>, inputs: &[Var], kind: Op) -> Result<Var> {
        if value.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { op });
        }
        let requires_grad = inputs.iter().any(|i| self.nodes[i.0].requires_grad);
        self.nodes.push(Node {
            shape,
            value,
            requires_grad,
            op: kind,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    fn bcast(&self, op: &'static str, a: Var, b: Var) -> Result<Bcast> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa == sb {
            return Ok(Bcast::Same);
        }
        let cols = *sa.last().unwrap();
        let row_like = match sb {
            [c] => *c == cols,
            [1, c] => *c == cols,
            _ => false,
        };
        if sa.len() == 2 && row_like {
            Ok(Bcast::Row)
        } else {
            Err(Error::shape(op, format!("{sa:?} vs {sb:?}")))
        }
    }

    fn binary(&mut self, name: &'static str, a: Var, b: Var, f: fn(f64, f64) -> f64, mk: fn(Var, Var, Bcast) -> Op) -> Result<Var> {
        let bc = self.bcast(name, a, b)?;
        let av = self.value(a);
        let bv = self.value(b);
        let value: Vec<f64> = match bc {
            Bcast::Same => av.iter().zip(bv).map(|(&x, &y)| f(x, y)).collect(),
            Bcast::Row => {
                let c = bv.len();
                av.iter().enumerate().map(|(i, &x)| f(x, bv[i % c])).collect()
            }
        };
        let shape = self.shape(a).to_vec();
        self.push(name, shape, value, &[a, b], mk(a, b, bc))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, |x, y| x + y, Op::Add)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, |x, y| x - y, Op::Sub)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("mul", a, b, |x, y| x * y, Op::Mul)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::shape("matmul", format!("{sa:?} x {sb:?}")));
        }
        let (r, k, c) = (sa[0], sa[1], sb[1]);
        let value = matmul_raw(self.value(a), self.value(b), r, k, c);
        self.push("matmul", vec![r, c], value, &[a, b], Op::MatMul(a, b))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let s = self.shape(a);
        if s.len() != 2 {
            return Err(Error::shape("transpose", format!("{s:?} is not 2-D")));
        }
        let (r, c) = (s[0], s[1]);
        let value = transpose_raw(self.value(a), r, c);
        self.push("transpose", vec![c, r], value, &[a], Op::Transpose(a))
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s = seq_sum(self.value(a));
        self.push("sum", vec![1], vec![s], &[a], Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let v = self.value(a);
        let s = seq_sum(v) / v.len() as f64;
        self.push("mean", vec![1], vec![s], &[a], Op::Mean(a))
    }

    fn last_axis(&self, op: &'static str, a: Var) -> Result<(usize, usize)> {
        match self.shape(a) {
            [r, c] => Ok((*r, *c)),
            s => Err(Error::shape(op, format!("{s:?} is not 2-D"))),
        }
    }

    /// Row sums of a 2-D tensor: `[r, c] -> [r]`.
    pub fn sum_last(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.last_axis("sum_last", a)?;
        let v = self.value(a);
        let value = (0..r).map(|i| seq_sum(&v[i * c..(i + 1) * c])).collect();
        self.push("sum_last", vec![r], value, &[a], Op::SumLast(a))
    }

    /// Row means of a 2-D tensor: `[r, c] -> [r]`.
    pub fn mean_last(&mut self, a: Var) -> Result<Var> {
        let (r, c) = self.last_axis("mean_last", a)?;
        let v = self.value(a);
        let value = (0..r)
            .map(|i| seq_sum(&v[i * c..(i + 1) * c]) / c as f64)
            .collect();
        self.push("mean_last", vec![r], value, &[a], Op::MeanLast(a))
    }

    fn unary(&mut self, name: &'static str, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Result<Var> {
        let value = self.value(a).iter().map(|&x| f(x)).collect();
        let shape = self.shape(a).to_vec();
        self.push(name, shape, value, &[a], op)
    }

    pub fn sin(&mut self, a: Var) -> Result<Var> {
        self.unary("sin", a, f64::sin, Op::Sin(a))
    }

    pub fn cos(&mut self, a: Var) -> Result<Var> {
        self.unary("cos", a, f64::cos, Op::Cos(a))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        self.unary("exp", a, f64::exp, Op::Exp(a))
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.unary("tanh", a, f64::tanh, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.unary("relu", a, |x| x.max(0.0), Op::Relu(a))
    }

    pub fn square(&mut self, a: Var) -> Result<Var> {
        self.unary("square", a, |x| x * x, Op::Square(a))
    }

    /// Elementwise square root. Negative inputs are a domain error, and so
    /// is zero when the input is differentiated.
    pub fn sqrt(&mut self, a: Var) -> Result<Var> {
        let strict = self.requires_grad(a);
        if let Some(bad) = self
            .value(a)
            .iter()
            .find(|&&x| x < 0.0 || (strict && x == 0.0))
        {
            return Err(Error::Domain {
                op: "sqrt",
                detail: format!("input {bad}"),
            });
        }
        self.unary("sqrt", a, f64::sqrt, Op::Sqrt(a))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        self.unary("scale", a, |x| c * x, Op::Scale(a, c))
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Result<Var> {
        self.unary("add_scalar", a, |x| x + c, Op::AddScalar(a))
    }

    /// Concatenates two 2-D tensors with equal row counts along the last axis.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ra, ca) = self.last_axis("concat", a)?;
        let (rb, cb) = self.last_axis("concat", b)?;
        if ra != rb {
            return Err(Error::shape("concat", format!("rows {ra} vs {rb}")));
        }
        let (av, bv) = (self.value(a), self.value(b));
        let mut value = Vec::with_capacity(ra * (ca + cb));
        for i in 0..ra {
            value.extend_from_slice(&av[i * ca..(i + 1) * ca]);
            value.extend_from_slice(&bv[i * cb..(i + 1) * cb]);
        }
        self.push("concat", vec![ra, ca + cb], value, &[a, b], Op::Concat(a, b))
    }

    pub fn reshape(&mut self, a: Var, shape: Vec<usize>) -> Result<Var> {
        check_shape(&shape, self.value(a).len())?;
        let value = self.value(a).to_vec();
        self.push("reshape", shape, value, &[a], Op::Reshape(a))
    }

    /// Runs the reverse pass from a scalar `loss` and consumes the tape.
    pub fn backward(self, loss: Var) -> Result<Gradients> {
        let nodes = self.nodes;
        if nodes[loss.0].value.len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                nodes[loss.0].shape
            )));
        }
        let mut grads: Vec<Vec<f64>> = nodes
            .iter()
            .map(|n| {
                if n.requires_grad {
                    vec![0.0; n.value.len()]
                } else {
                    Vec::new()
                }
            })
            .collect();
        if !nodes[loss.0].requires_grad {
            return Ok(Gradients { grads });
        }
        grads[loss.0][0] = 1.0;

        for idx in (0..=loss.0).rev() {
            let node = &nodes[idx];
            if !node.requires_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let g = std::mem::take(&mut grads[idx]);
            propagate(&nodes, node, &g, &mut grads);
            grads[idx] = g;
        }
        for (i, g) in grads.iter().enumerate() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    op: op_name(&nodes[i].op),
                });
            }
        }
        Ok(Gradients { grads })
    }
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::Add(..) => "add",
        Op::Sub(..) => "sub",
        Op::Mul(..) => "mul",
        Op::MatMul(..) => "matmul",
        Op::Transpose(_) => "transpose",
        Op::Sum(_) => "sum",
        Op::Mean(_) => "mean",
        Op::SumLast(_) => "sum_last",
        Op::MeanLast(_) => "mean_last",
        Op::Sin(_) => "sin",
        Op::Cos(_) => "cos",
        Op::Exp(_) => "exp",
        Op::Sqrt(_) => "sqrt",
        Op::Tanh(_) => "tanh",
        Op::Relu(_) => "relu",
        Op::Square(_) => "square",
        Op::Scale(..) => "scale",
        Op::AddScalar(_) => "add_scalar",
        Op::Concat(..) => "concat",
        Op::Reshape(_) => "reshape",
    }
}

fn accumulate(grads: &mut [Vec<f64>], nodes: &[Node], target: Var, bc: Bcast, contrib: impl Fn(usize) -> f64, len: usize) {
    if !nodes[target.0].requires_grad {
        return;
    }
    let dst = &mut grads[target.0];
    match bc {
        Bcast::Same => {
            for (i, d) in dst.iter_mut().enumerate() {
                *d += contrib(i);
            }
        }
        Bcast::Row => {
            let c = dst.len();
            for i in 0..len {
                dst[i % c] += contrib(i);
            }
        }
    }
}

fn accumulate_unary(grads: &mut [Vec<f64>], nodes: &[Node], target: Var, contrib: impl Fn(usize) -> f64) {
    if !nodes[target.0].requires_grad {
        return;
    }
    for (i, d) in grads[target.0].iter_mut().enumerate() {
        *d += contrib(i);
    }
}

fn propagate(nodes: &[Node], node: &Node, g: &[f64], grads: &mut [Vec<f64>]) {
    let val = |v: Var| -> &[f64] { &nodes[v.0].value };
    let n = g.len();
    match node.op {
        Op::Leaf => {}
        Op::Add(a, b, bc) => {
            accumulate_unary(grads, nodes, a, |i| g[i]);
            accumulate(grads, nodes, b, bc, |i| g[i], n);
        }
        Op::Sub(a, b, bc) => {
            accumulate_unary(grads, nodes, a, |i| g[i]);
            accumulate(grads, nodes, b, bc, |i| -g[i], n);
        }
        Op::Mul(a, b, bc) => {
            let (av, bv) = (val(a), val(b));
            let c = bv.len();
            let bi = |i: usize| match bc {
                Bcast::Same => bv[i],
                Bcast::Row => bv[i % c],
            };
            accumulate_unary(grads, nodes, a, |i| g[i] * bi(i));
            accumulate(grads, nodes, b, bc, |i| g[i] * av[i], n);
        }
        Op::MatMul(a, b) => {
            let (sa, sb) = (&nodes[a.0].shape, &nodes[b.0].shape);
            let (r, k, c) = (sa[0], sa[1], sb[1]);
            if nodes[a.0].requires_grad {
                // dA = dC · Bᵀ
                let bt = transpose_raw(val(b), k, c);
                let da = matmul_raw(g, &bt, r, c, k);
                for (d, x) in grads[a.0].iter_mut().zip(da) {
                    *d += x;
                }
            }
            if nodes[b.0].requires_grad {
                // dB = Aᵀ · dC
                let at = transpose_raw(val(a), r, k);
                let db = matmul_raw(&at, g, k, r, c);
                for (d, x) in grads[b.0].iter_mut().zip(db) {
                    *d += x;
                }
            }
        }
        Op::Transpose(a) => {
            let s = &nodes[a.0].shape;
            // g has shape [c, r]; transposing back gives [r, c].
            let back = transpose_raw(g, s[1], s[0]);
            accumulate_unary(grads, nodes, a, |i| back[i]);
        }
        Op::Sum(a) => accumulate_unary(grads, nodes, a, |_| g[0]),
        Op::Mean(a) => {
            let len = nodes[a.0].value.len() as f64;
            accumulate_unary(grads, nodes, a, |_| g[0] / len);
        }
        Op::SumLast(a) => {
            let c = nodes[a.0].shape[1];
            accumulate_unary(grads, nodes, a, |i| g[i / c]);
        }
        Op::MeanLast(a) => {
            let c = nodes[a.0].shape[1];
            accumulate_unary(grads, nodes, a, |i| g[i / c] / c as f64);
        }
        Op::Sin(a) => {
            let av = val(a);
            accumulate_unary(grads, nodes, a, |i| g[i] * av[i].cos());
        }
        Op::Cos(a) => {
            let av = val(a);
            accumulate_unary(grads, nodes, a, |i| -g[i] * av[i].sin());
        }
        Op::Exp(a) => {
            let out = &node.value;
            accumulate_unary(grads, nodes, a, |i| g[i] * out[i]);
        }
        Op::Sqrt(a) => {
            let out = &node.value;
            accumulate_unary(grads, nodes, a, |i| g[i] * 0.5 / out[i]);
        }
        Op::Tanh(a) => {
            let out = &node.value;
            accumulate_unary(grads, nodes, a, |i| g[i] * (1.0 - out[i] * out[i]));
        }
        Op::Relu(a) => {
            let av = val(a);
            accumulate_unary(grads, nodes, a, |i| if av[i] > 0.0 { g[i] } else { 0.0 });
        }
        Op::Square(a) => {
            let av = val(a);
            accumulate_unary(grads, nodes, a, |i| 2.0 * av[i] * g[i]);
        }
        Op::Scale(a, c) => accumulate_unary(grads, nodes, a, |i| c * g[i]),
        Op::AddScalar(a) | Op::Reshape(a) => accumulate_unary(grads, nodes, a, |i| g[i]),
        Op::Concat(a, b) => {
            let ca = nodes[a.0].shape[1];
            let cb = nodes[b.0].shape[1];
            let w = ca + cb;
            accumulate_unary(grads, nodes, a, |i| g[(i / ca) * w + i % ca]);
            accumulate_unary(grads, nodes, b, |i| g[(i / cb) * w + ca + i % cb]);
        }
    }
}

/// Sequential left-to-right sum.
pub(crate) fn seq_sum(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for &x in v {
        s += x;
    }
    s
}

pub(crate) fn matmul_raw(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        let row = &mut out[i * c..(i + 1) * c];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b[p * c..(p + 1) * c];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
    out
}

pub(crate) fn transpose_raw(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j];
        }
    }
    out
}

/// Gradients produced by [`Tape::backward`], indexed by [`Var`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Vec<f64>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`. Empty when `v` was not
    /// differentiated; all zeros when it was but is unreachable from the loss.
    pub fn get(&self, v: Var) -> &[f64] {
        &self.grads[v.0]
    }

    /// Copies the gradient of `v` into the gradient buffer of `t`.
    pub fn write_into(&self, v: Var, t: &mut Tensor) -> Result<()> {
        t.set_grad(self.get(v))
    }
}
