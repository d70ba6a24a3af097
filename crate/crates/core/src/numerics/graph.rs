//! Reverse-mode automatic differentiation on a per-pass tape.
//!
//! A `Graph` records every operation of one forward pass in creation
//! order; `backward` replays the tape in reverse, accumulating vector-
//! Jacobian products into each node's gradient buffer. Tapes are cheap
//! and rebuilt per pass; tensors on the tape are never mutated in place,
//! so a node id can safely feed any number of consumers and each
//! contribution is summed into the same buffer.

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;

pub type NodeId = usize;

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    Transpose(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    MulElem(NodeId, NodeId),
    DivElem(NodeId, NodeId),
    Scale(NodeId, f64),
    AddScalar(NodeId, f64),
    /// matrix (n x m) + row vector (1 x m) broadcast over rows
    AddRowVec(NodeId, NodeId),
    /// matrix (n x m) + column vector (n x 1) broadcast over columns
    AddColVec(NodeId, NodeId),
    /// matrix (n x m) * column vector (n x 1) broadcast over columns
    MulColVec(NodeId, NodeId),
    Tanh(NodeId),
    Softplus(NodeId),
    Sqrt(NodeId),
    Log(NodeId),
    Abs(NodeId),
    SoftmaxRows(NodeId),
    GatherRows(NodeId, Vec<usize>),
    ConcatRows(Vec<NodeId>),
    ConcatCols(Vec<NodeId>),
    Reshape(NodeId),
    SumAll(NodeId),
    MeanAll(NodeId),
}

struct Node {
    value: Tensor,
    grad: Option<Tensor>,
    op: Op,
    /// True when this node's value depends on a grad-requiring leaf, so
    /// the backward pass must propagate through it.
    needs: bool,
}

pub struct Graph {
    nodes: Vec<Node>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].value
    }

    pub fn grad(&self, id: NodeId) -> Option<&Tensor> {
        self.nodes[id].grad.as_ref()
    }

    /// Take ownership of a node's gradient, leaving `None` behind.
    pub fn take_grad(&mut self, id: NodeId) -> Option<Tensor> {
        self.nodes[id].grad.take()
    }

    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf, false)
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> NodeId {
        self.push(value, Op::Leaf, requires_grad)
    }

    fn push(&mut self, value: Tensor, op: Op, needs: bool) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            value,
            grad: None,
            op,
            needs,
        });
        id
    }

    fn needs(&self, id: NodeId) -> bool {
        self.nodes[id].needs
    }

    fn needs_any(&self, ids: &[NodeId]) -> bool {
        ids.iter().any(|&i| self.nodes[i].needs)
    }

    // ── Forward ops ──────────────────────────────────────────────────

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).matmul(self.value(b))?;
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(v, Op::MatMul(a, b), needs))
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).transposed();
        let needs = self.needs(a);
        self.push(v, Op::Transpose(a), needs)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.same_shape("add", a, b)?;
        let needs = self.needs(a) || self.needs(b);
        let _ = v;
        let out = self.value(a).zip(self.value(b), |x, y| x + y)?;
        Ok(self.push(out, Op::Add(a, b), needs))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape("sub", a, b)?;
        let needs = self.needs(a) || self.needs(b);
        let out = self.value(a).zip(self.value(b), |x, y| x - y)?;
        Ok(self.push(out, Op::Sub(a, b), needs))
    }

    pub fn mul_elem(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape("mul_elem", a, b)?;
        let needs = self.needs(a) || self.needs(b);
        let out = self.value(a).zip(self.value(b), |x, y| x * y)?;
        Ok(self.push(out, Op::MulElem(a, b), needs))
    }

    pub fn div_elem(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.same_shape("div_elem", a, b)?;
        let needs = self.needs(a) || self.needs(b);
        let out = self.value(a).zip(self.value(b), |x, y| x / y)?;
        Ok(self.push(out, Op::DivElem(a, b), needs))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let out = self.value(a).map(|x| x * c);
        let needs = self.needs(a);
        self.push(out, Op::Scale(a, c), needs)
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> NodeId {
        let out = self.value(a).map(|x| x + c);
        let needs = self.needs(a);
        self.push(out, Op::AddScalar(a, c), needs)
    }

    pub fn add_row_vec(&mut self, a: NodeId, v: NodeId) -> Result<NodeId> {
        let (m, vt) = (self.value(a), self.value(v));
        if vt.rows() != 1 || vt.cols() != m.cols() {
            return Err(Error::Shape {
                op: "add_row_vec",
                lhs: m.shape().to_vec(),
                rhs: vt.shape().to_vec(),
            });
        }
        let cols = m.cols();
        let mut out = m.clone();
        for r in 0..out.rows() {
            for c in 0..cols {
                *out.at_mut(r, c) += vt.at(0, c);
            }
        }
        let needs = self.needs(a) || self.needs(v);
        Ok(self.push(out, Op::AddRowVec(a, v), needs))
    }

    pub fn add_col_vec(&mut self, a: NodeId, v: NodeId) -> Result<NodeId> {
        let (m, vt) = (self.value(a), self.value(v));
        if vt.cols() != 1 || vt.rows() != m.rows() {
            return Err(Error::Shape {
                op: "add_col_vec",
                lhs: m.shape().to_vec(),
                rhs: vt.shape().to_vec(),
            });
        }
        let mut out = m.clone();
        for r in 0..out.rows() {
            let add = vt.at(r, 0);
            for c in 0..out.cols() {
                *out.at_mut(r, c) += add;
            }
        }
        let needs = self.needs(a) || self.needs(v);
        Ok(self.push(out, Op::AddColVec(a, v), needs))
    }

    pub fn mul_col_vec(&mut self, a: NodeId, v: NodeId) -> Result<NodeId> {
        let (m, vt) = (self.value(a), self.value(v));
        if vt.cols() != 1 || vt.rows() != m.rows() {
            return Err(Error::Shape {
                op: "mul_col_vec",
                lhs: m.shape().to_vec(),
                rhs: vt.shape().to_vec(),
            });
        }
        let mut out = m.clone();
        for r in 0..out.rows() {
            let s = vt.at(r, 0);
            for c in 0..out.cols() {
                *out.at_mut(r, c) *= s;
            }
        }
        let needs = self.needs(a) || self.needs(v);
        Ok(self.push(out, Op::MulColVec(a, v), needs))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(f64::tanh);
        let needs = self.needs(a);
        self.push(out, Op::Tanh(a), needs)
    }

    /// Numerically stable ln(1 + e^x).
    pub fn softplus(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(|x| x.max(0.0) + (-x.abs()).exp().ln_1p());
        let needs = self.needs(a);
        self.push(out, Op::Softplus(a), needs)
    }

    pub fn sqrt(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(f64::sqrt);
        let needs = self.needs(a);
        self.push(out, Op::Sqrt(a), needs)
    }

    pub fn log(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(f64::ln);
        let needs = self.needs(a);
        self.push(out, Op::Log(a), needs)
    }

    /// |x| with the subgradient at zero defined as 0.
    pub fn abs(&mut self, a: NodeId) -> NodeId {
        let out = self.value(a).map(f64::abs);
        let needs = self.needs(a);
        self.push(out, Op::Abs(a), needs)
    }

    /// Row-wise softmax with max subtraction for overflow safety.
    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let x = self.value(a);
        let (r, c) = (x.rows(), x.cols());
        let mut out = Tensor::zeros(r, c);
        for i in 0..r {
            let row = x.row_slice(i);
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for j in 0..c {
                let e = (row[j] - m).exp();
                *out.at_mut(i, j) = e;
                sum += e;
            }
            for j in 0..c {
                *out.at_mut(i, j) /= sum;
            }
        }
        let needs = self.needs(a);
        self.push(out, Op::SoftmaxRows(a), needs)
    }

    /// Select rows by index (repeats allowed). Backward scatter-adds.
    pub fn gather_rows(&mut self, a: NodeId, idx: Vec<usize>) -> Result<NodeId> {
        let x = self.value(a);
        if let Some(&bad) = idx.iter().find(|&&i| i >= x.rows()) {
            return Err(Error::Shape {
                op: "gather_rows",
                lhs: x.shape().to_vec(),
                rhs: vec![bad],
            });
        }
        let c = x.cols();
        let mut data = Vec::with_capacity(idx.len() * c);
        for &i in &idx {
            data.extend_from_slice(x.row_slice(i));
        }
        let out = Tensor::new(idx.len(), c, data)?;
        let needs = self.needs(a);
        Ok(self.push(out, Op::GatherRows(a, idx), needs))
    }

    /// Single row as a 1xC matrix.
    pub fn row(&mut self, a: NodeId, r: usize) -> Result<NodeId> {
        self.gather_rows(a, vec![r])
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::config("concat_rows of zero parts"));
        }
        let c = self.value(parts[0]).cols();
        let mut rows = 0;
        for &p in parts {
            let v = self.value(p);
            if v.cols() != c {
                return Err(Error::Shape {
                    op: "concat_rows",
                    lhs: vec![c],
                    rhs: v.shape().to_vec(),
                });
            }
            rows += v.rows();
        }
        let mut data = Vec::with_capacity(rows * c);
        for &p in parts {
            data.extend_from_slice(self.value(p).data());
        }
        let out = Tensor::new(rows, c, data)?;
        let needs = self.needs_any(parts);
        Ok(self.push(out, Op::ConcatRows(parts.to_vec()), needs))
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::config("concat_cols of zero parts"));
        }
        let r = self.value(parts[0]).rows();
        let mut cols = 0;
        for &p in parts {
            let v = self.value(p);
            if v.rows() != r {
                return Err(Error::Shape {
                    op: "concat_cols",
                    lhs: vec![r],
                    rhs: v.shape().to_vec(),
                });
            }
            cols += v.cols();
        }
        let mut out = Tensor::zeros(r, cols);
        let mut off = 0;
        for &p in parts {
            let v = self.value(p);
            for i in 0..r {
                let dst = i * cols + off;
                out.data_mut()[dst..dst + v.cols()].copy_from_slice(v.row_slice(i));
            }
            off += v.cols();
        }
        let needs = self.needs_any(parts);
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), needs))
    }

    pub fn reshape(&mut self, a: NodeId, rows: usize, cols: usize) -> Result<NodeId> {
        let out = self.value(a).reshaped(rows, cols)?;
        let needs = self.needs(a);
        Ok(self.push(out, Op::Reshape(a), needs))
    }

    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.value(a).data().iter().sum();
        let needs = self.needs(a);
        self.push(Tensor::scalar(s), Op::SumAll(a), needs)
    }

    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let n = self.value(a).numel() as f64;
        let s: f64 = self.value(a).data().iter().sum();
        let needs = self.needs(a);
        self.push(Tensor::scalar(s / n), Op::MeanAll(a), needs)
    }

    /// x (n x d_in) times W (d_in x d_out), plus optional bias row.
    pub fn linear(&mut self, x: NodeId, w: NodeId, b: Option<NodeId>) -> Result<NodeId> {
        let y = self.matmul(x, w)?;
        match b {
            Some(b) => self.add_row_vec(y, b),
            None => Ok(y),
        }
    }

    fn same_shape(&self, op: &'static str, a: NodeId, b: NodeId) -> Result<()> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(Error::Shape {
                op,
                lhs: x.shape().to_vec(),
                rhs: y.shape().to_vec(),
            });
        }
        Ok(())
    }

    // ── Backward ─────────────────────────────────────────────────────

    fn accumulate(&mut self, id: NodeId, delta: &Tensor) {
        if !self.nodes[id].needs {
            return;
        }
        let shape = self.nodes[id].value.shape();
        let grad = self.nodes[id]
            .grad
            .get_or_insert_with(|| Tensor::zeros(shape[0], shape[1]));
        grad.add_scaled(delta, 1.0);
    }

    /// Reverse sweep from a scalar loss node. Gradients of all
    /// grad-requiring leaves are left on their nodes.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if self.value(loss).numel() != 1 {
            return Err(Error::Shape {
                op: "backward",
                lhs: self.value(loss).shape().to_vec(),
                rhs: vec![1, 1],
            });
        }
        if !self.value(loss).item().is_finite() {
            return Err(Error::Numerical(format!(
                "backward from non-finite loss {}",
                self.value(loss).item()
            )));
        }
        self.nodes[loss].grad = Some(Tensor::scalar(1.0));

        for id in (0..=loss).rev() {
            if !self.nodes[id].needs {
                continue;
            }
            let Some(g) = self.nodes[id].grad.clone() else {
                continue;
            };
            let op = self.nodes[id].op.clone();
            match op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    if self.needs(a) {
                        let bt = self.value(b).transposed();
                        let da = g.matmul(&bt)?;
                        self.accumulate(a, &da);
                    }
                    if self.needs(b) {
                        let at = self.value(a).transposed();
                        let db = at.matmul(&g)?;
                        self.accumulate(b, &db);
                    }
                }
                Op::Transpose(a) => {
                    let da = g.transposed();
                    self.accumulate(a, &da);
                }
                Op::Add(a, b) => {
                    self.accumulate(a, &g);
                    self.accumulate(b, &g);
                }
                Op::Sub(a, b) => {
                    self.accumulate(a, &g);
                    let neg = g.map(|x| -x);
                    self.accumulate(b, &neg);
                }
                Op::MulElem(a, b) => {
                    if self.needs(a) {
                        let da = g.zip(self.value(b), |gv, bv| gv * bv)?;
                        self.accumulate(a, &da);
                    }
                    if self.needs(b) {
                        let db = g.zip(self.value(a), |gv, av| gv * av)?;
                        self.accumulate(b, &db);
                    }
                }
                Op::DivElem(a, b) => {
                    if self.needs(a) {
                        let da = g.zip(self.value(b), |gv, bv| gv / bv)?;
                        self.accumulate(a, &da);
                    }
                    if self.needs(b) {
                        let av = self.value(a).clone();
                        let bv = self.value(b).clone();
                        let mut db = g.zip(&av, |gv, a_| gv * a_)?;
                        db = db.zip(&bv, |x, b_| -x / (b_ * b_))?;
                        self.accumulate(b, &db);
                    }
                }
                Op::Scale(a, c) => {
                    let da = g.map(|x| x * c);
                    self.accumulate(a, &da);
                }
                Op::AddScalar(a, _) => {
                    self.accumulate(a, &g);
                }
                Op::AddRowVec(a, v) => {
                    self.accumulate(a, &g);
                    if self.needs(v) {
                        let mut dv = Tensor::zeros(1, g.cols());
                        for r in 0..g.rows() {
                            for c in 0..g.cols() {
                                *dv.at_mut(0, c) += g.at(r, c);
                            }
                        }
                        self.accumulate(v, &dv);
                    }
                }
                Op::AddColVec(a, v) => {
                    self.accumulate(a, &g);
                    if self.needs(v) {
                        let mut dv = Tensor::zeros(g.rows(), 1);
                        for r in 0..g.rows() {
                            for c in 0..g.cols() {
                                *dv.at_mut(r, 0) += g.at(r, c);
                            }
                        }
                        self.accumulate(v, &dv);
                    }
                }
                Op::MulColVec(a, v) => {
                    if self.needs(a) {
                        let vv = self.value(v).clone();
                        let mut da = g.clone();
                        for r in 0..da.rows() {
                            let s = vv.at(r, 0);
                            for c in 0..da.cols() {
                                *da.at_mut(r, c) *= s;
                            }
                        }
                        self.accumulate(a, &da);
                    }
                    if self.needs(v) {
                        let av = self.value(a).clone();
                        let mut dv = Tensor::zeros(g.rows(), 1);
                        for r in 0..g.rows() {
                            for c in 0..g.cols() {
                                *dv.at_mut(r, 0) += g.at(r, c) * av.at(r, c);
                            }
                        }
                        self.accumulate(v, &dv);
                    }
                }
                Op::Tanh(a) => {
                    let y = self.nodes[id].value.clone();
                    let da = g.zip(&y, |gv, t| gv * (1.0 - t * t))?;
                    self.accumulate(a, &da);
                }
                Op::Softplus(a) => {
                    let x = self.value(a).clone();
                    let da = g.zip(&x, |gv, xv| gv / (1.0 + (-xv).exp()))?;
                    self.accumulate(a, &da);
                }
                Op::Sqrt(a) => {
                    let y = self.nodes[id].value.clone();
                    let da = g.zip(&y, |gv, s| gv / (2.0 * s))?;
                    self.accumulate(a, &da);
                }
                Op::Log(a) => {
                    let x = self.value(a).clone();
                    let da = g.zip(&x, |gv, xv| gv / xv)?;
                    self.accumulate(a, &da);
                }
                Op::Abs(a) => {
                    let x = self.value(a).clone();
                    let da = g.zip(&x, |gv, xv| {
                        if xv > 0.0 {
                            gv
                        } else if xv < 0.0 {
                            -gv
                        } else {
                            0.0
                        }
                    })?;
                    self.accumulate(a, &da);
                }
                Op::SoftmaxRows(a) => {
                    // ds_i = y_i * (g_i - sum_j g_j y_j), per row
                    let y = self.nodes[id].value.clone();
                    let mut da = Tensor::zeros(y.rows(), y.cols());
                    for r in 0..y.rows() {
                        let mut dot = 0.0;
                        for c in 0..y.cols() {
                            dot += g.at(r, c) * y.at(r, c);
                        }
                        for c in 0..y.cols() {
                            *da.at_mut(r, c) = y.at(r, c) * (g.at(r, c) - dot);
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::GatherRows(a, idx) => {
                    let cols = self.value(a).cols();
                    let rows = self.value(a).rows();
                    let mut da = Tensor::zeros(rows, cols);
                    for (gr, &src) in idx.iter().enumerate() {
                        for c in 0..cols {
                            *da.at_mut(src, c) += g.at(gr, c);
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::ConcatRows(parts) => {
                    let mut off = 0;
                    for &p in &parts {
                        let r = self.value(p).rows();
                        let c = self.value(p).cols();
                        if self.needs(p) {
                            let mut dp = Tensor::zeros(r, c);
                            for i in 0..r {
                                for j in 0..c {
                                    *dp.at_mut(i, j) = g.at(off + i, j);
                                }
                            }
                            self.accumulate(p, &dp);
                        }
                        off += r;
                    }
                }
                Op::ConcatCols(parts) => {
                    let mut off = 0;
                    for &p in &parts {
                        let r = self.value(p).rows();
                        let c = self.value(p).cols();
                        if self.needs(p) {
                            let mut dp = Tensor::zeros(r, c);
                            for i in 0..r {
                                for j in 0..c {
                                    *dp.at_mut(i, j) = g.at(i, off + j);
                                }
                            }
                            self.accumulate(p, &dp);
                        }
                        off += c;
                    }
                }
                Op::Reshape(a) => {
                    let shape = self.value(a).shape();
                    let da = g.reshaped(shape[0], shape[1])?;
                    self.accumulate(a, &da);
                }
                Op::SumAll(a) => {
                    let gv = g.item();
                    let shape = self.value(a).shape();
                    let da = Tensor::filled(shape[0], shape[1], gv);
                    self.accumulate(a, &da);
                }
                Op::MeanAll(a) => {
                    let n = self.value(a).numel() as f64;
                    let gv = g.item() / n;
                    let shape = self.value(a).shape();
                    let da = Tensor::filled(shape[0], shape[1], gv);
                    self.accumulate(a, &da);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_trivial_cases() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::row(vec![0.0, 0.0]));
        let s = g.softmax_rows(a);
        assert_eq!(g.value(s).data(), &[0.5, 0.5]);

        let b = g.constant(Tensor::row(vec![0.0, 2.0_f64.ln()]));
        let s = g.softmax_rows(b);
        let v = g.value(s).data();
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((v[1] - 2.0 / 3.0).abs() < 1e-15);

        // shift invariance keeps huge logits finite
        let c = g.constant(Tensor::row(vec![1000.0, 1000.0]));
        let s = g.softmax_rows(c);
        assert_eq!(g.value(s).data(), &[0.5, 0.5]);
    }

    #[test]
    fn linear_hand_case_and_identity() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::new(1, 2, vec![1.0, 2.0]).unwrap());
        let w = g.constant(Tensor::new(2, 1, vec![1.0, 1.0]).unwrap());
        let y = g.linear(x, w, None).unwrap();
        assert_eq!(g.value(y).item(), 3.0);

        let x2 = g.constant(Tensor::new(2, 2, vec![0.3, -1.2, 4.0, 0.0]).unwrap());
        let i = g.constant(Tensor::eye(2));
        let y2 = g.linear(x2, i, None).unwrap();
        assert_eq!(g.value(y2), g.value(x2));
    }

    #[test]
    fn backward_accumulates_two_consumers() {
        // loss = sum(x*x) + sum(x); dx = 2x + 1
        let mut g = Graph::new();
        let x = g.leaf(Tensor::row(vec![1.0, -2.0, 0.5]), true);
        let sq = g.mul_elem(x, x).unwrap();
        let s1 = g.sum_all(sq);
        let s2 = g.sum_all(x);
        let loss = g.add(s1, s2).unwrap();
        g.backward(loss).unwrap();
        let dx = g.grad(x).unwrap();
        assert_eq!(dx.data(), &[3.0, -3.0, 2.0]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut g = Graph::new();
        let x = g.leaf(Tensor::row(vec![1.0, 2.0]), true);
        assert!(g.backward(x).is_err());
    }

    #[test]
    fn gather_scatter_roundtrip() {
        let mut g = Graph::new();
        let x = g.leaf(Tensor::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap(), true);
        // pick row 1 twice: gradient should scatter 2x into row 1
        let picked = g.gather_rows(x, vec![1, 1]).unwrap();
        let loss = g.sum_all(picked);
        g.backward(loss).unwrap();
        let dx = g.grad(x).unwrap();
        assert_eq!(dx.data(), &[0.0, 0.0, 2.0, 2.0, 0.0, 0.0]);
    }
}
