use std::collections::HashMap;

use rand::Rng;

use super::nn::DropoutMode;
use super::store::{ParamId, ParamStore};
use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    AddBias(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Prelu(Var, Var),
    SoftmaxRows(Var),
    Mask(Var, Vec<f64>),
    Reshape(Var),
    ConcatCols(Vec<Var>),
    GatherRows(Var, Vec<usize>),
    ScatterAddRows(Var, Vec<usize>),
    GroupMatMulBt(Var, Var, usize),
    GroupMatMul(Var, Var, usize),
    Mse(Var, Vec<f64>),
    WeightedSum(Var, Vec<f64>),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

/// A recording of one forward computation.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    params: HashMap<ParamId, Var>,
}

/// `c = alpha * a b + beta * c` for strided row/column layouts.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    debug_assert!(m == 0 || k == 0 || (m - 1) * rsa + (k - 1) * csa < a.len());
    debug_assert!(k == 0 || n == 0 || (k - 1) * rsb + (n - 1) * csb < b.len());
    debug_assert!(m == 0 || n == 0 || (m - 1) * rsc + n - 1 < c.len());
    // SAFETY: the asserted index bounds keep every access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

fn finite(op: &'static str, t: &Tensor) -> Result<()> {
    if t.data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(op))
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op_name: &'static str, value: Tensor, op: Op) -> Result<Var> {
        finite(op_name, &value)?;
        self.nodes.push(Node { value, op });
        Ok(Var(self.nodes.len() - 1))
    }

    fn shape(&self, v: Var) -> [usize; 2] {
        self.nodes[v.0].value.shape()
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.nodes.push(Node {
            value: t,
            op: Op::Leaf,
        });
        Var(self.nodes.len() - 1)
    }

    /// Records a parameter; repeated calls for the same id share one node.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        if let Some(v) = self.params.get(&id) {
            return *v;
        }
        let v = self.constant(store.value(id).clone());
        self.params.insert(id, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let [m, k] = self.shape(a);
        let [k2, n] = self.shape(b);
        if k != k2 {
            return Err(Error::shape("matmul", format!("{m}x{k} * {k2}x{n}")));
        }
        let mut out = Tensor::zeros(m, n);
        gemm(
            m,
            k,
            n,
            &self.value(a).data,
            (k, 1),
            &self.value(b).data,
            (n, 1),
            0.0,
            &mut out.data,
            n,
        );
        self.push("matmul", out, Op::MatMul(a, b))
    }

    /// `a bᵀ` for `a: m×k`, `b: n×k`.
    pub fn matmul_bt(&mut self, a: Var, b: Var) -> Result<Var> {
        self.group_matmul_bt(a, b, 1)
    }

    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let [m, n] = self.shape(x);
        if self.shape(bias) != [1, n] {
            return Err(Error::shape(
                "add_bias",
                format!("{m}x{n} + {:?}", self.shape(bias)),
            ));
        }
        let mut out = self.value(x).clone();
        let b = &self.value(bias).data;
        for row in out.data.chunks_exact_mut(n) {
            row.iter_mut().zip(b).for_each(|(o, bv)| *o += bv);
        }
        self.push("add_bias", out, Op::AddBias(x, bias))
    }

    /// `x W + b` with `W: in×out` and `b: 1×out`.
    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let y = self.matmul(x, w)?;
        self.add_bias(y, b)
    }

    fn zip_same(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: fn(f64, f64) -> f64,
    ) -> Result<Tensor> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(
                name,
                format!("{:?} vs {:?}", self.shape(a), self.shape(b)),
            ));
        }
        let mut out = self.value(a).clone();
        out.data
            .iter_mut()
            .zip(&self.value(b).data)
            .for_each(|(x, y)| *x = f(*x, *y));
        Ok(out)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same("add", a, b, |x, y| x + y)?;
        self.push("add", out, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same("sub", a, b, |x, y| x - y)?;
        self.push("sub", out, Op::Sub(a, b))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        let mut out = self.value(a).clone();
        out.data.iter_mut().for_each(|x| *x *= s);
        self.push("scale", out, Op::Scale(a, s))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let mut out = self.value(a).clone();
        out.data.iter_mut().for_each(|x| *x = x.max(0.0));
        self.push("relu", out, Op::Relu(a))
    }

    /// Parametric ReLU with a single learned slope (`slope` is 1×1).
    pub fn prelu(&mut self, a: Var, slope: Var) -> Result<Var> {
        if self.shape(slope) != [1, 1] {
            return Err(Error::shape("prelu", "slope must be 1x1"));
        }
        let s = self.value(slope).data[0];
        let mut out = self.value(a).clone();
        out.data
            .iter_mut()
            .for_each(|x| *x = if *x > 0.0 { *x } else { s * *x });
        self.push("prelu", out, Op::Prelu(a, slope))
    }

    /// Row-wise softmax, stabilized by subtracting each row's maximum.
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let [_, n] = self.shape(a);
        let mut out = self.value(a).clone();
        for row in out.data.chunks_exact_mut(n) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                sum += *x;
            }
            row.iter_mut().for_each(|x| *x /= sum);
        }
        self.push("softmax_rows", out, Op::SoftmaxRows(a))
    }

    /// Inverted dropout. `Off` (or a zero rate) records nothing and returns `x`.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        x: Var,
        rate: f64,
        mode: DropoutMode,
        rng: &mut R,
    ) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::invalid(format!(
                "dropout rate {rate} outside [0, 1)"
            )));
        }
        if mode == DropoutMode::Off || rate == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 - rate;
        let scale = 1.0 / keep;
        let mask: Vec<f64> = (0..self.value(x).len())
            .map(|_| {
                if rng.random::<f64>() < keep {
                    scale
                } else {
                    0.0
                }
            })
            .collect();
        let mut out = self.value(x).clone();
        out.data.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
        self.push("dropout", out, Op::Mask(x, mask))
    }

    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Result<Var> {
        let out = self.value(a).clone().reshaped(rows, cols)?;
        self.push("reshape", out, Op::Reshape(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(first) = parts.first() else {
            return Err(Error::shape("concat_cols", "no inputs"));
        };
        let m = self.shape(*first)[0];
        if parts.iter().any(|p| self.shape(*p)[0] != m) {
            return Err(Error::shape("concat_cols", "row counts differ"));
        }
        let n: usize = parts.iter().map(|p| self.shape(*p)[1]).sum();
        let mut out = Tensor::zeros(m, n);
        for r in 0..m {
            let mut off = 0;
            for p in parts {
                let src = self.value(*p).row_slice(r);
                out.data[r * n + off..r * n + off + src.len()].copy_from_slice(src);
                off += src.len();
            }
        }
        self.push("concat_cols", out, Op::ConcatCols(parts.to_vec()))
    }

    /// Output row `i` is input row `index[i]`.
    pub fn gather_rows(&mut self, a: Var, index: &[usize]) -> Result<Var> {
        let [m, n] = self.shape(a);
        if index.is_empty() || index.iter().any(|&i| i >= m) {
            return Err(Error::shape(
                "gather_rows",
                format!("index out of range for {m} rows"),
            ));
        }
        let src = self.value(a);
        let mut data = Vec::with_capacity(index.len() * n);
        for &i in index {
            data.extend_from_slice(src.row_slice(i));
        }
        let out = Tensor::new(index.len(), n, data)?;
        self.push("gather_rows", out, Op::GatherRows(a, index.to_vec()))
    }

    /// Sums input row `i` into output row `target[i]`, visiting rows in input order.
    pub fn scatter_add_rows(&mut self, a: Var, target: &[usize], out_rows: usize) -> Result<Var> {
        let [m, n] = self.shape(a);
        if target.len() != m || target.iter().any(|&t| t >= out_rows) {
            return Err(Error::shape("scatter_add_rows", "target index mismatch"));
        }
        let mut out = Tensor::zeros(out_rows, n);
        let src = self.value(a);
        for (i, &t) in target.iter().enumerate() {
            out.data[t * n..(t + 1) * n]
                .iter_mut()
                .zip(src.row_slice(i))
                .for_each(|(o, s)| *o += s);
        }
        self.push(
            "scatter_add_rows",
            out,
            Op::ScatterAddRows(a, target.to_vec()),
        )
    }

    fn group_dims(
        &self,
        op: &'static str,
        a: Var,
        b: Var,
        groups: usize,
    ) -> Result<(usize, usize)> {
        let [ra, _] = self.shape(a);
        let [rb, _] = self.shape(b);
        if groups == 0 || ra % groups != 0 || rb % groups != 0 {
            return Err(Error::shape(
                op,
                format!("{ra} / {rb} rows not divisible into {groups} groups"),
            ));
        }
        Ok((ra / groups, rb / groups))
    }

    /// Block-diagonal `a bᵀ`: group `g` multiplies the `g`-th row blocks of `a` and `b`.
    pub fn group_matmul_bt(&mut self, a: Var, b: Var, groups: usize) -> Result<Var> {
        let (m, n) = self.group_dims("matmul_bt", a, b, groups)?;
        let k = self.shape(a)[1];
        if self.shape(b)[1] != k {
            return Err(Error::shape(
                "matmul_bt",
                format!("widths {} vs {}", k, self.shape(b)[1]),
            ));
        }
        let mut out = Tensor::zeros(groups * m, n);
        let (ad, bd) = (&self.value(a).data, &self.value(b).data);
        for g in 0..groups {
            gemm(
                m,
                k,
                n,
                &ad[g * m * k..],
                (k, 1),
                &bd[g * n * k..],
                (1, k),
                0.0,
                &mut out.data[g * m * n..],
                n,
            );
        }
        self.push("matmul_bt", out, Op::GroupMatMulBt(a, b, groups))
    }

    /// Block-diagonal `a b`: `a` has `m` rows per group and `n` columns, `b` has `n` rows per group.
    pub fn group_matmul(&mut self, a: Var, b: Var, groups: usize) -> Result<Var> {
        let (m, n) = self.group_dims("group_matmul", a, b, groups)?;
        if self.shape(a)[1] != n {
            return Err(Error::shape(
                "group_matmul",
                format!("inner width {} vs {} rows per group", self.shape(a)[1], n),
            ));
        }
        let d = self.shape(b)[1];
        let mut out = Tensor::zeros(groups * m, d);
        let (ad, bd) = (&self.value(a).data, &self.value(b).data);
        for g in 0..groups {
            gemm(
                m,
                n,
                d,
                &ad[g * m * n..],
                (n, 1),
                &bd[g * n * d..],
                (d, 1),
                0.0,
                &mut out.data[g * m * d..],
                d,
            );
        }
        self.push("group_matmul", out, Op::GroupMatMul(a, b, groups))
    }

    /// `softmax(q kᵀ / sqrt(d_k)) v`, independently for each of `groups` row blocks.
    pub fn attention(&mut self, q: Var, k: Var, v: Var, groups: usize) -> Result<Var> {
        let [_, dk] = self.shape(q);
        if self.shape(k)[0] != self.shape(v)[0] {
            return Err(Error::shape(
                "attention",
                format!("{} keys vs {} values", self.shape(k)[0], self.shape(v)[0]),
            ));
        }
        let scores = self.group_matmul_bt(q, k, groups)?;
        let scores = self.scale(scores, 1.0 / (dk as f64).sqrt())?;
        let weights = self.softmax_rows(scores)?;
        self.group_matmul(weights, v, groups)
    }

    pub fn scaled_dot_attention(&mut self, q: Var, k: Var, v: Var) -> Result<Var> {
        self.attention(q, k, v, 1)
    }

    /// Mean squared error against a constant target; a 1×1 result.
    pub fn mse_loss(&mut self, pred: Var, target: &Tensor) -> Result<Var> {
        if self.shape(pred) != target.shape() {
            return Err(Error::shape(
                "mse_loss",
                format!("{:?} vs {:?}", self.shape(pred), target.shape()),
            ));
        }
        let p = self.value(pred);
        let diff: Vec<f64> = p
            .data
            .iter()
            .zip(&target.data)
            .map(|(a, b)| a - b)
            .collect();
        let loss = diff.iter().map(|d| d * d).sum::<f64>() / diff.len() as f64;
        self.push("mse_loss", Tensor::scalar(loss), Op::Mse(pred, diff))
    }

    /// `Σ a ⊙ w` for a constant `w`; a 1×1 result.
    pub fn weighted_sum(&mut self, a: Var, w: &Tensor) -> Result<Var> {
        if self.shape(a) != w.shape() {
            return Err(Error::shape("weighted_sum", "weight shape mismatch"));
        }
        let s = self
            .value(a)
            .data
            .iter()
            .zip(&w.data)
            .map(|(x, y)| x * y)
            .sum();
        self.push(
            "weighted_sum",
            Tensor::scalar(s),
            Op::WeightedSum(a, w.data.clone()),
        )
    }

    /// Reverse pass from a scalar output.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.shape(loss) != [1, 1] {
            return Err(Error::shape(
                "backward",
                format!("expected a scalar, got {:?}", self.shape(loss)),
            ));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        for g in grads.iter().flatten() {
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("backward"));
            }
        }
        Ok(Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| n.value.shape()).collect(),
            params: self.params.iter().map(|(id, v)| (*id, *v)).collect(),
        })
    }

    fn propagate(&self, idx: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[idx];
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let [m, k] = self.shape(*a);
                let n = self.shape(*b)[1];
                let (av, bv) = (&self.value(*a).data, &self.value(*b).data);
                gemm(
                    m,
                    n,
                    k,
                    g,
                    (n, 1),
                    bv,
                    (1, n),
                    1.0,
                    acc(&self.nodes, grads, *a),
                    k,
                );
                gemm(
                    k,
                    m,
                    n,
                    av,
                    (1, k),
                    g,
                    (n, 1),
                    1.0,
                    acc(&self.nodes, grads, *b),
                    n,
                );
            }
            Op::GroupMatMulBt(a, b, groups) => {
                let k = self.shape(*a)[1];
                let m = self.shape(*a)[0] / groups;
                let n = self.shape(*b)[0] / groups;
                let (av, bv) = (&self.value(*a).data, &self.value(*b).data);
                for gi in 0..*groups {
                    let gg = &g[gi * m * n..];
                    gemm(
                        m,
                        n,
                        k,
                        gg,
                        (n, 1),
                        &bv[gi * n * k..],
                        (k, 1),
                        1.0,
                        &mut acc(&self.nodes, grads, *a)[gi * m * k..],
                        k,
                    );
                    gemm(
                        n,
                        m,
                        k,
                        gg,
                        (1, n),
                        &av[gi * m * k..],
                        (k, 1),
                        1.0,
                        &mut acc(&self.nodes, grads, *b)[gi * n * k..],
                        k,
                    );
                }
            }
            Op::GroupMatMul(a, b, groups) => {
                let n = self.shape(*a)[1];
                let m = self.shape(*a)[0] / groups;
                let d = self.shape(*b)[1];
                let (av, bv) = (&self.value(*a).data, &self.value(*b).data);
                for gi in 0..*groups {
                    let gg = &g[gi * m * d..];
                    // dA = dC Bᵀ, dB = Aᵀ dC
                    gemm(
                        m,
                        d,
                        n,
                        gg,
                        (d, 1),
                        &bv[gi * n * d..],
                        (1, d),
                        1.0,
                        &mut acc(&self.nodes, grads, *a)[gi * m * n..],
                        n,
                    );
                    gemm(
                        n,
                        m,
                        d,
                        &av[gi * m * n..],
                        (1, n),
                        gg,
                        (d, 1),
                        1.0,
                        &mut acc(&self.nodes, grads, *b)[gi * n * d..],
                        d,
                    );
                }
            }
            Op::AddBias(x, b) => {
                let n = self.shape(*x)[1];
                acc(&self.nodes, grads, *x)
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, v)| *o += v);
                let gb = acc(&self.nodes, grads, *b);
                for row in g.chunks_exact(n) {
                    gb.iter_mut().zip(row).for_each(|(o, v)| *o += v);
                }
            }
            Op::Add(a, b) => {
                acc(&self.nodes, grads, *a)
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, v)| *o += v);
                acc(&self.nodes, grads, *b)
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, v)| *o += v);
            }
            Op::Sub(a, b) => {
                acc(&self.nodes, grads, *a)
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, v)| *o += v);
                acc(&self.nodes, grads, *b)
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, v)| *o -= v);
            }
            Op::Scale(a, s) => {
                acc(&self.nodes, grads, *a)
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, v)| *o += s * v);
            }
            Op::Relu(a) => {
                let x = &self.value(*a).data;
                acc(&self.nodes, grads, *a)
                    .iter_mut()
                    .zip(g.iter().zip(x))
                    .for_each(|(o, (v, xi))| {
                        if *xi > 0.0 {
                            *o += v
                        }
                    });
            }
            Op::Prelu(a, slope) => {
                let x = &self.value(*a).data;
                let s = self.value(*slope).data[0];
                let mut ds = 0.0;
                let ga = acc(&self.nodes, grads, *a);
                for ((o, v), xi) in ga.iter_mut().zip(g).zip(x) {
                    if *xi > 0.0 {
                        *o += v;
                    } else {
                        *o += s * v;
                        ds += xi * v;
                    }
                }
                acc(&self.nodes, grads, *slope)[0] += ds;
            }
            Op::SoftmaxRows(a) => {
                let y = &node.value;
                let n = y.cols;
                let ga = acc(&self.nodes, grads, *a);
                for ((yr, gr), out) in y
                    .data
                    .chunks_exact(n)
                    .zip(g.chunks_exact(n))
                    .zip(ga.chunks_exact_mut(n))
                {
                    let dot: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                    for ((o, yi), gi) in out.iter_mut().zip(yr).zip(gr) {
                        *o += yi * (gi - dot);
                    }
                }
            }
            Op::Mask(a, mask) => {
                acc(&self.nodes, grads, *a)
                    .iter_mut()
                    .zip(g.iter().zip(mask))
                    .for_each(|(o, (v, m))| *o += v * m);
            }
            Op::Reshape(a) => {
                acc(&self.nodes, grads, *a)
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, v)| *o += v);
            }
            Op::ConcatCols(parts) => {
                let n = node.value.cols;
                let m = node.value.rows;
                let mut off = 0;
                for p in parts {
                    let w = self.shape(*p)[1];
                    let gp = acc(&self.nodes, grads, *p);
                    for r in 0..m {
                        gp[r * w..(r + 1) * w]
                            .iter_mut()
                            .zip(&g[r * n + off..r * n + off + w])
                            .for_each(|(o, v)| *o += v);
                    }
                    off += w;
                }
            }
            Op::GatherRows(a, index) => {
                let n = node.value.cols;
                let ga = acc(&self.nodes, grads, *a);
                for (i, &src) in index.iter().enumerate() {
                    ga[src * n..(src + 1) * n]
                        .iter_mut()
                        .zip(&g[i * n..(i + 1) * n])
                        .for_each(|(o, v)| *o += v);
                }
            }
            Op::ScatterAddRows(a, target) => {
                let n = node.value.cols;
                let ga = acc(&self.nodes, grads, *a);
                for (i, &t) in target.iter().enumerate() {
                    ga[i * n..(i + 1) * n]
                        .iter_mut()
                        .zip(&g[t * n..(t + 1) * n])
                        .for_each(|(o, v)| *o += v);
                }
            }
            Op::Mse(pred, diff) => {
                let c = 2.0 * g[0] / diff.len() as f64;
                acc(&self.nodes, grads, *pred)
                    .iter_mut()
                    .zip(diff)
                    .for_each(|(o, d)| *o += c * d);
            }
            Op::WeightedSum(a, w) => {
                acc(&self.nodes, grads, *a)
                    .iter_mut()
                    .zip(w)
                    .for_each(|(o, wi)| *o += g[0] * wi);
            }
        }
    }
}

fn acc<'a>(nodes: &[Node], grads: &'a mut [Option<Vec<f64>>], v: Var) -> &'a mut Vec<f64> {
    let len = nodes[v.0].value.len();
    grads[v.0].get_or_insert_with(|| vec![0.0; len])
}

/// Result of [`Graph::backward`]: one gradient per recorded value that the output depends on.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<[usize; 2]>,
    params: Vec<(ParamId, Var)>,
}

impl Gradients {
    /// Gradient of the output with respect to `v`; zeros if the output does not depend on it.
    pub fn get(&self, v: Var) -> Tensor {
        let [r, c] = self.shapes[v.0];
        match &self.grads[v.0] {
            Some(g) => Tensor {
                rows: r,
                cols: c,
                data: g.clone(),
            },
            None => Tensor::zeros(r, c),
        }
    }

    /// Adds parameter gradients into the store's `grad` buffers.
    pub fn accumulate(&self, store: &mut ParamStore) {
        for (id, v) in &self.params {
            if let Some(g) = &self.grads[v.0] {
                store
                    .grad_mut(*id)
                    .data
                    .iter_mut()
                    .zip(g)
                    .for_each(|(o, x)| *o += x);
            }
        }
    }
}
