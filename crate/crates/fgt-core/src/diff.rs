//! Minimal reverse-mode differentiation over the tensor operations the
//! attention stack needs, plus finite-difference gradient verification.
//!
//! The primitive set is deliberately small: matrix-vector multiply, add,
//! scale, elementwise tanh, a stabilized measure-weighted softmax, weighted
//! sums over atoms, the smooth clip, and the structural concat/slice/dot
//! pieces that glue tokens together. Accumulation is f64 with a fixed
//! per-node order, so gradients are bit-reproducible.

use crate::error::{Error, Result};
use crate::spectral::SmoothClip;

/// Dense row-major tensor; rank 0 (scalar), 1 (vector) or 2 (matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn scalar(v: f64) -> Self {
        Self { shape: vec![], data: vec![v] }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self { shape: vec![data.len()], data }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { shape: vec![rows, cols], data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product::<usize>().max(1);
        Self { shape: shape.to_vec(), data: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_scalar(&self) -> Result<f64> {
        if self.data.len() != 1 {
            return Err(Error::ShapeMismatch("expected a scalar".into()));
        }
        Ok(self.data[0])
    }
}

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatVec(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, f64),
    AddN(Vec<Var>),
    Tanh(Var),
    Dot(Var, Var),
    Concat(Var, Var),
    Slice(Var, usize, usize),
    SoftmaxWeighted(Var, Vec<f64>),
    WeightedSum(Vec<Var>, Var),
    SmoothClipOp(Var, SmoothClip),
    SquaredNorm(Var),
}

/// Topologically ordered record of primitive operations. Values are computed
/// eagerly; [`Tape::backward_grads`] replays the record in reverse.
#[derive(Debug, Default)]
pub struct Tape {
    ops: Vec<Op>,
    values: Vec<Tensor>,
    params: Vec<Var>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        let id = self.ops.len();
        self.ops.push(op);
        self.values.push(value);
        Var(id)
    }

    /// Constant leaf; no gradient is accumulated for it.
    pub fn input(&mut self, t: Tensor) -> Var {
        self.push(Op::Leaf, t)
    }

    /// Differentiable leaf, tracked in registration order.
    pub fn param(&mut self, t: Tensor) -> Var {
        let v = self.push(Op::Leaf, t);
        self.params.push(v);
        v
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.values[v.0]
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn matvec(&mut self, m: Var, v: Var) -> Result<Var> {
        let (mt, vt) = (&self.values[m.0], &self.values[v.0]);
        let [rows, cols] = mt.shape[..] else {
            return Err(Error::ShapeMismatch("matvec needs a matrix".into()));
        };
        if vt.len() != cols {
            return Err(Error::ShapeMismatch(format!(
                "matvec {rows}x{cols} against vector of length {}",
                vt.len()
            )));
        }
        let mut out = vec![0.0; rows];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &mt.data[r * cols..(r + 1) * cols];
            *o = row.iter().zip(vt.data.iter()).map(|(a, b)| a * b).sum();
        }
        Ok(self.push(Op::MatVec(m, v), Tensor::vector(out)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (at, bt) = (&self.values[a.0], &self.values[b.0]);
        if at.shape != bt.shape {
            return Err(Error::ShapeMismatch("add with different shapes".into()));
        }
        let data = at.data.iter().zip(bt.data.iter()).map(|(x, y)| x + y).collect();
        let shape = at.shape.clone();
        Ok(self.push(Op::Add(a, b), Tensor { shape, data }))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (at, bt) = (&self.values[a.0], &self.values[b.0]);
        if at.shape != bt.shape {
            return Err(Error::ShapeMismatch("sub with different shapes".into()));
        }
        let data = at.data.iter().zip(bt.data.iter()).map(|(x, y)| x - y).collect();
        let shape = at.shape.clone();
        Ok(self.push(Op::Sub(a, b), Tensor { shape, data }))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let at = &self.values[a.0];
        let data = at.data.iter().map(|x| c * x).collect();
        let shape = at.shape.clone();
        self.push(Op::Scale(a, c), Tensor { shape, data })
    }

    pub fn add_n(&mut self, xs: &[Var]) -> Result<Var> {
        let first = xs
            .first()
            .ok_or_else(|| Error::ShapeMismatch("add_n of nothing".into()))?;
        let shape = self.values[first.0].shape.clone();
        let mut data = vec![0.0; self.values[first.0].len()];
        for &x in xs {
            let xt = &self.values[x.0];
            if xt.shape != shape {
                return Err(Error::ShapeMismatch("add_n with different shapes".into()));
            }
            for (d, v) in data.iter_mut().zip(xt.data.iter()) {
                *d += v;
            }
        }
        Ok(self.push(Op::AddN(xs.to_vec()), Tensor { shape, data }))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let at = &self.values[a.0];
        let data = at.data.iter().map(|x| x.tanh()).collect();
        let shape = at.shape.clone();
        self.push(Op::Tanh(a), Tensor { shape, data })
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        let (at, bt) = (&self.values[a.0], &self.values[b.0]);
        if at.len() != bt.len() {
            return Err(Error::ShapeMismatch("dot with different lengths".into()));
        }
        let v = at.data.iter().zip(bt.data.iter()).map(|(x, y)| x * y).sum();
        Ok(self.push(Op::Dot(a, b), Tensor::scalar(v)))
    }

    pub fn concat(&mut self, a: Var, b: Var) -> Var {
        let (at, bt) = (&self.values[a.0], &self.values[b.0]);
        let mut data = Vec::with_capacity(at.len() + bt.len());
        data.extend_from_slice(&at.data);
        data.extend_from_slice(&bt.data);
        self.push(Op::Concat(a, b), Tensor::vector(data))
    }

    pub fn slice(&mut self, a: Var, from: usize, to: usize) -> Result<Var> {
        let at = &self.values[a.0];
        if from > to || to > at.len() {
            return Err(Error::ShapeMismatch(format!(
                "slice {from}..{to} of a vector of length {}",
                at.len()
            )));
        }
        let data = at.data[from..to].to_vec();
        Ok(self.push(Op::Slice(a, from, to), Tensor::vector(data)))
    }

    /// Measure-weighted softmax with max-logit stabilization:
    /// `p_j = w_j exp(l_j) / sum_k w_k exp(l_k)`. The weights are constants.
    pub fn softmax_weighted(&mut self, logits: Var, weights: &[f64]) -> Result<Var> {
        let lt = &self.values[logits.0];
        if lt.len() != weights.len() {
            return Err(Error::ShapeMismatch("softmax weights/logits mismatch".into()));
        }
        let max = lt.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::NonFinite("softmax logits"));
        }
        let mut p: Vec<f64> = lt
            .data
            .iter()
            .zip(weights.iter())
            .map(|(&l, &w)| w * (l - max).exp())
            .collect();
        let z: f64 = p.iter().sum();
        if z < 1e-300 {
            return Err(Error::InvalidMeasure("softmax over vanishing weights".into()));
        }
        for v in p.iter_mut() {
            *v /= z;
        }
        Ok(self.push(Op::SoftmaxWeighted(logits, weights.to_vec()), Tensor::vector(p)))
    }

    /// Attention readout `sum_j p_j v_j` over per-atom vectors.
    pub fn weighted_sum(&mut self, vecs: &[Var], p: Var) -> Result<Var> {
        let pt = &self.values[p.0];
        if pt.len() != vecs.len() {
            return Err(Error::ShapeMismatch("weighted_sum arity mismatch".into()));
        }
        let dim = self.values[vecs[0].0].len();
        let mut out = vec![0.0; dim];
        for (j, &v) in vecs.iter().enumerate() {
            let vt = &self.values[v.0];
            if vt.len() != dim {
                return Err(Error::ShapeMismatch("weighted_sum vector widths differ".into()));
            }
            let w = pt.data[j];
            for (o, x) in out.iter_mut().zip(vt.data.iter()) {
                *o += w * x;
            }
        }
        Ok(self.push(Op::WeightedSum(vecs.to_vec(), p), Tensor::vector(out)))
    }

    pub fn smooth_clip(&mut self, a: Var, clip: SmoothClip) -> Var {
        let at = &self.values[a.0];
        let data = at.data.iter().map(|&x| clip.eval1(x)).collect();
        let shape = at.shape.clone();
        self.push(Op::SmoothClipOp(a, clip), Tensor { shape, data })
    }

    pub fn squared_norm(&mut self, a: Var) -> Var {
        let at = &self.values[a.0];
        let v = at.data.iter().map(|x| x * x).sum();
        self.push(Op::SquaredNorm(a), Tensor::scalar(v))
    }

    /// Reverse sweep from a scalar loss; returns one gradient per registered
    /// parameter, in registration order.
    pub fn backward_grads(&self, loss: Var) -> Result<Vec<Tensor>> {
        if self.values[loss.0].len() != 1 {
            return Err(Error::ShapeMismatch("loss must be scalar".into()));
        }
        let mut adjoint: Vec<Option<Vec<f64>>> = vec![None; self.ops.len()];
        adjoint[loss.0] = Some(vec![1.0]);

        fn bump(slot: &mut Option<Vec<f64>>, len: usize) -> &mut Vec<f64> {
            slot.get_or_insert_with(|| vec![0.0; len])
        }

        for id in (0..=loss.0).rev() {
            let Some(g) = adjoint[id].take() else { continue };
            match &self.ops[id] {
                Op::Leaf => {
                    adjoint[id] = Some(g);
                }
                Op::MatVec(m, v) => {
                    let cols = self.values[v.0].len();
                    let rows = g.len();
                    {
                        let vd = self.values[v.0].data.clone();
                        let gm = bump(&mut adjoint[m.0], rows * cols);
                        for r in 0..rows {
                            for c in 0..cols {
                                gm[r * cols + c] += g[r] * vd[c];
                            }
                        }
                    }
                    {
                        let md = self.values[m.0].data.clone();
                        let gv = bump(&mut adjoint[v.0], cols);
                        for r in 0..rows {
                            for (c, gvc) in gv.iter_mut().enumerate() {
                                *gvc += md[r * cols + c] * g[r];
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    for &src in &[*a, *b] {
                        let ga = bump(&mut adjoint[src.0], g.len());
                        for (x, y) in ga.iter_mut().zip(g.iter()) {
                            *x += y;
                        }
                    }
                }
                Op::Sub(a, b) => {
                    {
                        let ga = bump(&mut adjoint[a.0], g.len());
                        for (x, y) in ga.iter_mut().zip(g.iter()) {
                            *x += y;
                        }
                    }
                    {
                        let gb = bump(&mut adjoint[b.0], g.len());
                        for (x, y) in gb.iter_mut().zip(g.iter()) {
                            *x -= y;
                        }
                    }
                }
                Op::Scale(a, c) => {
                    let ga = bump(&mut adjoint[a.0], g.len());
                    for (x, y) in ga.iter_mut().zip(g.iter()) {
                        *x += c * y;
                    }
                }
                Op::AddN(xs) => {
                    for &x in xs {
                        let gx = bump(&mut adjoint[x.0], g.len());
                        for (a, b) in gx.iter_mut().zip(g.iter()) {
                            *a += b;
                        }
                    }
                }
                Op::Tanh(a) => {
                    let out = self.values[id].data.clone();
                    let ga = bump(&mut adjoint[a.0], g.len());
                    for ((x, y), t) in ga.iter_mut().zip(g.iter()).zip(out.iter()) {
                        *x += y * (1.0 - t * t);
                    }
                }
                Op::Dot(a, b) => {
                    let s = g[0];
                    {
                        let bd = self.values[b.0].data.clone();
                        let ga = bump(&mut adjoint[a.0], bd.len());
                        for (x, y) in ga.iter_mut().zip(bd.iter()) {
                            *x += s * y;
                        }
                    }
                    {
                        let ad = self.values[a.0].data.clone();
                        let gb = bump(&mut adjoint[b.0], ad.len());
                        for (x, y) in gb.iter_mut().zip(ad.iter()) {
                            *x += s * y;
                        }
                    }
                }
                Op::Concat(a, b) => {
                    let na = self.values[a.0].len();
                    {
                        let ga = bump(&mut adjoint[a.0], na);
                        for (x, y) in ga.iter_mut().zip(g[..na].iter()) {
                            *x += y;
                        }
                    }
                    {
                        let gb = bump(&mut adjoint[b.0], g.len() - na);
                        for (x, y) in gb.iter_mut().zip(g[na..].iter()) {
                            *x += y;
                        }
                    }
                }
                Op::Slice(a, from, _to) => {
                    let ga = bump(&mut adjoint[a.0], self.values[a.0].len());
                    for (k, y) in g.iter().enumerate() {
                        ga[from + k] += y;
                    }
                }
                Op::SoftmaxWeighted(logits, _) => {
                    // dl = p .* (g - <g, p>)
                    let p = self.values[id].data.clone();
                    let inner: f64 = g.iter().zip(p.iter()).map(|(x, y)| x * y).sum();
                    let gl = bump(&mut adjoint[logits.0], p.len());
                    for ((x, &gi), &pi) in gl.iter_mut().zip(g.iter()).zip(p.iter()) {
                        *x += pi * (gi - inner);
                    }
                }
                Op::WeightedSum(vecs, p) => {
                    let pd = self.values[p.0].data.clone();
                    for (j, &v) in vecs.iter().enumerate() {
                        let gv = bump(&mut adjoint[v.0], g.len());
                        for (x, y) in gv.iter_mut().zip(g.iter()) {
                            *x += pd[j] * y;
                        }
                    }
                    let mut gp = vec![0.0; vecs.len()];
                    for (j, &v) in vecs.iter().enumerate() {
                        let vd = &self.values[v.0].data;
                        gp[j] = vd.iter().zip(g.iter()).map(|(x, y)| x * y).sum();
                    }
                    let slot = bump(&mut adjoint[p.0], vecs.len());
                    for (x, y) in slot.iter_mut().zip(gp.iter()) {
                        *x += y;
                    }
                }
                Op::SmoothClipOp(a, clip) => {
                    let inp = self.values[a.0].data.clone();
                    let ga = bump(&mut adjoint[a.0], g.len());
                    for ((x, y), &t) in ga.iter_mut().zip(g.iter()).zip(inp.iter()) {
                        *x += y * clip.derivative1(t);
                    }
                }
                Op::SquaredNorm(a) => {
                    let s = 2.0 * g[0];
                    let ad = self.values[a.0].data.clone();
                    let ga = bump(&mut adjoint[a.0], ad.len());
                    for (x, y) in ga.iter_mut().zip(ad.iter()) {
                        *x += s * y;
                    }
                }
            }
        }

        let grads = self
            .params
            .iter()
            .map(|&v| {
                let shape = self.values[v.0].shape.clone();
                match adjoint[v.0].take() {
                    Some(data) => Tensor { shape, data },
                    None => Tensor::zeros(&shape),
                }
            })
            .collect();
        Ok(grads)
    }
}

/// Central-difference verification of the tape gradient of `build`, a scalar
/// function of the given parameter tensors. Returns the maximum relative
/// error over all coordinates, with per-coordinate denominator
/// `max(|analytic|, |numeric|, 1e-8)`.
pub fn grad_check<F>(params: &[Tensor], step: f64, build: F) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::InvalidParameter(format!(
            "grad_check step {step} outside [1e-7, 1e-3]"
        )));
    }
    let grads = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = params.iter().map(|t| tape.param(t.clone())).collect();
        let loss = build(&mut tape, &vars)?;
        tape.value(loss).as_scalar()?;
        tape.backward_grads(loss)?
    };

    let mut max_rel = 0.0f64;
    let mut work: Vec<Tensor> = params.to_vec();
    for (pi, p) in params.iter().enumerate() {
        for ci in 0..p.len() {
            work[pi].data[ci] = p.data[ci] + step;
            let plus = value_only(&work, &build)?;
            work[pi].data[ci] = p.data[ci] - step;
            let minus = value_only(&work, &build)?;
            work[pi].data[ci] = p.data[ci];
            let numeric = (plus - minus) / (2.0 * step);
            let analytic = grads[pi].data[ci];
            if !numeric.is_finite() || !analytic.is_finite() {
                return Err(Error::NonFinite("grad_check"));
            }
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            max_rel = max_rel.max((analytic - numeric).abs() / denom);
        }
    }
    Ok(max_rel)
}

fn value_only<F>(tensors: &[Tensor], build: &F) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = tensors.iter().map(|t| tape.param(t.clone())).collect();
    let loss = build(&mut tape, &vars)?;
    tape.value(loss).as_scalar()
}
