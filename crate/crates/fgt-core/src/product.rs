//! Product-measure tokens and the query machinery.
//!
//! A product token pairs an input token `s = (x, y)` with a query token
//! `r = (x', y')`. Self-attention on the product space with block-constrained
//! weight matrices reproduces the familiar attention modules exactly; in
//! particular the cross-constrained blocks collapse the double sum over a
//! factorized measure to standard query-to-input cross-attention. Queries are
//! answered fiberwise: lift the input measure against a single query point,
//! run a product-space stack whose input part passes through untouched, and
//! read the common query value off the output fiber.

use crate::diff::Tensor;
use crate::error::{Error, Result};
use crate::measure::{Atom, DiscreteMeasure, Point};
use crate::spectral::SmoothClip;

/// One token of the product space `(input, query)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductToken {
    pub input: Vec<f64>,
    pub query: Vec<f64>,
}

impl ProductToken {
    pub fn new(input: Vec<f64>, query: Vec<f64>) -> Self {
        Self { input, query }
    }
}

/// Blocks of a product-space attention head with respect to the splitting
/// `xi = (s, r)`: `Q~ = [Q_s Q_r]`, `K~ = [K_s K_r]`, `V~ = [V_s V_r]`.
#[derive(Debug, Clone)]
pub struct BlockMatrices {
    pub q_s: Tensor,
    pub q_r: Tensor,
    pub k_s: Tensor,
    pub k_r: Tensor,
    pub v_s: Tensor,
    pub v_r: Tensor,
}

impl BlockMatrices {
    /// Cross-attention restriction: `Q_s = 0`, `K_r = 0`, `V_r = 0`.
    pub fn cross_constrained(q_r: Tensor, k_s: Tensor, v_s: Tensor) -> Self {
        let s_dim = k_s.shape[1];
        let r_dim = q_r.shape[1];
        let k_dim = q_r.shape[0];
        let v_dim = v_s.shape[0];
        Self {
            q_s: Tensor::zeros(&[k_dim, s_dim]),
            q_r,
            k_s,
            k_r: Tensor::zeros(&[k_dim, r_dim]),
            v_s,
            v_r: Tensor::zeros(&[v_dim, r_dim]),
        }
    }

    pub fn s_dim(&self) -> usize {
        self.q_s.shape[1]
    }

    pub fn r_dim(&self) -> usize {
        self.q_r.shape[1]
    }

    fn validate(&self) -> Result<()> {
        let k = self.q_s.shape[0];
        let v = self.v_s.shape[0];
        let (s, r) = (self.s_dim(), self.r_dim());
        let checks = [
            (&self.q_r.shape[..], [k, r]),
            (&self.k_s.shape[..], [k, s]),
            (&self.k_r.shape[..], [k, r]),
            (&self.v_s.shape[..], [v, s]),
            (&self.v_r.shape[..], [v, r]),
        ];
        for (shape, expected) in checks {
            if shape != expected {
                return Err(Error::ShapeMismatch("product block shapes".into()));
            }
        }
        Ok(())
    }

    fn query_of(&self, xi: &ProductToken) -> Vec<f64> {
        add_vec(&matvec(&self.q_s, &xi.input), &matvec(&self.q_r, &xi.query))
    }

    fn key_of(&self, s: &[f64], r: &[f64]) -> Vec<f64> {
        add_vec(&matvec(&self.k_s, s), &matvec(&self.k_r, r))
    }

    fn value_of(&self, s: &[f64], r: &[f64]) -> Vec<f64> {
        add_vec(&matvec(&self.v_s, s), &matvec(&self.v_r, r))
    }
}

pub(crate) fn matvec(m: &Tensor, v: &[f64]) -> Vec<f64> {
    let (rows, cols) = (m.shape[0], m.shape[1]);
    debug_assert_eq!(cols, v.len());
    (0..rows)
        .map(|r| (0..cols).map(|c| m.data[r * cols + c] * v[c]).sum())
        .collect()
}

fn add_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Lifts the input measure against one query point:
/// `mu (x) delta_{(x', 0)}`, with the query value initialized to zero and the
/// split marking the factor boundary.
pub fn fiber_lift(mu: &DiscreteMeasure, query_point: &Point) -> Result<DiscreteMeasure> {
    let n_val = mu.ambient_dim - mu.coord_split;
    let mut query = query_point.coords.clone();
    query.extend(std::iter::repeat(0.0).take(n_val));
    let delta = DiscreteMeasure::dirac(query, query_point.dim())?;
    mu.product(&delta)
}

/// Single product-space self-attention head evaluated at `xi` over the atoms
/// of `tilde_mu`, with measure-weighted stabilized softmax.
pub fn product_attend(
    tilde_mu: &DiscreteMeasure,
    xi: &ProductToken,
    blocks: &BlockMatrices,
    scale_dim: usize,
) -> Result<Vec<f64>> {
    blocks.validate()?;
    let s_dim = blocks.s_dim();
    let r_dim = blocks.r_dim();
    if tilde_mu.ambient_dim != s_dim + r_dim {
        return Err(Error::DimensionMismatch {
            expected: s_dim + r_dim,
            actual: tilde_mu.ambient_dim,
        });
    }
    if tilde_mu.is_empty() {
        return Err(Error::InvalidMeasure("empty product measure".into()));
    }
    let q = blocks.query_of(xi);
    let scale = 1.0 / (scale_dim as f64).sqrt();
    let mut logits = Vec::with_capacity(tilde_mu.len());
    for atom in &tilde_mu.atoms {
        let (s, r) = atom.location.split_at(s_dim);
        logits.push(scale * dot(&q, &blocks.key_of(s, r)));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits
        .iter()
        .zip(tilde_mu.atoms.iter())
        .map(|(&l, a)| a.weight * (l - max).exp())
        .collect();
    let z: f64 = probs.iter().sum();
    if z < 1e-300 {
        return Err(Error::InvalidMeasure("product softmax over vanishing mass".into()));
    }
    probs.iter_mut().for_each(|p| *p /= z);
    let v_dim = blocks.v_s.shape[0];
    let mut out = vec![0.0; v_dim];
    for (p, atom) in probs.iter().zip(tilde_mu.atoms.iter()) {
        let (s, r) = atom.location.split_at(s_dim);
        let v = blocks.value_of(s, r);
        for (o, vi) in out.iter_mut().zip(v.iter()) {
            *o += p * vi;
        }
    }
    Ok(out)
}

/// Standard cross-attention of a query token against the input measure:
/// `softmax_j(<Q_r r, K_s s_j>/sqrt(k)) V_s s_j` with measure weights.
pub fn cross_attend(
    r: &[f64],
    mu: &DiscreteMeasure,
    q_r: &Tensor,
    k_s: &Tensor,
    v_s: &Tensor,
    scale_dim: usize,
) -> Result<Vec<f64>> {
    if mu.is_empty() {
        return Err(Error::InvalidMeasure("empty measure".into()));
    }
    if mu.ambient_dim != k_s.shape[1] {
        return Err(Error::DimensionMismatch { expected: k_s.shape[1], actual: mu.ambient_dim });
    }
    let q = matvec(q_r, r);
    let scale = 1.0 / (scale_dim as f64).sqrt();
    let logits: Vec<f64> = mu
        .atoms
        .iter()
        .map(|a| scale * dot(&q, &matvec(k_s, &a.location)))
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits
        .iter()
        .zip(mu.atoms.iter())
        .map(|(&l, a)| a.weight * (l - max).exp())
        .collect();
    let z: f64 = probs.iter().sum();
    if z < 1e-300 {
        return Err(Error::InvalidMeasure("cross softmax over vanishing mass".into()));
    }
    probs.iter_mut().for_each(|p| *p /= z);
    let mut out = vec![0.0; v_s.shape[0]];
    for (p, a) in probs.iter().zip(mu.atoms.iter()) {
        let v = matvec(v_s, &a.location);
        for (o, vi) in out.iter_mut().zip(v.iter()) {
            *o += p * vi;
        }
    }
    Ok(out)
}

/// Reads the common query value off a single-query output fiber. All atoms
/// must agree on the query value within `1e-9`; a larger spread signals a
/// stack whose query update was not input-independent.
pub fn readout_value(tilde_mu: &DiscreteMeasure, query_spatial: usize) -> Result<Vec<f64>> {
    if tilde_mu.is_empty() {
        return Err(Error::InvalidMeasure("empty fiber".into()));
    }
    let start = tilde_mu.coord_split + query_spatial;
    let first: Vec<f64> = tilde_mu.atoms[0].location[start..].to_vec();
    let mut spread = 0.0f64;
    for atom in &tilde_mu.atoms[1..] {
        for (a, b) in atom.location[start..].iter().zip(first.iter()) {
            spread = spread.max((a - b).abs());
        }
    }
    if spread > 1e-9 {
        return Err(Error::FiberDisagreement { spread, tol: 1e-9 });
    }
    Ok(first)
}

/// One attention stage of the fiber stack. The input part `s` and the query
/// coordinate `x'` pass through; the query value is updated by
/// `y' <- R r + W Att(xi)`.
#[derive(Debug, Clone)]
pub struct FiberAttention {
    pub blocks: BlockMatrices,
    /// `n_q x (d' + n_q)` linear part acting on the query token.
    pub residual: Tensor,
    /// `n_q x v_dim` projection of the attended value.
    pub output: Tensor,
    pub scale_dim: usize,
}

/// Stages of the product-space stack run on each query fiber.
#[derive(Debug, Clone)]
pub enum FiberStage {
    Attention(FiberAttention),
    /// Pointwise MLP on the query token `r = (x', y')`, replacing `y'`.
    Mlp(crate::attention::MlpParams),
}

/// Product-space model for query evaluation: a stage list plus dimensions
/// and an optional final clip on the query value.
#[derive(Debug, Clone)]
pub struct FiberStackParams {
    pub stages: Vec<FiberStage>,
    pub query_spatial: usize,
    pub clip: Option<SmoothClip>,
}

/// Instrumentation of a query pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FiberStats {
    /// Attention logit evaluations performed across all fibers and stages.
    pub logit_evals: usize,
}

/// Answers a batch of queries fiberwise: lift, run the product stack with
/// input-part passthrough, read out. Fibers are independent, so each query's
/// answer is unaffected by the rest of the batch.
pub fn query_forward(
    mu: &DiscreteMeasure,
    queries: &[Point],
    params: &FiberStackParams,
) -> Result<(Vec<Vec<f64>>, FiberStats)> {
    let mut stats = FiberStats::default();
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        let mut fiber = fiber_lift(mu, q)?;
        let s_dim = fiber.coord_split;
        for stage in &params.stages {
            match stage {
                FiberStage::Attention(att) => {
                    stats.logit_evals += fiber.len() * fiber.len();
                    let updated: Vec<Atom> = fiber
                        .atoms
                        .iter()
                        .map(|atom| {
                            let (s, r) = atom.location.split_at(s_dim);
                            let xi = ProductToken::new(s.to_vec(), r.to_vec());
                            let attended =
                                product_attend(&fiber, &xi, &att.blocks, att.scale_dim)?;
                            let lin = matvec(&att.residual, r);
                            let proj = matvec(&att.output, &attended);
                            let mut loc = s.to_vec();
                            loc.extend_from_slice(&r[..params.query_spatial]);
                            for (l, p) in lin.iter().zip(proj.iter()) {
                                loc.push(l + p);
                            }
                            Ok(Atom::new(loc, atom.weight))
                        })
                        .collect::<Result<_>>()?;
                    fiber = DiscreteMeasure::new(updated, fiber.ambient_dim, s_dim)?;
                }
                FiberStage::Mlp(mlp) => {
                    let updated: Vec<Atom> = fiber
                        .atoms
                        .iter()
                        .map(|atom| {
                            let (s, r) = atom.location.split_at(s_dim);
                            let new_r =
                                crate::attention::mlp_forward(r, mlp, params.query_spatial)?;
                            let mut loc = s.to_vec();
                            loc.extend_from_slice(&new_r);
                            Ok(Atom::new(loc, atom.weight))
                        })
                        .collect::<Result<_>>()?;
                    let dim = updated[0].location.len();
                    fiber = DiscreteMeasure::new(updated, dim, s_dim)?;
                }
            }
        }
        let mut value = readout_value(&fiber, params.query_spatial)?;
        if let Some(clip) = &params.clip {
            value = clip.eval(&value);
        }
        out.push(value);
    }
    Ok((out, stats))
}
