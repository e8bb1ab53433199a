//! Measure-theoretic softmax attention with coordinate passthrough.
//!
//! A layer maps a token `z = (x, y)` to `(x, W_L z + sum_h W^h Att^h(z))`
//! where each head attends over the atoms of the current measure with
//! measure-weighted softmax. Layers and pointwise MLP blocks compose with the
//! diamond rule: every layer sees the push-forward measure produced by the
//! blocks before it. The spatial coordinate is copied bit-exactly throughout,
//! so graph measures stay graph measures.

use crate::diff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::spectral::SmoothClip;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-head query/key/value/output matrices.
#[derive(Debug, Clone)]
pub struct HeadParams {
    /// `k_dim x in_dim`
    pub query: Tensor,
    /// `k_dim x in_dim`
    pub key: Tensor,
    /// `head_dim x in_dim`
    pub value: Tensor,
    /// `out_dim x head_dim`
    pub output: Tensor,
}

impl HeadParams {
    pub fn key_dim(&self) -> usize {
        self.query.shape[0]
    }

    pub fn in_dim(&self) -> usize {
        self.query.shape[1]
    }

    pub fn out_dim(&self) -> usize {
        self.output.shape[0]
    }

    fn validate(&self) -> Result<()> {
        let k = self.key_dim();
        let d_in = self.in_dim();
        if self.key.shape != [k, d_in] {
            return Err(Error::ShapeMismatch("head key shape".into()));
        }
        if self.value.shape[1] != d_in {
            return Err(Error::ShapeMismatch("head value shape".into()));
        }
        if self.output.shape[1] != self.value.shape[0] {
            return Err(Error::ShapeMismatch("head output shape".into()));
        }
        for t in [&self.query, &self.key, &self.value, &self.output] {
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("head parameters"));
            }
        }
        Ok(())
    }
}

/// One attention layer: residual map plus a bank of heads with equal output
/// width.
#[derive(Debug, Clone)]
pub struct LayerParams {
    /// `out_dim x in_dim` linear part of the in-context map.
    pub residual: Tensor,
    pub heads: Vec<HeadParams>,
}

impl LayerParams {
    pub fn in_dim(&self) -> usize {
        self.residual.shape[1]
    }

    pub fn out_dim(&self) -> usize {
        self.residual.shape[0]
    }

    pub fn validate(&self) -> Result<()> {
        for head in &self.heads {
            head.validate()?;
            if head.in_dim() != self.in_dim() || head.out_dim() != self.out_dim() {
                return Err(Error::ShapeMismatch("head width disagrees with layer".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Linear,
}

/// Pointwise MLP acting on the full token; the block output keeps the
/// spatial part and replaces the value part by the MLP image.
#[derive(Debug, Clone)]
pub struct MlpParams {
    pub weights: Vec<Tensor>,
    pub biases: Vec<Tensor>,
    pub activation: Activation,
}

impl MlpParams {
    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.weights.iter().map(|m| m.shape[1]).collect();
        if let Some(last) = self.weights.last() {
            w.push(last.shape[0]);
        }
        w
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.biases.len() || self.weights.is_empty() {
            return Err(Error::ShapeMismatch("mlp weights/biases mismatch".into()));
        }
        for (w, b) in self.weights.iter().zip(self.biases.iter()) {
            if b.len() != w.shape[0] {
                return Err(Error::ShapeMismatch("mlp bias width".into()));
            }
        }
        for win in self.weights.windows(2) {
            if win[1].shape[1] != win[0].shape[0] {
                return Err(Error::ShapeMismatch("mlp consecutive widths".into()));
            }
        }
        Ok(())
    }
}

/// Stack architecture: layer count, widths, warp constant, and the final
/// value clip.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackConfig {
    pub spatial_dim: usize,
    /// Token value width `n` at input and output.
    pub value_dim: usize,
    pub n_layers: usize,
    /// Interior value width; defaults to `4d + 4n`.
    pub interior_width: usize,
    pub n_heads: usize,
    pub key_dim: usize,
    pub head_dim: usize,
    /// Warp constant; `None` disables warping.
    pub y0: Option<Vec<f64>>,
    pub clip: SmoothClip,
    pub seed: u64,
}

impl StackConfig {
    pub fn new(spatial_dim: usize, value_dim: usize, n_layers: usize, clip: SmoothClip) -> Self {
        let interior = 4 * spatial_dim + 4 * value_dim;
        Self {
            spatial_dim,
            value_dim,
            n_layers,
            interior_width: interior,
            n_heads: 2,
            key_dim: interior,
            head_dim: interior,
            y0: Some(vec![0.0; value_dim]),
            clip,
            seed: 0,
        }
    }

    /// Value width entering layer `l` (zero-based): `n` at the input, the
    /// interior width between blocks.
    fn value_width_in(&self, l: usize) -> usize {
        if l == 0 {
            self.value_dim
        } else {
            self.interior_width
        }
    }
}

/// Full parameter set of a graph-preserving stack: alternating attention and
/// MLP blocks with the widths of the configuration.
#[derive(Debug, Clone)]
pub struct StackParams {
    pub config: StackConfig,
    pub blocks: Vec<(LayerParams, MlpParams)>,
}

pub(crate) fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let std = 1.0 / (cols as f64).sqrt();
    let data = (0..rows * cols).map(|_| std * normal(rng)).collect();
    Tensor::matrix(rows, cols, data).expect("shape by construction")
}

pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl StackParams {
    /// Seeded Gaussian initialization: weights with standard deviation
    /// `1/sqrt(fan_in)`, zero biases.
    pub fn init(config: StackConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let d = config.spatial_dim;
        let mut blocks = Vec::with_capacity(config.n_layers);
        for l in 0..config.n_layers {
            let in_dim = d + config.value_width_in(l);
            let att_out = config.interior_width;
            let heads = (0..config.n_heads)
                .map(|_| HeadParams {
                    query: gaussian_matrix(&mut rng, config.key_dim, in_dim),
                    key: gaussian_matrix(&mut rng, config.key_dim, in_dim),
                    value: gaussian_matrix(&mut rng, config.head_dim, in_dim),
                    output: gaussian_matrix(&mut rng, att_out, config.head_dim),
                })
                .collect();
            let attention = LayerParams {
                residual: gaussian_matrix(&mut rng, att_out, in_dim),
                heads,
            };
            let mlp_out = if l + 1 == config.n_layers {
                config.value_dim
            } else {
                config.interior_width
            };
            let mlp_in = d + att_out;
            let mlp = MlpParams {
                weights: vec![
                    gaussian_matrix(&mut rng, config.interior_width, mlp_in),
                    gaussian_matrix(&mut rng, mlp_out, config.interior_width),
                ],
                biases: vec![
                    Tensor::zeros(&[config.interior_width]),
                    Tensor::zeros(&[mlp_out]),
                ],
                activation: Activation::Tanh,
            };
            blocks.push((attention, mlp));
        }
        let stack = Self { config, blocks };
        stack.validate()?;
        Ok(stack)
    }

    /// Zero parameters everywhere; useful as the degenerate reference.
    pub fn zeros(config: StackConfig) -> Result<Self> {
        let mut stack = Self::init(config)?;
        for (_, t) in stack.visit_mut() {
            for v in t.data.iter_mut() {
                *v = 0.0;
            }
        }
        Ok(stack)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.len() != self.config.n_layers {
            return Err(Error::ShapeMismatch("block count".into()));
        }
        let d = self.config.spatial_dim;
        for (l, (attention, mlp)) in self.blocks.iter().enumerate() {
            attention.validate()?;
            mlp.validate()?;
            let in_dim = d + self.config.value_width_in(l);
            if attention.in_dim() != in_dim {
                return Err(Error::ShapeMismatch(format!("layer {l} input width")));
            }
            let expected_out = if l + 1 == self.config.n_layers {
                self.config.value_dim
            } else {
                self.config.interior_width
            };
            let widths = mlp.widths();
            if widths[0] != d + attention.out_dim() || *widths.last().unwrap() != expected_out {
                return Err(Error::ShapeMismatch(format!("mlp {l} width schedule")));
            }
        }
        Ok(())
    }

    /// Named tensors in fixed traversal order.
    pub fn visit(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (l, (attention, mlp)) in self.blocks.iter().enumerate() {
            out.push((format!("layer{l}.residual"), &attention.residual));
            for (h, head) in attention.heads.iter().enumerate() {
                out.push((format!("layer{l}.head{h}.query"), &head.query));
                out.push((format!("layer{l}.head{h}.key"), &head.key));
                out.push((format!("layer{l}.head{h}.value"), &head.value));
                out.push((format!("layer{l}.head{h}.output"), &head.output));
            }
            for (i, w) in mlp.weights.iter().enumerate() {
                out.push((format!("layer{l}.mlp.w{i}"), w));
            }
            for (i, b) in mlp.biases.iter().enumerate() {
                out.push((format!("layer{l}.mlp.b{i}"), b));
            }
        }
        out
    }

    pub fn visit_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = Vec::new();
        for (l, (attention, mlp)) in self.blocks.iter_mut().enumerate() {
            out.push((format!("layer{l}.residual"), &mut attention.residual));
            for (h, head) in attention.heads.iter_mut().enumerate() {
                out.push((format!("layer{l}.head{h}.query"), &mut head.query));
                out.push((format!("layer{l}.head{h}.key"), &mut head.key));
                out.push((format!("layer{l}.head{h}.value"), &mut head.value));
                out.push((format!("layer{l}.head{h}.output"), &mut head.output));
            }
            for (i, w) in mlp.weights.iter_mut().enumerate() {
                out.push((format!("layer{l}.mlp.w{i}"), w));
            }
            for (i, b) in mlp.biases.iter_mut().enumerate() {
                out.push((format!("layer{l}.mlp.b{i}"), b));
            }
        }
        out
    }
}

/// Flat JSON manifest of named tensors; the checkpoint interchange format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl ParamManifest {
    pub fn from_named(named: &[(String, &Tensor)]) -> Self {
        Self {
            entries: named
                .iter()
                .map(|(name, t)| ManifestEntry {
                    name: name.clone(),
                    shape: t.shape.clone(),
                    values: t.data.clone(),
                })
                .collect(),
        }
    }

    /// Writes the entries back into same-named tensors; shapes must match.
    pub fn load_into(&self, named: Vec<(String, &mut Tensor)>) -> Result<()> {
        if named.len() != self.entries.len() {
            return Err(Error::Serialization(format!(
                "manifest holds {} tensors, model has {}",
                self.entries.len(),
                named.len()
            )));
        }
        let mut by_name: std::collections::BTreeMap<&str, &ManifestEntry> =
            self.entries.iter().map(|e| (e.name.as_str(), e)).collect();
        for (name, t) in named {
            let entry = by_name
                .remove(name.as_str())
                .ok_or_else(|| Error::Serialization(format!("manifest missing tensor {name}")))?;
            if entry.shape != t.shape {
                return Err(Error::Serialization(format!("shape mismatch for {name}")));
            }
            t.data.clone_from(&entry.values);
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Tape-level forwards
// ---------------------------------------------------------------------------

pub struct HeadVars {
    pub query: Var,
    pub key: Var,
    pub value: Var,
    pub output: Var,
}

pub struct LayerVars {
    pub residual: Var,
    pub heads: Vec<HeadVars>,
}

pub struct MlpVars {
    pub weights: Vec<Var>,
    pub biases: Vec<Var>,
    pub activation: Activation,
}

pub struct StackVars {
    pub blocks: Vec<(LayerVars, MlpVars)>,
}

fn register_tensor(tape: &mut Tape, t: &Tensor, trainable: bool) -> Var {
    if trainable {
        tape.param(t.clone())
    } else {
        tape.input(t.clone())
    }
}

pub fn register_layer(tape: &mut Tape, layer: &LayerParams, trainable: bool) -> LayerVars {
    LayerVars {
        residual: register_tensor(tape, &layer.residual, trainable),
        heads: layer
            .heads
            .iter()
            .map(|h| HeadVars {
                query: register_tensor(tape, &h.query, trainable),
                key: register_tensor(tape, &h.key, trainable),
                value: register_tensor(tape, &h.value, trainable),
                output: register_tensor(tape, &h.output, trainable),
            })
            .collect(),
    }
}

pub fn register_mlp(tape: &mut Tape, mlp: &MlpParams, trainable: bool) -> MlpVars {
    MlpVars {
        weights: mlp
            .weights
            .iter()
            .map(|w| register_tensor(tape, w, trainable))
            .collect(),
        biases: mlp
            .biases
            .iter()
            .map(|b| register_tensor(tape, b, trainable))
            .collect(),
        activation: mlp.activation,
    }
}

pub fn register_stack(tape: &mut Tape, stack: &StackParams, trainable: bool) -> StackVars {
    StackVars {
        blocks: stack
            .blocks
            .iter()
            .map(|(attn, mlp)| {
                (
                    register_layer(tape, attn, trainable),
                    register_mlp(tape, mlp, trainable),
                )
            })
            .collect(),
    }
}

/// One head of measure attention for a single token against precomputed
/// per-atom keys and values.
fn head_attend_on_tape(
    tape: &mut Tape,
    z: Var,
    head: &HeadVars,
    keys: &[Var],
    vals: &[Var],
    weights: &[f64],
    scale_dim: usize,
) -> Result<Var> {
    let q = tape.matvec(head.query, z)?;
    let mut logits: Option<Var> = None;
    for &k in keys {
        let l = tape.dot(q, k)?;
        logits = Some(match logits {
            None => l,
            Some(acc) => tape.concat(acc, l),
        });
    }
    let logits = logits.ok_or_else(|| Error::InvalidMeasure("attention over no atoms".into()))?;
    let scaled = tape.scale(logits, 1.0 / (scale_dim as f64).sqrt());
    let p = tape.softmax_weighted(scaled, weights)?;
    tape.weighted_sum(vals, p)
}

/// Updates every token of the measure through one attention layer; the atoms
/// of the context measure are the tokens themselves.
pub fn layer_forward_on_tape(
    tape: &mut Tape,
    tokens: &[Var],
    weights: &[f64],
    layer: &LayerVars,
    spatial_dim: usize,
    scale_dim: usize,
) -> Result<Vec<Var>> {
    let per_head: Vec<(Vec<Var>, Vec<Var>)> = layer
        .heads
        .iter()
        .map(|h| {
            let keys: Result<Vec<Var>> = tokens.iter().map(|&t| tape.matvec(h.key, t)).collect();
            let vals: Result<Vec<Var>> = tokens.iter().map(|&t| tape.matvec(h.value, t)).collect();
            Ok((keys?, vals?))
        })
        .collect::<Result<_>>()?;

    tokens
        .iter()
        .map(|&z| {
            let mut terms = vec![tape.matvec(layer.residual, z)?];
            for (h, (keys, vals)) in layer.heads.iter().zip(per_head.iter()) {
                let att = head_attend_on_tape(tape, z, h, keys, vals, weights, scale_dim)?;
                terms.push(tape.matvec(h.output, att)?);
            }
            let value = tape.add_n(&terms)?;
            let x = tape.slice(z, 0, spatial_dim)?;
            Ok(tape.concat(x, value))
        })
        .collect()
}

/// Pointwise MLP block `z -> (x, H(z))`: hidden activations between layers,
/// linear last layer.
pub fn mlp_forward_on_tape(
    tape: &mut Tape,
    z: Var,
    mlp: &MlpVars,
    spatial_dim: usize,
) -> Result<Var> {
    let mut h = z;
    let last = mlp.weights.len() - 1;
    for (i, (&w, &b)) in mlp.weights.iter().zip(mlp.biases.iter()).enumerate() {
        h = tape.matvec(w, h)?;
        h = tape.add(h, b)?;
        if i < last && mlp.activation == Activation::Tanh {
            h = tape.tanh(h);
        }
    }
    let x = tape.slice(z, 0, spatial_dim)?;
    Ok(tape.concat(x, h))
}

/// Full stack on the tape. Tokens double as the measure atoms, so the
/// diamond composition is automatic: each block reads the tokens produced by
/// the previous one. With a warp constant, both the per-token input and the
/// measure seen by the first layer are warped, making the output independent
/// of incoming values.
pub fn stack_forward_on_tape(
    tape: &mut Tape,
    tokens: &[Var],
    weights: &[f64],
    stack: &StackVars,
    config: &StackConfig,
) -> Result<Vec<Var>> {
    let d = config.spatial_dim;
    let mut current: Vec<Var> = match &config.y0 {
        None => tokens.to_vec(),
        Some(y0) => {
            let y0v = tape.input(Tensor::vector(y0.clone()));
            tokens
                .iter()
                .map(|&z| {
                    let x = tape.slice(z, 0, d)?;
                    Ok(tape.concat(x, y0v))
                })
                .collect::<Result<_>>()?
        }
    };
    for (layer, mlp) in &stack.blocks {
        current = layer_forward_on_tape(tape, &current, weights, layer, d, config.key_dim)?;
        current = current
            .into_iter()
            .map(|z| mlp_forward_on_tape(tape, z, mlp, d))
            .collect::<Result<_>>()?;
    }
    current
        .into_iter()
        .map(|z| {
            let x = tape.slice(z, 0, d)?;
            let len = tape.value(z).len();
            let y = tape.slice(z, d, len)?;
            let clipped = tape.smooth_clip(y, config.clip);
            Ok(tape.concat(x, clipped))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Pure entry points
// ---------------------------------------------------------------------------

fn token_vars(tape: &mut Tape, mu: &DiscreteMeasure) -> Vec<Var> {
    mu.atoms
        .iter()
        .map(|a| tape.input(Tensor::vector(a.location.clone())))
        .collect()
}

fn atom_weights(mu: &DiscreteMeasure) -> Vec<f64> {
    mu.atoms.iter().map(|a| a.weight).collect()
}

/// Single-head attention readout of token `z` against the atoms of `mu`:
/// softmax weights carry the atom masses in numerator and denominator.
pub fn attend_head(
    mu: &DiscreteMeasure,
    z: &[f64],
    head: &HeadParams,
    scale_dim: usize,
) -> Result<Vec<f64>> {
    head.validate()?;
    if z.len() != head.in_dim() {
        return Err(Error::DimensionMismatch { expected: head.in_dim(), actual: z.len() });
    }
    let mut tape = Tape::new();
    let head_vars = HeadVars {
        query: tape.input(head.query.clone()),
        key: tape.input(head.key.clone()),
        value: tape.input(head.value.clone()),
        output: tape.input(head.output.clone()),
    };
    let tokens = token_vars(&mut tape, mu);
    let weights = atom_weights(mu);
    let keys: Vec<Var> = tokens
        .iter()
        .map(|&t| tape.matvec(head_vars.key, t))
        .collect::<Result<_>>()?;
    let vals: Vec<Var> = tokens
        .iter()
        .map(|&t| tape.matvec(head_vars.value, t))
        .collect::<Result<_>>()?;
    let zv = tape.input(Tensor::vector(z.to_vec()));
    let out = head_attend_on_tape(&mut tape, zv, &head_vars, &keys, &vals, &weights, scale_dim)?;
    Ok(tape.value(out).data.clone())
}

/// One full layer on a single token: `(pi_d(z), W_L z + sum_h W^h Att^h(z))`.
/// The first `d` output coordinates are copied bit-exactly from `z`.
pub fn layer_forward(
    mu: &DiscreteMeasure,
    z: &[f64],
    layer: &LayerParams,
    spatial_dim: usize,
) -> Result<Vec<f64>> {
    layer.validate()?;
    let scale_dim = layer.heads.first().map(|h| h.key_dim()).unwrap_or(1);
    let mut tape = Tape::new();
    let vars = register_layer(&mut tape, layer, false);
    let tokens = token_vars(&mut tape, mu);
    let weights = atom_weights(mu);
    // The probe token participates as a query only; keys and values come
    // from the measure atoms.
    let per_head: Vec<(Vec<Var>, Vec<Var>)> = vars
        .heads
        .iter()
        .map(|h| {
            let keys: Result<Vec<Var>> = tokens.iter().map(|&t| tape.matvec(h.key, t)).collect();
            let vals: Result<Vec<Var>> = tokens.iter().map(|&t| tape.matvec(h.value, t)).collect();
            Ok((keys?, vals?))
        })
        .collect::<Result<_>>()?;
    let zv = tape.input(Tensor::vector(z.to_vec()));
    let mut terms = vec![tape.matvec(vars.residual, zv)?];
    for (h, (keys, vals)) in vars.heads.iter().zip(per_head.iter()) {
        let att = head_attend_on_tape(&mut tape, zv, h, keys, vals, &weights, scale_dim)?;
        terms.push(tape.matvec(h.output, att)?);
    }
    let value = tape.add_n(&terms)?;
    let x = tape.slice(zv, 0, spatial_dim)?;
    let out = tape.concat(x, value);
    Ok(tape.value(out).data.clone())
}

/// Pointwise MLP block on one token.
pub fn mlp_forward(z: &[f64], mlp: &MlpParams, spatial_dim: usize) -> Result<Vec<f64>> {
    mlp.validate()?;
    if z.len() != mlp.weights[0].shape[1] {
        return Err(Error::DimensionMismatch {
            expected: mlp.weights[0].shape[1],
            actual: z.len(),
        });
    }
    let mut tape = Tape::new();
    let vars = register_mlp(&mut tape, mlp, false);
    let zv = tape.input(Tensor::vector(z.to_vec()));
    let out = mlp_forward_on_tape(&mut tape, zv, &vars, spatial_dim)?;
    Ok(tape.value(out).data.clone())
}

/// Warp `(x, y) -> (x, y0)`.
pub fn warp(z: &[f64], y0: &[f64], spatial_dim: usize) -> Vec<f64> {
    let mut out = z[..spatial_dim].to_vec();
    out.extend_from_slice(y0);
    out
}

/// Runs the whole stack on a measure: warp, alternating attention and MLP
/// blocks with measure updates, final clip. Output atoms keep their weights
/// and spatial coordinates.
pub fn stack_forward(mu: &DiscreteMeasure, stack: &StackParams) -> Result<DiscreteMeasure> {
    stack.validate()?;
    let cfg = &stack.config;
    if mu.coord_split != cfg.spatial_dim {
        return Err(Error::DimensionMismatch { expected: cfg.spatial_dim, actual: mu.coord_split });
    }
    if mu.ambient_dim - mu.coord_split != cfg.value_dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.value_dim,
            actual: mu.ambient_dim - mu.coord_split,
        });
    }
    let mut tape = Tape::new();
    let vars = register_stack(&mut tape, stack, false);
    let tokens = token_vars(&mut tape, mu);
    let weights = atom_weights(mu);
    let out = stack_forward_on_tape(&mut tape, &tokens, &weights, &vars, cfg)?;
    let atoms = out
        .iter()
        .zip(mu.atoms.iter())
        .map(|(&v, a)| crate::measure::Atom::new(tape.value(v).data.clone(), a.weight))
        .collect();
    DiscreteMeasure::new(atoms, mu.ambient_dim, mu.coord_split)
}
