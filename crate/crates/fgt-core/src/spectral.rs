//! Dirichlet sine eigenbasis on the unit cube, measure moments, the Tikhonov
//! spectral regularizer, its truncation schedule, and the smooth value clip.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// First `count` eigenpairs of `(I - Laplace)` with Dirichlet conditions on
/// `[0,1]^d`: `psi_k(x) = prod_i sqrt(2) sin(k_i pi x_i)` with eigenvalue
/// `1 + pi^2 |k|^2`, sorted by ascending eigenvalue with lexicographic
/// multi-index tie-break.
#[derive(Debug, Clone)]
pub struct SineBasis {
    pub dim: usize,
    pub count: usize,
    pub index_tuples: Vec<Vec<usize>>,
    pub eigenvalues: Vec<f64>,
    pub quadrature_resolution: usize,
}

/// Builds the first `K` eigenpairs in dimension `d`.
pub fn basis_eigenpairs(d: usize, count: usize) -> Result<SineBasis> {
    if count == 0 {
        return Err(Error::InvalidParameter("basis count must be >= 1".into()));
    }
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidParameter(format!("basis dim {d} not in {{1, 2}}")));
    }
    // Enumerate multi-indices inside a ball large enough to contain the K
    // smallest |k|^2, then sort with the fixed tie-break.
    let mut bound = 2usize;
    let mut tuples: Vec<Vec<usize>>;
    loop {
        tuples = Vec::new();
        match d {
            1 => {
                for k in 1..=bound {
                    tuples.push(vec![k]);
                }
            }
            _ => {
                for k1 in 1..=bound {
                    for k2 in 1..=bound {
                        tuples.push(vec![k1, k2]);
                    }
                }
            }
        }
        if tuples.len() >= count && enough(&tuples, bound, count) {
            break;
        }
        bound *= 2;
    }
    tuples.sort_by(|a, b| {
        let na: usize = a.iter().map(|k| k * k).sum();
        let nb: usize = b.iter().map(|k| k * k).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    tuples.truncate(count);
    let eigenvalues = tuples
        .iter()
        .map(|k| 1.0 + PI * PI * k.iter().map(|&ki| (ki * ki) as f64).sum::<f64>())
        .collect();
    let quadrature_resolution = if d == 1 { 512 } else { 128 };
    Ok(SineBasis {
        dim: d,
        count,
        index_tuples: tuples,
        eigenvalues,
        quadrature_resolution,
    })
}

/// The K-th smallest |k|^2 must be strictly inside the enumerated box, so
/// growing the box cannot surface a smaller eigenvalue later.
fn enough(tuples: &[Vec<usize>], bound: usize, count: usize) -> bool {
    let mut norms: Vec<usize> = tuples.iter().map(|k| k.iter().map(|x| x * x).sum()).collect();
    norms.sort_unstable();
    norms[count - 1] < bound * bound
}

impl SineBasis {
    pub fn eval(&self, j: usize, x: &[f64]) -> f64 {
        self.index_tuples[j]
            .iter()
            .zip(x.iter())
            .map(|(&k, &xi)| (2.0f64).sqrt() * (k as f64 * PI * xi).sin())
            .product()
    }

    /// Gram matrix under midpoint quadrature at the stored resolution; used
    /// by the orthonormality invariant.
    pub fn gram(&self) -> Vec<f64> {
        let k = self.count;
        let m = self.quadrature_resolution;
        let nodes = m.pow(self.dim as u32);
        let step = 1.0 / m as f64;
        let weight = step.powi(self.dim as i32);
        let mut gram = vec![0.0; k * k];
        let mut idx = vec![0usize; self.dim];
        let mut vals = vec![0.0; k];
        for _ in 0..nodes {
            let x: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * step).collect();
            for (j, v) in vals.iter_mut().enumerate() {
                *v = self.eval(j, &x);
            }
            for a in 0..k {
                for b in a..k {
                    gram[a * k + b] += weight * vals[a] * vals[b];
                }
            }
            for ax in (0..self.dim).rev() {
                idx[ax] += 1;
                if idx[ax] < m {
                    break;
                }
                idx[ax] = 0;
            }
        }
        for a in 0..k {
            for b in 0..a {
                gram[a * k + b] = gram[b * k + a];
            }
        }
        gram
    }
}

/// Parameters of the spectral regularizer `S_{eta,K}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Smoothing order; must be even, positive, and exceed `d/2`.
    pub r: u32,
    pub eta: f64,
    pub k_modes: usize,
    pub n_channels: usize,
}

impl SpectralConfig {
    pub fn new(r: u32, eta: f64, k_modes: usize, n_channels: usize, d: usize) -> Result<Self> {
        if r == 0 || r % 2 != 0 {
            return Err(Error::InvalidParameter("r must be a positive even integer".into()));
        }
        if (r as f64) <= d as f64 / 2.0 {
            return Err(Error::InvalidParameter(format!("r = {r} must exceed d/2 = {}", d as f64 / 2.0)));
        }
        if eta < 0.0 {
            return Err(Error::InvalidParameter("eta must be nonnegative".into()));
        }
        Ok(Self { r, eta, k_modes, n_channels })
    }
}

/// Moment functionals of a measure against the basis:
/// entry `(k, c) = sum_j w_j psi_k(x_j) y_{j,c}` (domain volume 1).
/// Exact for discrete measures; no quadrature involved.
pub fn measure_moments(mu: &DiscreteMeasure, basis: &SineBasis) -> Vec<f64> {
    let k = basis.count;
    let n = mu.ambient_dim - mu.coord_split;
    let mut out = vec![0.0; k * n.max(1)];
    for j in 0..mu.len() {
        let x = mu.spatial(j);
        let y = mu.value(j);
        let w = mu.atoms[j].weight;
        for ki in 0..k {
            let p = w * basis.eval(ki, x);
            for (c, &yc) in y.iter().enumerate() {
                out[ki * n + c] += p * yc;
            }
        }
    }
    out
}

/// Output of the spectral regularizer: filtered coefficients plus a function
/// evaluator `x -> sum_k c_k psi_k(x)`.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    pub coefficients: Vec<f64>,
    pub n_channels: usize,
    basis: SineBasis,
}

impl SpectralFunction {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n_channels;
        let mut out = vec![0.0; n];
        for k in 0..self.basis.count.min(self.coefficients.len() / n) {
            let p = self.basis.eval(k, x);
            for c in 0..n {
                out[c] += self.coefficients[k * n + c] * p;
            }
        }
        out
    }
}

/// The regularizer `S_{eta,K}`: the minimizer of the Tikhonov-penalized
/// moment-matching problem, realized spectrally as
/// `c_k = (eta lambda_k^r + 1)^{-1} moment_k`. Linear in the measure.
pub fn s_eta_k(
    mu: &DiscreteMeasure,
    cfg: &SpectralConfig,
    basis: &SineBasis,
) -> Result<SpectralFunction> {
    if basis.count < cfg.k_modes {
        return Err(Error::InvalidParameter(format!(
            "basis holds {} modes, config wants {}",
            basis.count, cfg.k_modes
        )));
    }
    let n = mu.ambient_dim - mu.coord_split;
    if n != cfg.n_channels {
        return Err(Error::DimensionMismatch { expected: cfg.n_channels, actual: n });
    }
    let moments = measure_moments(mu, basis);
    let mut coefficients = vec![0.0; cfg.k_modes * n];
    for k in 0..cfg.k_modes {
        let filter = 1.0 / (cfg.eta * basis.eigenvalues[k].powi(cfg.r as i32) + 1.0);
        for c in 0..n {
            coefficients[k * n + c] = filter * moments[k * n + c];
        }
    }
    Ok(SpectralFunction {
        coefficients,
        n_channels: n,
        basis: SineBasis {
            dim: basis.dim,
            count: cfg.k_modes,
            index_tuples: basis.index_tuples[..cfg.k_modes].to_vec(),
            eigenvalues: basis.eigenvalues[..cfg.k_modes].to_vec(),
            quadrature_resolution: basis.quadrature_resolution,
        },
    })
}

/// Explicit truncation schedule `K(eta) = ceil(eta^{-d/(4r)})` for
/// `0 < eta <= 1`, snapped to the nearest integer when the float lands
/// within 1e-9 of one.
pub fn k_schedule(eta: f64, d: usize, r: u32) -> Result<usize> {
    if eta <= 0.0 || eta > 1.0 {
        return Err(Error::InvalidParameter(format!("eta = {eta} must lie in (0, 1]")));
    }
    let t = eta.powf(-(d as f64) / (4.0 * r as f64));
    let snapped = if (t - t.round()).abs() < 1e-9 * t.abs().max(1.0) {
        t.round()
    } else {
        t.ceil()
    };
    Ok(snapped as usize)
}

/// Odd C^1 saturation: identity on `[-(L+L1)/2, (L+L1)/2]`, a cubic Hermite
/// blend up to `L1`, constant `L1` beyond. The image is `[-L1, L1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothClip {
    /// Inner bound `L` (identity is guaranteed on `[-L, L]` and in fact up to
    /// the plateau edge `(L + L1)/2`).
    pub inner: f64,
    /// Outer bound `L1` of the image.
    pub outer: f64,
}

impl SmoothClip {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer) {
            return Err(Error::InvalidParameter(format!(
                "clip needs 0 < L < L1, got L = {inner}, L1 = {outer}"
            )));
        }
        Ok(Self { inner, outer })
    }

    fn plateau(&self) -> f64 {
        0.5 * (self.inner + self.outer)
    }

    pub fn eval1(&self, y: f64) -> f64 {
        let a = self.plateau();
        let t = y.abs();
        let v = if t <= a {
            t
        } else if t >= self.outer {
            self.outer
        } else {
            // Hermite blend q(s) = s + s^2 - s^3 rises monotonically from
            // q(0) = 0, q'(0) = 1 to q(1) = 1, q'(1) = 0.
            let w = self.outer - a;
            let s = (t - a) / w;
            a + w * (s + s * s - s * s * s)
        };
        if y < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn derivative1(&self, y: f64) -> f64 {
        let a = self.plateau();
        let t = y.abs();
        if t <= a {
            1.0
        } else if t >= self.outer {
            0.0
        } else {
            let w = self.outer - a;
            let s = (t - a) / w;
            1.0 + 2.0 * s - 3.0 * s * s
        }
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&v| self.eval1(v)).collect()
    }
}

/// Componentwise smooth clip.
pub fn smooth_clip(y: &[f64], clip: &SmoothClip) -> Vec<f64> {
    clip.eval(y)
}
