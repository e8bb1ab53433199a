//! From functions to measures and back: sampling schemes, graph tokenization,
//! interior-cutoff mollification, and kernel decoding.

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Box domain of the toolkit: the unit cube or the flat torus, with values in
/// `[-L, L]^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub kind: DomainKind,
    /// Value bound `L`.
    pub value_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    UnitCube,
    Torus,
}

impl Domain {
    pub fn new(dim: usize, kind: DomainKind, value_bound: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "domain dim {dim} not in {{1, 2}}"
            )));
        }
        if value_bound <= 0.0 {
            return Err(Error::InvalidParameter("value bound must be positive".into()));
        }
        Ok(Self { dim, kind, value_bound })
    }

    pub fn unit_cube(dim: usize, value_bound: f64) -> Result<Self> {
        Self::new(dim, DomainKind::UnitCube, value_bound)
    }

    pub fn torus(dim: usize, value_bound: f64) -> Result<Self> {
        Self::new(dim, DomainKind::Torus, value_bound)
    }

    /// Distance to the boundary; the torus has none.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self.kind {
            DomainKind::Torus => f64::INFINITY,
            DomainKind::UnitCube => x
                .iter()
                .map(|&xi| xi.min(1.0 - xi))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Normalized symmetric bump `rho_1(t) = c exp(-1/(1-t^2))` on `(-1, 1)`,
/// extended to `d` dimensions as a product. The constant `c` is fixed by
/// midpoint quadrature at construction.
#[derive(Debug, Clone)]
pub struct Mollifier {
    normalization: f64,
    pub quadrature_resolution: usize,
}

fn bump_raw(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

impl Mollifier {
    pub fn new(quadrature_resolution: usize) -> Self {
        // Midpoint rule on [-1, 1]; the bump is flat to all orders at the
        // endpoints so this converges super-algebraically.
        let n = quadrature_resolution.max(64);
        let step = 2.0 / n as f64;
        let mut sum = 0.0;
        for k in 0..n {
            let t = -1.0 + (k as f64 + 0.5) * step;
            sum += bump_raw(t);
        }
        Self {
            normalization: 1.0 / (sum * step),
            quadrature_resolution: n,
        }
    }

    /// One-dimensional profile, unit integral over the line.
    pub fn eval1(&self, t: f64) -> f64 {
        self.normalization * bump_raw(t)
    }

    /// Product-form bump in `x.len()` dimensions, unit integral over `R^d`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|&t| self.eval1(t)).product()
    }
}

impl Default for Mollifier {
    fn default() -> Self {
        Self::new(8192)
    }
}

/// Values of a function on a regular grid with resolution `m` per axis.
/// Cube grids store cell centers `(k+1/2)/m`; torus grids store nodes `k/m`.
/// Layout is row-major over the grid (first axis slowest), channel-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub domain: Domain,
    pub channels: usize,
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain, channels: usize, resolution: usize, values: Vec<f64>) -> Result<Self> {
        let expected = resolution.pow(domain.dim as u32) * channels;
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "grid expects {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { domain, channels, resolution, values })
    }

    /// Samples a function on the grid nodes.
    pub fn from_fn<F>(domain: Domain, channels: usize, resolution: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let m = resolution;
        let nodes = m.pow(domain.dim as u32);
        let mut values = Vec::with_capacity(nodes * channels);
        let mut idx = vec![0usize; domain.dim];
        for _ in 0..nodes {
            let x: Vec<f64> = idx
                .iter()
                .map(|&k| node_coord(domain.kind, k, m))
                .collect();
            values.extend(f(&x));
            for ax in (0..domain.dim).rev() {
                idx[ax] += 1;
                if idx[ax] < m {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self { domain, channels, resolution, values }
    }

    fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for &k in idx {
            f = f * self.resolution + k;
        }
        f * self.channels
    }

    pub fn node_value(&self, idx: &[usize]) -> &[f64] {
        let f = self.flat(idx);
        &self.values[f..f + self.channels]
    }

    /// Multilinear interpolation; wraps on the torus, clamps on the cube.
    pub fn interpolate(&self, x: &[f64]) -> Vec<f64> {
        let m = self.resolution;
        let d = self.domain.dim;
        let offset = match self.domain.kind {
            DomainKind::UnitCube => 0.5,
            DomainKind::Torus => 0.0,
        };
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for ax in 0..d {
            let t = x[ax] * m as f64 - offset;
            let i0 = t.floor();
            base[ax] = match self.domain.kind {
                DomainKind::Torus => (i0.rem_euclid(m as f64)) as usize,
                DomainKind::UnitCube => i0.clamp(0.0, (m - 1) as f64) as usize,
            };
            frac[ax] = match self.domain.kind {
                DomainKind::Torus => t - i0,
                DomainKind::UnitCube => {
                    if i0 < 0.0 {
                        0.0
                    } else if i0 > (m - 1) as f64 {
                        1.0
                    } else {
                        t - i0
                    }
                }
            };
        }
        let mut out = vec![0.0; self.channels];
        let corners = 1usize << d;
        let mut idx = vec![0usize; d];
        for corner in 0..corners {
            let mut w = 1.0;
            for ax in 0..d {
                let hi = (corner >> ax) & 1 == 1;
                let k = if hi {
                    match self.domain.kind {
                        DomainKind::Torus => (base[ax] + 1) % m,
                        DomainKind::UnitCube => (base[ax] + 1).min(m - 1),
                    }
                } else {
                    base[ax]
                };
                idx[ax] = k;
                w *= if hi { frac[ax] } else { 1.0 - frac[ax] };
            }
            if w != 0.0 {
                let v = self.node_value(&idx);
                for (o, vi) in out.iter_mut().zip(v.iter()) {
                    *o += w * vi;
                }
            }
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// CSV serialization: literal header `M,d,n`, a line with the sizes, then
    /// one row-major line of channel values per grid node.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("M,d,n\n");
        s.push_str(&format!(
            "{},{},{}\n",
            self.resolution, self.domain.dim, self.channels
        ));
        let nodes = self.resolution.pow(self.domain.dim as u32);
        for i in 0..nodes {
            let row: Vec<String> = (0..self.channels)
                .map(|c| format!("{:.17e}", self.values[i * self.channels + c]))
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(domain: Domain, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header.trim() != "M,d,n" {
            return Err(Error::Serialization(format!("bad grid header {header:?}")));
        }
        let sizes = lines
            .next()
            .ok_or_else(|| Error::Serialization("missing size row".into()))?;
        let parts: Vec<usize> = sizes
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Serialization(e.to_string()))?;
        let [m, d, n] = parts[..] else {
            return Err(Error::Serialization("size row needs M,d,n".into()));
        };
        if d != domain.dim {
            return Err(Error::DimensionMismatch { expected: domain.dim, actual: d });
        }
        let mut values = Vec::with_capacity(m.pow(d as u32) * n);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            for p in line.split(',') {
                values.push(
                    p.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Serialization(e.to_string()))?,
                );
            }
        }
        Self::new(domain, n, m, values)
    }
}

pub(crate) fn node_coord(kind: DomainKind, k: usize, m: usize) -> f64 {
    match kind {
        DomainKind::UnitCube => (k as f64 + 0.5) / m as f64,
        DomainKind::Torus => k as f64 / m as f64,
    }
}

/// A function over the domain, available either analytically or as a fine
/// grid of values.
#[derive(Clone)]
pub enum SampledFunction {
    Grid(GridFunction),
    Analytic {
        f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
        dim: usize,
        channels: usize,
    },
}

impl SampledFunction {
    pub fn analytic<F>(dim: usize, channels: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::Analytic { f: Arc::new(f), dim, channels }
    }

    pub fn channels(&self) -> usize {
        match self {
            Self::Grid(g) => g.channels,
            Self::Analytic { channels, .. } => *channels,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Grid(g) => g.interpolate(x),
            Self::Analytic { f, .. } => f(x),
        }
    }
}

impl std::fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Grid(g) => f.debug_tuple("Grid").field(&g.resolution).finish(),
            Self::Analytic { dim, channels, .. } => f
                .debug_struct("Analytic")
                .field("dim", dim)
                .field("channels", channels)
                .finish(),
        }
    }
}

/// How input support points are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingScheme {
    pub kind: SchemeKind,
    pub seed: u64,
    /// Jitter amplitude in cell units for the jittered grid.
    pub jitter: f64,
    /// Standard deviation of the Gaussian scheme.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Grid,
    JitteredGrid,
    UniformRandom,
    Gaussian,
}

impl SamplingScheme {
    pub fn new(kind: SchemeKind, seed: u64) -> Self {
        Self { kind, seed, jitter: 1.0, scale: 0.2 }
    }

    /// Parses the CLI flag strings `grid|jitter|uniform|gauss`.
    pub fn parse(kind: &str, seed: u64) -> Result<Self> {
        let kind = match kind {
            "grid" => SchemeKind::Grid,
            "jitter" => SchemeKind::JitteredGrid,
            "uniform" => SchemeKind::UniformRandom,
            "gauss" => SchemeKind::Gaussian,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown sampling scheme {other:?} (want grid|jitter|uniform|gauss)"
                )))
            }
        };
        Ok(Self::new(kind, seed))
    }
}

/// Draws `n_points` support points in the domain, deterministically per seed.
///
/// Grid and jittered-grid schemes require `n_points` to be a perfect d-th
/// power and place points at (possibly jittered) cell centers. The Gaussian
/// scheme concentrates points near the domain center (wrapped on the torus,
/// clamped on the cube); its samples are not regularly distributed and serve
/// as a stress test.
pub fn sample_points(domain: &Domain, scheme: &SamplingScheme, n_points: usize) -> Result<Vec<Point>> {
    if n_points == 0 {
        return Err(Error::InvalidParameter("n_points must be >= 1".into()));
    }
    let d = domain.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(scheme.seed);
    let points = match scheme.kind {
        SchemeKind::Grid | SchemeKind::JitteredGrid => {
            let m = integer_root(n_points, d).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{n_points} is not a perfect {d}-th power for a grid scheme"
                ))
            })?;
            let mut pts = Vec::with_capacity(n_points);
            let mut idx = vec![0usize; d];
            for _ in 0..n_points {
                let mut x: Vec<f64> = idx.iter().map(|&k| (k as f64 + 0.5) / m as f64).collect();
                if scheme.kind == SchemeKind::JitteredGrid {
                    for xi in x.iter_mut() {
                        let u: f64 = rng.gen::<f64>() - 0.5;
                        *xi += scheme.jitter * u / m as f64;
                        *xi = wrap_into(domain, *xi);
                    }
                }
                pts.push(Point::new(x));
                for ax in (0..d).rev() {
                    idx[ax] += 1;
                    if idx[ax] < m {
                        break;
                    }
                    idx[ax] = 0;
                }
            }
            pts
        }
        SchemeKind::UniformRandom => (0..n_points)
            .map(|_| {
                Point::new(
                    (0..d)
                        .map(|_| rng.gen::<f64>().max(f64::MIN_POSITIVE))
                        .collect(),
                )
            })
            .collect(),
        SchemeKind::Gaussian => (0..n_points)
            .map(|_| {
                Point::new(
                    (0..d)
                        .map(|_| {
                            let z = standard_normal(&mut rng);
                            wrap_into(domain, 0.5 + scheme.scale * z)
                        })
                        .collect(),
                )
            })
            .collect(),
    };
    Ok(points)
}

fn wrap_into(domain: &Domain, x: f64) -> f64 {
    match domain.kind {
        DomainKind::Torus => x.rem_euclid(1.0),
        DomainKind::UnitCube => x.clamp(1e-9, 1.0 - 1e-9),
    }
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; consumes two uniforms per call for seed stability.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn integer_root(n: usize, d: usize) -> Option<usize> {
    if d == 1 {
        return Some(n);
    }
    let mut m = (n as f64).powf(1.0 / d as f64).round() as usize;
    while m.pow(d as u32) > n {
        m -= 1;
    }
    while (m + 1).pow(d as u32) <= n {
        m += 1;
    }
    (m.pow(d as u32) == n).then_some(m)
}

/// Empirical graph measure of `h` at the given support points: uniform
/// weights `1/N`, atoms `(x_j, h(x_j))`, spatial split `d`. With `tau` the
/// values are read from the mollified function `R_tau h` instead (bilinear
/// interpolation off its fine grid).
pub fn tokenize(
    h: &SampledFunction,
    points: &[Point],
    tau: Option<f64>,
    domain: &Domain,
) -> Result<DiscreteMeasure> {
    let n = h.channels();
    let bound = domain.value_bound;
    let evaluator: SampledFunction = match tau {
        None => h.clone(),
        Some(tau) => {
            let grid = match h {
                SampledFunction::Grid(g) => g,
                SampledFunction::Analytic { .. } => {
                    return Err(Error::InvalidParameter(
                        "tokenize with tau needs a grid representation".into(),
                    ))
                }
            };
            SampledFunction::Grid(regularize_rtau(grid, tau)?)
        }
    };
    let mut locations = Vec::with_capacity(points.len());
    for p in points {
        let mut loc = p.coords.clone();
        let v = evaluator.eval(&p.coords);
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
        }
        for &vi in &v {
            if vi.abs() > bound + 1e-9 {
                return Err(Error::ValueOutOfRange { value: vi, bound });
            }
            loc.push(vi.clamp(-bound, bound));
        }
        locations.push(loc);
    }
    DiscreteMeasure::uniform(locations, domain.dim)
}

/// Interior-cutoff mollification `R_tau h = rho_tau * (h . (rho_tau * 1_{Omega_tau}))`
/// on the fine grid, with `Omega_tau = {dist(x, boundary) > 4 tau}`.
///
/// Cube grids use zero extension outside the domain; torus grids wrap, in
/// which case the cutoff is identically one and this reduces to periodic
/// mollification. The discrete kernel is renormalized to unit mass so
/// constants are reproduced exactly on the far interior.
pub fn regularize_rtau(h: &GridFunction, tau: f64) -> Result<GridFunction> {
    let m = h.resolution;
    let d = h.domain.dim;
    if tau <= 0.0 {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    if (m as f64) < 8.0 / tau {
        return Err(Error::InvalidParameter(format!(
            "grid resolution {m} below 8/tau = {}",
            8.0 / tau
        )));
    }
    if h.domain.kind == DomainKind::UnitCube && 4.0 * tau >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "tau = {tau} too large: interior set is empty"
        )));
    }

    let kernel = discrete_kernel(tau, m);
    let wrap = h.domain.kind == DomainKind::Torus;

    // Cutoff chi_tau = rho_tau * 1_{Omega_tau}.
    let indicator = GridFunction::from_fn(h.domain, 1, m, |x| {
        vec![if h.domain.boundary_distance(x) > 4.0 * tau { 1.0 } else { 0.0 }]
    });
    let chi = convolve_separable(&indicator, &kernel, wrap);

    // h . chi_tau, then the outer mollification.
    let nodes = m.pow(d as u32);
    let mut masked = h.clone();
    for i in 0..nodes {
        for c in 0..h.channels {
            masked.values[i * h.channels + c] *= chi.values[i];
        }
    }
    Ok(convolve_separable(&masked, &kernel, wrap))
}

/// Samples the scaled bump on grid offsets and renormalizes to unit mass.
fn discrete_kernel(tau: f64, m: usize) -> Vec<f64> {
    let moll = Mollifier::default();
    let step = 1.0 / m as f64;
    let radius = (tau * m as f64).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|k| moll.eval1(k as f64 * step / tau))
        .collect();
    let sum: f64 = kernel.iter().sum();
    for w in kernel.iter_mut() {
        *w /= sum;
    }
    kernel
}

/// Separable convolution along every axis with the same symmetric kernel.
fn convolve_separable(g: &GridFunction, kernel: &[f64], wrap: bool) -> GridFunction {
    let m = g.resolution;
    let d = g.domain.dim;
    let n = g.channels;
    let radius = (kernel.len() / 2) as isize;
    let mut cur = g.values.clone();
    let nodes = m.pow(d as u32);

    for axis in 0..d {
        let mut next = vec![0.0; cur.len()];
        // stride of the axis in node index space
        let stride = m.pow((d - 1 - axis) as u32);
        for node in 0..nodes {
            let k_ax = (node / stride) % m;
            for (t, &w) in kernel.iter().enumerate() {
                let off = t as isize - radius;
                let kk = k_ax as isize + off;
                let src = if wrap {
                    let kk = kk.rem_euclid(m as isize) as usize;
                    Some(node - k_ax * stride + kk * stride)
                } else if (0..m as isize).contains(&kk) {
                    Some(node - k_ax * stride + kk as usize * stride)
                } else {
                    None // zero extension
                };
                if let Some(src) = src {
                    for c in 0..n {
                        next[node * n + c] += w * cur[src * n + c];
                    }
                }
            }
        }
        cur = next;
    }
    GridFunction { domain: g.domain, channels: n, resolution: m, values: cur }
}

/// Kernel decoding of a measure into function values:
/// `(F_eps mu)(x) = eps^{-d} sum_j w_j rho((x_j - x)/eps) y_j`
/// (domain volume 1). Queries with no atom within `eps` return zero.
pub fn decode_feps(
    mu: &DiscreteMeasure,
    queries: &[Point],
    eps: f64,
    moll: &Mollifier,
) -> Result<Vec<Vec<f64>>> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let d = mu.coord_split;
    let n_val = mu.ambient_dim - d;
    let scale = eps.powi(-(d as i32));
    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        if q.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: q.dim() });
        }
        let mut acc = vec![0.0; n_val];
        let mut arg = vec![0.0; d];
        for j in 0..mu.len() {
            let xj = mu.spatial(j);
            for (a, (xi, qi)) in arg.iter_mut().zip(xj.iter().zip(q.coords.iter())) {
                *a = (xi - qi) / eps;
            }
            let k = moll.eval(&arg);
            if k > 0.0 {
                let w = mu.atoms[j].weight * k * scale;
                for (acc_c, y_c) in acc.iter_mut().zip(mu.value(j).iter()) {
                    *acc_c += w * y_c;
                }
            }
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube1(bound: f64) -> Domain {
        Domain::unit_cube(1, bound).unwrap()
    }

    #[test]
    fn grid_points_are_cell_centers() {
        let domain = cube1(1.0);
        let scheme = SamplingScheme::new(SchemeKind::Grid, 0);
        let pts = sample_points(&domain, &scheme, 4).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.coords[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn grid_rejects_non_power() {
        let domain = Domain::unit_cube(2, 1.0).unwrap();
        let scheme = SamplingScheme::new(SchemeKind::Grid, 0);
        assert!(sample_points(&domain, &scheme, 10).is_err());
        assert!(sample_points(&domain, &scheme, 16).is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let domain = cube1(1.0);
        for kind in [SchemeKind::JitteredGrid, SchemeKind::UniformRandom, SchemeKind::Gaussian] {
            let scheme = SamplingScheme::new(kind, 42);
            let a = sample_points(&domain, &scheme, 16).unwrap();
            let b = sample_points(&domain, &scheme, 16).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn uniform_random_is_regularly_distributed() {
        // Monte-Carlo oracle: the empirical mean of sin(2 pi x) over 10000
        // uniform points stays within 0.02 of the integral (zero).
        let domain = cube1(1.0);
        let scheme = SamplingScheme::new(SchemeKind::UniformRandom, 9);
        let pts = sample_points(&domain, &scheme, 10_000).unwrap();
        let mean: f64 = pts
            .iter()
            .map(|p| (2.0 * std::f64::consts::PI * p.coords[0]).sin())
            .sum::<f64>()
            / pts.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn mollifier_normalization_matches_quadrature_oracle() {
        let moll = Mollifier::default();
        let n = 10_001;
        let step = 2.0 / n as f64;
        let sum: f64 = (0..n)
            .map(|k| moll.eval1(-1.0 + (k as f64 + 0.5) * step))
            .sum();
        assert!((sum * step - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mollifier_support_and_symmetry() {
        let moll = Mollifier::default();
        assert_eq!(moll.eval(&[1.0, 0.3]), 0.0);
        assert_eq!(moll.eval(&[-1.2]), 0.0);
        for &t in &[0.1, 0.37, 0.92] {
            assert_eq!(moll.eval1(t), moll.eval1(-t));
        }
    }

    #[test]
    fn tokenize_identity_function_on_grid() {
        let domain = cube1(1.0);
        let h = SampledFunction::analytic(1, 1, |x| vec![x[0]]);
        let pts = sample_points(&domain, &SamplingScheme::new(SchemeKind::Grid, 0), 4).unwrap();
        let mu = tokenize(&h, &pts, None, &domain).unwrap();
        assert_eq!(mu.len(), 4);
        for j in 0..4 {
            assert_eq!(mu.spatial(j)[0], mu.value(j)[0]);
            assert!((mu.atoms[j].weight - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn tokenize_rejects_out_of_range_values() {
        let domain = cube1(0.5);
        let h = SampledFunction::analytic(1, 1, |_| vec![0.75]);
        let pts = sample_points(&domain, &SamplingScheme::new(SchemeKind::Grid, 0), 4).unwrap();
        assert!(matches!(
            tokenize(&h, &pts, None, &domain),
            Err(Error::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn rtau_reproduces_constants_on_the_far_interior() {
        // chi_tau is one at distance >= 5 tau, so the outer convolution
        // reproduces the constant once the whole stencil sits there, i.e.
        // from distance 6 tau inward.
        let domain = cube1(2.0);
        let tau = 0.02;
        let m = 512;
        let c = 1.37;
        let h = GridFunction::from_fn(domain, 1, m, |_| vec![c]);
        let out = regularize_rtau(&h, tau).unwrap();
        for k in 0..m {
            let x = (k as f64 + 0.5) / m as f64;
            let dist = x.min(1.0 - x);
            let v = out.values[k];
            if dist >= 6.0 * tau {
                assert!((v - c).abs() < 1e-12, "x={x}: {v}");
            }
            if dist < tau {
                assert!(v.abs() < 1e-12, "x={x}: {v} should vanish near the boundary");
            }
        }
    }

    #[test]
    fn rtau_is_plain_mollification_away_from_the_boundary() {
        // A compactly supported h with dist(supp h, boundary) > 5 tau leaves
        // h . chi_tau = h, so R_tau h = rho_tau * h.
        let domain = cube1(2.0);
        let tau = 0.02;
        let m = 512;
        let bump = |x: &[f64]| {
            let t = (x[0] - 0.5) / 0.2;
            vec![if t.abs() < 1.0 { (1.0 - t * t).powi(2) } else { 0.0 }]
        };
        let h = GridFunction::from_fn(domain, 1, m, bump);
        let out = regularize_rtau(&h, tau).unwrap();
        let kernel = discrete_kernel(tau, m);
        let plain = convolve_separable(&h, &kernel, false);
        for k in 0..m {
            assert!((out.values[k] - plain.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rtau_interior_matches_high_resolution_oracle() {
        let domain = cube1(2.0);
        let tau = 0.01;
        let m = 4096;
        let f = |x: &[f64]| vec![(2.0 * std::f64::consts::PI * x[0]).sin()];
        let h = GridFunction::from_fn(domain, 1, m, f);
        let out = regularize_rtau(&h, tau).unwrap();
        let fine = GridFunction::from_fn(domain, 1, 8 * m, f);
        let oracle = regularize_rtau(&fine, tau).unwrap();
        let mut max_err = 0.0f64;
        for k in 0..m {
            let x = (k as f64 + 0.5) / m as f64;
            if x.min(1.0 - x) > 6.0 * tau {
                let v = out.values[k];
                let o = oracle.interpolate(&[x])[0];
                max_err = max_err.max((v - o).abs());
            }
        }
        assert!(max_err < 1e-4, "interior deviation {max_err}");
    }

    #[test]
    fn rtau_is_linear_and_sup_bounded() {
        let domain = cube1(4.0);
        let m = 256;
        let tau = 0.04;
        let f = |x: &[f64]| vec![(7.0 * x[0]).sin()];
        let g = |x: &[f64]| vec![(3.0 * x[0]).cos() * x[0]];
        let hf = GridFunction::from_fn(domain, 1, m, f);
        let hg = GridFunction::from_fn(domain, 1, m, g);
        let (alpha, beta) = (1.7, -0.6);
        let combo = GridFunction::from_fn(domain, 1, m, |x| {
            vec![alpha * f(x)[0] + beta * g(x)[0]]
        });
        let rf = regularize_rtau(&hf, tau).unwrap();
        let rg = regularize_rtau(&hg, tau).unwrap();
        let rc = regularize_rtau(&combo, tau).unwrap();
        for k in 0..m {
            let lin = alpha * rf.values[k] + beta * rg.values[k];
            assert!((rc.values[k] - lin).abs() < 1e-12);
        }
        assert!(rf.sup_norm() <= hf.sup_norm() + 1e-12);
        assert!(rc.sup_norm() <= combo.sup_norm() + 1e-12);
    }

    #[test]
    fn rtau_rejects_oversized_tau() {
        let domain = cube1(1.0);
        let h = GridFunction::from_fn(domain, 1, 512, |_| vec![1.0]);
        assert!(regularize_rtau(&h, 0.2).is_err());
    }

    #[test]
    fn decode_constant_near_center() {
        // Riemann-sum oracle: for h == c on a dense grid the decoder returns
        // the convolved constant at interior queries.
        let domain = cube1(2.0);
        let c = 0.8;
        let h = SampledFunction::analytic(1, 1, move |_| vec![c]);
        let pts =
            sample_points(&domain, &SamplingScheme::new(SchemeKind::Grid, 0), 4096).unwrap();
        let mu = tokenize(&h, &pts, None, &domain).unwrap();
        let moll = Mollifier::default();
        let v = decode_feps(&mu, &[Point::new(vec![0.5])], 0.1, &moll).unwrap();
        assert!((v[0][0] - c).abs() < 1e-3, "{}", v[0][0]);
    }

    #[test]
    fn decode_far_queries_are_exactly_zero() {
        let _domain = cube1(1.0);
        let mu = DiscreteMeasure::dirac(vec![0.1, 0.5], 1).unwrap();
        let moll = Mollifier::default();
        let v = decode_feps(&mu, &[Point::new(vec![0.9])], 0.2, &moll).unwrap();
        assert_eq!(v[0][0], 0.0);
    }

    #[test]
    fn decode_linear_function_is_exact_at_symmetric_cloud_center() {
        // The even kernel annihilates the odd part of a linear h around a
        // symmetric cloud, leaving the exact center value.
        let domain = cube1(2.0);
        let h = SampledFunction::analytic(1, 1, |x| vec![2.0 * x[0] - 0.3]);
        let pts =
            sample_points(&domain, &SamplingScheme::new(SchemeKind::Grid, 0), 4096).unwrap();
        let mu = tokenize(&h, &pts, None, &domain).unwrap();
        let moll = Mollifier::default();
        let q = 0.5;
        let v = decode_feps(&mu, &[Point::new(vec![q])], 0.1, &moll).unwrap();
        assert!((v[0][0] - (2.0 * q - 0.3)).abs() < 1e-3);
    }

    #[test]
    fn grid_csv_roundtrip() {
        let domain = Domain::torus(2, 1.0).unwrap();
        let g = GridFunction::from_fn(domain, 2, 8, |x| vec![x[0], x[0] * x[1]]);
        let text = g.to_csv();
        let back = GridFunction::from_csv(domain, &text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_midpoints() {
        let domain = Domain::torus(1, 1.0).unwrap();
        let g = GridFunction::new(domain, 1, 4, vec![1.0, 3.0, -2.0, 0.5]).unwrap();
        assert_eq!(g.interpolate(&[0.25])[0], 3.0);
        assert!((g.interpolate(&[0.125])[0] - 2.0).abs() < 1e-15);
        // Wraparound across the seam: between nodes 3 (x=0.75) and 0 (x=0).
        let v = g.interpolate(&[0.875]);
        assert!((v[0] - (0.5 + 1.0) / 2.0).abs() < 1e-15);
    }
}
