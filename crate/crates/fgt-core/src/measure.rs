//! Discrete probability measures on box domains.
//!
//! A [`DiscreteMeasure`] is the universal carrier of this crate: graph tokens,
//! layer outputs, and product measures are all weighted atom clouds in
//! `R^{d+n}`, where the first `coord_split` coordinates are spatial and the
//! rest carry function values. Exact Wasserstein-1 distances between two such
//! clouds are computed by [`w1_distance`].

use crate::error::{Error, Result};
use crate::transport;
use serde::{Deserialize, Serialize};

/// Mass tolerance for the probability-measure invariant.
pub const MASS_TOL: f64 = 1e-12;

/// A point in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// One weighted Dirac atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "x")]
    pub location: Vec<f64>,
    #[serde(rename = "w")]
    pub weight: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, weight: f64) -> Self {
        Self { location, weight }
    }
}

/// A discrete probability measure: an ordered list of weighted atoms in
/// `R^{ambient_dim}` whose weights sum to one.
///
/// Atoms keep their insertion order; nothing is deduplicated except in
/// [`DiscreteMeasure::marginal`], so permutation-invariance tests stay
/// meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
    #[serde(rename = "dim")]
    pub ambient_dim: usize,
    #[serde(rename = "split")]
    pub coord_split: usize,
}

/// Which factor of a product measure a marginal keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

impl DiscreteMeasure {
    /// Builds a measure and checks the invariants: weights are nonnegative and
    /// sum to one within [`MASS_TOL`], every atom lives in `R^{ambient_dim}`,
    /// and `0 < coord_split <= ambient_dim`. A split equal to the ambient
    /// dimension marks a measure with no value part (e.g. a spatial
    /// projection).
    pub fn new(atoms: Vec<Atom>, ambient_dim: usize, coord_split: usize) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if coord_split == 0 || coord_split > ambient_dim {
            return Err(Error::InvalidMeasure(format!(
                "coord_split {coord_split} not in (0, {ambient_dim}]"
            )));
        }
        let mut mass = 0.0;
        for atom in &atoms {
            if atom.location.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    actual: atom.location.len(),
                });
            }
            if !(atom.weight >= 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "negative or NaN weight {}",
                    atom.weight
                )));
            }
            mass += atom.weight;
        }
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "total mass {mass} not within {MASS_TOL} of 1"
            )));
        }
        Ok(Self {
            atoms,
            ambient_dim,
            coord_split,
        })
    }

    /// Uniform measure (`weight 1/N`) on the given locations.
    pub fn uniform(locations: Vec<Vec<f64>>, coord_split: usize) -> Result<Self> {
        let n = locations.len();
        if n == 0 {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let dim = locations[0].len();
        let w = 1.0 / n as f64;
        let atoms = locations.into_iter().map(|x| Atom::new(x, w)).collect();
        Self::new(atoms, dim, coord_split)
    }

    /// Single Dirac mass.
    pub fn dirac(location: Vec<f64>, coord_split: usize) -> Result<Self> {
        let dim = location.len();
        Self::new(vec![Atom::new(location, 1.0)], dim, coord_split)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when every weight equals `1/N` within [`MASS_TOL`].
    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.atoms.len() as f64;
        self.atoms.iter().all(|a| (a.weight - w).abs() <= MASS_TOL)
    }

    /// Spatial part of an atom (the first `coord_split` coordinates).
    pub fn spatial(&self, j: usize) -> &[f64] {
        &self.atoms[j].location[..self.coord_split]
    }

    /// Value part of an atom (the remaining coordinates).
    pub fn value(&self, j: usize) -> &[f64] {
        &self.atoms[j].location[self.coord_split..]
    }

    /// Re-tags the spatial/value split without touching the atoms.
    pub fn with_coord_split(mut self, coord_split: usize) -> Result<Self> {
        if coord_split == 0 || coord_split > self.ambient_dim {
            return Err(Error::InvalidMeasure(format!(
                "coord_split {coord_split} not in (0, {}]",
                self.ambient_dim
            )));
        }
        self.coord_split = coord_split;
        Ok(self)
    }

    /// Push-forward under a total map: same weights, mapped locations, atom
    /// order preserved. The output split is clamped to the new dimension.
    pub fn pushforward<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let mut out = Vec::with_capacity(self.atoms.len());
        let mut out_dim = None;
        for atom in &self.atoms {
            let loc = f(&atom.location);
            match out_dim {
                None => out_dim = Some(loc.len()),
                Some(d) if d != loc.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        actual: loc.len(),
                    })
                }
                _ => {}
            }
            out.push(Atom::new(loc, atom.weight));
        }
        let dim = out_dim.expect("non-empty measure");
        Self::new(out, dim, self.coord_split.min(dim))
    }

    /// Tensor product: `N*K` atoms in first-factor-major order, weights
    /// multiply, and the split marks the factor boundary.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let dim = self.ambient_dim + other.ambient_dim;
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        for a in &self.atoms {
            for b in &other.atoms {
                let mut loc = Vec::with_capacity(dim);
                loc.extend_from_slice(&a.location);
                loc.extend_from_slice(&b.location);
                atoms.push(Atom::new(loc, a.weight * b.weight));
            }
        }
        Self::new(atoms, dim, self.ambient_dim)
    }

    /// Pairs the measure with a vector-valued test function:
    /// `sum_j w_j phi(z_j)`.
    pub fn pair_with_test<F>(&self, phi: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let mut acc: Option<Vec<f64>> = None;
        for atom in &self.atoms {
            let v = phi(&atom.location);
            match &mut acc {
                None => {
                    acc = Some(v.iter().map(|x| x * atom.weight).collect());
                }
                Some(s) => {
                    for (si, vi) in s.iter_mut().zip(v.iter()) {
                        *si += atom.weight * vi;
                    }
                }
            }
        }
        acc.unwrap_or_default()
    }

    /// Marginal of a product measure: push-forward under the projection onto
    /// one factor (the boundary is `split`), merging atoms with bitwise-equal
    /// locations. The output split is clamped to the factor dimension.
    pub fn marginal(&self, which: Factor, split: usize) -> Result<Self> {
        if split == 0 || split >= self.ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "factor split {split} not inside ambient dim {}",
                self.ambient_dim
            )));
        }
        let projected: Vec<(Vec<f64>, f64)> = self
            .atoms
            .iter()
            .map(|a| {
                let loc = match which {
                    Factor::First => a.location[..split].to_vec(),
                    Factor::Second => a.location[split..].to_vec(),
                };
                (loc, a.weight)
            })
            .collect();
        // Merge bitwise-identical locations, keeping first-seen order.
        let mut merged: Vec<(Vec<f64>, f64)> = Vec::new();
        for (loc, w) in projected {
            match merged.iter_mut().find(|(l, _)| bits_equal(l, &loc)) {
                Some((_, mw)) => *mw += w,
                None => merged.push((loc, w)),
            }
        }
        let dim = merged[0].0.len();
        let atoms = merged
            .into_iter()
            .map(|(loc, w)| Atom::new(loc, w))
            .collect();
        Self::new(atoms, dim, self.coord_split.min(dim))
    }

    /// JSON form of the external interface:
    /// `{"dim": d+n, "split": d, "atoms": [{"x": [...], "w": ...}]}`.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        Self::new(m.atoms, m.ambient_dim, m.coord_split)
    }
}

fn bits_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Witness of an optimal coupling: mass moved per (source, target) pair and
/// the total cost.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// Triples `(source_index, target_index, mass)`.
    pub moves: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl TransportPlan {
    /// Checks the marginal and cost identities against the two measures.
    pub fn validate(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: f64) -> Result<()> {
        let mut row = vec![0.0; mu.len()];
        let mut col = vec![0.0; nu.len()];
        let mut cost = 0.0;
        for &(i, j, m) in &self.moves {
            row[i] += m;
            col[j] += m;
            cost += m * euclidean(&mu.atoms[i].location, &nu.atoms[j].location);
        }
        for (r, a) in row.iter().zip(mu.atoms.iter()) {
            if (r - a.weight).abs() > tol {
                return Err(Error::InvalidMeasure(format!(
                    "plan row sum {r} != source weight {}",
                    a.weight
                )));
            }
        }
        for (c, a) in col.iter().zip(nu.atoms.iter()) {
            if (c - a.weight).abs() > tol {
                return Err(Error::InvalidMeasure(format!(
                    "plan column sum {c} != target weight {}",
                    a.weight
                )));
            }
        }
        if (cost - self.cost).abs() > tol {
            return Err(Error::InvalidMeasure(format!(
                "plan cost {} != recomputed {cost}",
                self.cost
            )));
        }
        Ok(())
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exact Wasserstein-1 distance under the Euclidean ground metric, with an
/// optimal plan as witness.
///
/// Uniform equal-size inputs take the assignment (permutation-minimum) route;
/// everything else goes through the general transportation solver. Both are
/// exact at desk scale.
pub fn w1_distance(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<(f64, TransportPlan)> {
    if mu.ambient_dim != nu.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: mu.ambient_dim,
            actual: nu.ambient_dim,
        });
    }
    if mu.is_empty() || nu.is_empty() {
        return Err(Error::InvalidMeasure("empty measure".into()));
    }

    let n = mu.len();
    let m = nu.len();
    let cost = |i: usize, j: usize| euclidean(&mu.atoms[i].location, &nu.atoms[j].location);

    let plan = if n == m && mu.is_uniform() && nu.is_uniform() {
        let mut matrix = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                matrix[i * m + j] = cost(i, j);
            }
        }
        let assignment = transport::solve_assignment(&matrix, n);
        let w = 1.0 / n as f64;
        let mut total = 0.0;
        let moves = assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                total += w * matrix[i * m + j];
                (i, j, w)
            })
            .collect();
        TransportPlan { moves, cost: total }
    } else {
        let supplies: Vec<f64> = mu.atoms.iter().map(|a| a.weight).collect();
        let demands: Vec<f64> = nu.atoms.iter().map(|a| a.weight).collect();
        let mut matrix = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                matrix[i * m + j] = cost(i, j);
            }
        }
        let flows = transport::solve_transport(&supplies, &demands, &matrix, m)?;
        let mut total = 0.0;
        let moves: Vec<(usize, usize, f64)> = flows
            .into_iter()
            .map(|(i, j, mass)| {
                total += mass * matrix[i * m + j];
                (i, j, mass)
            })
            .collect();
        TransportPlan { moves, cost: total }
    };

    let d = plan.cost;
    if !d.is_finite() {
        return Err(Error::NonFinite("w1_distance"));
    }
    Ok((d, plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_measure(rng: &mut ChaCha8Rng, n: usize, dim: usize, uniform: bool) -> DiscreteMeasure {
        let locations: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
            .collect();
        if uniform {
            DiscreteMeasure::uniform(locations, 1).unwrap()
        } else {
            let mut weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.05).collect();
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            let atoms = locations
                .into_iter()
                .zip(weights)
                .map(|(x, w)| Atom::new(x, w))
                .collect();
            DiscreteMeasure::new(atoms, dim, 1).unwrap()
        }
    }

    fn brute_force_w1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        // Exhaustive permutation minimum for uniform equal-size measures.
        let n = mu.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        loop {
            let cost: f64 = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| euclidean(&mu.atoms[i].location, &nu.atoms[j].location))
                .sum::<f64>()
                / n as f64;
            best = best.min(cost);
            if !next_permutation(&mut perm) {
                break;
            }
        }
        best
    }

    fn next_permutation(p: &mut [usize]) -> bool {
        let n = p.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while p[j] <= p[i - 1] {
            j -= 1;
        }
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }

    #[test]
    fn measure_invariants_are_enforced() {
        assert!(DiscreteMeasure::new(vec![], 2, 1).is_err());
        assert!(DiscreteMeasure::new(vec![Atom::new(vec![0.0, 0.0], 0.5)], 2, 1).is_err());
        assert!(DiscreteMeasure::new(vec![Atom::new(vec![0.0, 0.0], 1.0)], 2, 3).is_err());
        assert!(DiscreteMeasure::new(vec![Atom::new(vec![0.0], 1.0)], 2, 1).is_err());
        assert!(DiscreteMeasure::new(vec![Atom::new(vec![0.0, 0.0], 1.0)], 2, 1).is_ok());
    }

    #[test]
    fn pushforward_identity_and_constant_y() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.2, 1.0], vec![0.7, -0.5]], 1).unwrap();
        let id = mu.pushforward(|z| z.to_vec()).unwrap();
        assert_eq!(mu, id);
        // w_{y0} with y0 = 0 zeroes the value coordinate and keeps weights.
        let warped = mu
            .pushforward(|z| vec![z[0], 0.0])
            .unwrap();
        for (a, b) in mu.atoms.iter().zip(warped.atoms.iter()) {
            assert_eq!(a.weight, b.weight);
            assert_eq!(a.location[0], b.location[0]);
            assert_eq!(b.location[1], 0.0);
        }
    }

    #[test]
    fn pushforward_projection_discards_values() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.25, 3.0], vec![0.75, -3.0]], 1).unwrap();
        let proj = mu.pushforward(|z| vec![z[0]]).unwrap();
        assert_eq!(proj.ambient_dim, 1);
        assert_eq!(proj.coord_split, 1);
        assert_eq!(proj.atoms[0].location, vec![0.25]);
        assert_eq!(proj.atoms[1].location, vec![0.75]);
    }

    #[test]
    fn pushforward_preserves_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mu = random_measure(&mut rng, 17, 3, false);
        let mapped = mu.pushforward(|z| z.iter().map(|v| v * 2.0 + 1.0).collect()).unwrap();
        let mass: f64 = mapped.atoms.iter().map(|a| a.weight).sum();
        assert_eq!(mass, mu.atoms.iter().map(|a| a.weight).sum::<f64>());
    }

    #[test]
    fn w1_of_two_diracs_is_their_distance() {
        let a = DiscreteMeasure::dirac(vec![0.0, 0.0], 1).unwrap();
        let b = DiscreteMeasure::dirac(vec![3.0, 4.0], 1).unwrap();
        let (d, plan) = w1_distance(&a, &b).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
        plan.validate(&a, &b, 1e-10).unwrap();
    }

    #[test]
    fn w1_self_distance_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu = random_measure(&mut rng, 9, 2, true);
        let (d, _) = w1_distance(&mu, &mu).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn w1_two_atom_example() {
        // 1-D example embedded with a zero value coordinate; the exhaustive
        // minimum over both pairings is 0.25.
        let mu = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 1).unwrap();
        let nu = DiscreteMeasure::uniform(vec![vec![0.25, 0.0], vec![0.75, 0.0]], 1).unwrap();
        let (d, _) = w1_distance(&mu, &nu).unwrap();
        assert!((d - 0.25).abs() < 1e-12, "{d}");
    }

    #[test]
    fn w1_matches_brute_force_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in 2..=6 {
            for _ in 0..20 {
                let mu = random_measure(&mut rng, n, 2, true);
                let nu = random_measure(&mut rng, n, 2, true);
                let (d, plan) = w1_distance(&mu, &nu).unwrap();
                let expected = brute_force_w1(&mu, &nu);
                assert!((d - expected).abs() < 1e-10, "n={n}: {d} vs {expected}");
                plan.validate(&mu, &nu, 1e-10).unwrap();
            }
        }
    }

    #[test]
    fn w1_is_symmetric_and_triangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = random_measure(&mut rng, 5, 2, false);
            let b = random_measure(&mut rng, 7, 2, false);
            let c = random_measure(&mut rng, 4, 2, false);
            let (dab, _) = w1_distance(&a, &b).unwrap();
            let (dba, _) = w1_distance(&b, &a).unwrap();
            assert!((dab - dba).abs() < 1e-12);
            let (dac, _) = w1_distance(&a, &c).unwrap();
            let (dcb, _) = w1_distance(&c, &b).unwrap();
            assert!(dab <= dac + dcb + 1e-10);
        }
    }

    #[test]
    fn w1_rejects_dimension_mismatch_and_empty() {
        let a = DiscreteMeasure::dirac(vec![0.0, 0.0], 1).unwrap();
        let b = DiscreteMeasure::dirac(vec![0.0, 0.0, 0.0], 1).unwrap();
        assert!(w1_distance(&a, &b).is_err());
    }

    #[test]
    fn product_of_diracs_is_a_single_atom() {
        let a = DiscreteMeasure::dirac(vec![0.1, 0.2], 1).unwrap();
        let b = DiscreteMeasure::dirac(vec![0.3, 0.4], 1).unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.atoms[0].location, vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(p.atoms[0].weight, 1.0);
        assert_eq!(p.coord_split, 2);
    }

    #[test]
    fn product_counts_and_weights_multiply() {
        let a = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0]], 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_measure(&mut rng, 3, 2, false);
        let p = a.product(&b).unwrap();
        assert_eq!(p.len(), 6);
        for (idx, atom) in p.atoms.iter().enumerate() {
            let (i, j) = (idx / 3, idx % 3);
            assert!((atom.weight - a.atoms[i].weight * b.atoms[j].weight).abs() < 1e-15);
        }
    }

    #[test]
    fn marginals_recover_both_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_measure(&mut rng, 4, 2, false);
        let b = random_measure(&mut rng, 3, 2, true);
        let p = a.product(&b).unwrap();
        let first = p.marginal(Factor::First, 2).unwrap();
        let second = p.marginal(Factor::Second, 2).unwrap();
        assert_eq!(first.len(), a.len());
        assert_eq!(second.len(), b.len());
        for (x, y) in first.atoms.iter().zip(a.atoms.iter()) {
            assert_eq!(x.location, y.location);
            assert!((x.weight - y.weight).abs() < 1e-12);
        }
        for (x, y) in second.atoms.iter().zip(b.atoms.iter()) {
            assert_eq!(x.location, y.location);
            assert!((x.weight - y.weight).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_merges_duplicate_atoms() {
        let a = DiscreteMeasure::dirac(vec![0.5, 0.1], 1).unwrap();
        let b = DiscreteMeasure::new(
            vec![Atom::new(vec![0.3, 0.0], 0.5), Atom::new(vec![0.3, 0.0], 0.5)],
            2,
            1,
        )
        .unwrap();
        let p = a.product(&b).unwrap();
        let first = p.marginal(Factor::First, 2).unwrap();
        assert_eq!(first.len(), 1);
        assert!((first.atoms[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pairing_with_tests() {
        let z = DiscreteMeasure::dirac(vec![0.4, 2.0], 1).unwrap();
        let v = z.pair_with_test(|loc| vec![loc[0] + loc[1]]);
        assert_eq!(v, vec![2.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mu = random_measure(&mut rng, 11, 2, false);
        let one = mu.pair_with_test(|_| vec![1.0]);
        assert!((one[0] - 1.0).abs() < 1e-12);
        // Graph-measure pairing with y picks out the mean sampled value.
        let locations: Vec<Vec<f64>> = (0..8)
            .map(|k| {
                let x = (k as f64 + 0.5) / 8.0;
                vec![x, x * x]
            })
            .collect();
        let mean: f64 = locations.iter().map(|l| l[1]).sum::<f64>() / 8.0;
        let gamma = DiscreteMeasure::uniform(locations, 1).unwrap();
        let v = gamma.pair_with_test(|loc| vec![loc[1]]);
        assert!((v[0] - mean).abs() < 1e-14);
    }

    #[test]
    fn json_roundtrip_matches_schema() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.1, 0.9], vec![0.6, -0.2]], 1).unwrap();
        let json = mu.to_json().unwrap();
        assert!(json.contains("\"dim\":2"));
        assert!(json.contains("\"split\":1"));
        assert!(json.contains("\"atoms\""));
        let back = DiscreteMeasure::from_json(&json).unwrap();
        assert_eq!(mu, back);
    }
}
