//! Exact solvers for the optimal-transport problems behind [`crate::measure::w1_distance`].
//!
//! Two routes, both exact on dense cost matrices:
//! * [`solve_assignment`] — shortest-augmenting-path assignment (Jonker--Volgenant
//!   style) for uniform measures with equal atom counts, where the optimum is a
//!   permutation.
//! * [`solve_transport`] — successive shortest paths with node potentials for
//!   the general transportation problem (arbitrary nonnegative weights).

use crate::error::{Error, Result};

/// Mass below this is treated as exhausted when augmenting.
const MASS_EPS: f64 = 1e-15;

/// Residual demand below this terminates the transport loop; it absorbs the
/// mass-normalization tolerance of the input measures.
const DEMAND_STOP: f64 = 1e-11;

/// Solves the square assignment problem on a row-major `n x n` cost matrix.
/// Returns the column assigned to each row.
pub fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    const NONE: usize = usize::MAX;

    let mut v = vec![0.0; n]; // column potentials
    let mut row_of = vec![NONE; n]; // row matched to each column
    let mut col_of = vec![NONE; n]; // column matched to each row

    let mut d = vec![0.0; n];
    let mut pred = vec![0usize; n];
    let mut scanned = vec![false; n];

    for i0 in 0..n {
        for j in 0..n {
            d[j] = cost[i0 * n + j] - v[j];
            pred[j] = i0;
            scanned[j] = false;
        }
        let sink;
        loop {
            // Settle the cheapest unscanned column.
            let mut jstar = NONE;
            let mut best = f64::INFINITY;
            for j in 0..n {
                if !scanned[j] && d[j] < best {
                    best = d[j];
                    jstar = j;
                }
            }
            scanned[jstar] = true;
            if row_of[jstar] == NONE {
                sink = jstar;
                break;
            }
            // Relax through the row currently matched to jstar.
            let i = row_of[jstar];
            let tight = cost[i * n + jstar] - v[jstar];
            for j in 0..n {
                if !scanned[j] {
                    let nd = d[jstar] + (cost[i * n + j] - v[j]) - tight;
                    if nd < d[j] {
                        d[j] = nd;
                        pred[j] = i;
                    }
                }
            }
        }
        let reach = d[sink];
        for j in 0..n {
            if scanned[j] {
                v[j] += d[j] - reach;
            }
        }
        // Augment along the predecessor chain.
        let mut j = sink;
        loop {
            let i = pred[j];
            row_of[j] = i;
            let next = col_of[i];
            col_of[i] = j;
            j = next;
            if i == i0 {
                break;
            }
        }
    }
    col_of
}

/// Solves the transportation problem `min sum f_ij c_ij` subject to
/// `sum_j f_ij = supply_i`, `sum_i f_ij = demand_j`, `f >= 0` by successive
/// shortest augmenting paths with node potentials. Returns the nonzero flows.
pub fn solve_transport(
    supplies: &[f64],
    demands: &[f64],
    cost: &[f64],
    m: usize,
) -> Result<Vec<(usize, usize, f64)>> {
    let n = supplies.len();
    assert_eq!(demands.len(), m);
    assert_eq!(cost.len(), n * m);
    const NONE: usize = usize::MAX;

    let mut res_supply = supplies.to_vec();
    let mut res_demand = demands.to_vec();
    // inflow[j]: list of (source, mass) currently feeding sink j
    let mut inflow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];

    // Potentials with initial row/column reduction.
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    for i in 0..n {
        let mut best = f64::INFINITY;
        for j in 0..m {
            best = best.min(cost[i * m + j]);
        }
        u[i] = best;
    }
    for j in 0..m {
        let mut best = f64::INFINITY;
        for i in 0..n {
            best = best.min(cost[i * m + j] - u[i]);
        }
        v[j] = best;
    }
    let reduced = |i: usize, j: usize, u: &[f64], v: &[f64]| -> f64 {
        (cost[i * m + j] - u[i] - v[j]).max(0.0)
    };

    let mut d = vec![0.0; m];
    // pred[j] = (source arriving at j, sink through whose backward arc that
    // source was reached; NONE when the source still has residual supply)
    let mut pred: Vec<(usize, usize)> = vec![(NONE, NONE); m];
    let mut scanned = vec![false; m];
    let mut src_dist = vec![0.0; n];
    let mut src_expanded = vec![false; n];

    let mut remaining: f64 = res_demand.iter().sum();
    while remaining > DEMAND_STOP {
        // Multi-source Dijkstra over sinks.
        for j in 0..m {
            d[j] = f64::INFINITY;
            pred[j] = (NONE, NONE);
            scanned[j] = false;
        }
        for i in 0..n {
            src_expanded[i] = false;
            if res_supply[i] > MASS_EPS {
                src_dist[i] = 0.0;
                for j in 0..m {
                    let c = reduced(i, j, &u, &v);
                    if c < d[j] {
                        d[j] = c;
                        pred[j] = (i, NONE);
                    }
                }
                src_expanded[i] = true;
            }
        }
        let sink;
        loop {
            let mut jstar = NONE;
            let mut best = f64::INFINITY;
            for j in 0..m {
                if !scanned[j] && d[j] < best {
                    best = d[j];
                    jstar = j;
                }
            }
            if jstar == NONE {
                return Err(Error::InvalidMeasure(
                    "transport: no augmenting path (supplies exhausted early)".into(),
                ));
            }
            scanned[jstar] = true;
            if res_demand[jstar] > MASS_EPS {
                sink = jstar;
                break;
            }
            // Expand the sources feeding jstar through backward arcs.
            let feeders: Vec<usize> = inflow[jstar]
                .iter()
                .filter(|&&(_, f)| f > MASS_EPS)
                .map(|&(i, _)| i)
                .collect();
            for i in feeders {
                if src_expanded[i] {
                    continue;
                }
                src_expanded[i] = true;
                src_dist[i] = d[jstar];
                for j in 0..m {
                    if !scanned[j] {
                        let nd = d[jstar] + reduced(i, j, &u, &v);
                        if nd < d[j] {
                            d[j] = nd;
                            pred[j] = (i, jstar);
                        }
                    }
                }
            }
        }
        let reach = d[sink];

        // Trace the augmenting path and find its bottleneck.
        let mut path: Vec<(usize, usize)> = Vec::new(); // forward arcs (i, j)
        let mut bottleneck = res_demand[sink];
        let mut j = sink;
        loop {
            let (i, via) = pred[j];
            path.push((i, j));
            if via == NONE {
                bottleneck = bottleneck.min(res_supply[i]);
                break;
            }
            let f = inflow[via]
                .iter()
                .find(|&&(s, _)| s == i)
                .map(|&(_, f)| f)
                .unwrap_or(0.0);
            bottleneck = bottleneck.min(f);
            j = via;
        }
        if bottleneck <= MASS_EPS {
            return Err(Error::InvalidMeasure(
                "transport: vanishing bottleneck".into(),
            ));
        }

        // Push mass: add along forward arcs, remove along backward arcs.
        let mut j = sink;
        loop {
            let (i, via) = pred[j];
            add_flow(&mut inflow[j], i, bottleneck);
            if via == NONE {
                res_supply[i] -= bottleneck;
                break;
            }
            add_flow(&mut inflow[via], i, -bottleneck);
            j = via;
        }
        res_demand[sink] -= bottleneck;
        remaining -= bottleneck;

        // Johnson-style potential update keeps reduced costs nonnegative.
        for j in 0..m {
            if scanned[j] {
                v[j] += d[j] - reach;
            }
        }
        for i in 0..n {
            if src_expanded[i] {
                u[i] -= src_dist[i] - reach;
            }
        }
    }

    let mut flows = Vec::new();
    for (j, feeders) in inflow.iter().enumerate() {
        for &(i, f) in feeders {
            if f > MASS_EPS {
                flows.push((i, j, f));
            }
        }
    }
    flows.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(flows)
}

fn add_flow(list: &mut Vec<(usize, f64)>, i: usize, delta: f64) {
    match list.iter_mut().find(|(s, _)| *s == i) {
        Some((_, f)) => {
            *f += delta;
            if *f < MASS_EPS {
                list.retain(|&(_, f)| f >= MASS_EPS);
            }
        }
        None => {
            if delta > MASS_EPS {
                list.push((i, delta));
            }
        }
    }
}
