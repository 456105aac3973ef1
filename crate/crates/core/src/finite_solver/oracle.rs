//! Exhaustive oracle for small games.
//!
//! Player 2 has optimal memoryless strategies, so the value of a vertex is
//! the maximum, over all memoryless Player 2 strategies, of Player 1's
//! optimal one-player cost against it. Each one-player problem is a
//! shortest-path problem to the targets, solved with Bellman-Ford; paths
//! through a negative cycle that can still reach a target cost `-inf`.

use thiserror::Error;

use crate::arena::{ExtValue, Player, PricedGameGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    /// Upper bound on the number of enumerated Player 2 strategies.
    pub max_strategies: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_vertices: 10,
            max_strategies: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {0} vertices, more than the oracle limit of {1}")]
    TooManyVertices(usize, usize),
    #[error("graph has more than {0} memoryless Player 2 strategies")]
    TooManyStrategies(u64),
    #[error("vertex index {0} out of range")]
    NoSuchVertex(usize),
}

/// Shortest distances to the targets when every vertex follows `succ`
/// lists (all edges for Player 1, one fixed edge for Player 2).
fn one_player(g: &PricedGameGraph, succ: &[Vec<(usize, i64)>]) -> Vec<ExtValue> {
    let n = g.len();
    // Distances as Option<i64>: None = unreachable.
    let mut dist: Vec<Option<i64>> = (0..n).map(|v| g.is_target(v).then_some(0)).collect();
    let relax = |dist: &mut Vec<Option<i64>>| {
        let mut changed = vec![false; n];
        for v in 0..n {
            if g.is_target(v) {
                continue;
            }
            for &(u, w) in &succ[v] {
                if let Some(du) = dist[u] {
                    let cand = du + w;
                    if dist[v].is_none_or(|dv| cand < dv) {
                        dist[v] = Some(cand);
                        changed[v] = true;
                    }
                }
            }
        }
        changed
    };
    for _ in 0..n {
        relax(&mut dist);
    }
    // Anything still improving lies on or behind a negative cycle.
    let mut minus = vec![false; n];
    for _ in 0..n {
        for (v, c) in relax(&mut dist).into_iter().enumerate() {
            minus[v] |= c;
        }
    }
    // Propagate -inf backwards: reaching a -inf vertex costs -inf.
    loop {
        let mut grew = false;
        for v in 0..n {
            if !minus[v] && !g.is_target(v) && succ[v].iter().any(|&(u, _)| minus[u]) {
                minus[v] = true;
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    (0..n)
        .map(|v| {
            if minus[v] {
                ExtValue::MinusInf
            } else {
                dist[v].map_or(ExtValue::PlusInf, ExtValue::Finite)
            }
        })
        .collect()
}

/// Values of every vertex by exhaustive enumeration.
pub fn brute_force_values(g: &PricedGameGraph, limits: OracleLimits) -> Result<Vec<ExtValue>, OracleError> {
    if g.len() > limits.max_vertices {
        return Err(OracleError::TooManyVertices(g.len(), limits.max_vertices));
    }
    let choosers: Vec<usize> = (0..g.len())
        .filter(|&v| g.owner(v) == Player::Two && !g.is_target(v) && !g.edges(v).is_empty())
        .collect();
    let mut total: u64 = 1;
    for &v in &choosers {
        total = total.saturating_mul(g.edges(v).len() as u64);
        if total > limits.max_strategies {
            return Err(OracleError::TooManyStrategies(limits.max_strategies));
        }
    }

    let mut best = vec![ExtValue::MinusInf; g.len()];
    let mut pick = vec![0usize; choosers.len()];
    loop {
        let succ: Vec<Vec<(usize, i64)>> = (0..g.len())
            .map(|v| match choosers.iter().position(|&c| c == v) {
                Some(i) => {
                    let e = g.edges(v)[pick[i]];
                    vec![(e.to, e.weight)]
                }
                None => g.edges(v).iter().map(|e| (e.to, e.weight)).collect(),
            })
            .collect();
        for (b, x) in best.iter_mut().zip(one_player(g, &succ)) {
            if x > *b {
                *b = x;
            }
        }
        // Odometer over the Player 2 choices.
        let mut i = 0;
        loop {
            if i == choosers.len() {
                return Ok(best);
            }
            pick[i] += 1;
            if pick[i] < g.edges(choosers[i]).len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_force_value(g: &PricedGameGraph, v0: usize, limits: OracleLimits) -> Result<ExtValue, OracleError> {
    if v0 >= g.len() {
        return Err(OracleError::NoSuchVertex(v0));
    }
    Ok(brute_force_values(g, limits)?[v0])
}
