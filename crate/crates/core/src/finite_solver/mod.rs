//! Reachability-cost games on finite priced game graphs.
//!
//! Player 1 minimizes the total weight accumulated until a target is
//! reached (`+inf` if it never is); Player 2 maximizes it.

mod oracle;
mod random;

use std::cmp::Ordering;

use thiserror::Error;

use crate::arena::{ExtValue, Player, PricedGameGraph};

pub use oracle::{brute_force_value, brute_force_values, OracleError, OracleLimits};
pub use random::random_game;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("vertex {0} has value {1}; no optimal strategy is extracted there")]
    InfiniteValue(String, ExtValue),
    #[error("vertex index {0} out of range")]
    NoSuchVertex(usize),
    #[error("vertex {0} is a target")]
    Target(String),
}

/// Player 1 attractor of the targets, with the round at which each vertex
/// joined (`None` outside the attractor).
pub fn attractor_ranks(g: &PricedGameGraph) -> Vec<Option<usize>> {
    let mut rank: Vec<Option<usize>> = (0..g.len()).map(|v| g.is_target(v).then_some(0)).collect();
    let mut round = 0;
    loop {
        round += 1;
        let joins: Vec<usize> = (0..g.len())
            .filter(|&v| rank[v].is_none())
            .filter(|&v| {
                let mut inside = g.edges(v).iter().map(|e| rank[e.to].is_some());
                match g.owner(v) {
                    Player::One => inside.any(|b| b),
                    Player::Two => !g.edges(v).is_empty() && inside.all(|b| b),
                }
            })
            .collect();
        if joins.is_empty() {
            return rank;
        }
        for v in joins {
            rank[v] = Some(round);
        }
    }
}

/// Vertices from which Player 1 can force a visit to the targets.
pub fn player1_attractor(g: &PricedGameGraph) -> Vec<bool> {
    attractor_ranks(g).into_iter().map(|r| r.is_some()).collect()
}

/// The iterates `x_0, ..., x_N` of value iteration from above.
///
/// `x_i(v)` is what Player 1 can guarantee when forced to reach a target
/// within `i` steps, except that vertices whose iterate fell below
/// `-(n-1)W` are pinned to `-inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueTable {
    iterates: Vec<Vec<ExtValue>>,
}

impl ValueTable {
    /// The stabilization index `N`: the first `i` with `x_{i+1} = x_i`.
    pub fn stabilization_index(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn iterate(&self, i: usize) -> &[ExtValue] {
        &self.iterates[i.min(self.stabilization_index())]
    }

    pub fn final_values(&self) -> &[ExtValue] {
        self.iterates.last().expect("x_0 always exists")
    }
}

/// Memoryless choice of an action index per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorylessStrategy {
    pub player: Player,
    /// `None` at targets and at vertices of the other player.
    pub choice: Vec<Option<usize>>,
}

impl MemorylessStrategy {
    pub fn action(&self, v: usize) -> Option<usize> {
        self.choice.get(v).copied().flatten()
    }
}

/// Player 1's finite-memory strategy driven by a step counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterStrategy {
    /// `table[i][v]`: action at `v` with `i` steps left, for `1 <= i <= N`.
    table: Vec<Vec<Option<usize>>>,
    /// Used once the counter no longer applies.
    fallback: Vec<Option<usize>>,
}

impl CounterStrategy {
    /// The counter a play from scratch starts with.
    pub fn initial_counter(&self) -> usize {
        self.table.len().saturating_sub(1)
    }

    /// Action at `v` with `counter` steps left.
    pub fn action(&self, v: usize, counter: usize) -> Option<usize> {
        let c = counter.min(self.initial_counter());
        self.table
            .get(c)
            .and_then(|row| row[v])
            .or(self.fallback[v])
    }

    /// Action after `steps` moves of a play that started with the full counter.
    pub fn action_after(&self, v: usize, steps: usize) -> Option<usize> {
        self.action(v, self.initial_counter().saturating_sub(steps))
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub values: Vec<ExtValue>,
    pub table: ValueTable,
    pub p1: CounterStrategy,
    pub p2: MemorylessStrategy,
    /// Largest absolute edge weight.
    pub bound: i64,
}

impl SolveResult {
    pub fn value(&self, v: usize) -> ExtValue {
        self.values[v]
    }
}

fn sat_add(w: i64, x: ExtValue) -> ExtValue {
    x.plus(w)
}

/// Edge order used for tie-breaking: lowest successor, then lowest action.
fn tie_key(e: &crate::arena::Edge) -> (usize, usize) {
    (e.to, e.action)
}

fn round(g: &PricedGameGraph, x: &[ExtValue], cutoff: i64) -> Vec<ExtValue> {
    (0..g.len())
        .map(|v| {
            if g.is_target(v) {
                return ExtValue::Finite(0);
            }
            if x[v] == ExtValue::MinusInf {
                return ExtValue::MinusInf;
            }
            let candidates = g.edges(v).iter().map(|e| sat_add(e.weight, x[e.to]));
            let best = match g.owner(v) {
                Player::One => candidates.min(),
                Player::Two => candidates.max(),
            }
            .unwrap_or(ExtValue::PlusInf);
            match best {
                ExtValue::Finite(n) if n < cutoff => ExtValue::MinusInf,
                b => b,
            }
        })
        .collect()
}

/// Solves the game on every vertex.
pub fn solve_finite(g: &PricedGameGraph) -> SolveResult {
    let n = g.len() as i64;
    let bound = g.max_abs_weight();
    let cutoff = -(n - 1).max(0) * bound;

    let x0: Vec<ExtValue> = (0..g.len())
        .map(|v| if g.is_target(v) { ExtValue::Finite(0) } else { ExtValue::PlusInf })
        .collect();
    let mut iterates = vec![x0];
    loop {
        let next = round(g, iterates.last().unwrap(), cutoff);
        if &next == iterates.last().unwrap() {
            break;
        }
        iterates.push(next);
    }
    let table = ValueTable { iterates };
    let values = table.final_values().to_vec();
    let (p1, p2) = extract_strategies(&table, g);
    SolveResult {
        values,
        table,
        p1,
        p2,
        bound,
    }
}

fn attractor_strategy(g: &PricedGameGraph) -> Vec<Option<usize>> {
    let rank = attractor_ranks(g);
    (0..g.len())
        .map(|v| {
            if g.is_target(v) || g.owner(v) != Player::One {
                return None;
            }
            let key = |e: &&crate::arena::Edge| (rank[e.to].unwrap_or(usize::MAX), tie_key(e));
            g.edges(v).iter().min_by_key(key).map(|e| e.action)
        })
        .collect()
}

/// Extracts Player 1's counter strategy from the iterates and Player 2's
/// memoryless argmax strategy from the final values.
pub fn extract_strategies(table: &ValueTable, g: &PricedGameGraph) -> (CounterStrategy, MemorylessStrategy) {
    let n_stab = table.stabilization_index();
    let mut rows = vec![vec![None; g.len()]];
    for i in 1..=n_stab {
        let (cur, prev) = (table.iterate(i), table.iterate(i - 1));
        let row = (0..g.len())
            .map(|v| {
                if g.is_target(v) || g.owner(v) != Player::One || !cur[v].is_finite() {
                    return None;
                }
                g.edges(v)
                    .iter()
                    .filter(|e| sat_add(e.weight, prev[e.to]) == cur[v])
                    .min_by_key(|e| tie_key(e))
                    .map(|e| e.action)
            })
            .collect();
        rows.push(row);
    }
    let p1 = CounterStrategy {
        table: rows,
        fallback: attractor_strategy(g),
    };

    let values = table.final_values();
    let choice = (0..g.len())
        .map(|v| {
            if g.is_target(v) || g.owner(v) != Player::Two {
                return None;
            }
            g.edges(v)
                .iter()
                .max_by(|a, b| {
                    sat_add(a.weight, values[a.to])
                        .cmp(&sat_add(b.weight, values[b.to]))
                        .then_with(|| tie_key(b).cmp(&tie_key(a)))
                })
                .map(|e| e.action)
        })
        .collect();
    let p2 = MemorylessStrategy {
        player: Player::Two,
        choice,
    };
    (p1, p2)
}

/// The optimal action of the owner of `v` with `counter` steps left, with
/// an error at targets and at vertices of infinite value.
pub fn optimal_action(result: &SolveResult, g: &PricedGameGraph, v: usize, counter: usize) -> Result<usize, SolveError> {
    if v >= g.len() {
        return Err(SolveError::NoSuchVertex(v));
    }
    if g.is_target(v) {
        return Err(SolveError::Target(g.vertex(v).id.clone()));
    }
    if !result.values[v].is_finite() {
        return Err(SolveError::InfiniteValue(g.vertex(v).id.clone(), result.values[v]));
    }
    let a = match g.owner(v) {
        Player::One => result.p1.action(v, counter),
        Player::Two => result.p2.action(v),
    };
    Ok(a.expect("non-target vertices have edges"))
}

/// Plays both extracted strategies from `v0` for at most `max_steps`
/// steps. Returns the total weight if a target is reached.
pub fn play_extracted(result: &SolveResult, g: &PricedGameGraph, v0: usize, max_steps: usize) -> Option<(i64, usize)> {
    let mut v = v0;
    let mut cost = 0;
    for step in 0..=max_steps {
        if g.is_target(v) {
            return Some((cost, step));
        }
        if step == max_steps {
            break;
        }
        let a = match g.owner(v) {
            Player::One => result.p1.action_after(v, step),
            Player::Two => result.p2.action(v),
        }?;
        let e = g.edge(v, a)?;
        cost += e.weight;
        v = e.to;
    }
    None
}

/// Pointwise comparison helper used by consistency checks.
pub fn consistent_at(g: &PricedGameGraph, values: &[ExtValue], v: usize) -> bool {
    if g.is_target(v) {
        return values[v] == ExtValue::Finite(0);
    }
    let candidates = g.edges(v).iter().filter_map(|e| values[e.to].checked_add(ExtValue::Finite(e.weight)).ok());
    let best = match g.owner(v) {
        Player::One => candidates.min(),
        Player::Two => candidates.max(),
    };
    best.map(|b| b.cmp(&values[v]) == Ordering::Equal).unwrap_or(false)
}
