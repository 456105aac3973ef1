use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arena::{Player, PricedGameGraph};

/// A seeded random game with at most `n_max` vertices, at most `a_max`
/// actions per vertex and weights in `[-w_max, w_max]`.
///
/// Vertex 0 is never a target unless the game has a single vertex; at least
/// one vertex is a target and every non-target vertex has an edge.
pub fn random_game(seed: u64, n_max: usize, a_max: usize, w_max: i64) -> PricedGameGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=n_max.max(1));
    let a_max = a_max.max(1);
    let mut g = PricedGameGraph::new();
    for v in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::One } else { Player::Two };
        g.add_vertex(format!("v{v}"), owner).expect("fresh ids");
    }
    let actions: Vec<usize> = (0..a_max).map(|a| g.action(&format!("a{a}"))).collect();

    let first_target = if n == 1 { 0 } else { rng.gen_range(1..n) };
    g.set_target(first_target).expect("in range");
    for v in 1..n {
        if v != first_target && rng.gen_bool(0.15) {
            g.set_target(v).expect("in range");
        }
    }

    for v in 0..n {
        if g.is_target(v) {
            continue;
        }
        let k = rng.gen_range(1..=a_max);
        let mut acts = actions.clone();
        acts.shuffle(&mut rng);
        acts.truncate(k);
        acts.sort_unstable();
        for a in acts {
            let to = rng.gen_range(0..n);
            let w = rng.gen_range(-w_max..=w_max);
            g.add_edge(v, a, to, w).expect("distinct actions");
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        assert_eq!(random_game(7, 6, 3, 5), random_game(7, 6, 3, 5));
        let g = random_game(3, 1, 3, 5);
        assert_eq!(g.len(), 1);
        assert!(g.is_target(0));
        for seed in 0..100 {
            let g = random_game(seed, 6, 3, 5);
            assert!(g.validate().is_empty());
            assert!(!g.targets().is_empty());
            assert!(g.max_abs_weight() <= 5);
        }
    }
}
