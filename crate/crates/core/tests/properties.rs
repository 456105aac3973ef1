use std::fs;
use std::path::PathBuf;

use bptg::finite_solver::{brute_force_values, random_game, solve_finite, OracleLimits};
use bptg::io::{parse_arena, write_arena};
use bptg::regions::{play_region_equiv, ConstantLadder};
use bptg::simulation::{classify_play, random_arena, random_play, shift_down, shift_up, Configuration, RandomArenaParams};
use bptg::{solve_ptg, ExtValue, Rational};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn shipped(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "arenas", name].iter().collect();
    fs::read_to_string(p).unwrap()
}

#[test]
fn shipped_arenas_round_trip() {
    for name in ["fig1.ptg", "example2.ptg", "unbounded.ptg"] {
        let doc = parse_arena(&shipped(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_arena(&write_arena(&doc.arena)).unwrap();
        assert_eq!(doc.arena, again.arena, "{name}");
    }
}

#[test]
fn shipped_arena_values() {
    let cases = [("fig1.ptg", "l1", 2), ("example2.ptg", "u", 0), ("unbounded.ptg", "a", 2)];
    for (name, loc, want) in cases {
        let arena = parse_arena(&shipped(name)).unwrap().arena;
        let sol = solve_ptg(&arena, loc, &q(0, 1), &q(1, 10)).unwrap();
        assert_eq!(sol.value, ExtValue::Finite(want), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_arenas_round_trip(seed in any::<u64>()) {
        let arena = random_arena(seed, RandomArenaParams::default());
        let doc = parse_arena(&write_arena(&arena)).unwrap();
        prop_assert_eq!(doc.arena, arena);
    }

    #[test]
    fn value_iteration_matches_brute_force(seed in any::<u64>()) {
        let g = random_game(seed, 5, 3, 4);
        let oracle = brute_force_values(&g, OracleLimits::default()).unwrap();
        prop_assert_eq!(solve_finite(&g).values, oracle);
    }

    #[test]
    fn shift_up_keeps_equivalence_and_raises_weight(seed in 0u64..5000) {
        let eta = q(1, 8);
        let arena = random_arena(seed, RandomArenaParams::default());
        let ladder = ConstantLadder::of_arena(&arena);
        let r = random_play(&arena, seed, 12, Configuration::new("l0", q(0, 1)));
        let up = shift_up(&arena, &r, &eta).unwrap();
        prop_assert!(classify_play(&up, &ladder, &eta).eta_close);
        prop_assert!(play_region_equiv(&r, &up, &ladder, None));
        for k in 0..=r.len() {
            prop_assert!(up.prefix_cost(k) >= r.prefix_cost(k));
        }
    }

    #[test]
    fn shift_down_keeps_equivalence_and_lowers_weight(seed in 0u64..5000) {
        let eta = q(1, 8);
        let arena = random_arena(seed, RandomArenaParams::default());
        let ladder = ConstantLadder::of_arena(&arena);
        let r = random_play(&arena, seed, 12, Configuration::new("l0", q(0, 1)));
        let down = shift_down(&arena, &r, &eta).unwrap();
        prop_assert!(play_region_equiv(&r, &down, &ladder, None));
        for k in 0..=r.len() {
            prop_assert!(down.prefix_cost(k) <= r.prefix_cost(k));
        }
    }

    #[test]
    fn shifts_are_prefix_stable(seed in 0u64..5000, cut in 0usize..12) {
        let eta = q(1, 8);
        let arena = random_arena(seed, RandomArenaParams::default());
        let r = random_play(&arena, seed, 12, Configuration::new("l0", q(0, 1)));
        let k = cut.min(r.len());
        let head = r.prefix(k);
        prop_assert_eq!(shift_up(&arena, &head, &eta).unwrap(), shift_up(&arena, &r, &eta).unwrap().prefix(k));
        prop_assert_eq!(shift_down(&arena, &head, &eta).unwrap(), shift_down(&arena, &r, &eta).unwrap().prefix(k));
    }

    #[test]
    fn prefix_costs_are_additive(seed in any::<u64>()) {
        let arena = random_arena(seed, RandomArenaParams::default());
        let r = random_play(&arena, seed, 12, Configuration::new("l0", q(0, 1)));
        let mut sum = q(0, 1);
        for (k, step) in r.steps().iter().enumerate() {
            sum += step.cost.clone();
            prop_assert_eq!(r.prefix_cost(k + 1), &sum);
        }
    }
}
