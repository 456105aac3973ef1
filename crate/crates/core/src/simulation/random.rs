//! Seeded random arenas and plays for property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Configuration, Play, TimedMove};
use crate::arena::{Bound, Interval, Location, Player, PtgArena, Transition};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomArenaParams {
    /// Non-target locations; one target `t` is added.
    pub max_locations: usize,
    pub max_constant: i64,
    /// The two rates the non-target locations draw from.
    pub rates: (i64, i64),
    pub max_price: i64,
    pub max_edges: usize,
}

impl Default for RandomArenaParams {
    fn default() -> Self {
        RandomArenaParams {
            max_locations: 4,
            max_constant: 3,
            rates: (-1, 1),
            max_price: 3,
            max_edges: 3,
        }
    }
}

fn random_zone(rng: &mut ChaCha8Rng, max_constant: i64) -> Interval {
    let a = rng.gen_range(0..=max_constant);
    let b = rng.gen_range(0..=max_constant);
    let (lo, hi) = (a.min(b), a.max(b));
    if lo == hi {
        return Interval::point(lo);
    }
    let low = Bound::Finite {
        value: lo,
        closed: lo == 0 || rng.gen_bool(0.5),
    };
    let high = if rng.gen_bool(0.2) {
        Bound::Infinity
    } else {
        Bound::Finite {
            value: hi,
            closed: rng.gen_bool(0.5),
        }
    };
    Interval::new(low, high)
}

/// A valid, bounded, bi-valued arena. Locations are `l0, l1, ...` plus the
/// target `t`; every invariant is `[0, c]` for some `c >= 1`.
pub fn random_arena(seed: u64, params: RandomArenaParams) -> PtgArena {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=params.max_locations.max(1));
    let cmax = params.max_constant.max(1);
    let mut arena = PtgArena::default();
    for i in 0..n {
        arena.locations.push(Location {
            id: format!("l{i}"),
            owner: if rng.gen_bool(0.5) { Player::One } else { Player::Two },
            rate: if rng.gen_bool(0.5) { params.rates.0 } else { params.rates.1 },
            invariant: Interval::at_most(rng.gen_range(1..=cmax)),
        });
    }
    arena.locations.push(Location {
        id: "t".into(),
        owner: Player::One,
        rate: 0,
        invariant: Interval::at_most(cmax),
    });
    arena.targets.insert("t".into());

    let labels = ["a", "b", "c", "d"];
    for i in 0..n {
        let k = rng.gen_range(1..=params.max_edges.clamp(1, labels.len()));
        for label in &labels[..k] {
            let target = if rng.gen_bool(0.3) {
                "t".to_string()
            } else {
                format!("l{}", rng.gen_range(0..n))
            };
            arena.transitions.push(Transition {
                source: format!("l{i}"),
                label: label.to_string(),
                guard: random_zone(&mut rng, cmax),
                reset: rng.gen_bool(0.4),
                price: rng.gen_range(-params.max_price..=params.max_price),
                target,
            });
        }
    }
    arena
}

/// The valuations `p >= lo` satisfying both intervals, described by
/// `(lo, lo_closed, hi, hi_closed)`; `None` if empty.
fn feasible<T: Scalar>(from: &T, zones: &[&Interval]) -> Option<(T, bool, Option<T>, bool)> {
    let mut lo = from.clone();
    let mut lo_closed = true;
    let mut hi: Option<T> = None;
    let mut hi_closed = false;
    for z in zones {
        if let Bound::Finite { value, closed } = z.low {
            let v = T::from_int(value);
            if v > lo {
                lo = v;
                lo_closed = closed;
            } else if v == lo {
                lo_closed &= closed;
            }
        }
        if let Bound::Finite { value, closed } = z.high {
            let v = T::from_int(value);
            match &hi {
                Some(h) if v > *h => {}
                Some(h) if v == *h => hi_closed &= closed,
                _ => {
                    hi = Some(v);
                    hi_closed = closed;
                }
            }
        }
    }
    match &hi {
        Some(h) if lo > *h || (lo == *h && !(lo_closed && hi_closed)) => None,
        _ => Some((lo, lo_closed, hi, hi_closed)),
    }
}

fn sample<T: Scalar>(rng: &mut ChaCha8Rng, set: &(T, bool, Option<T>, bool)) -> T {
    let (lo, lo_closed, hi, hi_closed) = set;
    let hi = hi.clone().unwrap_or_else(|| lo.clone() + T::from_int(2));
    if *lo == hi {
        return hi;
    }
    let roll = rng.gen_range(0..8);
    if roll == 0 && *lo_closed {
        return lo.clone();
    }
    if roll == 1 && *hi_closed {
        return hi;
    }
    let bits = rng.gen_range(1..9u32);
    let den = 1i64 << bits;
    let num = rng.gen_range(1..den);
    lo.clone() + (hi - lo.clone()) * T::from_ratio(num, den)
}

/// A random play of at most `max_len` steps from `start`, stopping at the
/// first target or when no transition is enabled.
pub fn random_play<T: Scalar>(arena: &PtgArena, seed: u64, max_len: usize, start: Configuration<T>) -> Play<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut play = Play::new(start);
    while play.len() < max_len && !arena.is_target(&play.last().location) {
        let here = play.last().clone();
        let Some(loc) = arena.location(&here.location) else { break };
        let options: Vec<_> = arena
            .transitions_from(&loc.id)
            .filter_map(|t| {
                let next = arena.location(&t.target)?;
                let mut zones = vec![&loc.invariant, &t.guard];
                if !t.reset {
                    zones.push(&next.invariant);
                } else if !next.invariant.contains_int(0) {
                    return None;
                }
                feasible(&here.valuation, &zones).map(|set| (t.label.clone(), set))
            })
            .collect();
        if options.is_empty() {
            break;
        }
        let (label, set) = &options[rng.gen_range(0..options.len())];
        let post = sample(&mut rng, set);
        let delay = post - here.valuation.clone();
        play.extend(arena, TimedMove::new(delay, label.clone()))
            .expect("sampled moves are legal");
    }
    play
}
