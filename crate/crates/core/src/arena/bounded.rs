//! Bounding transform: every location invariant gets a finite upper bound.
//!
//! Past the largest constant `M` all valuations behave alike, so a location
//! `l` with an unbounded invariant is capped at `x <= M+1` and, at exactly
//! `M+1`, may reset into a companion `l^inf` (invariant `x <= 1`) that keeps
//! ticking back to `x = 0` once per time unit. In the companion every
//! transition of `l` whose guard admits values above `M` is available at any
//! clock value; non-resetting ones lead into the companion of their target.

use std::collections::{BTreeSet, HashMap};

use super::{max_constant, Bound, Interval, Location, PtgArena, Transition};

fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Returns an arena in which every invariant is bounded above, with the
/// same owners, rates, targets and values on every original configuration
/// whose valuation is at most the largest constant. Already-bounded arenas
/// are returned unchanged.
pub fn make_bounded(arena: &PtgArena) -> PtgArena {
    if arena.is_bounded() {
        return arena.clone();
    }
    let m = max_constant(arena);
    let cap = m + 1;

    let mut ids: BTreeSet<String> = arena.locations.iter().map(|l| l.id.clone()).collect();
    let labels: BTreeSet<String> = arena.labels().into_iter().map(String::from).collect();
    let bridge = fresh("bridge", &labels);
    let tick = fresh("tick", &labels);

    let mut companion: HashMap<&str, String> = HashMap::new();
    for loc in arena.locations.iter().filter(|l| !l.invariant.is_bounded_above()) {
        let id = fresh(&format!("{}^inf", loc.id), &ids);
        ids.insert(id.clone());
        companion.insert(loc.id.as_str(), id);
    }

    let mut out = PtgArena {
        clock: arena.clock.clone(),
        locations: Vec::new(),
        transitions: arena.transitions.clone(),
        targets: arena.targets.clone(),
    };

    for loc in &arena.locations {
        let mut capped = loc.clone();
        if companion.contains_key(loc.id.as_str()) {
            capped.invariant.high = Bound::closed(cap);
        }
        out.locations.push(capped);
    }

    for loc in &arena.locations {
        let Some(comp) = companion.get(loc.id.as_str()) else { continue };
        out.locations.push(Location {
            id: comp.clone(),
            owner: loc.owner,
            rate: loc.rate,
            invariant: Interval::at_most(1),
        });
        if arena.is_target(&loc.id) {
            out.targets.insert(comp.clone());
        }
        out.transitions.push(Transition {
            source: loc.id.clone(),
            label: bridge.clone(),
            guard: Interval::point(cap),
            reset: true,
            price: 0,
            target: comp.clone(),
        });
        out.transitions.push(Transition {
            source: comp.clone(),
            label: tick.clone(),
            guard: Interval::point(1),
            reset: true,
            price: 0,
            target: comp.clone(),
        });
        for t in arena.transitions_from(&loc.id) {
            if !t.guard.admits_values_above(m) {
                continue;
            }
            let target = if t.reset {
                t.target.clone()
            } else {
                match companion.get(t.target.as_str()) {
                    Some(c) => c.clone(),
                    // The target cannot hold a valuation above the cap.
                    None => continue,
                }
            };
            out.transitions.push(Transition {
                source: comp.clone(),
                label: t.label.clone(),
                guard: Interval::at_most(1),
                reset: t.reset,
                price: t.price,
                target,
            });
        }
    }
    out
}
