//! One-clock priced timed game arenas and finite priced game graphs.

mod bounded;
mod graph;
mod value;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

pub use bounded::make_bounded;
pub use graph::{Edge, GameVertex, GraphError, PricedGameGraph};
pub use value::{ExtValue, UndefinedSum};

/// The player owning a location or vertex. Player 1 minimizes cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn from_number(n: u8) -> Option<Player> {
        match n {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// One end of a clock interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite { value: i64, closed: bool },
    /// Only meaningful as an upper bound; always open.
    Infinity,
}

impl Bound {
    pub fn closed(value: i64) -> Bound {
        Bound::Finite {
            value,
            closed: true,
        }
    }

    pub fn open(value: i64) -> Bound {
        Bound::Finite {
            value,
            closed: false,
        }
    }

    pub fn value(&self) -> Option<i64> {
        match self {
            Bound::Finite { value, .. } => Some(*value),
            Bound::Infinity => None,
        }
    }
}

/// The set of valuations allowed by a one-clock zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub low: Bound,
    pub high: Bound,
}

impl Interval {
    pub fn new(low: Bound, high: Bound) -> Interval {
        Interval { low, high }
    }

    /// `[0, inf)`: the trivially true constraint.
    pub fn any() -> Interval {
        Interval::new(Bound::closed(0), Bound::Infinity)
    }

    pub fn closed(lo: i64, hi: i64) -> Interval {
        Interval::new(Bound::closed(lo), Bound::closed(hi))
    }

    pub fn point(v: i64) -> Interval {
        Interval::closed(v, v)
    }

    pub fn at_most(hi: i64) -> Interval {
        Interval::new(Bound::closed(0), Bound::closed(hi))
    }

    pub fn less_than(hi: i64) -> Interval {
        Interval::new(Bound::closed(0), Bound::open(hi))
    }

    pub fn at_least(lo: i64) -> Interval {
        Interval::new(Bound::closed(lo), Bound::Infinity)
    }

    pub fn greater_than(lo: i64) -> Interval {
        Interval::new(Bound::open(lo), Bound::Infinity)
    }

    /// Describes why the interval is malformed, if it is.
    pub fn malformation(&self) -> Option<String> {
        match self.low {
            Bound::Infinity => Some("lower bound cannot be infinite".into()),
            Bound::Finite { value, .. } if value < 0 => {
                Some(format!("lower bound {value} is negative"))
            }
            _ if self.is_empty() => Some(format!("interval {self} is empty")),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match (self.low, self.high) {
            (Bound::Infinity, _) => true,
            (_, Bound::Infinity) => false,
            (
                Bound::Finite {
                    value: a,
                    closed: ca,
                },
                Bound::Finite {
                    value: b,
                    closed: cb,
                },
            ) => a > b || (a == b && !(ca && cb)),
        }
    }

    pub fn is_bounded_above(&self) -> bool {
        !matches!(self.high, Bound::Infinity)
    }

    pub fn contains<T: Scalar>(&self, v: &T) -> bool {
        let low_ok = match self.low {
            Bound::Infinity => false,
            Bound::Finite { value, closed } => {
                let lo = T::from_int(value);
                if closed {
                    *v >= lo
                } else {
                    *v > lo
                }
            }
        };
        let high_ok = match self.high {
            Bound::Infinity => true,
            Bound::Finite { value, closed } => {
                let hi = T::from_int(value);
                if closed {
                    *v <= hi
                } else {
                    *v < hi
                }
            }
        };
        low_ok && high_ok
    }

    pub fn contains_int(&self, v: i64) -> bool {
        self.contains(&crate::Rational::from_int(v))
    }

    /// Whether some valuation strictly greater than `m` satisfies the zone.
    pub fn admits_values_above(&self, m: i64) -> bool {
        match self.high {
            Bound::Infinity => true,
            Bound::Finite { value, .. } => value > m && !self.is_empty(),
        }
    }

    /// Finite constants mentioned by this interval.
    pub fn constants(&self) -> impl Iterator<Item = i64> {
        self.low.value().into_iter().chain(self.high.value())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.low {
            Bound::Finite { value, closed } => {
                write!(f, "{}{}", if closed { '[' } else { '(' }, value)?
            }
            Bound::Infinity => f.write_str("(-inf")?,
        }
        match self.high {
            Bound::Finite { value, closed } => {
                write!(f, ",{}{}", value, if closed { ']' } else { ')' })
            }
            Bound::Infinity => f.write_str(",inf)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub id: String,
    pub owner: Player,
    /// Price per time unit spent in the location.
    pub rate: i64,
    pub invariant: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub label: String,
    pub guard: Interval,
    pub reset: bool,
    pub price: i64,
    pub target: String,
}

/// A priced timed game over a single clock.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtgArena {
    pub clock: String,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    pub targets: BTreeSet<String>,
}

impl Default for PtgArena {
    fn default() -> Self {
        PtgArena {
            clock: "x".into(),
            locations: Vec::new(),
            transitions: Vec::new(),
            targets: BTreeSet::new(),
        }
    }
}

impl PtgArena {
    pub fn location(&self, id: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.id == id)
    }

    pub fn transition(&self, source: &str, label: &str) -> Option<&Transition> {
        self.transitions
            .iter()
            .find(|t| t.source == source && t.label == label)
    }

    pub fn transitions_from<'a>(&'a self, source: &'a str) -> impl Iterator<Item = &'a Transition> {
        self.transitions.iter().filter(move |t| t.source == source)
    }

    pub fn is_target(&self, id: &str) -> bool {
        self.targets.contains(id)
    }

    /// Every location has an invariant with a finite upper bound.
    pub fn is_bounded(&self) -> bool {
        self.locations.iter().all(|l| l.invariant.is_bounded_above())
    }

    pub fn labels(&self) -> BTreeSet<&str> {
        self.transitions.iter().map(|t| t.label.as_str()).collect()
    }

    fn zones(&self) -> impl Iterator<Item = &Interval> {
        self.locations
            .iter()
            .map(|l| &l.invariant)
            .chain(self.transitions.iter().map(|t| &t.guard))
    }

    /// Every finite constant of every guard and invariant, deduplicated.
    pub fn constants(&self) -> BTreeSet<i64> {
        self.zones().flat_map(|z| z.constants()).collect()
    }
}

/// The arena element a [`Violation`] refers to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Arena,
    Clock,
    Location(String),
    Transition { source: String, label: String },
    Target(String),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Arena => f.write_str("arena"),
            Element::Clock => f.write_str("clock"),
            Element::Location(id) => write!(f, "location {id}"),
            Element::Transition { source, label } => write!(f, "edge ({source}, {label})"),
            Element::Target(id) => write!(f, "target {id}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub element: Element,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

/// Checks every structural invariant of an arena. An empty result means the
/// arena is valid.
pub fn validate_arena(arena: &PtgArena) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |element: Element, message: String| out.push(Violation { element, message });

    if arena.clock.is_empty() {
        push(Element::Clock, "clock name is empty".into());
    }
    if arena.locations.is_empty() {
        push(Element::Arena, "arena has no locations".into());
    }

    let mut seen: HashMap<&str, usize> = HashMap::new();
    for loc in &arena.locations {
        let el = || Element::Location(loc.id.clone());
        if loc.id.is_empty() {
            push(el(), "empty location id".into());
        }
        *seen.entry(loc.id.as_str()).or_default() += 1;
        if let Some(why) = loc.invariant.malformation() {
            push(el(), format!("invariant: {why}"));
        }
    }
    for (id, count) in &seen {
        if *count > 1 {
            push(
                Element::Location(id.to_string()),
                format!("declared {count} times"),
            );
        }
    }

    let mut pairs: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for t in &arena.transitions {
        let el = || Element::Transition {
            source: t.source.clone(),
            label: t.label.clone(),
        };
        *pairs.entry((t.source.as_str(), t.label.as_str())).or_default() += 1;
        if !seen.contains_key(t.source.as_str()) {
            push(el(), format!("unknown source location {}", t.source));
        }
        if !seen.contains_key(t.target.as_str()) {
            push(el(), format!("unknown target location {}", t.target));
        }
        if t.label.is_empty() {
            push(el(), "empty label".into());
        }
        if let Some(why) = t.guard.malformation() {
            push(el(), format!("guard: {why}"));
        }
    }
    for ((source, label), count) in pairs {
        if count > 1 {
            push(
                Element::Transition {
                    source: source.into(),
                    label: label.into(),
                },
                format!("{count} transitions share source {source} and label {label}"),
            );
        }
    }

    for id in &arena.targets {
        if !seen.contains_key(id.as_str()) {
            push(Element::Target(id.clone()), "undeclared target location".into());
        }
    }
    out.sort();
    out
}

/// The two admissible location rates of a bi-valued arena, with
/// `{p_minus, p_plus} ⊆ {-d, 0, d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BiValuedProfile {
    pub p_minus: i64,
    pub p_plus: i64,
    pub d: i64,
}

impl BiValuedProfile {
    pub fn is_degenerate(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// Whether `rate` plays the role of the larger rate. In a degenerate
    /// profile a positive rate is treated as the larger one.
    pub fn is_upper(&self, rate: i64) -> bool {
        if self.is_degenerate() {
            rate > 0
        } else {
            rate == self.p_plus
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("arena is not bi-valued ({reason}); offending rates: {rates:?}")]
pub struct ProfileRejection {
    pub rates: Vec<i64>,
    pub reason: String,
}

/// Extracts the bi-valued rate profile. Target locations are ignored since
/// time spent in them is never charged.
pub fn bi_valued_profile(arena: &PtgArena) -> Result<BiValuedProfile, ProfileRejection> {
    let rates: BTreeSet<i64> = arena
        .locations
        .iter()
        .filter(|l| !arena.is_target(&l.id))
        .map(|l| l.rate)
        .collect();
    let rates: Vec<i64> = rates.into_iter().collect();
    if rates.len() > 2 {
        return Err(ProfileRejection {
            reason: format!("{} distinct rates", rates.len()),
            rates,
        });
    }
    let magnitudes: BTreeSet<i64> = rates.iter().filter(|r| **r != 0).map(|r| r.abs()).collect();
    if magnitudes.len() > 1 {
        return Err(ProfileRejection {
            reason: "rates do not fit {-d, 0, d} for a single d".into(),
            rates,
        });
    }
    let d = magnitudes.into_iter().next().unwrap_or(1);
    let (p_minus, p_plus) = match rates.as_slice() {
        [] => (0, 0),
        [r] => (*r, *r),
        [a, b] => (*a, *b),
        _ => unreachable!(),
    };
    Ok(BiValuedProfile { p_minus, p_plus, d })
}

/// The greatest finite constant in any guard or invariant (0 if none).
pub fn max_constant(arena: &PtgArena) -> i64 {
    arena.constants().into_iter().max().unwrap_or(0).max(0)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn loc(id: &str, owner: u8, rate: i64, inv: Interval) -> Location {
        Location {
            id: id.into(),
            owner: Player::from_number(owner).unwrap(),
            rate,
            invariant: inv,
        }
    }

    pub fn edge(
        source: &str,
        label: &str,
        guard: Interval,
        reset: bool,
        price: i64,
        target: &str,
    ) -> Transition {
        Transition {
            source: source.into(),
            label: label.into(),
            guard,
            reset,
            price,
            target: target.into(),
        }
    }

    /// The six-location arena used throughout the tests. The exit of l3 is
    /// labelled `b` so that (source, label) stays functional.
    pub fn fig1() -> PtgArena {
        PtgArena {
            clock: "x".into(),
            locations: vec![
                loc("l1", 1, 1, Interval::at_most(1)),
                loc("l2", 1, 1, Interval::at_most(2)),
                loc("l3", 2, -1, Interval::at_most(2)),
                loc("l4", 2, -1, Interval::at_most(2)),
                loc("l5", 1, 1, Interval::at_most(2)),
                loc("l6", 1, 0, Interval::at_most(2)),
            ],
            transitions: vec![
                edge("l1", "a", Interval::greater_than(0), true, 0, "l2"),
                edge("l1", "b", Interval::at_most(1), false, 1, "l4"),
                edge("l2", "a", Interval::at_most(2), false, 0, "l3"),
                edge("l3", "a", Interval::less_than(1), true, 0, "l3"),
                edge("l3", "b", Interval::greater_than(1), false, 1, "l6"),
                edge("l4", "a", Interval::at_least(1), true, 0, "l5"),
                edge("l5", "a", Interval::at_least(1), true, 0, "l4"),
                edge("l5", "c", Interval::at_least(1), false, 2, "l6"),
            ],
            targets: ["l6".to_string()].into(),
        }
    }

    /// One rate-0 Player 1 location that may exit for free or hand the
    /// clock (reset) to a rate -1 Player 2 location that must wait a
    /// positive delay before returning.
    pub fn convergence_example() -> PtgArena {
        PtgArena {
            clock: "x".into(),
            locations: vec![
                loc("u", 1, 0, Interval::at_most(1)),
                loc("w", 2, -1, Interval::at_most(1)),
                loc("t", 1, 0, Interval::at_most(1)),
            ],
            transitions: vec![
                edge("u", "exit", Interval::at_most(1), false, 0, "t"),
                edge("u", "go", Interval::at_most(1), true, 0, "w"),
                edge("w", "back", Interval::new(Bound::open(0), Bound::closed(1)), false, 0, "u"),
            ],
            targets: ["t".to_string()].into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::Rational;

    #[test]
    fn fig1_is_valid() {
        assert_eq!(validate_arena(&fig1()), vec![]);
    }

    #[test]
    fn duplicate_source_label_is_one_violation() {
        let mut a = fig1();
        a.transitions
            .push(edge("l1", "a", Interval::any(), false, 0, "l6"));
        let v = validate_arena(&a);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(
            v[0].element,
            Element::Transition {
                source: "l1".into(),
                label: "a".into()
            }
        );
    }

    #[test]
    fn undeclared_target_is_reported() {
        let mut a = fig1();
        a.targets.insert("nowhere".into());
        let v = validate_arena(&a);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].element, Element::Target("nowhere".into()));
    }

    #[test]
    fn empty_arena_and_bad_intervals() {
        let v = validate_arena(&PtgArena::default());
        assert_eq!(v[0].message, "arena has no locations");

        let mut a = fig1();
        a.locations[0].invariant = Interval::new(Bound::open(1), Bound::open(1));
        a.transitions[0].guard = Interval::new(Bound::Infinity, Bound::Infinity);
        let v = validate_arena(&a);
        assert_eq!(v.len(), 2, "{v:?}");
    }

    #[test]
    fn interval_membership() {
        let g = Interval::greater_than(1);
        assert!(!g.contains(&Rational::from_int(1)));
        assert!(g.contains(&Rational::from_ratio(11, 10)));
        let h = Interval::less_than(1);
        assert!(h.contains(&Rational::from_int(0)));
        assert!(!h.contains(&Rational::from_int(1)));
        assert!(Interval::point(2).contains_int(2));
        assert!(Interval::new(Bound::open(2), Bound::closed(2)).is_empty());
        assert_eq!(Interval::greater_than(0).to_string(), "(0,inf)");
        assert_eq!(Interval::at_most(2).to_string(), "[0,2]");
    }

    #[test]
    fn fig1_profile_ignores_zero_rate_target() {
        let p = bi_valued_profile(&fig1()).unwrap();
        assert_eq!(p, BiValuedProfile { p_minus: -1, p_plus: 1, d: 1 });
    }

    #[test]
    fn three_rates_are_rejected() {
        // Player 2 rate 0, Player 1 rate 1, Player 2 rate -1: not bi-valued.
        let a = PtgArena {
            clock: "x".into(),
            locations: vec![
                loc("s", 2, 0, Interval::at_most(1)),
                loc("m", 1, 1, Interval::at_most(1)),
                loc("p", 2, -1, Interval::at_most(1)),
                loc("q", 2, -1, Interval::at_most(1)),
                loc("f", 1, 0, Interval::any()),
            ],
            transitions: vec![
                edge("s", "a", Interval::at_most(1), false, 0, "m"),
                edge("m", "a", Interval::point(1), true, 0, "p"),
                edge("m", "b", Interval::at_most(1), false, 0, "q"),
                edge("p", "a", Interval::point(1), false, 0, "f"),
                edge("q", "a", Interval::point(1), false, 0, "f"),
            ],
            targets: ["f".to_string()].into(),
        };
        let err = bi_valued_profile(&a).unwrap_err();
        assert_eq!(err.rates, vec![-1, 0, 1]);
    }

    #[test]
    fn mismatched_magnitudes_are_rejected() {
        let mut a = fig1();
        a.locations[2].rate = -2;
        a.locations[3].rate = -2;
        assert!(bi_valued_profile(&a).is_err());
        for l in a.locations.iter_mut() {
            if l.rate == 1 {
                l.rate = 2;
            }
        }
        assert_eq!(bi_valued_profile(&a).unwrap().d, 2);
    }

    #[test]
    fn all_zero_rates_are_degenerate() {
        let mut a = fig1();
        a.locations.iter_mut().for_each(|l| l.rate = 0);
        let p = bi_valued_profile(&a).unwrap();
        assert!(p.is_degenerate());
        assert_eq!((p.p_minus, p.p_plus), (0, 0));
    }

    #[test]
    fn profile_is_independent_of_listing_order() {
        let mut a = fig1();
        let p = bi_valued_profile(&a).unwrap();
        a.locations.reverse();
        assert_eq!(bi_valued_profile(&a).unwrap(), p);
    }

    #[test]
    fn max_constants() {
        assert_eq!(max_constant(&fig1()), 2);
        let a = PtgArena {
            locations: vec![loc("l", 1, 0, Interval::any())],
            transitions: vec![edge("l", "a", Interval::point(0), false, 0, "l")],
            ..Default::default()
        };
        assert_eq!(max_constant(&a), 0);
        let b = PtgArena {
            locations: vec![loc("l", 1, 0, Interval::at_most(3))],
            transitions: vec![edge("l", "a", Interval::point(2), false, 0, "l")],
            ..Default::default()
        };
        assert_eq!(max_constant(&b), 3);
    }
}
