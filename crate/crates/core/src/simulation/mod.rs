//! Timed semantics: steps, plays, costs and matches between strategies.

mod random;
mod shift;

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::arena::{ExtValue, Player, PtgArena};
use crate::scalar::Scalar;

pub use random::{random_arena, random_play, RandomArenaParams};
pub use shift::{classify_play, shift_down, shift_up, PlayClass, ShiftError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration<T> {
    pub location: String,
    pub valuation: T,
}

impl<T> Configuration<T> {
    pub fn new(location: impl Into<String>, valuation: T) -> Self {
        Configuration {
            location: location.into(),
            valuation,
        }
    }
}

/// Wait `delay` time units, then fire `label`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimedMove<T> {
    pub delay: T,
    pub label: String,
}

impl<T> TimedMove<T> {
    pub fn new(delay: T, label: impl Into<String>) -> Self {
        TimedMove {
            delay,
            label: label.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("no transition labelled {label} leaves {location}")]
    NoTransition { location: String, label: String },
    #[error("negative delay {0}")]
    NegativeDelay(String),
    #[error("valuation {valuation} violates the invariant of {location}")]
    Invariant { location: String, valuation: String },
    #[error("valuation {valuation} violates the guard of ({location}, {label})")]
    Guard {
        location: String,
        label: String,
        valuation: String,
    },
    #[error("valuation {valuation} on entry violates the invariant of {location}")]
    EntryInvariant { location: String, valuation: String },
}

/// One step of the semantics; returns the next configuration and the cost
/// `rate * delay + price` of the step.
pub fn timed_step<T: Scalar>(
    arena: &PtgArena,
    c: &Configuration<T>,
    m: &TimedMove<T>,
) -> Result<(Configuration<T>, T), StepError> {
    let loc = arena
        .location(&c.location)
        .ok_or_else(|| StepError::UnknownLocation(c.location.clone()))?;
    let t = arena
        .transition(&c.location, &m.label)
        .ok_or_else(|| StepError::NoTransition {
            location: c.location.clone(),
            label: m.label.clone(),
        })?;
    if m.delay.is_negative() {
        return Err(StepError::NegativeDelay(m.delay.to_string()));
    }
    let post = c.valuation.clone() + m.delay.clone();
    // Invariants are intervals: both ends of the wait suffice.
    for v in [&c.valuation, &post] {
        if !loc.invariant.contains(v) {
            return Err(StepError::Invariant {
                location: loc.id.clone(),
                valuation: v.to_string(),
            });
        }
    }
    if !t.guard.contains(&post) {
        return Err(StepError::Guard {
            location: loc.id.clone(),
            label: t.label.clone(),
            valuation: post.to_string(),
        });
    }
    let next = if t.reset { T::zero() } else { post };
    let target = arena
        .location(&t.target)
        .ok_or_else(|| StepError::UnknownLocation(t.target.clone()))?;
    if !target.invariant.contains(&next) {
        return Err(StepError::EntryInvariant {
            location: target.id.clone(),
            valuation: next.to_string(),
        });
    }
    let cost = T::from_int(loc.rate) * m.delay.clone() + T::from_int(t.price);
    Ok((Configuration::new(t.target.clone(), next), cost))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step<T> {
    pub mv: TimedMove<T>,
    pub cost: T,
}

/// A finite play `c_0, m_0, c_1, ..., c_n` with cached prefix costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Play<T> {
    configs: Vec<Configuration<T>>,
    steps: Vec<Step<T>>,
    prefix: Vec<T>,
    /// Set when a step bound cut the play short.
    pub truncated: bool,
    /// Set when the player to move had no move.
    pub stuck: bool,
}

impl<T: Scalar> Play<T> {
    pub fn new(start: Configuration<T>) -> Self {
        Play {
            configs: vec![start],
            steps: Vec::new(),
            prefix: vec![T::zero()],
            truncated: false,
            stuck: false,
        }
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn config(&self, i: usize) -> &Configuration<T> {
        &self.configs[i]
    }

    pub fn configs(&self) -> &[Configuration<T>] {
        &self.configs
    }

    pub fn steps(&self) -> &[Step<T>] {
        &self.steps
    }

    pub fn last(&self) -> &Configuration<T> {
        self.configs.last().expect("plays are never empty")
    }

    /// Cost of the first `k` steps.
    pub fn prefix_cost(&self, k: usize) -> &T {
        &self.prefix[k]
    }

    /// Cost of all steps, whether or not a target was reached.
    pub fn total_cost(&self) -> &T {
        self.prefix.last().expect("prefix costs start at 0")
    }

    /// Appends a step checked against the semantics.
    pub fn extend(&mut self, arena: &PtgArena, mv: TimedMove<T>) -> Result<(), StepError> {
        let (next, cost) = timed_step(arena, self.last(), &mv)?;
        let total = self.total_cost().clone() + cost.clone();
        self.configs.push(next);
        self.steps.push(Step { mv, cost });
        self.prefix.push(total);
        Ok(())
    }

    /// The first `k` steps.
    pub fn prefix(&self, k: usize) -> Play<T> {
        Play {
            configs: self.configs[..=k].to_vec(),
            steps: self.steps[..k].to_vec(),
            prefix: self.prefix[..=k].to_vec(),
            truncated: false,
            stuck: false,
        }
    }

    /// Index of the first configuration in a target location.
    pub fn stop_index(&self, arena: &PtgArena) -> Option<usize> {
        self.configs.iter().position(|c| arena.is_target(&c.location))
    }
}

/// Cost of the play up to its first target configuration, `+inf` if it
/// never reaches one.
pub fn play_cost<T: Scalar>(arena: &PtgArena, r: &Play<T>) -> ExtValue<T> {
    match r.stop_index(arena) {
        Some(i) => ExtValue::Finite(r.prefix_cost(i).clone()),
        None => ExtValue::PlusInf,
    }
}

/// One line per step: `loc ν +t a → loc′ ν′ [cost]`.
pub fn trace<T: Scalar>(r: &Play<T>) -> String {
    let mut out = String::new();
    for (i, s) in r.steps().iter().enumerate() {
        let (c, n) = (r.config(i), r.config(i + 1));
        writeln!(
            out,
            "{} {} +{} {} → {} {} [{}]",
            c.location,
            c.valuation,
            s.mv.delay,
            s.mv.label,
            n.location,
            n.valuation,
            r.prefix_cost(i + 1)
        )
        .unwrap();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("valuation {valuation} in {location} is not in a useful region")]
    OutsideUsefulRegion { location: String, valuation: String },
    #[error("configuration ({0}) has no abstract counterpart")]
    NoAbstractVertex(String),
    #[error("{0}")]
    Other(String),
}

/// A strategy for one player of the timed game. `Ok(None)` means the
/// player has no move and the play is stuck.
pub trait TimedStrategy<T: Scalar> {
    fn next_move(&self, play: &Play<T>) -> Result<Option<TimedMove<T>>, StrategyError>;
}

impl<T: Scalar, F> TimedStrategy<T> for F
where
    F: Fn(&Play<T>) -> Result<Option<TimedMove<T>>, StrategyError>,
{
    fn next_move(&self, play: &Play<T>) -> Result<Option<TimedMove<T>>, StrategyError> {
        self(play)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchFailure {
    Strategy(StrategyError),
    Step(StepError),
    UnknownLocation(String),
}

impl fmt::Display for MatchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchFailure::Strategy(e) => write!(f, "strategy error: {e}"),
            MatchFailure::Step(e) => write!(f, "illegal move: {e}"),
            MatchFailure::UnknownLocation(l) => write!(f, "unknown location {l}"),
        }
    }
}

/// A failed match with the prefix played so far.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{failure} after {} steps", .prefix.len())]
pub struct MatchError<T: Scalar> {
    pub prefix: Play<T>,
    pub failure: MatchFailure,
}

/// Plays `p1` against `p2` from `start` until a target is reached, a player
/// is stuck, or `max_steps` steps were played.
pub fn run_match<T: Scalar>(
    arena: &PtgArena,
    p1: &dyn TimedStrategy<T>,
    p2: &dyn TimedStrategy<T>,
    start: Configuration<T>,
    max_steps: usize,
) -> Result<Play<T>, MatchError<T>> {
    let mut play = Play::new(start);
    loop {
        let here = play.last().location.clone();
        if arena.is_target(&here) {
            return Ok(play);
        }
        if play.len() >= max_steps {
            play.truncated = true;
            return Ok(play);
        }
        let Some(loc) = arena.location(&here) else {
            return Err(MatchError {
                prefix: play,
                failure: MatchFailure::UnknownLocation(here),
            });
        };
        let strategy = match loc.owner {
            Player::One => p1,
            Player::Two => p2,
        };
        match strategy.next_move(&play) {
            Ok(Some(mv)) => {
                if let Err(e) = play.extend(arena, mv) {
                    return Err(MatchError {
                        prefix: play,
                        failure: MatchFailure::Step(e),
                    });
                }
            }
            Ok(None) => {
                play.stuck = true;
                return Ok(play);
            }
            Err(e) => {
                return Err(MatchError {
                    prefix: play,
                    failure: MatchFailure::Strategy(e),
                })
            }
        }
    }
}
