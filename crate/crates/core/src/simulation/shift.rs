//! Play transformations that move every step next to a border.
//!
//! [`shift_up`] keeps a play region-equivalent while never decreasing its
//! weight and makes it stay η-close to borders; [`shift_down`] never
//! increases the weight and makes the play η-convergent. Both are built
//! one step at a time, so equal prefixes give equal shifted prefixes.

use thiserror::Error;

use super::{Play, StepError, TimedMove};
use crate::arena::{bi_valued_profile, BiValuedProfile, Player, ProfileRejection, PtgArena};
use crate::regions::{check_eta, ConstantLadder, RegionError};
use crate::scalar::{max_of, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error(transparent)]
    NotBiValued(#[from] ProfileRejection),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("the play does not start eta-close to a border")]
    FarStart,
    #[error("valuation {0} exceeds the largest constant")]
    BeyondLadder(String),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("shifted step {index} is illegal: {error}")]
    Step { index: usize, error: StepError },
}

/// Gap index `k` with `M_k + delta < v < M_{k+1} - delta`, or `None` when
/// `v` lies within `delta` of a border.
fn far_gap<T: Scalar>(ladder: &ConstantLadder, v: &T, delta: &T) -> Option<usize> {
    if ladder.distance_to_border(v) <= *delta {
        return None;
    }
    let k = ladder
        .constants()
        .partition_point(|m| T::from_int(*m) < *v);
    Some(k - 1)
}

struct Context<'a> {
    arena: &'a PtgArena,
    ladder: ConstantLadder,
    profile: BiValuedProfile,
}

impl<'a> Context<'a> {
    fn new<T: Scalar>(arena: &'a PtgArena, r: &Play<T>, eta: &T) -> Result<Self, ShiftError> {
        check_eta(eta)?;
        let profile = bi_valued_profile(arena)?;
        let ladder = ConstantLadder::of_arena(arena);
        let top = T::from_int(ladder.max());
        if let Some(c) = r.configs().iter().find(|c| c.valuation > top) {
            return Err(ShiftError::BeyondLadder(c.valuation.to_string()));
        }
        if let Some(s) = r
            .steps()
            .iter()
            .zip(r.configs())
            .map(|(s, c)| c.valuation.clone() + s.mv.delay.clone())
            .find(|p| *p > top)
        {
            return Err(ShiftError::BeyondLadder(s.to_string()));
        }
        if ladder.distance_to_border(&r.config(0).valuation) > *eta {
            return Err(ShiftError::FarStart);
        }
        Ok(Context { arena, ladder, profile })
    }

    fn location(&self, id: &str) -> Result<(Player, bool), ShiftError> {
        let loc = self
            .arena
            .location(id)
            .ok_or_else(|| ShiftError::UnknownLocation(id.to_string()))?;
        Ok((loc.owner, self.profile.is_upper(loc.rate)))
    }

    fn m<T: Scalar>(&self, k: usize) -> T {
        T::from_int(self.ladder.border(k))
    }

    fn build<T: Scalar>(
        &self,
        r: &Play<T>,
        delay: impl Fn(usize, &T, &T, &T) -> Result<T, ShiftError>,
    ) -> Result<Play<T>, ShiftError> {
        let mut out = Play::new(r.config(0).clone());
        for (i, s) in r.steps().iter().enumerate() {
            let nu = &r.config(i).valuation;
            let shifted = out.last().valuation.clone();
            let t = delay(i, nu, &s.mv.delay, &shifted)?;
            out.extend(self.arena, TimedMove::new(t, s.mv.label.clone()))
                .map_err(|error| ShiftError::Step { index: i, error })?;
        }
        Ok(out)
    }
}

/// The r⁺ construction.
pub fn shift_up<T: Scalar>(arena: &PtgArena, r: &Play<T>, eta: &T) -> Result<Play<T>, ShiftError> {
    let cx = Context::new(arena, r, eta)?;
    cx.build(r, |i, nu, t, nu_plus| {
        let post = nu.clone() + t.clone();
        let Some(k) = far_gap(&cx.ladder, &post, eta) else {
            return Ok(post - nu_plus.clone());
        };
        let (owner, upper) = cx.location(&r.config(i).location)?;
        let low = cx.m::<T>(k) + eta.clone();
        Ok(if !upper {
            max_of(&(low - nu_plus.clone()), &T::zero())
        } else if owner == Player::One && t.is_zero() && *nu_plus == low {
            T::zero()
        } else {
            cx.m::<T>(k + 1) - eta.clone() - nu_plus.clone()
        })
    })
}

/// The r⁻ construction, with offsets `eta / 2^(i+1)` at step `i`.
pub fn shift_down<T: Scalar>(arena: &PtgArena, r: &Play<T>, eta: &T) -> Result<Play<T>, ShiftError> {
    let cx = Context::new(arena, r, eta)?;
    cx.build(r, |i, nu, t, nu_minus| {
        let delta = eta.div_pow2(i as u32 + 1);
        let post = nu.clone() + t.clone();
        let Some(k) = far_gap(&cx.ladder, &post, &delta) else {
            return Ok(post - nu_minus.clone());
        };
        let (owner, upper) = cx.location(&r.config(i).location)?;
        let near_low = cx.m::<T>(k) + delta.clone();
        let early = max_of(&(near_low - nu_minus.clone()), &T::zero());
        Ok(if upper {
            early
        } else if owner == Player::One || t.is_positive() || *nu_minus > cx.m::<T>(k) + eta.clone() {
            cx.m::<T>(k + 1) - delta - nu_minus.clone()
        } else {
            early
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlayClass {
    /// Every post-delay valuation is within η of a border.
    pub eta_close: bool,
    /// Step `i` ends within `η/2^(i+1)` of a border, or is a zero delay
    /// from `(M_k + η/2^(i+1), M_k + η]`.
    pub eta_convergent: bool,
}

pub fn classify_play<T: Scalar>(r: &Play<T>, ladder: &ConstantLadder, eta: &T) -> PlayClass {
    let mut class = PlayClass {
        eta_close: true,
        eta_convergent: true,
    };
    for (i, s) in r.steps().iter().enumerate() {
        let nu = &r.config(i).valuation;
        let post = nu.clone() + s.mv.delay.clone();
        let dist = ladder.distance_to_border(&post);
        class.eta_close &= dist <= *eta;
        let delta = eta.div_pow2(i as u32 + 1);
        let waits_in_sliver = s.mv.delay.is_zero()
            && ladder.constants().iter().any(|m| {
                let m = T::from_int(*m);
                *nu > m.clone() + delta.clone() && *nu <= m + eta.clone()
            });
        class.eta_convergent &= dist <= delta || waits_in_sliver;
    }
    class
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fixtures::{edge, loc};
    use crate::arena::Interval;
    use crate::simulation::{play_cost, Configuration};
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    /// Rates -1 (Player 2) and +1 (Player 1) on [0,1], both with a free
    /// exit at any time.
    fn pair() -> PtgArena {
        PtgArena {
            locations: vec![
                loc("down", 2, -1, Interval::at_most(1)),
                loc("up", 1, 1, Interval::at_most(1)),
                loc("f", 1, 0, Interval::at_most(1)),
            ],
            transitions: vec![
                edge("down", "a", Interval::at_most(1), false, 0, "f"),
                edge("down", "b", Interval::at_most(1), false, 0, "up"),
                edge("up", "a", Interval::at_most(1), false, 0, "f"),
            ],
            targets: ["f".to_string()].into(),
            ..Default::default()
        }
    }

    fn play(a: &PtgArena, start: &str, moves: &[(Rational, &str)]) -> Play<Rational> {
        let mut r = Play::new(Configuration::new(start, q(0, 1)));
        for (t, l) in moves {
            r.extend(a, TimedMove::new(t.clone(), *l)).unwrap();
        }
        r
    }

    #[test]
    fn lower_rate_leaves_early() {
        let a = pair();
        let r = play(&a, "down", &[(q(1, 2), "a")]);
        let up = shift_up(&a, &r, &q(1, 8)).unwrap();
        assert_eq!(up.steps()[0].mv.delay, q(1, 8));
        assert_eq!(up.total_cost(), &q(-1, 8));
        assert!(up.total_cost() >= r.total_cost());
    }

    #[test]
    fn upper_rate_in_shift_down_leaves_early() {
        let a = pair();
        let r = play(&a, "up", &[(q(1, 2), "a")]);
        let down = shift_down(&a, &r, &q(1, 8)).unwrap();
        assert_eq!(down.steps()[0].mv.delay, q(1, 16));
        assert!(down.total_cost() <= r.total_cost());
    }

    #[test]
    fn close_plays_are_fixed_points() {
        let a = pair();
        let eta = q(1, 8);
        let r = play(&a, "down", &[(q(1, 10), "b"), (q(1, 1) - q(1, 10), "a")]);
        assert_eq!(shift_up(&a, &r, &eta).unwrap(), r);
        let c = play(&a, "down", &[(q(1, 20), "b"), (q(1, 1) - q(1, 20), "a")]);
        assert!(classify_play(&c, &ConstantLadder::of_arena(&a), &eta).eta_convergent);
        assert_eq!(shift_down(&a, &c, &eta).unwrap(), c);
    }

    #[test]
    fn classification() {
        let a = pair();
        let ladder = ConstantLadder::of_arena(&a);
        let eta = q(1, 8);
        let far = play(&a, "down", &[(q(1, 2), "a")]);
        assert_eq!(
            classify_play(&far, &ladder, &eta),
            PlayClass {
                eta_close: false,
                eta_convergent: false
            }
        );
        let up = shift_up(&a, &far, &eta).unwrap();
        assert!(classify_play(&up, &ladder, &eta).eta_close);
        let down = shift_down(&a, &far, &eta).unwrap();
        assert!(classify_play(&down, &ladder, &eta).eta_convergent);
        assert_eq!(play_cost(&a, &down), play_cost(&a, &far).map(|_| q(-15, 16)));
    }

    #[test]
    fn rejects_far_start_and_bad_eta() {
        let a = pair();
        let r = play(&a, "down", &[(q(1, 2), "a")]);
        assert!(matches!(shift_up(&a, &r, &q(1, 2)), Err(ShiftError::Region(_))));
        let mut far = Play::new(Configuration::new("down", q(1, 2)));
        far.extend(&a, TimedMove::new(q(0, 1), "a")).unwrap();
        assert_eq!(shift_up(&a, &far, &q(1, 8)), Err(ShiftError::FarStart));
    }
}
