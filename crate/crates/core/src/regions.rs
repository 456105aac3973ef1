//! Border constants and the symbolic algebra of η-regions.
//!
//! A region close to a border `M_k` is kept symbolic: it is either the point
//! `{M_k}`, the half-open sliver `(M_k, M_k+η]` just above it, or
//! `[M_k-η, M_k)` just below it. The numeric width `η` only appears when a
//! concrete valuation is classified.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::arena::{Bound, Interval, PtgArena};
use crate::scalar::Scalar;
use crate::simulation::Play;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("valuation {0} lies outside [0, {1}]")]
    OutOfRange(String, i64),
    #[error("eta must lie strictly between 0 and 1/3, got {0}")]
    BadEta(String),
    #[error("constant {0} is not on the ladder")]
    NotOnLadder(i64),
    #[error("region {0} does not exist on this ladder")]
    IllegalRegion(String),
    #[error("delay from {from} back to {to} is negative")]
    Backwards { from: String, to: String },
}

/// The sorted border constants `0 = M_0 < M_1 < ... < M_K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstantLadder(Vec<i64>);

impl ConstantLadder {
    /// Builds a ladder from arbitrary constants: sorted, deduplicated,
    /// negatives dropped, 0 always present.
    pub fn new(constants: impl IntoIterator<Item = i64>) -> ConstantLadder {
        let mut v: Vec<i64> = constants.into_iter().filter(|c| *c >= 0).collect();
        v.push(0);
        v.sort_unstable();
        v.dedup();
        ConstantLadder(v)
    }

    pub fn of_arena(arena: &PtgArena) -> ConstantLadder {
        ConstantLadder::new(arena.constants())
    }

    pub fn constants(&self) -> &[i64] {
        &self.0
    }

    /// `K`, the index of the largest border.
    pub fn top(&self) -> usize {
        self.0.len() - 1
    }

    pub fn max(&self) -> i64 {
        self.0[self.top()]
    }

    pub fn border(&self, k: usize) -> i64 {
        self.0[k]
    }

    pub fn index_of(&self, c: i64) -> Option<usize> {
        self.0.binary_search(&c).ok()
    }

    pub fn at(&self, k: usize) -> EtaRegion {
        EtaRegion {
            border: k,
            anchor: self.0[k],
            position: Position::At,
        }
    }

    fn region(&self, k: usize, position: Position) -> Result<EtaRegion, RegionError> {
        let r = EtaRegion {
            border: k,
            anchor: *self.0.get(k).ok_or(RegionError::NotOnLadder(k as i64))?,
            position,
        };
        match position {
            Position::JustBelow if k == 0 => Err(RegionError::IllegalRegion(r.to_string())),
            Position::JustAbove if k == self.top() => Err(RegionError::IllegalRegion(r.to_string())),
            _ => Ok(r),
        }
    }

    pub fn just_above(&self, k: usize) -> Result<EtaRegion, RegionError> {
        self.region(k, Position::JustAbove)
    }

    pub fn just_below(&self, k: usize) -> Result<EtaRegion, RegionError> {
        self.region(k, Position::JustBelow)
    }

    /// The useful regions in increasing order; `3K + 1` of them.
    pub fn useful_regions(&self) -> Vec<EtaRegion> {
        let mut out = Vec::with_capacity(3 * self.top() + 1);
        for k in 0..=self.top() {
            if k > 0 {
                out.push(self.region(k, Position::JustBelow).unwrap());
            }
            out.push(self.at(k));
            if k < self.top() {
                out.push(self.region(k, Position::JustAbove).unwrap());
            }
        }
        out
    }

    /// Classifies `v` for a concrete `eta` in `(0, 1/3)`.
    pub fn region_of<T: Scalar>(&self, v: &T, eta: &T) -> Result<RegionClass, RegionError> {
        check_eta(eta)?;
        if v.is_negative() || *v > T::from_int(self.max()) {
            return Err(RegionError::OutOfRange(v.to_string(), self.max()));
        }
        // First border not below v.
        let k = self.0.partition_point(|m| T::from_int(*m) < *v);
        let mk = T::from_int(self.0[k]);
        if *v == mk {
            return Ok(RegionClass::Useful(self.at(k)));
        }
        // Strictly between M_{k-1} and M_k.
        let below = k - 1;
        let lo = T::from_int(self.0[below]);
        if *v <= lo.clone() + eta.clone() {
            Ok(RegionClass::Useful(self.region(below, Position::JustAbove)?))
        } else if *v >= mk - eta.clone() {
            Ok(RegionClass::Useful(self.region(k, Position::JustBelow)?))
        } else {
            Ok(RegionClass::Far(below))
        }
    }

    /// Numeric membership of `v` in a symbolic region.
    pub fn region_contains<T: Scalar>(&self, region: &EtaRegion, v: &T, eta: &T) -> bool {
        let m = T::from_int(region.anchor);
        match region.position {
            Position::At => *v == m,
            Position::JustAbove => *v > m && *v <= m + eta.clone(),
            Position::JustBelow => *v >= m.clone() - eta.clone() && *v < m,
        }
    }

    /// Distance from `v` to the nearest border.
    pub fn distance_to_border<T: Scalar>(&self, v: &T) -> T {
        self.0
            .iter()
            .map(|m| (v.clone() - T::from_int(*m)).abs())
            .min()
            .expect("ladder is never empty")
    }

    /// Region equivalence `~`: same side of every border.
    pub fn coarse_equiv<T: Scalar>(&self, a: &T, b: &T) -> bool {
        self.0.iter().all(|m| {
            let m = T::from_int(*m);
            (*a <= m) == (*b <= m) && (*a >= m) == (*b >= m)
        })
    }

    /// The refined relation `~_eta`.
    pub fn fine_equiv<T: Scalar>(&self, a: &T, b: &T, eta: &T) -> bool {
        if !self.coarse_equiv(a, b) {
            return false;
        }
        let top = self.top();
        let near = |v: &T, m: i64| (v.clone() - T::from_int(m)).abs() <= *eta;
        self.0[..top].iter().all(|m| near(a, *m) == near(b, *m)) && {
            let edge = T::from_int(self.max()) - eta.clone();
            (*a >= edge) == (*b >= edge)
        }
    }
}

pub(crate) fn check_eta<T: Scalar>(eta: &T) -> Result<(), RegionError> {
    if eta.is_positive() && *eta < T::from_ratio(1, 3) {
        Ok(())
    } else {
        Err(RegionError::BadEta(eta.to_string()))
    }
}

/// Where a region sits relative to its border.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Position {
    JustBelow,
    At,
    JustAbove,
}

impl Position {
    fn rank(self) -> u8 {
        match self {
            Position::JustBelow => 0,
            Position::At => 1,
            Position::JustAbove => 2,
        }
    }
}

/// A useful η-region, identified by the index of its border.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EtaRegion {
    pub border: usize,
    /// `M_border`, kept alongside the index for display.
    pub anchor: i64,
    pub position: Position,
}

impl EtaRegion {
    pub fn is_point(&self) -> bool {
        self.position == Position::At
    }
}

impl Ord for EtaRegion {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.border, self.position.rank()).cmp(&(other.border, other.position.rank()))
    }
}

impl PartialOrd for EtaRegion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EtaRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.anchor;
        match self.position {
            Position::At => write!(f, "{{{m}}}"),
            Position::JustAbove if m == 0 => f.write_str("(0,η]"),
            Position::JustAbove => write!(f, "({m},{m}+η]"),
            Position::JustBelow => write!(f, "[{m}-η,{m})"),
        }
    }
}

/// Classification of a concrete valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionClass {
    Useful(EtaRegion),
    /// The open middle `(M_k+η, M_{k+1}-η)` of gap `k`.
    Far(usize),
}

/// Integer delay between two regions: the difference of their borders.
/// The η offsets round away because η < 1/3.
pub fn delay(from: &EtaRegion, to: &EtaRegion) -> Result<i64, RegionError> {
    if to < from {
        return Err(RegionError::Backwards {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    Ok(to.anchor - from.anchor)
}

fn on_ladder(b: &Bound, ladder: &ConstantLadder) -> Result<(), RegionError> {
    match b.value() {
        Some(c) if ladder.index_of(c).is_none() => Err(RegionError::NotOnLadder(c)),
        _ => Ok(()),
    }
}

/// Whether every point of `region` satisfies `zone`, for every η in
/// `(0, 1/3)`. Zone endpoints must be ladder constants.
pub fn region_satisfies(region: &EtaRegion, zone: &Interval, ladder: &ConstantLadder) -> Result<bool, RegionError> {
    on_ladder(&zone.low, ladder)?;
    on_ladder(&zone.high, ladder)?;
    let m = region.anchor;
    // Since endpoints are ladder constants, a sliver next to M_k is inside
    // the zone as soon as the endpoint on its side is not strictly inside.
    let low_ok = match (region.position, zone.low) {
        (_, Bound::Infinity) => false,
        (Position::At, Bound::Finite { value, closed }) => value < m || (closed && value == m),
        (Position::JustAbove, Bound::Finite { value, .. }) => value <= m,
        (Position::JustBelow, Bound::Finite { value, .. }) => value < m,
    };
    let high_ok = match (region.position, zone.high) {
        (_, Bound::Infinity) => true,
        (Position::At, Bound::Finite { value, closed }) => value > m || (closed && value == m),
        (Position::JustAbove, Bound::Finite { value, .. }) => value > m,
        (Position::JustBelow, Bound::Finite { value, .. }) => value >= m,
    };
    Ok(low_ok && high_ok)
}

/// Step-wise region equivalence of two plays: coarse `~` when `eta` is
/// `None`, `~_eta` otherwise.
pub fn play_region_equiv<T: Scalar>(a: &Play<T>, b: &Play<T>, ladder: &ConstantLadder, eta: Option<&T>) -> bool {
    let eq = |x: &T, y: &T| match eta {
        None => ladder.coarse_equiv(x, y),
        Some(e) => ladder.fine_equiv(x, y, e),
    };
    if a.len() != b.len() {
        return false;
    }
    let same_config = |i: usize| {
        let (ca, cb) = (a.config(i), b.config(i));
        ca.location == cb.location && eq(&ca.valuation, &cb.valuation)
    };
    (0..=a.len()).all(same_config)
        && a.steps().iter().zip(b.steps()).enumerate().all(|(i, (sa, sb))| {
            sa.mv.label == sb.mv.label
                && eq(
                    &(a.config(i).valuation.clone() + sa.mv.delay.clone()),
                    &(b.config(i).valuation.clone() + sb.mv.delay.clone()),
                )
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::Interval;
    use crate::Rational;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn names(l: &ConstantLadder) -> Vec<String> {
        l.useful_regions().iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn ladder_from_constants() {
        assert_eq!(ConstantLadder::new([2, 1, 2]).constants(), &[0, 1, 2]);
        assert_eq!(ConstantLadder::new([3, 3]).constants(), &[0, 3]);
        assert_eq!(ConstantLadder::new([5]).constants(), &[0, 5]);
        let fig1 = crate::arena::fixtures::fig1();
        assert_eq!(ConstantLadder::of_arena(&fig1).constants(), &[0, 1, 2]);
    }

    #[test]
    fn useful_regions_on_0_2_3() {
        let l = ConstantLadder::new([2, 3]);
        assert_eq!(
            names(&l),
            ["{0}", "(0,η]", "[2-η,2)", "{2}", "(2,2+η]", "[3-η,3)", "{3}"]
        );
        assert_eq!(ConstantLadder::new([]).useful_regions().len(), 1);
        assert_eq!(ConstantLadder::new([1]).useful_regions().len(), 4);
    }

    #[test]
    fn delays() {
        let l = ConstantLadder::new([2, 3]);
        let above2 = l.just_above(1).unwrap();
        let below3 = l.just_below(2).unwrap();
        assert_eq!(delay(&above2, &below3), Ok(1));
        assert_eq!(delay(&l.at(0), &l.just_below(1).unwrap()), Ok(2));
        assert_eq!(delay(&above2, &above2), Ok(0));
        assert!(delay(&below3, &above2).is_err());
    }

    #[test]
    fn illegal_regions() {
        let l = ConstantLadder::new([2]);
        assert!(l.just_below(0).is_err());
        assert!(l.just_above(1).is_err());
    }

    #[test]
    fn classification_examples() {
        let l = ConstantLadder::new([2, 3]);
        assert_eq!(l.region_of(&q(2, 1), &q(1, 4)), Ok(RegionClass::Useful(l.at(1))));
        assert_eq!(
            l.region_of(&q(21, 10), &q(1, 4)),
            Ok(RegionClass::Useful(l.just_above(1).unwrap()))
        );
        assert_eq!(l.region_of(&q(1, 1), &q(1, 4)), Ok(RegionClass::Far(0)));
        assert!(l.region_of(&q(31, 10), &q(1, 4)).is_err());
        assert!(l.region_of(&q(1, 1), &q(1, 3)).is_err());
    }

    #[test]
    fn works_for_fixed_width_rationals() {
        let l = ConstantLadder::new([1]);
        let r = l.region_of(&Ratio::<i64>::new(7, 8), &Ratio::new(1, 4)).unwrap();
        assert_eq!(r, RegionClass::Useful(l.just_below(1).unwrap()));
    }

    #[test]
    fn zone_containment() {
        let l = ConstantLadder::new([1, 2]);
        let g = Interval::greater_than(1);
        assert_eq!(region_satisfies(&l.at(1), &g, &l), Ok(false));
        assert_eq!(region_satisfies(&l.just_above(1).unwrap(), &g, &l), Ok(true));
        assert_eq!(region_satisfies(&l.just_below(2).unwrap(), &Interval::at_most(2), &l), Ok(true));
        assert_eq!(region_satisfies(&l.just_below(1).unwrap(), &Interval::less_than(1), &l), Ok(true));
        assert_eq!(region_satisfies(&l.at(1), &Interval::less_than(1), &l), Ok(false));
        assert_eq!(region_satisfies(&l.just_above(0).unwrap(), &Interval::point(0), &l), Ok(false));
        assert_eq!(
            region_satisfies(&l.at(0), &Interval::point(5), &l),
            Err(RegionError::NotOnLadder(5))
        );
    }

    fn ladder_strategy() -> impl Strategy<Value = ConstantLadder> {
        proptest::collection::btree_set(1i64..6, 0..4).prop_map(ConstantLadder::new)
    }

    fn eta_strategy() -> impl Strategy<Value = Rational> {
        (1i64..100, 301i64..1000).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn classes_tile_the_range(l in ladder_strategy(), eta in eta_strategy(), num in 0i64..600) {
            let v = q(num, 100).min(Rational::from_int(l.max()));
            let class = l.region_of(&v, &eta).unwrap();
            let hits: Vec<_> = l.useful_regions().into_iter().filter(|r| l.region_contains(r, &v, &eta)).collect();
            match class {
                RegionClass::Useful(r) => prop_assert_eq!(hits, vec![r]),
                RegionClass::Far(k) => {
                    prop_assert!(hits.is_empty());
                    prop_assert!(v > q(l.border(k), 1) + eta.clone());
                    prop_assert!(v < q(l.border(k + 1), 1) - eta.clone());
                }
            }
        }

        #[test]
        fn delay_is_additive_and_matches_numeric_lower_bounds(
            l in ladder_strategy(), eta in eta_strategy(), i in 0usize..20, j in 0usize..20, k in 0usize..20
        ) {
            let regs = l.useful_regions();
            let mut idx = [i % regs.len(), j % regs.len(), k % regs.len()];
            idx.sort();
            let (a, b, c) = (regs[idx[0]], regs[idx[1]], regs[idx[2]]);
            prop_assert_eq!(delay(&a, &c).unwrap(), delay(&a, &b).unwrap() + delay(&b, &c).unwrap());
            let lower = |r: &EtaRegion| match r.position {
                Position::JustBelow => q(r.anchor, 1) - eta.clone(),
                _ => q(r.anchor, 1),
            };
            let diff = lower(&c) - lower(&a);
            let nearest = (diff + q(1, 2)).floor();
            prop_assert_eq!(nearest, Rational::from_int(delay(&a, &c).unwrap()));
        }

        #[test]
        fn borders_classify_independently_of_eta(l in ladder_strategy(), e1 in eta_strategy(), e2 in eta_strategy(), k in 0usize..5) {
            let k = k % l.constants().len();
            let v = Rational::from_int(l.border(k));
            prop_assert_eq!(l.region_of(&v, &e1).unwrap(), l.region_of(&v, &e2).unwrap());
        }
    }
}
