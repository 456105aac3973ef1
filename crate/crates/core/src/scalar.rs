//! Exact scalar abstraction for clock valuations, delays and play costs.
//!
//! Everything that touches a concrete clock value is generic over [`Scalar`].
//! The trait is implemented for every `num_rational::Ratio<I>` whose integer
//! type is signed; the crate root aliases [`crate::Rational`] to the
//! arbitrary-precision instance, which is what the solver uses by default
//! (offsets of the form `eta / 2^(n+1)` outgrow any fixed-width denominator
//! after a few dozen steps).

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Num, Signed};

/// An ordered exact field of numbers used for valuations.
pub trait Scalar:
    Clone + Ord + Num + Signed + Debug + Display + Send + Sync + 'static
{
    fn from_int(n: i64) -> Self;

    /// `num / den`; `den` must be non-zero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Returns the value as an `i64` when it is an integer that fits.
    fn as_int(&self) -> Option<i64>;

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }

    /// `self / 2^exp`.
    fn div_pow2(&self, exp: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..exp {
            out = out.half();
        }
        out
    }
}

impl<I> Scalar for Ratio<I>
where
    I: Integer + Signed + Clone + From<i64> + Debug + Display + Send + Sync + 'static,
    I: TryInto<i64>,
{
    fn from_int(n: i64) -> Self {
        Ratio::from_integer(I::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(I::from(num), I::from(den))
    }

    fn as_int(&self) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().try_into().ok()
        } else {
            None
        }
    }
}

/// `min` over a non-empty pair, by reference.
pub(crate) fn min_of<T: Scalar>(a: &T, b: &T) -> T {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub(crate) fn max_of<T: Scalar>(a: &T, b: &T) -> T {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type Big = Ratio<BigInt>;

    #[test]
    fn div_pow2_is_exact() {
        let eta = Big::from_ratio(1, 8);
        assert_eq!(eta.div_pow2(3), Big::from_ratio(1, 64));
        assert_eq!(eta.div_pow2(0), eta);
        let deep = Big::from_int(1).div_pow2(200);
        assert!(deep > Big::from_int(0));
        assert_eq!(deep.as_int(), None);
    }

    #[test]
    fn as_int_roundtrip() {
        assert_eq!(Big::from_int(-7).as_int(), Some(-7));
        assert_eq!(Ratio::<i64>::from_ratio(6, 3).as_int(), Some(2));
        assert_eq!(Ratio::<i64>::from_ratio(1, 3).as_int(), None);
    }
}
