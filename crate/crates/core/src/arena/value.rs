use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// A number extended with both infinities.
///
/// Variant order is the value order: `MinusInf < Finite(_) < PlusInf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtValue<T = i64> {
    MinusInf,
    Finite(T),
    PlusInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("the sum +inf + -inf is undefined")]
pub struct UndefinedSum;

impl<T> ExtValue<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            ExtValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> ExtValue<U> {
        match self {
            ExtValue::MinusInf => ExtValue::MinusInf,
            ExtValue::Finite(v) => ExtValue::Finite(f(v)),
            ExtValue::PlusInf => ExtValue::PlusInf,
        }
    }
}

impl<T: Add<Output = T>> ExtValue<T> {
    /// Saturating sum; fails only for `PlusInf + MinusInf` in either order.
    pub fn checked_add(self, other: Self) -> Result<Self, UndefinedSum> {
        use ExtValue::*;
        match (self, other) {
            (PlusInf, MinusInf) | (MinusInf, PlusInf) => Err(UndefinedSum),
            (PlusInf, _) | (_, PlusInf) => Ok(PlusInf),
            (MinusInf, _) | (_, MinusInf) => Ok(MinusInf),
            (Finite(a), Finite(b)) => Ok(Finite(a + b)),
        }
    }

    /// Adds a finite amount; never fails.
    pub fn plus(self, w: T) -> Self {
        self.map(|v| v + w)
    }
}

impl<T: Add<Output = T>> Add for ExtValue<T> {
    type Output = Self;

    /// Panics on `PlusInf + MinusInf`; use [`ExtValue::checked_add`] when
    /// both sides may be infinite with opposite signs.
    fn add(self, rhs: Self) -> Self {
        match self.checked_add(rhs) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }
}

impl<T> From<T> for ExtValue<T> {
    fn from(v: T) -> Self {
        ExtValue::Finite(v)
    }
}

impl<T: fmt::Display> fmt::Display for ExtValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::MinusInf => f.write_str("-inf"),
            ExtValue::Finite(v) => write!(f, "{v}"),
            ExtValue::PlusInf => f.write_str("+inf"),
        }
    }
}

/// Integers serialize as JSON numbers, infinities as the strings
/// `"+inf"` / `"-inf"`.
impl Serialize for ExtValue<i64> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtValue::MinusInf => s.serialize_str("-inf"),
            ExtValue::Finite(v) => s.serialize_i64(*v),
            ExtValue::PlusInf => s.serialize_str("+inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::ExtValue::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn order_places_infinities_at_the_ends() {
        assert!(MinusInf < Finite(i64::MIN));
        assert!(Finite(i64::MAX) < PlusInf);
        assert!(Finite(-3) < Finite(2));
    }

    #[test]
    fn opposite_infinities_do_not_add() {
        type V = ExtValue<i64>;
        assert_eq!(V::PlusInf.checked_add(MinusInf), Err(UndefinedSum));
        assert_eq!(V::MinusInf.checked_add(PlusInf), Err(UndefinedSum));
        assert_eq!(V::PlusInf.checked_add(Finite(-5)), Ok(PlusInf));
        assert_eq!(V::MinusInf.checked_add(MinusInf), Ok(MinusInf));
    }

    #[test]
    #[should_panic(expected = "undefined")]
    fn add_operator_panics_on_undefined_sum() {
        let _ = ExtValue::<i64>::PlusInf + MinusInf;
    }

    #[test]
    fn json_encoding() {
        let v: Vec<ExtValue> = vec![Finite(3), PlusInf, MinusInf];
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[3,"+inf","-inf"]"#);
    }

    fn ext() -> impl Strategy<Value = ExtValue<i64>> {
        prop_oneof![
            Just(MinusInf),
            Just(PlusInf),
            (-1000i64..1000).prop_map(Finite),
        ]
    }

    proptest! {
        #[test]
        fn saturating_addition_is_commutative_and_monotone(a in ext(), b in ext(), c in ext()) {
            prop_assert_eq!(a.checked_add(b), b.checked_add(a));
            if a <= b {
                if let (Ok(x), Ok(y)) = (a.checked_add(c), b.checked_add(c)) {
                    prop_assert!(x <= y);
                }
            }
        }
    }
}
