//! Exact rational scalar used everywhere values, costs, and ratios appear.
//!
//! All arithmetic in this crate is exact. Adversarial instances use levels
//! like 1/1000 where the interesting comparisons differ by a single epsilon,
//! so floating point is never used, not even for reporting.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational number.
pub type Q = BigRational;

/// Shorthand for an integer-valued rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for `p/q`.
pub fn qr(p: i64, den: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(den))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let p = BigInt::from_str(num).map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
    let d = BigInt::from_str(den).map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
    if d.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Q::new(p, d))
}

/// Canonical `"p/q"` form, denominator always present (`5` prints as `"5/1"`).
pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// A ratio that may be infinite. Goods-side ratios live in `[0, 1]` after
/// capping; chores-side ratios live in `[1, +inf]` after flooring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ratio {
    Finite(Q),
    Infinite,
}

impl Ratio {
    pub fn one() -> Self {
        Ratio::Finite(Q::one())
    }

    pub fn zero() -> Self {
        Ratio::Finite(Q::zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Ratio::Finite(x) if x.is_one())
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            Ratio::Finite(x) => Some(x),
            Ratio::Infinite => None,
        }
    }

    /// Caps at 1 from above (goods convention).
    pub fn cap_at_one(&self) -> Ratio {
        match self {
            Ratio::Infinite => Ratio::one(),
            Ratio::Finite(x) if *x > Q::one() => Ratio::one(),
            other => other.clone(),
        }
    }

    /// Floors at 1 from below (chores convention).
    pub fn floor_at_one(&self) -> Ratio {
        match self {
            Ratio::Finite(x) if *x < Q::one() => Ratio::one(),
            other => other.clone(),
        }
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp_total(other))
    }
}

impl Ratio {
    /// Total order with `Infinite` above every finite value.
    pub fn cmp_total(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Ratio::Infinite, Ratio::Infinite) => Equal,
            (Ratio::Infinite, Ratio::Finite(_)) => Greater,
            (Ratio::Finite(_), Ratio::Infinite) => Less,
            (Ratio::Finite(a), Ratio::Finite(b)) => a.cmp(b),
        }
    }

    pub fn min_of(a: Ratio, b: Ratio) -> Ratio {
        if a.cmp_total(&b).is_le() {
            a
        } else {
            b
        }
    }

    pub fn max_of(a: Ratio, b: Ratio) -> Ratio {
        if a.cmp_total(&b).is_ge() {
            a
        } else {
            b
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(x) => write!(f, "{}", format_q(x)),
            Ratio::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Ratio {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            Ok(Ratio::Infinite)
        } else {
            Ok(Ratio::Finite(parse_q(s)?))
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Q` fields serialized as `"p/q"` strings.
pub mod q_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Q, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod q_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Q], serializer: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = xs.iter().map(format_q).collect();
        strs.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<Q>, D::Error> {
        let strs: Vec<String> = Vec::deserialize(deserializer)?;
        strs.iter()
            .map(|s| parse_q(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// True when `x` is a non-negative rational.
pub fn is_nonnegative(x: &Q) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "10/1", "-7/2", "0/1"] {
            assert_eq!(format_q(&parse_q(s).unwrap()), s);
        }
        assert_eq!(format_q(&parse_q("5").unwrap()), "5/1");
        assert_eq!(format_q(&parse_q("6/4").unwrap()), "3/2");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_q("").is_err());
        assert!(parse_q("x/2").is_err());
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn ratio_order_and_caps() {
        let half = Ratio::Finite(qr(1, 2));
        let two = Ratio::Finite(q(2));
        assert!(Ratio::Infinite > two);
        assert!(two > half);
        assert_eq!(two.cap_at_one(), Ratio::one());
        assert_eq!(half.floor_at_one(), Ratio::one());
        assert_eq!(half.cap_at_one(), half);
        assert_eq!(Ratio::Infinite.floor_at_one(), Ratio::Infinite);
    }
}
