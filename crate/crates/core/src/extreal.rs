//! Extended reals with the `log 0 = -inf` convention and certified brackets.
//!
//! Addition follows a "negative infinity wins" rule: if either operand is
//! `-inf` the sum is `-inf`, even when the other operand is `+inf`. Otherwise
//! a `+inf` operand makes the sum `+inf`. Plain `f64` arithmetic would give
//! `NaN` for `-inf + inf`, which is why every aggregate goes through this type.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A value in `[-inf, +inf]`. Never `NaN`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const NEG_INF: ExtReal = ExtReal(f64::NEG_INFINITY);
    pub const POS_INF: ExtReal = ExtReal(f64::INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Panics on `NaN`.
    pub fn new(x: f64) -> Self {
        assert!(!x.is_nan(), "ExtReal cannot hold NaN");
        ExtReal(x)
    }

    /// Natural logarithm of a non-negative count, with `log 0 = -inf`.
    pub fn ln_count(n: f64) -> Self {
        assert!(n >= 0.0, "count must be non-negative, got {n}");
        if n == 0.0 {
            Self::NEG_INF
        } else {
            ExtReal(n.ln())
        }
    }

    /// `(1/d) log n`: the normalised exponential growth used by every estimator.
    pub fn normalized_log(n: f64, d: usize) -> Self {
        Self::ln_count(n).scale(1.0 / d as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Multiplication by a strictly positive finite scalar.
    pub fn scale(self, c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite());
        ExtReal(self.0 * c)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Sup over an iterator; the empty sup is `-inf`.
    pub fn sup<I: IntoIterator<Item = ExtReal>>(it: I) -> Self {
        it.into_iter().fold(Self::NEG_INF, Self::max)
    }

    /// Inf over an iterator; the empty inf is `+inf`.
    pub fn inf<I: IntoIterator<Item = ExtReal>>(it: I) -> Self {
        it.into_iter().fold(Self::POS_INF, Self::min)
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::new(x)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_neg_inf() || rhs.is_neg_inf() {
            ExtReal::NEG_INF
        } else if self.0 == f64::INFINITY || rhs.0 == f64::INFINITY {
            ExtReal::POS_INF
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        ExtReal(-self.0)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::NEG_INFINITY {
            write!(f, "-inf")
        } else if self.0 == f64::INFINITY {
            write!(f, "inf")
        } else {
            write!(f, "{:.6}", self.0)
        }
    }
}

/// Round to 12 significant digits so emitted reports are stable across
/// platforms whose last-ulp libm results differ.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(round12(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"-inf\"/\"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "-inf" => Ok(ExtReal::NEG_INF),
                    "inf" => Ok(ExtReal::POS_INF),
                    _ => Err(E::custom(format!("unexpected string {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Certified interval `[lo, hi]` around an estimated quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: ExtReal,
    pub hi: ExtReal,
}

impl Bracket {
    pub fn new(lo: ExtReal, hi: ExtReal) -> Self {
        assert!(lo <= hi, "bracket lo {lo} exceeds hi {hi}");
        Bracket { lo, hi }
    }

    pub fn exact(x: ExtReal) -> Self {
        Bracket { lo: x, hi: x }
    }

    pub fn from_f64(lo: f64, hi: f64) -> Self {
        Bracket::new(lo.into(), hi.into())
    }

    pub fn neg_inf() -> Self {
        Bracket::exact(ExtReal::NEG_INF)
    }

    /// Normalised log of a count bracket: `[(1/d) log lo, (1/d) log hi]`.
    pub fn normalized_log(counts: CountBracket, d: usize) -> Self {
        Bracket::new(
            ExtReal::normalized_log(counts.lo, d),
            ExtReal::normalized_log(counts.hi, d),
        )
    }

    /// Width `hi - lo`; infinite if either end is infinite.
    pub fn width(&self) -> f64 {
        if self.lo.is_finite() && self.hi.is_finite() {
            self.hi.value() - self.lo.value()
        } else {
            f64::INFINITY
        }
    }

    pub fn midpoint(&self) -> ExtReal {
        if self.lo.is_finite() && self.hi.is_finite() {
            ExtReal::new(0.5 * (self.lo.value() + self.hi.value()))
        } else if self.lo.is_neg_inf() && self.hi.is_neg_inf() {
            ExtReal::NEG_INF
        } else {
            // One side unbounded: fall back to the finite end.
            if self.hi.is_finite() {
                self.hi
            } else {
                self.lo
            }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo.value() <= x && x <= self.hi.value()
    }

    /// `x` lies within `tol` of the bracket.
    pub fn contains_within(&self, x: f64, tol: f64) -> bool {
        self.lo.value() - tol <= x && x <= self.hi.value() + tol
    }

    /// Distance between two brackets (0 when they intersect).
    pub fn gap(&self, other: &Bracket) -> f64 {
        let a = other.lo.value() - self.hi.value();
        let b = self.lo.value() - other.hi.value();
        let g = a.max(b);
        if g.is_nan() {
            f64::INFINITY
        } else {
            g.max(0.0)
        }
    }

    pub fn max(self, other: Bracket) -> Bracket {
        Bracket::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min(self, other: Bracket) -> Bracket {
        Bracket::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    /// Sup of brackets; `-inf` for an empty family.
    pub fn sup<I: IntoIterator<Item = Bracket>>(it: I) -> Bracket {
        it.into_iter().fold(Bracket::neg_inf(), Bracket::max)
    }

    /// Inf of brackets; `+inf` for an empty family.
    pub fn inf<I: IntoIterator<Item = Bracket>>(it: I) -> Bracket {
        it.into_iter()
            .fold(Bracket::exact(ExtReal::POS_INF), Bracket::min)
    }
}

impl Add for Bracket {
    type Output = Bracket;

    fn add(self, rhs: Bracket) -> Bracket {
        Bracket::new(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Bracket on a non-negative count (possibly fractional for sampled estimates).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountBracket {
    pub lo: f64,
    pub hi: f64,
}

impl CountBracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(0.0 <= lo && lo <= hi, "invalid count bracket [{lo}, {hi}]");
        CountBracket { lo, hi }
    }

    pub fn exact(n: f64) -> Self {
        CountBracket::new(n, n)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn max(self, other: CountBracket) -> CountBracket {
        CountBracket::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }
}

impl fmt::Display for CountBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// How a bracket was obtained, ordered from most to least precise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Greedy,
    Sampled,
}

impl Mode {
    /// The less precise of two modes.
    pub fn combine(self, other: Mode) -> Mode {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Greedy => "greedy",
            Mode::Sampled => "sampled",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_zero_is_neg_inf() {
        assert!(ExtReal::ln_count(0.0).is_neg_inf());
        assert!(ExtReal::normalized_log(0.0, 7).is_neg_inf());
        assert_eq!(ExtReal::ln_count(1.0), ExtReal::ZERO);
    }

    #[test]
    fn neg_inf_absorbs_pos_inf() {
        assert_eq!(ExtReal::NEG_INF + ExtReal::POS_INF, ExtReal::NEG_INF);
        assert_eq!(ExtReal::POS_INF + ExtReal::NEG_INF, ExtReal::NEG_INF);
        assert_eq!(ExtReal::POS_INF + ExtReal::new(3.0), ExtReal::POS_INF);
        assert_eq!(ExtReal::new(1.5) + ExtReal::new(2.0), ExtReal::new(3.5));
    }

    #[test]
    fn empty_sup_and_inf() {
        assert!(ExtReal::sup(std::iter::empty()).is_neg_inf());
        assert_eq!(ExtReal::inf(std::iter::empty()), ExtReal::POS_INF);
    }

    #[test]
    fn serde_uses_string_for_infinities() {
        let b = Bracket::new(ExtReal::NEG_INF, ExtReal::new(0.25));
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"lo":"-inf","hi":0.25}"#);
        let back: Bracket = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn round12_keeps_twelve_digits() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn bracket_gap_and_containment() {
        let a = Bracket::from_f64(0.0, 1.0);
        let b = Bracket::from_f64(1.5, 2.0);
        assert_eq!(a.gap(&b), 0.5);
        assert_eq!(b.gap(&a), 0.5);
        assert_eq!(a.gap(&Bracket::from_f64(0.5, 3.0)), 0.0);
        assert!(a.contains_within(1.05, 0.1));
        assert!(!a.contains(1.05));
    }
}
