//! Trapezoidal fuzzy intervals.
//!
//! An interval `(a, b, c, d)` has membership rising linearly on `[a, b]`,
//! equal to one on `[b, c]` and falling linearly on `[c, d]`. Either side may
//! be infinite (`a = b = -inf` or `c = d = +inf`), but not both.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default lower bound on the width of `Start`/`End` trapezoids.
pub const DEFAULT_DELTA_MIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("trapezoid parameters must satisfy a <= b <= c <= d, got ({0}, {1}, {2}, {3})")]
    Unordered(f64, f64, f64, f64),
    #[error("trapezoid parameter is NaN")]
    NotANumber,
    #[error("infinite parameters must come in pairs (a = b = -inf or c = d = +inf)")]
    MalformedInfinity,
    #[error("an interval cannot be infinite on both sides")]
    BothInfinite,
    #[error("{0} is undefined for a left-infinite interval")]
    LeftInfinite(&'static str),
    #[error("{0} is undefined for a right-infinite interval")]
    RightInfinite(&'static str),
    #[error("crisp interval [{0}, {1}] requires i <= j")]
    CrispOrder(u64, u64),
    #[error("containment needs a finite-duration left operand")]
    InfiniteDuration,
    #[error("both intervals are infinite on the same side; the intersection is unbounded")]
    FacingInfinite,
    #[error("delta_min must be positive and finite, got {0}")]
    DeltaMin(f64),
}

/// Duration of a fuzzy interval: the area under its membership curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedDuration {
    Finite(f64),
    Infinite,
}

impl ExtendedDuration {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedDuration::Finite(v) => Some(v),
            ExtendedDuration::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedDuration::Infinite)
    }

    /// Converts to `f64`, mapping the sentinel to `+inf`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtendedDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedDuration::Finite(v) => write!(f, "{v}"),
            ExtendedDuration::Infinite => f.write_str("inf"),
        }
    }
}

/// A trapezoidal fuzzy interval over the extended reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyInterval {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    left_infinite: bool,
    right_infinite: bool,
}

impl FuzzyInterval {
    /// Builds an interval, validating ordering and the pairing of infinities.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, IntervalError> {
        if [a, b, c, d].iter().any(|v| v.is_nan()) {
            return Err(IntervalError::NotANumber);
        }
        let left_infinite = a == f64::NEG_INFINITY;
        let right_infinite = d == f64::INFINITY;
        let left_ok = if left_infinite {
            b == f64::NEG_INFINITY
        } else {
            a.is_finite() && b.is_finite()
        };
        let right_ok = if right_infinite {
            c == f64::INFINITY
        } else {
            c.is_finite() && d.is_finite()
        };
        if !left_ok || !right_ok {
            return Err(IntervalError::MalformedInfinity);
        }
        if left_infinite && right_infinite {
            return Err(IntervalError::BothInfinite);
        }
        if !(a <= b && b <= c && c <= d) {
            return Err(IntervalError::Unordered(a, b, c, d));
        }
        Ok(FuzzyInterval {
            a,
            b,
            c,
            d,
            left_infinite,
            right_infinite,
        })
    }

    /// `(-inf, -inf, c, d)`.
    pub fn left_infinite(c: f64, d: f64) -> Result<Self, IntervalError> {
        Self::new(f64::NEG_INFINITY, f64::NEG_INFINITY, c, d)
    }

    /// `(a, b, +inf, +inf)`.
    pub fn right_infinite(a: f64, b: f64) -> Result<Self, IntervalError> {
        Self::new(a, b, f64::INFINITY, f64::INFINITY)
    }

    /// The crisp indicator trapezoid `(i, i, j, j)` of the time span `[i, j]`.
    pub fn crisp(i: u64, j: u64) -> Result<Self, IntervalError> {
        if i > j {
            return Err(IntervalError::CrispOrder(i, j));
        }
        Self::new(i as f64, i as f64, j as f64, j as f64)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn params(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_left_infinite(&self) -> bool {
        self.left_infinite
    }

    pub fn is_right_infinite(&self) -> bool {
        self.right_infinite
    }

    pub fn is_finite(&self) -> bool {
        !self.left_infinite && !self.right_infinite
    }

    /// Membership degree of `x`.
    pub fn membership(&self, x: f64) -> f64 {
        if x >= self.b && x <= self.c {
            // Also covers the infinite plateau of semi-infinite intervals.
            1.0
        } else if x < self.b {
            if x <= self.a {
                0.0
            } else {
                (x - self.a) / (self.b - self.a)
            }
        } else if x >= self.d {
            0.0
        } else {
            (x - self.d) / (self.c - self.d)
        }
    }

    pub fn duration(&self) -> ExtendedDuration {
        if !self.is_finite() {
            return ExtendedDuration::Infinite;
        }
        ExtendedDuration::Finite(((self.c - self.b) + (self.d - self.a)) / 2.0)
    }

    /// What happens before the interval starts: `(-inf, -inf, a, b)`.
    pub fn before(&self) -> Result<Self, IntervalError> {
        if self.left_infinite {
            return Err(IntervalError::LeftInfinite("Before"));
        }
        Self::left_infinite(self.a, self.b)
    }

    /// What happens after the interval ends: `(c, d, +inf, +inf)`.
    pub fn after(&self) -> Result<Self, IntervalError> {
        if self.right_infinite {
            return Err(IntervalError::RightInfinite("After"));
        }
        Self::right_infinite(self.c, self.d)
    }

    /// Triangle centred on the rising edge, at least `delta_min` wide.
    pub fn start(&self, delta_min: f64) -> Result<Self, IntervalError> {
        check_delta_min(delta_min)?;
        if self.left_infinite {
            return Err(IntervalError::LeftInfinite("Start"));
        }
        let (chi, delta) = edge_triangle(self.a, self.b, delta_min);
        Self::new(chi - delta / 2.0, chi, chi, chi + delta / 2.0)
    }

    /// Triangle centred on the falling edge, at least `delta_min` wide.
    pub fn end(&self, delta_min: f64) -> Result<Self, IntervalError> {
        check_delta_min(delta_min)?;
        if self.right_infinite {
            return Err(IntervalError::RightInfinite("End"));
        }
        let (chi, delta) = edge_triangle(self.c, self.d, delta_min);
        Self::new(chi - delta / 2.0, chi, chi, chi + delta / 2.0)
    }
}

/// Centre and width of the triangle placed on the edge `[lo, hi]`.
pub(crate) fn edge_triangle(lo: f64, hi: f64, delta_min: f64) -> (f64, f64) {
    let chi = (lo + hi) / 2.0;
    let delta = ((hi - lo) / 2.0).max(delta_min);
    (chi, delta)
}

fn check_delta_min(delta_min: f64) -> Result<(), IntervalError> {
    if delta_min > 0.0 && delta_min.is_finite() {
        Ok(())
    } else {
        Err(IntervalError::DeltaMin(delta_min))
    }
}

impl fmt::Display for FuzzyInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

impl Serialize for FuzzyInterval {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // JSON has no infinity literal; infinite sides are written as strings.
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(4))?;
        for v in self.params() {
            if v.is_finite() {
                seq.serialize_element(&v)?;
            } else if v > 0.0 {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element("-inf")?;
            }
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(a: f64, b: f64, c: f64, d: f64) -> FuzzyInterval {
        FuzzyInterval::new(a, b, c, d).unwrap()
    }

    const NEG: f64 = f64::NEG_INFINITY;
    const POS: f64 = f64::INFINITY;

    #[test]
    fn membership_examples() {
        let i = iv(1.0, 2.0, 5.0, 7.0);
        assert_eq!(i.membership(3.0), 1.0);
        assert_eq!(i.membership(1.5), 0.5);
        assert_eq!(i.membership(0.0), 0.0);
        assert_eq!(i.membership(6.0), 0.5);
        assert_eq!(i.membership(7.0), 0.0);
        assert_eq!(iv(NEG, NEG, 2.0, 3.0).membership(-1000.0), 1.0);
        assert_eq!(iv(NEG, NEG, 2.0, 3.0).membership(2.5), 0.5);
        assert_eq!(iv(2.0, 3.0, POS, POS).membership(1e9), 1.0);
    }

    #[test]
    fn crisp_edges_are_closed() {
        let i = iv(0.0, 0.0, 1.0, 1.0);
        assert_eq!(i.membership(0.0), 1.0);
        assert_eq!(i.membership(1.0), 1.0);
        assert_eq!(i.membership(-1e-12), 0.0);
        assert_eq!(i.membership(1.0 + 1e-12), 0.0);
    }

    #[test]
    fn duration_examples() {
        assert_eq!(
            iv(1.0, 2.0, 5.0, 7.0).duration(),
            ExtendedDuration::Finite(4.5)
        );
        assert_eq!(
            iv(3.0, 3.0, 3.0, 3.0).duration(),
            ExtendedDuration::Finite(0.0)
        );
        assert_eq!(
            iv(NEG, NEG, 2.0, 3.0).duration(),
            ExtendedDuration::Infinite
        );
    }

    #[test]
    fn duration_matches_numeric_integration() {
        // Trapezoidal rule at step 1e-4; exact on each linear piece.
        let i = iv(1.0, 2.0, 5.0, 7.0);
        let h = 1e-4;
        let n = (8.0 / h) as usize;
        let mut acc = 0.0;
        for k in 0..n {
            let x0 = k as f64 * h;
            acc += 0.5 * h * (i.membership(x0) + i.membership(x0 + h));
        }
        assert!((acc - 4.5).abs() < 1e-6, "{acc}");
    }

    #[test]
    fn before_after_examples() {
        let a = iv(2.0, 3.0, 4.0, 6.0);
        assert_eq!(a.before().unwrap(), iv(NEG, NEG, 2.0, 3.0));
        assert_eq!(a.after().unwrap(), iv(4.0, 6.0, POS, POS));
        assert_eq!(
            iv(0.0, 0.0, 1.0, 1.0).before().unwrap(),
            iv(NEG, NEG, 0.0, 0.0)
        );
        assert_eq!(
            iv(0.0, 0.0, 1.0, 1.0).after().unwrap(),
            iv(1.0, 1.0, POS, POS)
        );
        assert_eq!(
            iv(NEG, NEG, 2.0, 3.0).before(),
            Err(IntervalError::LeftInfinite("Before"))
        );
        assert_eq!(
            iv(2.0, 3.0, POS, POS).after(),
            Err(IntervalError::RightInfinite("After"))
        );
    }

    #[test]
    fn start_end_examples() {
        let a = iv(2.0, 3.0, 4.0, 6.0);
        assert_eq!(a.start(0.1).unwrap(), iv(2.25, 2.5, 2.5, 2.75));
        assert_eq!(a.end(0.1).unwrap(), iv(4.5, 5.0, 5.0, 5.5));
        let s = iv(2.0, 2.0, 4.0, 6.0).start(0.1).unwrap();
        for (got, want) in s.params().iter().zip([1.95, 2.0, 2.0, 2.05]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(
            iv(0.0, 4.0, 9.0, 9.0).start(0.1).unwrap(),
            iv(1.0, 2.0, 2.0, 3.0)
        );
        let e = iv(0.0, 0.0, 2.0, 2.0).end(0.1).unwrap();
        for (got, want) in e.params().iter().zip([1.95, 2.0, 2.0, 2.05]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(iv(NEG, NEG, 2.0, 3.0).start(0.1).is_err());
        assert!(iv(2.0, 3.0, POS, POS).end(0.1).is_err());
        assert_eq!(a.start(0.0), Err(IntervalError::DeltaMin(0.0)));
    }

    #[test]
    fn crisp_constant() {
        assert_eq!(FuzzyInterval::crisp(2, 5).unwrap(), iv(2.0, 2.0, 5.0, 5.0));
        assert_eq!(FuzzyInterval::crisp(3, 3).unwrap(), iv(3.0, 3.0, 3.0, 3.0));
        assert_eq!(
            FuzzyInterval::crisp(5, 2),
            Err(IntervalError::CrispOrder(5, 2))
        );
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(
            FuzzyInterval::new(1.0, 0.0, 2.0, 3.0),
            Err(IntervalError::Unordered(..))
        ));
        assert_eq!(
            FuzzyInterval::new(NEG, 0.0, 2.0, 3.0),
            Err(IntervalError::MalformedInfinity)
        );
        assert_eq!(
            FuzzyInterval::new(NEG, NEG, POS, POS),
            Err(IntervalError::BothInfinite)
        );
        assert_eq!(
            FuzzyInterval::new(f64::NAN, 0.0, 1.0, 2.0),
            Err(IntervalError::NotANumber)
        );
        assert_eq!(
            FuzzyInterval::new(0.0, 1.0, 2.0, POS),
            Err(IntervalError::MalformedInfinity)
        );
    }

    fn finite_interval() -> impl Strategy<Value = FuzzyInterval> {
        proptest::collection::vec(-50.0f64..50.0, 4).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            iv(v[0], v[1], v[2], v[3])
        })
    }

    proptest! {
        #[test]
        fn membership_shape(i in finite_interval(), x in -60.0f64..60.0) {
            let m = i.membership(x);
            prop_assert!((0.0..=1.0).contains(&m));
            if x >= i.b() && x <= i.c() {
                prop_assert_eq!(m, 1.0);
            } else {
                prop_assert!(m < 1.0);
            }
            // Monotone on each side of the plateau.
            let step = 0.37;
            if x + step <= i.b() {
                prop_assert!(i.membership(x + step) >= m);
            }
            if x >= i.c() {
                prop_assert!(i.membership(x + step) <= m);
            }
        }

        #[test]
        fn start_end_have_positive_duration(i in finite_interval(), dm in 0.01f64..1.0) {
            let s = i.start(dm).unwrap().duration().finite().unwrap();
            let e = i.end(dm).unwrap().duration().finite().unwrap();
            prop_assert!(s >= dm / 2.0 - 1e-12 && s > 0.0);
            prop_assert!(e >= dm / 2.0 - 1e-12 && e > 0.0);
        }

        #[test]
        fn before_keeps_left_edge(i in finite_interval()) {
            let b = i.before().unwrap();
            prop_assert_eq!(b.c(), i.a());
            prop_assert_eq!(b.d(), i.b());
            let a = i.after().unwrap();
            prop_assert_eq!(a.a(), i.c());
            prop_assert_eq!(a.b(), i.d());
        }
    }
}
