//! Fuzzy Allen-style relations between trapezoidal intervals.
//!
//! Every relation is built from one primitive, the containment ratio
//! `A in B = |A ∩ B| / |A|`, composed with `Before`/`After`/`Start`/`End`
//! and a t-norm. The composition is written once against
//! [`IntervalAlgebra`] so that the exact evaluator here and the
//! differentiable evaluator on the tape share it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::intersection_area;
use crate::interval::{FuzzyInterval, IntervalError, DEFAULT_DELTA_MIN};
use crate::logic::TNorm;

/// Floor on `|A|` in the containment ratio, for point intervals.
pub const DURATION_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    In,
    Eq,
    Bf,
    Af,
    Mt,
    Ol,
    St,
    Dr,
    Fin,
}

impl Relation {
    pub const ALL: [Relation; 9] = [
        Relation::In,
        Relation::Eq,
        Relation::Bf,
        Relation::Af,
        Relation::Mt,
        Relation::Ol,
        Relation::St,
        Relation::Dr,
        Relation::Fin,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Relation::In => "in",
            Relation::Eq => "eq",
            Relation::Bf => "bf",
            Relation::Af => "af",
            Relation::Mt => "mt",
            Relation::Ol => "ol",
            Relation::St => "st",
            Relation::Dr => "dr",
            Relation::Fin => "fin",
        }
    }

    /// Which sides of `(left, right)` must be finite: `[left_start, left_end,
    /// right_start, right_end]`.
    pub fn finiteness(self) -> [bool; 4] {
        match self {
            Relation::In => [true, true, false, false],
            Relation::Bf => [true, true, true, false],
            Relation::Af => [true, true, false, true],
            Relation::Mt => [false, true, true, false],
            Relation::Eq | Relation::Ol | Relation::St | Relation::Dr | Relation::Fin => [true; 4],
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for Relation {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Relation::ALL
            .into_iter()
            .find(|r| r.keyword() == s)
            .ok_or(())
    }
}

/// The operations the relation definitions are written against.
pub trait IntervalAlgebra {
    type Truth: Copy;
    type Interval: Clone;

    /// `x in y`.
    fn contained_in(
        &mut self,
        x: &Self::Interval,
        y: &Self::Interval,
    ) -> Result<Self::Truth, IntervalError>;
    fn conj(&mut self, u: Self::Truth, v: Self::Truth) -> Self::Truth;
    fn before(&mut self, x: &Self::Interval) -> Result<Self::Interval, IntervalError>;
    fn after(&mut self, x: &Self::Interval) -> Result<Self::Interval, IntervalError>;
    fn start(&mut self, x: &Self::Interval) -> Result<Self::Interval, IntervalError>;
    fn end(&mut self, x: &Self::Interval) -> Result<Self::Interval, IntervalError>;
}

/// Evaluates `x rel y`.
///
/// `x af y` reads "x happens after y" and is grounded as `x in After(y)`,
/// mirroring `x bf y = x in Before(y)`.
pub fn relate<A: IntervalAlgebra>(
    alg: &mut A,
    rel: Relation,
    x: &A::Interval,
    y: &A::Interval,
) -> Result<A::Truth, IntervalError> {
    match rel {
        Relation::In => alg.contained_in(x, y),
        Relation::Eq => {
            let u = alg.contained_in(x, y)?;
            let v = alg.contained_in(y, x)?;
            Ok(alg.conj(u, v))
        }
        Relation::Bf => {
            let by = alg.before(y)?;
            alg.contained_in(x, &by)
        }
        Relation::Af => {
            let ay = alg.after(y)?;
            alg.contained_in(x, &ay)
        }
        Relation::Mt => {
            let ex = alg.end(x)?;
            let sy = alg.start(y)?;
            relate(alg, Relation::Eq, &ex, &sy)
        }
        Relation::St => {
            let (sx, sy, ex, ey) = edges(alg, x, y)?;
            let u = relate(alg, Relation::Eq, &sx, &sy)?;
            let v = relate(alg, Relation::Bf, &ex, &ey)?;
            Ok(alg.conj(u, v))
        }
        Relation::Dr => {
            let (sx, sy, ex, ey) = edges(alg, x, y)?;
            let u = relate(alg, Relation::Af, &sx, &sy)?;
            let v = relate(alg, Relation::Bf, &ex, &ey)?;
            Ok(alg.conj(u, v))
        }
        Relation::Fin => {
            let (sx, sy, ex, ey) = edges(alg, x, y)?;
            let u = relate(alg, Relation::Af, &sx, &sy)?;
            let v = relate(alg, Relation::Eq, &ex, &ey)?;
            Ok(alg.conj(u, v))
        }
        Relation::Ol => {
            let (sx, sy, ex, ey) = edges(alg, x, y)?;
            let u = relate(alg, Relation::Bf, &sx, &sy)?;
            let v = relate(alg, Relation::Bf, &sy, &ex)?;
            let w = relate(alg, Relation::Bf, &ex, &ey)?;
            let uv = alg.conj(u, v);
            Ok(alg.conj(uv, w))
        }
    }
}

type Edges<I> = (I, I, I, I);

fn edges<A: IntervalAlgebra>(
    alg: &mut A,
    x: &A::Interval,
    y: &A::Interval,
) -> Result<Edges<A::Interval>, IntervalError> {
    Ok((alg.start(x)?, alg.start(y)?, alg.end(x)?, alg.end(y)?))
}

/// Non-differentiable evaluation on plain intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact {
    pub delta_min: f64,
    pub t_norm: TNorm,
}

impl Default for Exact {
    fn default() -> Self {
        Exact {
            delta_min: DEFAULT_DELTA_MIN,
            t_norm: TNorm::Product,
        }
    }
}

impl IntervalAlgebra for Exact {
    type Truth = f64;
    type Interval = FuzzyInterval;

    fn contained_in(&mut self, x: &FuzzyInterval, y: &FuzzyInterval) -> Result<f64, IntervalError> {
        rel_in(x, y)
    }
    fn conj(&mut self, u: f64, v: f64) -> f64 {
        self.t_norm.apply(u, v)
    }
    fn before(&mut self, x: &FuzzyInterval) -> Result<FuzzyInterval, IntervalError> {
        x.before()
    }
    fn after(&mut self, x: &FuzzyInterval) -> Result<FuzzyInterval, IntervalError> {
        x.after()
    }
    fn start(&mut self, x: &FuzzyInterval) -> Result<FuzzyInterval, IntervalError> {
        x.start(self.delta_min)
    }
    fn end(&mut self, x: &FuzzyInterval) -> Result<FuzzyInterval, IntervalError> {
        x.end(self.delta_min)
    }
}

impl Exact {
    pub fn relate(
        &self,
        rel: Relation,
        x: &FuzzyInterval,
        y: &FuzzyInterval,
    ) -> Result<f64, IntervalError> {
        relate(&mut self.clone(), rel, x, y)
    }
}

/// Containment ratio `|A ∩ B| / |A|`, clamped to `[0, 1]`.
pub fn rel_in(a: &FuzzyInterval, b: &FuzzyInterval) -> Result<f64, IntervalError> {
    let dur = a
        .duration()
        .finite()
        .ok_or(IntervalError::InfiniteDuration)?;
    Ok(containment_ratio(intersection_area(a, b), dur))
}

pub(crate) fn containment_ratio(area: f64, duration: f64) -> f64 {
    (area / duration.max(DURATION_EPS)).clamp(0.0, 1.0)
}

macro_rules! relation_fns {
    ($($name:ident => $rel:expr),* $(,)?) => {$(
        #[doc = concat!("`A ", stringify!($name), " B` with default settings (product t-norm, delta_min 0.1).")]
        pub fn $name(a: &FuzzyInterval, b: &FuzzyInterval) -> Result<f64, IntervalError> {
            Exact::default().relate($rel, a, b)
        }
    )*};
}

relation_fns! {
    rel_eq => Relation::Eq,
    rel_bf => Relation::Bf,
    rel_af => Relation::Af,
    rel_mt => Relation::Mt,
    rel_ol => Relation::Ol,
    rel_st => Relation::St,
    rel_dr => Relation::Dr,
    rel_fin => Relation::Fin,
}
