//! Fuzzy connectives, aggregation and the event predicates `Happ` and
//! `Active`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::FuzzyInterval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("truth value {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// A degree of truth in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TruthValue(f64);

impl TruthValue {
    pub const TRUE: TruthValue = TruthValue(1.0);
    pub const FALSE: TruthValue = TruthValue(0.0);

    pub fn new(v: f64) -> Result<Self, LogicError> {
        if (0.0..=1.0).contains(&v) {
            Ok(TruthValue(v))
        } else {
            Err(LogicError::OutOfRange(v))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn clamped(v: f64) -> Self {
        if v.is_nan() {
            TruthValue(0.0)
        } else {
            TruthValue(v.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<TruthValue> for f64 {
    fn from(t: TruthValue) -> f64 {
        t.0
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Triangular norm used for conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    /// `u v`
    #[default]
    Product,
    /// `min(u, v)`
    Minimum,
    /// `max(0, u + v - 1)`
    Lukasiewicz,
}

impl TNorm {
    pub fn apply(self, u: f64, v: f64) -> f64 {
        match self {
            TNorm::Product => u * v,
            TNorm::Minimum => u.min(v),
            TNorm::Lukasiewicz => (u + v - 1.0).max(0.0),
        }
    }

    /// The De Morgan dual under standard negation.
    pub fn co_apply(self, u: f64, v: f64) -> f64 {
        1.0 - self.apply(1.0 - u, 1.0 - v)
    }
}

impl std::str::FromStr for TNorm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "product" => Ok(TNorm::Product),
            "minimum" | "godel" => Ok(TNorm::Minimum),
            "lukasiewicz" => Ok(TNorm::Lukasiewicz),
            other => Err(format!("unknown t-norm `{other}`")),
        }
    }
}

/// Product t-norm.
pub fn t_norm(u: TruthValue, v: TruthValue) -> TruthValue {
    TruthValue(TNorm::Product.apply(u.0, v.0))
}

/// Standard negation `1 - u`.
pub fn negate(u: TruthValue) -> TruthValue {
    TruthValue(1.0 - u.0)
}

/// Probabilistic sum `1 - (1 - u)(1 - v)`.
pub fn disjunction(u: TruthValue, v: TruthValue) -> TruthValue {
    TruthValue(TNorm::Product.co_apply(u.0, v.0))
}

/// Reichenbach implication `1 - u + u v`.
pub fn implication(u: TruthValue, v: TruthValue) -> TruthValue {
    TruthValue(1.0 - u.0 + u.0 * v.0)
}

/// Smooth equality `exp(-|u - v|)`.
pub fn approx_eq(u: f64, v: f64) -> TruthValue {
    TruthValue::clamped((-(u - v).abs()).exp())
}

/// Universal quantification over a finite batch: the product of its members.
pub fn aggregate_forall<I: IntoIterator<Item = TruthValue>>(vs: I) -> TruthValue {
    TruthValue(vs.into_iter().map(|t| t.0).product())
}

/// A grounded event: when it is active, and whether it happened at all.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub label: String,
    pub interval: FuzzyInterval,
    happ: TruthValue,
}

impl Event {
    pub fn new(label: impl Into<String>, interval: FuzzyInterval, happ: TruthValue) -> Self {
        Event {
            label: label.into(),
            interval,
            happ,
        }
    }
}

pub fn happ(e: &Event) -> TruthValue {
    e.happ
}

/// Degree to which the event is running at time step `i`.
pub fn active(e: &Event, i: u64) -> TruthValue {
    t_norm(membership_at(&e.interval, i as f64), e.happ)
}

pub fn membership_at(interval: &FuzzyInterval, x: f64) -> TruthValue {
    TruthValue(interval.membership(x))
}
