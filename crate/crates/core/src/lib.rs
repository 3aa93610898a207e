//! Differentiable fuzzy temporal-interval logic.
//!
//! Events are grounded as trapezoidal fuzzy intervals; Allen-style relations
//! between them are containment ratios of exact intersection areas. A small
//! reverse-mode tape with smooth-backward operators lets a knowledge base of
//! temporal constraints be satisfied by gradient descent.

pub mod autodiff;
pub mod geometry;
pub mod interval;
pub mod kb;
pub mod logic;
pub mod relations;
pub mod scalar;
pub mod verify;

pub use interval::{ExtendedDuration, FuzzyInterval, IntervalError, DEFAULT_DELTA_MIN};
pub use logic::{Event, TNorm, TruthValue};
pub use relations::{Exact, Relation};
