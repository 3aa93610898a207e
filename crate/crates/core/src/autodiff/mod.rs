//! Reverse-mode differentiation with smooth backward passes.
//!
//! Forward values are always the exact, crisp quantities. Backward passes
//! through the flat regions of membership and containment substitute the
//! derivative of a softplus surrogate, so gradients never vanish outright.

mod smooth;
mod tape;

pub use smooth::{
    membership_surrogate, rel_in_surrogate, smooth_membership, smooth_rel_in, DiffInterval,
    SmoothConfig, TapeAlgebra,
};
pub use tape::{DiffScalar, Gradients, Tape, TapeError};

/// `(1/beta) ln(1 + exp(beta x))`, without overflow for large `|beta x|`.
pub fn softplus(x: f64, beta: f64) -> f64 {
    let z = beta * x;
    (z.max(0.0) + (-z.abs()).exp().ln_1p()) / beta
}

/// Derivative of [`softplus`] in `x`: `sigmoid(beta x)`.
pub fn softplus_derivative(x: f64, beta: f64) -> f64 {
    sigmoid(beta * x)
}

/// Logistic function, stable on both tails.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
