//! Scalars the geometry code can run on: plain `f64`, or a forward-mode dual
//! number carrying partials with respect to a fixed set of parameters.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant (zero partials).
    fn cst(v: f64) -> Self;
    /// The real part; all branching is done on this.
    fn re(self) -> f64;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(self) -> f64 {
        self
    }
}

/// Dual number with `N` partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub eps: [f64; N],
}

impl<const N: usize> Dual<N> {
    /// The `i`-th seed variable with value `v`.
    pub fn var(v: f64, i: usize) -> Self {
        let mut eps = [0.0; N];
        eps[i] = 1.0;
        Dual { re: v, eps }
    }
}

impl<const N: usize> Real for Dual<N> {
    fn cst(v: f64) -> Self {
        Dual {
            re: v,
            eps: [0.0; N],
        }
    }
    fn re(self) -> f64 {
        self.re
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for (e, r) in self.eps.iter_mut().zip(rhs.eps) {
            *e += r;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for (e, r) in self.eps.iter_mut().zip(rhs.eps) {
            *e -= r;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Dual {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.re / rhs.re;
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = (self.eps[i] - q * rhs.eps[i]) / rhs.re;
        }
        Dual { re: q, eps }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for e in self.eps.iter_mut() {
            *e = -*e;
        }
        self
    }
}

/// Smaller of two values by real part; ties keep the first.
pub(crate) fn min_re<S: Real>(x: S, y: S) -> S {
    if y.re() < x.re() {
        y
    } else {
        x
    }
}

/// Larger of two values by real part; ties keep the first.
pub(crate) fn max_re<S: Real>(x: S, y: S) -> S {
    if y.re() > x.re() {
        y
    } else {
        x
    }
}
