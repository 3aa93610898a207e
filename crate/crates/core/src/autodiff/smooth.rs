use crate::geometry::{self, Trap};
use crate::interval::{FuzzyInterval, IntervalError};
use crate::logic::TNorm;
use crate::relations::{rel_in, IntervalAlgebra, DURATION_EPS};
use crate::scalar::Dual;

use super::tape::{DiffScalar, Tape};
use super::{sigmoid, softplus};

/// Softplus temperature for the backward surrogates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothConfig {
    pub beta: f64,
    pub trace_length: f64,
}

impl SmoothConfig {
    /// `beta = 1 / horizon`.
    pub fn from_horizon(horizon: f64) -> Self {
        SmoothConfig {
            beta: 1.0 / horizon,
            trace_length: horizon,
        }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        SmoothConfig { beta, ..self }
    }
}

/// A fuzzy interval whose finite parameters may live on a tape. Infinite
/// parameters are always constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffInterval {
    params: [DiffScalar; 4],
    left_infinite: bool,
    right_infinite: bool,
}

impl DiffInterval {
    pub fn constant(i: &FuzzyInterval) -> Self {
        DiffInterval {
            params: i.params().map(DiffScalar::constant),
            left_infinite: i.is_left_infinite(),
            right_infinite: i.is_right_infinite(),
        }
    }

    /// Every finite parameter becomes a fresh tape variable.
    pub fn variables(tape: &mut Tape, i: &FuzzyInterval) -> Self {
        let params = i.params().map(|v| {
            if v.is_finite() {
                tape.var(v)
            } else {
                DiffScalar::constant(v)
            }
        });
        DiffInterval {
            params,
            left_infinite: i.is_left_infinite(),
            right_infinite: i.is_right_infinite(),
        }
    }

    /// Validates the parameter values like [`FuzzyInterval::new`].
    pub fn from_params(params: [DiffScalar; 4]) -> Result<Self, IntervalError> {
        let v = FuzzyInterval::new(
            params[0].value(),
            params[1].value(),
            params[2].value(),
            params[3].value(),
        )?;
        let mut params = params;
        for p in params.iter_mut() {
            if !p.value().is_finite() {
                *p = DiffScalar::constant(p.value());
            }
        }
        Ok(DiffInterval {
            params,
            left_infinite: v.is_left_infinite(),
            right_infinite: v.is_right_infinite(),
        })
    }

    pub fn params(&self) -> [DiffScalar; 4] {
        self.params
    }

    /// The plain interval carried by the parameter values.
    pub fn value(&self) -> FuzzyInterval {
        let [a, b, c, d] = self.params.map(|p| p.value());
        FuzzyInterval::new(a, b, c, d)
            .expect("DiffInterval parameters are validated on construction")
    }

    pub fn is_left_infinite(&self) -> bool {
        self.left_infinite
    }

    pub fn is_right_infinite(&self) -> bool {
        self.right_infinite
    }

    pub fn before(&self) -> Result<Self, IntervalError> {
        self.value().before()?;
        let neg = DiffScalar::constant(f64::NEG_INFINITY);
        Ok(DiffInterval {
            params: [neg, neg, self.params[0], self.params[1]],
            left_infinite: true,
            right_infinite: false,
        })
    }

    pub fn after(&self) -> Result<Self, IntervalError> {
        self.value().after()?;
        let pos = DiffScalar::constant(f64::INFINITY);
        Ok(DiffInterval {
            params: [self.params[2], self.params[3], pos, pos],
            left_infinite: false,
            right_infinite: true,
        })
    }

    pub fn start(&self, tape: &mut Tape, delta_min: f64) -> Result<Self, IntervalError> {
        let exact = self.value().start(delta_min)?;
        Ok(edge_triangle_on_tape(
            tape,
            &exact,
            self.params[0],
            self.params[1],
            delta_min,
        ))
    }

    pub fn end(&self, tape: &mut Tape, delta_min: f64) -> Result<Self, IntervalError> {
        let exact = self.value().end(delta_min)?;
        Ok(edge_triangle_on_tape(
            tape,
            &exact,
            self.params[2],
            self.params[3],
            delta_min,
        ))
    }

    /// `((c - b) + (d - a)) / 2`.
    pub fn duration(&self, tape: &mut Tape) -> Result<DiffScalar, IntervalError> {
        let dur = self
            .value()
            .duration()
            .finite()
            .ok_or(IntervalError::InfiniteDuration)?;
        let [a, b, c, d] = self.params;
        Ok(tape.custom(dur, &[(a, -0.5), (b, -0.5), (c, 0.5), (d, 0.5)]))
    }
}

/// Records the triangle built on edge `[lo, hi]`; values come from `exact`.
fn edge_triangle_on_tape(
    tape: &mut Tape,
    exact: &FuzzyInterval,
    lo: DiffScalar,
    hi: DiffScalar,
    delta_min: f64,
) -> DiffInterval {
    let half_width = (hi.value() - lo.value()) / 2.0;
    // delta = max(half_width, delta_min) only moves with the edge when wider.
    let (dlo, dhi) = if half_width > delta_min {
        (-0.5, 0.5)
    } else {
        (0.0, 0.0)
    };
    let [p0, p1, _, p3] = exact.params();
    let left = tape.custom(p0, &[(lo, 0.5 - dlo / 2.0), (hi, 0.5 - dhi / 2.0)]);
    let centre = tape.custom(p1, &[(lo, 0.5), (hi, 0.5)]);
    let right = tape.custom(p3, &[(lo, 0.5 + dlo / 2.0), (hi, 0.5 + dhi / 2.0)]);
    DiffInterval {
        params: [left, centre, centre, right],
        left_infinite: false,
        right_infinite: false,
    }
}

/// Partials `[d/dx, d/da, d/db, d/dc, d/dd]` of the membership surrogate.
fn membership_partials(p: [f64; 4], x: f64, beta: f64) -> [f64; 5] {
    let [a, b, c, d] = p;
    if x <= a {
        let s = sigmoid(beta * (x - a));
        [s, -s, 0.0, 0.0, 0.0]
    } else if x <= b {
        let w = b - a;
        [1.0 / w, (x - b) / (w * w), -(x - a) / (w * w), 0.0, 0.0]
    } else if x <= c {
        let (l, r) = (b - x, x - c);
        if l >= r {
            let s = sigmoid(beta * l);
            [-s, 0.0, s, 0.0, 0.0]
        } else {
            let s = sigmoid(beta * r);
            [s, 0.0, 0.0, -s, 0.0]
        }
    } else if x <= d {
        let w = d - c;
        [-1.0 / w, 0.0, 0.0, (d - x) / (w * w), (x - c) / (w * w)]
    } else {
        let s = sigmoid(beta * (d - x));
        [-s, 0.0, 0.0, 0.0, s]
    }
}

/// The function whose derivatives [`smooth_membership`] records: softplus
/// of the signed distance to the support or plateau on flat regions, the
/// crisp ramp elsewhere. Never used as a forward value.
pub fn membership_surrogate(i: &FuzzyInterval, x: f64, beta: f64) -> f64 {
    let [a, b, c, d] = i.params();
    if x <= a {
        softplus(x - a, beta)
    } else if x <= b {
        i.membership(x)
    } else if x <= c {
        softplus((b - x).max(x - c), beta)
    } else if x <= d {
        i.membership(x)
    } else {
        softplus(d - x, beta)
    }
}

/// Membership degree of `x` in `i`: exact forward, smooth backward.
pub fn smooth_membership(
    tape: &mut Tape,
    i: &DiffInterval,
    x: DiffScalar,
    cfg: SmoothConfig,
) -> DiffScalar {
    let value = i.value();
    let g = membership_partials(value.params(), x.value(), cfg.beta);
    let [a, b, c, d] = i.params;
    tape.custom(
        value.membership(x.value()),
        &[(x, g[0]), (a, g[1]), (b, g[2]), (c, g[3]), (d, g[4])],
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ContainmentRegime {
    /// `A` ends before `B` starts.
    DisjointLeft,
    /// `B` ends before `A` starts.
    DisjointRight,
    /// Strictly inside on all four parameters.
    Inside,
    Overlap,
}

/// Decided on the true parameters, infinities included. Finitization is an
/// area device only: a semi-infinite container puts an infinite term in the
/// inside-branch argument, so that branch's slope is exactly zero.
fn containment_regime(x: &[f64; 4], y: &[f64; 4]) -> ContainmentRegime {
    let [a, b, c, d] = *x;
    let [a2, b2, c2, d2] = *y;
    if d <= a2 {
        ContainmentRegime::DisjointLeft
    } else if d2 <= a {
        ContainmentRegime::DisjointRight
    } else if a > a2 && b > b2 && c < c2 && d < d2 {
        ContainmentRegime::Inside
    } else {
        ContainmentRegime::Overlap
    }
}

/// The function whose derivatives [`smooth_rel_in`] records. Agrees with
/// `rel_in` on partially overlapping pairs.
pub fn rel_in_surrogate(
    a: &FuzzyInterval,
    b: &FuzzyInterval,
    beta: f64,
) -> Result<f64, IntervalError> {
    let exact = rel_in(a, b)?;
    let (x, y) = (a.params(), b.params());
    Ok(match containment_regime(&x, &y) {
        ContainmentRegime::DisjointLeft => softplus(x[3] - y[0], beta),
        ContainmentRegime::DisjointRight => softplus(y[3] - x[0], beta),
        ContainmentRegime::Inside => softplus(y[0] - x[0] + x[3] - y[3], beta),
        ContainmentRegime::Overlap => exact,
    })
}

/// `a in b`: exact forward, smooth backward.
pub fn smooth_rel_in(
    tape: &mut Tape,
    a: &DiffInterval,
    b: &DiffInterval,
    cfg: SmoothConfig,
) -> Result<DiffScalar, IntervalError> {
    let (av, bv) = (a.value(), b.value());
    let value = rel_in(&av, &bv)?;
    let (x, y) = (av.params(), bv.params());
    let pa = a.params;
    let pb = b.params;
    let beta = cfg.beta;
    let out = match containment_regime(&x, &y) {
        ContainmentRegime::DisjointLeft => {
            let s = sigmoid(beta * (x[3] - y[0]));
            tape.custom(value, &[(pa[3], s), (pb[0], -s)])
        }
        ContainmentRegime::DisjointRight => {
            let s = sigmoid(beta * (y[3] - x[0]));
            tape.custom(value, &[(pb[3], s), (pa[0], -s)])
        }
        ContainmentRegime::Inside => {
            let s = sigmoid(beta * (y[0] - x[0] + x[3] - y[3]));
            tape.custom(value, &[(pa[0], -s), (pa[3], s), (pb[0], s), (pb[3], -s)])
        }
        ContainmentRegime::Overlap => {
            let g = ratio_partials(&av, &bv);
            let mut partials = [(DiffScalar::constant(0.0), 0.0); 8];
            for k in 0..4 {
                partials[k] = (pa[k], g[k]);
                partials[k + 4] = (pb[k], g[k + 4]);
            }
            tape.custom(value, &partials)
        }
    };
    Ok(out)
}

/// Analytic partials of `|A ∩ B| / |A|` in the eight parameters.
fn ratio_partials(a: &FuzzyInterval, b: &FuzzyInterval) -> [f64; 8] {
    let seed = |i: &FuzzyInterval, offset: usize| -> Trap<Dual<8>> {
        let mut params = [Dual::<8>::var(0.0, 0); 4];
        for (k, v) in i.params().into_iter().enumerate() {
            params[k] = if v.is_finite() {
                Dual::var(v, offset + k)
            } else {
                Dual {
                    re: v,
                    eps: [0.0; 8],
                }
            };
        }
        Trap {
            params,
            left_infinite: i.is_left_infinite(),
            right_infinite: i.is_right_infinite(),
        }
    };
    let ta = seed(a, 0);
    let tb = seed(b, 4);
    let area = geometry::area(&ta, &tb);
    let [pa, pb, pc, pd] = ta.params;
    let dur = ((pc - pb) + (pd - pa))
        / Dual {
            re: 2.0,
            eps: [0.0; 8],
        };
    let ratio = if dur.re < DURATION_EPS {
        area / Dual {
            re: DURATION_EPS,
            eps: [0.0; 8],
        }
    } else {
        area / dur
    };
    ratio.eps
}

/// Relation evaluation on a tape: exact values, smooth gradients.
pub struct TapeAlgebra<'t> {
    pub tape: &'t mut Tape,
    pub smooth: SmoothConfig,
    pub delta_min: f64,
    pub t_norm: TNorm,
}

impl<'t> TapeAlgebra<'t> {
    pub fn new(tape: &'t mut Tape, smooth: SmoothConfig, delta_min: f64) -> Self {
        TapeAlgebra {
            tape,
            smooth,
            delta_min,
            t_norm: TNorm::Product,
        }
    }
}

impl IntervalAlgebra for TapeAlgebra<'_> {
    type Truth = DiffScalar;
    type Interval = DiffInterval;

    fn contained_in(
        &mut self,
        x: &DiffInterval,
        y: &DiffInterval,
    ) -> Result<DiffScalar, IntervalError> {
        smooth_rel_in(self.tape, x, y, self.smooth)
    }

    fn conj(&mut self, u: DiffScalar, v: DiffScalar) -> DiffScalar {
        match self.t_norm {
            TNorm::Product => self.tape.mul(u, v),
            TNorm::Minimum => self.tape.min(u, v),
            TNorm::Lukasiewicz => {
                let s = self.tape.add(u, v);
                let s = self.tape.add_const(s, -1.0);
                self.tape.max(s, DiffScalar::constant(0.0))
            }
        }
    }

    fn before(&mut self, x: &DiffInterval) -> Result<DiffInterval, IntervalError> {
        x.before()
    }

    fn after(&mut self, x: &DiffInterval) -> Result<DiffInterval, IntervalError> {
        x.after()
    }

    fn start(&mut self, x: &DiffInterval) -> Result<DiffInterval, IntervalError> {
        x.start(self.tape, self.delta_min)
    }

    fn end(&mut self, x: &DiffInterval) -> Result<DiffInterval, IntervalError> {
        x.end(self.tape, self.delta_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{relate, Exact, Relation};
    use proptest::prelude::*;

    const NEG: f64 = f64::NEG_INFINITY;
    const POS: f64 = f64::INFINITY;

    fn iv(a: f64, b: f64, c: f64, d: f64) -> FuzzyInterval {
        FuzzyInterval::new(a, b, c, d).unwrap()
    }

    fn cfg(beta: f64) -> SmoothConfig {
        SmoothConfig {
            beta,
            trace_length: 1.0 / beta,
        }
    }

    fn membership_grad(i: FuzzyInterval, x: f64, beta: f64) -> (f64, f64) {
        let mut t = Tape::new();
        let di = DiffInterval::constant(&i);
        let xv = t.var(x);
        let m = smooth_membership(&mut t, &di, xv, cfg(beta));
        (m.value(), t.backward(m).unwrap().get(&xv))
    }

    #[test]
    fn membership_examples() {
        let i = iv(1.0, 2.0, 5.0, 7.0);
        let (v, g) = membership_grad(i, 3.0, 1.0);
        assert_eq!(v, 1.0);
        assert!((g + sigmoid(-1.0)).abs() < 1e-15);
        let (v, g) = membership_grad(i, 0.0, 1.0);
        assert_eq!(v, 0.0);
        assert!((g - sigmoid(-1.0)).abs() < 1e-15);
        let (v, g) = membership_grad(i, 1.5, 1.0);
        assert_eq!(v, 0.5);
        assert_eq!(g, 1.0);
        // Right of support: pulled back to the left.
        let (v, g) = membership_grad(i, 9.0, 1.0);
        assert_eq!(v, 0.0);
        assert!(g < 0.0);
    }

    #[test]
    fn membership_matches_surrogate_differences() {
        let i = iv(1.0, 2.0, 5.0, 7.0);
        let h = 1e-5;
        for x in [-3.0, 0.5, 1.5, 2.7, 4.2, 6.0, 8.5] {
            let (_, g) = membership_grad(i, x, 0.5);
            let fd = (membership_surrogate(&i, x + h, 0.5) - membership_surrogate(&i, x - h, 0.5))
                / (2.0 * h);
            assert!((g - fd).abs() < 1e-6, "x={x}: {g} vs {fd}");
        }
    }

    #[test]
    fn membership_parameter_partials() {
        let mut t = Tape::new();
        let di = DiffInterval::variables(&mut t, &iv(1.0, 2.0, 5.0, 7.0));
        let x = DiffScalar::constant(0.0);
        let m = smooth_membership(&mut t, &di, x, cfg(1.0));
        let g = t.backward(m).unwrap();
        assert!(g.get(&di.params()[0]) < 0.0);
        assert_eq!(g.get(&di.params()[3]), 0.0);
    }

    #[test]
    fn ramp_parameter_partials_match_differences() {
        let i = iv(1.0, 2.0, 5.0, 7.0);
        let h = 1e-6;
        for x in [1.4, 5.5, 6.8] {
            let mut t = Tape::new();
            let di = DiffInterval::variables(&mut t, &i);
            let m = smooth_membership(&mut t, &di, DiffScalar::constant(x), cfg(1.0));
            let g = t.backward(m).unwrap();
            for k in 0..4 {
                let bump = |s: f64| {
                    let mut p = i.params();
                    p[k] += s;
                    iv(p[0], p[1], p[2], p[3]).membership(x)
                };
                let fd = (bump(h) - bump(-h)) / (2.0 * h);
                assert!((g.get(&di.params()[k]) - fd).abs() < 1e-6, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn semi_infinite_membership_plateau() {
        let i = iv(NEG, NEG, 3.0, 4.0);
        let (v, g) = membership_grad(i, -50.0, 1.0);
        assert_eq!(v, 1.0);
        assert!(g > 0.0);
        let (_, g) = membership_grad(iv(3.0, 4.0, POS, POS), 50.0, 1.0);
        assert!(g < 0.0);
    }

    fn rel_in_grads(a: FuzzyInterval, b: FuzzyInterval, beta: f64) -> (f64, [f64; 4], [f64; 4]) {
        let mut t = Tape::new();
        let da = DiffInterval::variables(&mut t, &a);
        let db = DiffInterval::variables(&mut t, &b);
        let r = smooth_rel_in(&mut t, &da, &db, cfg(beta)).unwrap();
        let g = t.backward(r).unwrap();
        (
            r.value(),
            da.params().map(|p| g.get(&p)),
            db.params().map(|p| g.get(&p)),
        )
    }

    #[test]
    fn rel_in_disjoint_attracts_edges() {
        let (v, ga, gb) = rel_in_grads(iv(0.0, 0.0, 1.0, 1.0), iv(5.0, 5.0, 6.0, 6.0), 0.1);
        assert_eq!(v, 0.0);
        assert!(ga[3] > 0.0);
        assert!(gb[0] < 0.0);
    }

    #[test]
    fn rel_in_inside_partials() {
        let (v, ga, _) = rel_in_grads(iv(2.0, 3.0, 4.0, 5.0), iv(0.0, 1.0, 6.0, 7.0), 0.1);
        assert_eq!(v, 1.0);
        assert!(ga[0] < 0.0);
        assert!(ga[3] > 0.0);
    }

    #[test]
    fn semi_infinite_container_has_flat_inside_branch() {
        // An infinite edge makes the inside argument -inf.
        let a = iv(2.0, 3.0, 4.0, 5.0);
        for b in [iv(NEG, NEG, 6.0, 7.0), iv(0.0, 1.0, POS, POS)] {
            let mut t = Tape::new();
            let da = DiffInterval::variables(&mut t, &a);
            let db = DiffInterval::constant(&b);
            let r = smooth_rel_in(&mut t, &da, &db, cfg(0.1)).unwrap();
            assert_eq!(r.value(), 1.0);
            let g = t.backward(r).unwrap();
            assert!(da.params().iter().all(|p| g.get(p) == 0.0));
            assert_eq!(rel_in_surrogate(&a, &b, 0.1).unwrap(), 0.0);
        }
        // Disjoint from a left-infinite container: still attracted back.
        let (v, ga, _) = rel_in_grads(iv(8.0, 9.0, 10.0, 11.0), iv(NEG, NEG, 6.0, 7.0), 0.1);
        assert_eq!(v, 0.0);
        assert!(ga[0] < 0.0);
    }

    #[test]
    fn rel_in_overlap_matches_exact_differences() {
        let a = iv(0.0, 2.0, 4.0, 6.0);
        let b = iv(1.0, 3.0, 5.5, 8.0);
        let (v, ga, gb) = rel_in_grads(a, b, 1.0);
        assert_eq!(v, rel_in(&a, &b).unwrap());
        let h = 1e-6;
        let bump = |p: [f64; 4], k: usize, s: f64| {
            let mut q = p;
            q[k] += s;
            iv(q[0], q[1], q[2], q[3])
        };
        for k in 0..4 {
            let fd = (rel_in(&bump(a.params(), k, h), &b).unwrap()
                - rel_in(&bump(a.params(), k, -h), &b).unwrap())
                / (2.0 * h);
            assert!((ga[k] - fd).abs() < 1e-6, "a[{k}]: {} vs {fd}", ga[k]);
            let fd = (rel_in(&a, &bump(b.params(), k, h)).unwrap()
                - rel_in(&a, &bump(b.params(), k, -h)).unwrap())
                / (2.0 * h);
            assert!((gb[k] - fd).abs() < 1e-6, "b[{k}]: {} vs {fd}", gb[k]);
        }
    }

    #[test]
    fn touching_pair_still_has_gradient() {
        let (v, ga, gb) = rel_in_grads(iv(0.0, 0.0, 1.0, 1.0), iv(1.0, 1.0, 2.0, 2.0), 1.0);
        assert_eq!(v, 0.0);
        assert!(ga[3] > 0.0 && gb[0] < 0.0);
    }

    #[test]
    fn start_end_on_tape() {
        let mut t = Tape::new();
        let i = iv(2.0, 3.0, 4.0, 6.0);
        let di = DiffInterval::variables(&mut t, &i);
        let s = di.start(&mut t, 0.1).unwrap();
        let e = di.end(&mut t, 0.1).unwrap();
        assert_eq!(s.value(), i.start(0.1).unwrap());
        assert_eq!(e.value(), i.end(0.1).unwrap());
        // Start = (2.25, 2.5, 2.5, 2.75): left vertex is (3a + b) / 4.
        let g = t.backward(s.params()[0]).unwrap();
        assert_eq!(g.get(&di.params()[0]), 0.75);
        assert_eq!(g.get(&di.params()[1]), 0.25);
        let dur = di.duration(&mut t).unwrap();
        assert_eq!(dur.value(), 2.5);
        assert_eq!(t.backward(dur).unwrap().get(&di.params()[3]), 0.5);
    }

    #[test]
    fn tape_algebra_matches_exact_forward() {
        let x = iv(0.0, 1.0, 3.0, 4.5);
        let y = iv(2.0, 2.5, 6.0, 9.0);
        for rel in Relation::ALL {
            let want = Exact::default().relate(rel, &x, &y).unwrap();
            let mut t = Tape::new();
            let dx = DiffInterval::variables(&mut t, &x);
            let dy = DiffInterval::variables(&mut t, &y);
            let mut alg = TapeAlgebra::new(&mut t, cfg(0.1), 0.1);
            let got = relate(&mut alg, rel, &dx, &dy).unwrap();
            assert_eq!(got.value().to_bits(), want.to_bits(), "{rel}");
        }
    }

    #[test]
    fn infinite_duration_is_an_error() {
        let mut t = Tape::new();
        let a = DiffInterval::constant(&iv(NEG, NEG, 1.0, 2.0));
        let b = DiffInterval::constant(&iv(0.0, 1.0, 2.0, 3.0));
        assert_eq!(
            smooth_rel_in(&mut t, &a, &b, cfg(1.0)),
            Err(IntervalError::InfiniteDuration)
        );
    }

    fn trapezoid() -> impl Strategy<Value = FuzzyInterval> {
        proptest::collection::vec(0.0f64..30.0, 4).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            iv(v[0], v[1], v[2], v[3])
        })
    }

    proptest! {
        #[test]
        fn forward_is_exact(x in trapezoid(), y in trapezoid(), p in -5.0f64..35.0) {
            let mut t = Tape::new();
            let dx = DiffInterval::variables(&mut t, &x);
            let dy = DiffInterval::variables(&mut t, &y);
            let r = smooth_rel_in(&mut t, &dx, &dy, cfg(0.05)).unwrap();
            prop_assert_eq!(r.value().to_bits(), rel_in(&x, &y).unwrap().to_bits());
            let pv = t.var(p);
            let m = smooth_membership(&mut t, &dx, pv, cfg(0.05));
            prop_assert_eq!(m.value().to_bits(), x.membership(p).to_bits());
        }

        #[test]
        fn backward_deterministic(x in trapezoid(), y in trapezoid()) {
            let mut t = Tape::new();
            let dx = DiffInterval::variables(&mut t, &x);
            let dy = DiffInterval::variables(&mut t, &y);
            let r = smooth_rel_in(&mut t, &dx, &dy, cfg(0.05)).unwrap();
            prop_assert_eq!(t.backward(r).unwrap(), t.backward(r).unwrap());
        }

        #[test]
        fn gradients_finite(x in trapezoid(), y in trapezoid()) {
            let (_, ga, gb) = rel_in_grads(x, y, 0.05);
            prop_assert!(ga.iter().chain(gb.iter()).all(|g| g.is_finite()));
        }

        #[test]
        fn membership_gradient_never_vanishes_within_horizon(off in -100.0f64..100.0) {
            let i = iv(0.0, 1.0, 3.0, 4.0);
            let x = if off < 0.0 { off } else { 4.0 + off };
            let (_, g) = membership_grad(i, x, 0.01);
            prop_assert!(g.abs() >= sigmoid(-1.0) - 1e-12);
        }
    }
}
