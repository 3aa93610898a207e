//! Exact area of the intersection of two trapezoidal membership regions.
//!
//! The region under a trapezoid is convex, so `A ∩ B` is a convex polygon
//! with at most six vertices. Its vertices are collected from three sources
//! (bottom edge, top edge, crossings of the slanted sides), ordered
//! counter-clockwise and fed to the shoelace formula.
//!
//! Everything here is generic over [`Real`] so the same procedure yields
//! analytic partial derivatives when run on dual numbers.

use crate::interval::{FuzzyInterval, IntervalError};
use crate::scalar::{max_re, min_re, Real};

/// Coordinates closer than this are treated as the same vertex.
pub const VERTEX_MERGE_TOL: f64 = 1e-9;

/// Slack on the `y ∈ [0, 1]` test for side vertices.
const SIDE_Y_TOL: f64 = 1e-12;

/// A point of the time/membership plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint<S = f64> {
    pub x: S,
    pub y: S,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanePoint { x, y }
    }
}

/// The supporting line of one side of a trapezoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeLine<S = f64> {
    /// `y = (x - p) / (q - p)`: zero at `x = p`, one at `x = q`.
    Slanted { p: S, q: S },
    /// `x = p`, the side of a crisp edge.
    Vertical { p: S },
}

impl<S: Real> EdgeLine<S> {
    /// Line reaching membership 0 at `zero` and 1 at `one`.
    pub fn through(zero: S, one: S) -> Self {
        if zero.re() == one.re() {
            EdgeLine::Vertical { p: zero }
        } else {
            EdgeLine::Slanted { p: zero, q: one }
        }
    }

    /// Left side `L` of `(a, b, c, d)`.
    pub fn left_side(params: &[S; 4]) -> Self {
        Self::through(params[0], params[1])
    }

    /// Right side `R` of `(a, b, c, d)`.
    pub fn right_side(params: &[S; 4]) -> Self {
        Self::through(params[3], params[2])
    }
}

/// Crossing point of two edge lines; `None` when parallel or identical.
pub fn line_intersection<S: Real>(l1: EdgeLine<S>, l2: EdgeLine<S>) -> Option<PlanePoint<S>> {
    match (l1, l2) {
        (EdgeLine::Vertical { .. }, EdgeLine::Vertical { .. }) => None,
        (EdgeLine::Vertical { p: v }, EdgeLine::Slanted { p, q })
        | (EdgeLine::Slanted { p, q }, EdgeLine::Vertical { p: v }) => Some(PlanePoint {
            x: v,
            y: (v - p) / (q - p),
        }),
        (EdgeLine::Slanted { p: p1, q: q1 }, EdgeLine::Slanted { p: p2, q: q2 }) => {
            // With a = p1, b = q1, a' = p2, b' = q2:
            //   x = (a b' - b a') / (a - b + b' - a'),  y = (a - a') / (a - b + b' - a')
            // Grouped by line so identical or parallel lines give exactly 0.
            let den = (q2 - p2) - (q1 - p1);
            if den.re() == 0.0 {
                return None;
            }
            Some(PlanePoint {
                x: (p1 * q2 - q1 * p2) / den,
                y: (p1 - p2) / den,
            })
        }
    }
}

/// Shoelace area of a counter-clockwise polygon; fewer than 3 points give 0.
pub fn shoelace_area(vs: &[PlanePoint]) -> f64 {
    shoelace(vs)
}

pub(crate) fn shoelace<S: Real>(vs: &[PlanePoint<S>]) -> S {
    if vs.len() < 3 {
        return S::cst(0.0);
    }
    let mut acc = S::cst(0.0);
    for (i, p) in vs.iter().enumerate() {
        let q = vs[(i + 1) % vs.len()];
        acc = acc + (p.y + q.y) * (p.x - q.x);
    }
    let half = acc / S::cst(2.0);
    if half.re() < 0.0 {
        -half
    } else {
        half
    }
}

/// A trapezoid whose parameters may be duals. Infinite parameters are always
/// constants.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Trap<S> {
    pub params: [S; 4],
    pub left_infinite: bool,
    pub right_infinite: bool,
}

impl From<&FuzzyInterval> for Trap<f64> {
    fn from(i: &FuzzyInterval) -> Self {
        Trap {
            params: i.params(),
            left_infinite: i.is_left_infinite(),
            right_infinite: i.is_right_infinite(),
        }
    }
}

/// Replaces infinite sides by finite ramps lying outside the other
/// interval's support, so the intersection area is unchanged.
///
/// A `(-inf, -inf)` pair becomes `(m - 2, m - 1)` and a `(+inf, +inf)` pair
/// becomes `(M + 1, M + 2)`, where `m`/`M` are the smallest/largest finite
/// parameters of the two intervals.
pub fn finitize_pair(
    a: &FuzzyInterval,
    b: &FuzzyInterval,
) -> Result<(FuzzyInterval, FuzzyInterval), IntervalError> {
    let (x, y) = finitize(&Trap::from(a), &Trap::from(b))?;
    // Finitized parameters stay ordered, so construction cannot fail.
    let build = |p: [f64; 4]| FuzzyInterval::new(p[0], p[1], p[2], p[3]).expect("finitized");
    Ok((build(x), build(y)))
}

pub(crate) fn finitize<S: Real>(
    x: &Trap<S>,
    y: &Trap<S>,
) -> Result<([S; 4], [S; 4]), IntervalError> {
    if (x.left_infinite && y.left_infinite) || (x.right_infinite && y.right_infinite) {
        return Err(IntervalError::FacingInfinite);
    }
    let finite = || {
        x.params
            .iter()
            .chain(y.params.iter())
            .map(|v| v.re())
            .filter(|v| v.is_finite())
    };
    let lo = finite().fold(f64::INFINITY, f64::min);
    let hi = finite().fold(f64::NEG_INFINITY, f64::max);
    let fix = |t: &Trap<S>| {
        let mut p = t.params;
        if t.left_infinite {
            p[0] = S::cst(lo - 2.0);
            p[1] = S::cst(lo - 1.0);
        }
        if t.right_infinite {
            p[2] = S::cst(hi + 1.0);
            p[3] = S::cst(hi + 2.0);
        }
        p
    };
    Ok((fix(x), fix(y)))
}

/// Orders a pair so that the interval that starts first comes first.
/// Ties are broken on the remaining parameters, which makes the result
/// independent of argument order.
fn order_pair<S: Real>(x: [S; 4], y: [S; 4]) -> ([S; 4], [S; 4]) {
    for (u, v) in x.iter().zip(y.iter()) {
        match u.re().total_cmp(&v.re()) {
            std::cmp::Ordering::Less => return (x, y),
            std::cmp::Ordering::Greater => return (y, x),
            std::cmp::Ordering::Equal => {}
        }
    }
    (x, y)
}

fn push_unique<S: Real>(pts: &mut Vec<PlanePoint<S>>, p: PlanePoint<S>) {
    let dup = pts.iter().any(|q| {
        (q.x.re() - p.x.re()).abs() <= VERTEX_MERGE_TOL
            && (q.y.re() - p.y.re()).abs() <= VERTEX_MERGE_TOL
    });
    if !dup {
        pts.push(p);
    }
}

/// Vertices of `x ∩ y` for finite trapezoids, counter-clockwise.
pub(crate) fn vertices_finite<S: Real>(x: [S; 4], y: [S; 4]) -> Vec<PlanePoint<S>> {
    let (left, right) = order_pair(x, y);
    let [_, b, c, d] = left;
    let [a2, b2, c2, d2] = right;
    if d.re() <= a2.re() {
        return Vec::new();
    }
    let zero = S::cst(0.0);
    let one = S::cst(1.0);
    let mut pts = Vec::with_capacity(8);

    // Bottom: (a', 0) always, then (min(d, d'), 0).
    push_unique(&mut pts, PlanePoint { x: a2, y: zero });
    push_unique(
        &mut pts,
        PlanePoint {
            x: min_re(d, d2),
            y: zero,
        },
    );

    // Top: none, one or two points on y = 1.
    if c.re() < b2.re() || b.re() > c2.re() {
    } else if b2.re() == c.re() {
        push_unique(&mut pts, PlanePoint { x: c, y: one });
    } else if b.re() == c2.re() {
        push_unique(&mut pts, PlanePoint { x: b, y: one });
    } else {
        push_unique(
            &mut pts,
            PlanePoint {
                x: max_re(b, b2),
                y: one,
            },
        );
        push_unique(
            &mut pts,
            PlanePoint {
                x: min_re(c, c2),
                y: one,
            },
        );
    }

    // Sides: crossings of the four side lines that fall inside the band.
    let sides_left = [EdgeLine::left_side(&left), EdgeLine::right_side(&left)];
    let sides_right = [EdgeLine::left_side(&right), EdgeLine::right_side(&right)];
    for l1 in sides_left {
        for l2 in sides_right {
            let Some(mut p) = line_intersection(l1, l2) else {
                continue;
            };
            let y = p.y.re();
            if !(-SIDE_Y_TOL..=1.0 + SIDE_Y_TOL).contains(&y) {
                continue;
            }
            if y < 0.0 {
                p.y = zero;
            } else if y > 1.0 {
                p.y = one;
            }
            push_unique(&mut pts, p);
        }
    }

    sort_counter_clockwise(&mut pts);
    pts
}

/// Sorts by angle about the centroid; valid because the polygon is convex.
fn sort_counter_clockwise<S: Real>(pts: &mut [PlanePoint<S>]) {
    if pts.is_empty() {
        return;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x.re()).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y.re()).sum::<f64>() / n;
    pts.sort_by(|p, q| {
        let ap = (p.y.re() - cy).atan2(p.x.re() - cx);
        let aq = (q.y.re() - cy).atan2(q.x.re() - cx);
        ap.total_cmp(&aq)
    });
}

/// Vertices of `A ∩ B` after finitizing semi-infinite sides.
pub fn intersection_vertices(
    a: &FuzzyInterval,
    b: &FuzzyInterval,
) -> Result<Vec<PlanePoint>, IntervalError> {
    let (x, y) = finitize(&Trap::from(a), &Trap::from(b))?;
    Ok(vertices_finite(x, y))
}

pub(crate) fn area<S: Real>(x: &Trap<S>, y: &Trap<S>) -> S {
    match finitize(x, y) {
        Ok((px, py)) => shoelace(&vertices_finite(px, py)),
        Err(_) => S::cst(f64::INFINITY),
    }
}

/// `|A ∩ B|`, the area under `min(A(x), B(x))`.
///
/// Returns `+inf` when both intervals are unbounded on the same side.
pub fn intersection_area(a: &FuzzyInterval, b: &FuzzyInterval) -> f64 {
    area(&Trap::from(a), &Trap::from(b))
}

/// Trapezoidal-rule integral of `min(A(x), B(x))`, used to check
/// [`intersection_area`].
pub fn oracle_intersection_area(a: &FuzzyInterval, b: &FuzzyInterval, grid_step: f64) -> f64 {
    assert!(grid_step > 0.0, "grid step must be positive");
    let Ok((fa, fb)) = finitize_pair(a, b) else {
        return f64::INFINITY;
    };
    let lo = fa.a().min(fb.a());
    let hi = fa.d().max(fb.d());
    let len = hi - lo;
    if len <= 0.0 {
        return 0.0;
    }
    let n = (len / grid_step).ceil() as usize;
    let h = len / n as f64;
    let f = |x: f64| fa.membership(x).min(fb.membership(x));
    let mut acc = 0.5 * (f(lo) + f(hi));
    for k in 1..n {
        acc += f(lo + k as f64 * h);
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(a: f64, b: f64, c: f64, d: f64) -> FuzzyInterval {
        FuzzyInterval::new(a, b, c, d).unwrap()
    }

    const NEG: f64 = f64::NEG_INFINITY;
    const POS: f64 = f64::INFINITY;

    #[test]
    fn finitize_examples() {
        let (a, b) = finitize_pair(&iv(NEG, NEG, 3.0, 4.0), &iv(3.0, 5.0, 6.0, 7.0)).unwrap();
        assert_eq!(a, iv(1.0, 2.0, 3.0, 4.0));
        assert_eq!(b, iv(3.0, 5.0, 6.0, 7.0));

        let x = iv(0.0, 1.0, 2.0, 3.0);
        let y = iv(1.0, 2.0, 3.0, 4.0);
        assert_eq!(finitize_pair(&x, &y).unwrap(), (x, y));

        let (a, _) = finitize_pair(&iv(2.0, 3.0, POS, POS), &iv(0.0, 1.0, 4.0, 5.0)).unwrap();
        assert_eq!(a, iv(2.0, 3.0, 6.0, 7.0));

        assert_eq!(
            finitize_pair(&iv(NEG, NEG, 1.0, 2.0), &iv(NEG, NEG, 3.0, 4.0)),
            Err(IntervalError::FacingInfinite)
        );
        assert_eq!(
            finitize_pair(&iv(0.0, 1.0, POS, POS), &iv(2.0, 3.0, POS, POS)),
            Err(IntervalError::FacingInfinite)
        );
    }

    #[test]
    fn vertices_of_crisp_overlap() {
        let vs = intersection_vertices(&iv(0.0, 0.0, 2.0, 2.0), &iv(1.0, 1.0, 3.0, 3.0)).unwrap();
        let want = [(1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0)];
        assert_eq!(vs.len(), 4);
        for w in want {
            assert!(vs.iter().any(|p| p.x == w.0 && p.y == w.1), "{vs:?}");
        }
        assert!((shoelace_area(&vs) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vertices_disjoint() {
        let vs =
            intersection_vertices(&iv(0.0, 1.0, 2.0, 3.0), &iv(10.0, 11.0, 12.0, 13.0)).unwrap();
        assert!(vs.is_empty());
        // Touching supports are empty too.
        let vs = intersection_vertices(&iv(0.0, 1.0, 2.0, 3.0), &iv(3.0, 4.0, 5.0, 6.0)).unwrap();
        assert!(vs.is_empty());
    }

    #[test]
    fn side_vertex_from_left_edges() {
        let vs = intersection_vertices(&iv(0.0, 1.0, 2.0, 3.0), &iv(0.5, 1.0, 2.0, 3.0)).unwrap();
        assert!(vs.iter().any(|p| p.x == 1.0 && p.y == 1.0));
    }

    #[test]
    fn line_examples() {
        let la = EdgeLine::through(0.0, 1.0);
        let lb = EdgeLine::through(0.5, 1.0);
        assert_eq!(line_intersection(la, lb), Some(PlanePoint::new(1.0, 1.0)));
        let p1 = EdgeLine::through(0.0, 2.0);
        let p2 = EdgeLine::through(1.0, 3.0);
        assert_eq!(line_intersection(p1, p2), None);
        assert_eq!(line_intersection(la, la), None);
        let v = EdgeLine::through(2.0, 2.0);
        assert_eq!(
            line_intersection(v, EdgeLine::through(1.0, 3.0)),
            Some(PlanePoint::new(2.0, 0.5))
        );
        assert_eq!(line_intersection(v, EdgeLine::through(5.0, 5.0)), None);
    }

    #[test]
    fn shoelace_examples() {
        let sq = [
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(1.0, 1.0),
            PlanePoint::new(0.0, 1.0),
        ];
        assert_eq!(shoelace_area(&sq), 1.0);
        let tri = [
            PlanePoint::new(0.0, 0.0),
            PlanePoint::new(2.0, 0.0),
            PlanePoint::new(0.0, 2.0),
        ];
        assert_eq!(shoelace_area(&tri), 2.0);
        assert_eq!(shoelace_area(&sq[..2]), 0.0);
    }

    #[test]
    fn area_examples() {
        let a = iv(0.0, 1.0, 2.0, 3.0);
        assert!((intersection_area(&a, &a) - 2.0).abs() < 1e-12);
        assert_eq!(
            intersection_area(&iv(0.0, 0.0, 1.0, 1.0), &iv(2.0, 2.0, 3.0, 3.0)),
            0.0
        );
        let x = iv(0.0, 2.0, 4.0, 6.0);
        let y = iv(1.0, 3.0, 3.0, 5.0);
        let oracle = oracle_intersection_area(&x, &y, 1e-4);
        assert!((intersection_area(&x, &y) - oracle).abs() < 1e-6);
    }

    #[test]
    fn oracle_examples() {
        let a = iv(0.0, 1.0, 2.0, 3.0);
        assert!((oracle_intersection_area(&a, &a, 1e-4) - 2.0).abs() < 1e-6);
        assert_eq!(
            oracle_intersection_area(&iv(0.0, 0.0, 1.0, 1.0), &iv(2.0, 2.0, 3.0, 3.0), 1e-4),
            0.0
        );
        let o = oracle_intersection_area(&iv(0.0, 0.0, 2.0, 2.0), &iv(1.0, 1.0, 3.0, 3.0), 1e-4);
        // Crisp jumps cost the trapezoidal rule up to one step of area.
        assert!((o - 1.0).abs() <= 2e-4, "{o}");
    }

    #[test]
    fn semi_infinite_area() {
        // Before((2,3,..)) against a crisp [0,1]: full overlap of [0,1].
        let before = iv(NEG, NEG, 2.0, 3.0);
        assert!((intersection_area(&iv(0.0, 0.0, 1.0, 1.0), &before) - 1.0).abs() < 1e-12);
        let after = iv(4.0, 6.0, POS, POS);
        let x = iv(3.0, 5.0, 7.0, 9.0);
        let oracle = oracle_intersection_area(&x, &after, 1e-4);
        assert!((intersection_area(&x, &after) - oracle).abs() < 1e-6);
        assert_eq!(
            intersection_area(&before, &iv(NEG, NEG, 0.0, 1.0)),
            f64::INFINITY
        );
    }

    #[test]
    fn random_pairs_agree_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut draw = || {
                let mut v: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..10.0)).collect();
                v.sort_by(f64::total_cmp);
                iv(v[0], v[1], v[2], v[3])
            };
            let (x, y) = (draw(), draw());
            let closed = intersection_area(&x, &y);
            let oracle = oracle_intersection_area(&x, &y, 1e-3);
            assert!(
                (closed - oracle).abs() < 1e-4,
                "{x} {y}: {closed} vs {oracle}"
            );
        }
    }

    fn trapezoid() -> impl Strategy<Value = FuzzyInterval> {
        proptest::collection::vec(0.0f64..20.0, 4).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            iv(v[0], v[1], v[2], v[3])
        })
    }

    fn crispish() -> impl Strategy<Value = FuzzyInterval> {
        // Small integer grid so coincident edges and crisp sides are common.
        proptest::collection::vec(0u8..6, 4).prop_map(|mut v| {
            v.sort();
            iv(v[0] as f64, v[1] as f64, v[2] as f64, v[3] as f64)
        })
    }

    proptest! {
        #[test]
        fn symmetric(x in trapezoid(), y in trapezoid()) {
            prop_assert_eq!(intersection_area(&x, &y), intersection_area(&y, &x));
        }

        #[test]
        fn idempotent(x in trapezoid()) {
            let dur = x.duration().finite().unwrap();
            prop_assert!((intersection_area(&x, &x) - dur).abs() <= 1e-9);
        }

        #[test]
        fn bounded_by_durations(x in trapezoid(), y in trapezoid()) {
            let bound = x.duration().to_f64().min(y.duration().to_f64());
            prop_assert!(intersection_area(&x, &y) <= bound + 1e-9);
        }

        #[test]
        fn at_most_six_vertices(x in trapezoid(), y in trapezoid()) {
            prop_assert!(intersection_vertices(&x, &y).unwrap().len() <= 6);
        }

        #[test]
        fn degenerate_grid_matches_oracle(x in crispish(), y in crispish()) {
            let closed = intersection_area(&x, &y);
            let oracle = oracle_intersection_area(&x, &y, 1e-3);
            prop_assert!((closed - oracle).abs() <= 2e-3, "{} {}: {} vs {}", x, y, closed, oracle);
            prop_assert!(intersection_vertices(&x, &y).unwrap().len() <= 6);
        }
    }
}
