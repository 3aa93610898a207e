//! Self-check suites: the closed-form geometry against numeric integration,
//! the line formula against Cramer's rule, tape partials against finite
//! differences of the smooth surrogates, and the crisp Allen reductions.
//!
//! Every suite is seeded and returns a [`SuiteReport`] instead of panicking,
//! so a driver can print a table and decide the exit status.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::autodiff::{
    membership_surrogate, rel_in_surrogate, smooth_membership, smooth_rel_in, DiffInterval,
    DiffScalar, SmoothConfig, Tape,
};
use crate::geometry::{
    intersection_area, intersection_vertices, line_intersection, oracle_intersection_area,
    shoelace_area, EdgeLine, PlanePoint,
};
use crate::interval::FuzzyInterval;
use crate::relations::{Exact, Relation};

/// Grid step of the numeric-integration oracle.
pub const ORACLE_STEP: f64 = 1e-4;
/// Largest accepted gap between closed form and oracle.
pub const ORACLE_TOL: f64 = 1e-3;
/// Line formula vs Cramer's rule.
pub const LINE_TOL: f64 = 1e-9;
/// Central-difference step for gradient checks.
pub const FD_STEP: f64 = 1e-4;
pub const GRAD_REL_TOL: f64 = 1e-3;
pub const GRAD_ABS_FLOOR: f64 = 1e-6;
/// Partials below this count as vanished.
pub const VANISH_TOL: f64 = 1e-6;
/// Crisp Allen checks: truth in the defining configuration must reach
/// `1 - ALLEN_TOL`, in the violating one stay below `ALLEN_TOL`.
pub const ALLEN_TOL: f64 = 0.01;

/// Signature of an intersection-area implementation under test.
pub type AreaFn = dyn Fn(&FuzzyInterval, &FuzzyInterval) -> f64 + Sync;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error, in the suite's own metric.
    pub max_error: f64,
    pub tolerance: f64,
    /// First failing case, if any.
    pub first_failure: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<5} {:<16} {:>5} cases {:>5} failed  max error {:.3e} (tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.max_error,
            self.tolerance
        )?;
        if let Some(c) = &self.first_failure {
            write!(f, "\n      first failure: {c}")?;
        }
        Ok(())
    }
}

/// Builds a report from `(error, passed, description)` per case.
fn collect(name: &'static str, tolerance: f64, results: Vec<(f64, bool, String)>) -> SuiteReport {
    let mut report = SuiteReport {
        name,
        cases: results.len(),
        failures: 0,
        max_error: 0.0,
        tolerance,
        first_failure: None,
    };
    for (err, ok, what) in results {
        report.max_error = report.max_error.max(err);
        if !ok {
            report.failures += 1;
            report.first_failure.get_or_insert(what);
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random pairs for the geometry oracle.
    pub oracle_cases: usize,
    /// Random line pairs (rectangles use the same count).
    pub line_cases: usize,
    /// Random configurations per gradient suite.
    pub gradient_cases: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            oracle_cases: 1000,
            line_cases: 500,
            gradient_cases: 200,
        }
    }
}

impl CheckConfig {
    /// Every randomized suite at `n` cases.
    pub fn with_cases(self, n: usize) -> Self {
        CheckConfig {
            oracle_cases: n,
            line_cases: n,
            gradient_cases: n,
            ..self
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Four sorted uniform draws from `[lo, hi]`.
pub fn random_trapezoid<R: Rng>(r: &mut R, lo: f64, hi: f64) -> FuzzyInterval {
    let mut p: [f64; 4] = std::array::from_fn(|_| r.gen_range(lo..=hi));
    p.sort_by(f64::total_cmp);
    FuzzyInterval::new(p[0], p[1], p[2], p[3]).expect("sorted finite parameters")
}

/// `area` against trapezoidal-rule integration on random finite pairs with
/// parameters in `[0, 100]`.
pub fn geometry_oracle(cfg: &CheckConfig, area: &AreaFn) -> SuiteReport {
    let mut r = rng(cfg.seed, 1);
    let pairs: Vec<(FuzzyInterval, FuzzyInterval)> = (0..cfg.oracle_cases)
        .map(|_| {
            (
                random_trapezoid(&mut r, 0.0, 100.0),
                random_trapezoid(&mut r, 0.0, 100.0),
            )
        })
        .collect();
    let results = pairs
        .par_iter()
        .map(|(a, b)| {
            let got = area(a, b);
            let want = oracle_intersection_area(a, b, ORACLE_STEP);
            let err = (got - want).abs();
            let ok = err <= ORACLE_TOL;
            (
                err,
                ok,
                format!("A={a} B={b}: closed form {got}, oracle {want}"),
            )
        })
        .collect();
    collect("geometry-oracle", ORACLE_TOL, results)
}

/// The production area function.
pub fn closed_form_area(a: &FuzzyInterval, b: &FuzzyInterval) -> f64 {
    intersection_area(a, b)
}

/// A deliberately broken area function: drops the last polygon vertex.
/// Used to show that the oracle suite catches geometry bugs.
pub fn faulty_area(a: &FuzzyInterval, b: &FuzzyInterval) -> f64 {
    match intersection_vertices(a, b) {
        Ok(mut vs) => {
            vs.pop();
            shoelace_area(&vs)
        }
        Err(_) => f64::INFINITY,
    }
}

/// Solves `a1 x + b1 y = c1`, `a2 x + b2 y = c2` by Cramer's rule.
pub fn cramer(l1: [f64; 3], l2: [f64; 3]) -> Option<(f64, f64)> {
    let [a1, b1, c1] = l1;
    let [a2, b2, c2] = l2;
    let det = a1 * b2 - a2 * b1;
    if det == 0.0 {
        return None;
    }
    Some(((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det))
}

/// `x - (q - p) y = p` for slanted lines, `x = p` for vertical ones.
fn line_coefficients(l: EdgeLine) -> [f64; 3] {
    match l {
        EdgeLine::Slanted { p, q } => [1.0, -(q - p), p],
        EdgeLine::Vertical { p } => [1.0, 0.0, p],
    }
}

fn random_line<R: Rng>(r: &mut R) -> EdgeLine {
    let p = r.gen_range(0.0..100.0);
    if r.gen_bool(0.2) {
        return EdgeLine::Vertical { p };
    }
    let run = r.gen_range(0.5..20.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    EdgeLine::Slanted { p, q: p + run }
}

/// The closed-form line crossing against Cramer's rule on random
/// non-parallel pairs, plus shoelace on axis-aligned rectangles.
pub fn line_formula(cfg: &CheckConfig) -> SuiteReport {
    let mut r = rng(cfg.seed, 2);
    let mut results = Vec::with_capacity(2 * cfg.line_cases);
    while results.len() < cfg.line_cases {
        let (l1, l2) = (random_line(&mut r), random_line(&mut r));
        let (c1, c2) = (line_coefficients(l1), line_coefficients(l2));
        // Keep the crossing well conditioned.
        let det = c1[0] * c2[1] - c2[0] * c1[1];
        if det.abs() < 0.5 {
            continue;
        }
        let Some((x, y)) = cramer(c1, c2) else {
            continue;
        };
        let what = format!("{l1:?} x {l2:?}");
        let err = match line_intersection(l1, l2) {
            Some(PlanePoint { x: gx, y: gy }) => (gx - x).abs().max((gy - y).abs()),
            None => f64::INFINITY,
        };
        results.push((err, err <= LINE_TOL, what));
    }
    for _ in 0..cfg.line_cases {
        let x0: f64 = r.gen_range(-100.0..100.0);
        let w: f64 = r.gen_range(0.0..100.0);
        let x1 = x0 + w;
        let h: f64 = r.gen_range(0.0..=1.0);
        let rect = [
            PlanePoint::new(x0, 0.0),
            PlanePoint::new(x1, 0.0),
            PlanePoint::new(x1, h),
            PlanePoint::new(x0, h),
        ];
        let want = (x1 - x0) * h;
        let got = shoelace_area(&rect);
        let err = (got - want).abs();
        results.push((
            err,
            got == want,
            format!("rectangle [{x0}, {x1}] x [0, {h}]: {got} vs {want}"),
        ));
    }
    collect("line-formula", LINE_TOL, results)
}

/// Relative error with an absolute floor; `(error, within tolerance)`.
pub fn gradient_error(tape: f64, fd: f64) -> (f64, bool) {
    let diff = (tape - fd).abs();
    let scale = tape.abs().max(fd.abs());
    let rel = if scale > 0.0 { diff / scale } else { 0.0 };
    (rel.min(diff), diff <= GRAD_ABS_FLOOR || rel <= GRAD_REL_TOL)
}

fn central<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    (f(x + FD_STEP) - f(x - FD_STEP)) / (2.0 * FD_STEP)
}

fn with_param(i: &FuzzyInterval, k: usize, v: f64) -> FuzzyInterval {
    let mut p = i.params();
    p[k] = v;
    FuzzyInterval::new(p[0], p[1], p[2], p[3]).expect("perturbation keeps the order")
}

/// Random interval whose consecutive parameters are at least `gap` apart.
fn spaced_trapezoid<R: Rng>(r: &mut R, start: f64, gap: f64) -> FuzzyInterval {
    let mut p = [0.0; 4];
    let mut acc = start;
    for v in p.iter_mut() {
        *v = acc;
        acc += gap + r.gen_range(0.0..4.0);
    }
    FuzzyInterval::new(p[0], p[1], p[2], p[3]).expect("increasing parameters")
}

/// A point at least `margin` from every breakpoint of the membership
/// surrogate (the four parameters and the plateau midpoint).
fn point_off_breaks<R: Rng>(r: &mut R, i: &FuzzyInterval, margin: f64) -> f64 {
    let [a, b, c, d] = i.params();
    let breaks = [a, b, (b + c) / 2.0, c, d];
    loop {
        let x = r.gen_range(a - 15.0..d + 15.0);
        if breaks.iter().all(|e| (x - e).abs() >= margin) {
            return x;
        }
    }
}

/// Tape partials of the membership and containment operators against
/// central differences of their surrogates.
pub fn gradient_checks(cfg: &CheckConfig) -> SuiteReport {
    let mut r = rng(cfg.seed, 3);
    let mut results = Vec::new();
    for _ in 0..cfg.gradient_cases {
        let beta = r.gen_range(0.05..=1.0);
        let start = r.gen_range(-10.0..10.0);
        let i = spaced_trapezoid(&mut r, start, 0.5);
        let x = point_off_breaks(&mut r, &i, 0.05);
        results.extend(membership_case(&i, x, beta));

        let (a, b) = containment_pair(&mut r);
        results.extend(containment_case(&a, &b, beta));
    }
    collect("gradients", GRAD_REL_TOL, results)
}

fn membership_case(i: &FuzzyInterval, x: f64, beta: f64) -> Vec<(f64, bool, String)> {
    let mut tape = Tape::new();
    let di = DiffInterval::variables(&mut tape, i);
    let xv = tape.var(x);
    let m = smooth_membership(&mut tape, &di, xv, SmoothConfig::from_horizon(1.0 / beta));
    let g = tape.backward(m).expect("output is on this tape");
    let mut out = Vec::with_capacity(5);
    let fd = central(|t| membership_surrogate(i, t, beta), x);
    let (err, ok) = gradient_error(g.get(&xv), fd);
    out.push((err, ok, format!("membership d/dx: I={i} x={x} beta={beta}")));
    for (k, p) in di.params().iter().enumerate() {
        let v = i.params()[k];
        let fd = central(|t| membership_surrogate(&with_param(i, k, t), x, beta), v);
        let (err, ok) = gradient_error(g.get(p), fd);
        out.push((
            err,
            ok,
            format!("membership d/dp{k}: I={i} x={x} beta={beta}"),
        ));
    }
    out
}

/// A pair aimed at one of the four containment regimes by a random draw. Parameters of the two intervals stay apart so a
/// finite-difference step never changes the polygon's combinatorics.
fn containment_pair<R: Rng>(r: &mut R) -> (FuzzyInterval, FuzzyInterval) {
    loop {
        let (a, b) = match r.gen_range(0..4) {
            0 => {
                let (s, gap) = (r.gen_range(0.0..10.0), r.gen_range(0.5..10.0));
                let a = spaced_trapezoid(r, s, 0.5);
                let b = spaced_trapezoid(r, a.d() + gap, 0.5);
                (a, b)
            }
            1 => {
                let (s, gap) = (r.gen_range(0.0..10.0), r.gen_range(0.5..10.0));
                let b = spaced_trapezoid(r, s, 0.5);
                let a = spaced_trapezoid(r, b.d() + gap, 0.5);
                (a, b)
            }
            2 => {
                let inset = r.gen_range(0.2..2.0);
                let b = spaced_trapezoid(r, 0.0, 3.0);
                let a = spaced_trapezoid(r, b.a() + inset, 0.2);
                (a, b)
            }
            _ => {
                let (s, t) = (r.gen_range(0.0..6.0), r.gen_range(0.0..6.0));
                (spaced_trapezoid(r, s, 0.5), spaced_trapezoid(r, t, 0.5))
            }
        };
        let mut all: Vec<f64> = a.params().into_iter().chain(b.params()).collect();
        all.sort_by(f64::total_cmp);
        let separated = all.windows(2).all(|w| w[1] - w[0] >= 0.05);
        let surrogate_ok = rel_in_surrogate(&a, &b, 1.0).is_ok();
        if separated && surrogate_ok {
            return (a, b);
        }
    }
}

fn containment_case(a: &FuzzyInterval, b: &FuzzyInterval, beta: f64) -> Vec<(f64, bool, String)> {
    let mut tape = Tape::new();
    let da = DiffInterval::variables(&mut tape, a);
    let db = DiffInterval::variables(&mut tape, b);
    let cfg = SmoothConfig::from_horizon(1.0 / beta);
    let out_v = smooth_rel_in(&mut tape, &da, &db, cfg).expect("finite pair");
    let g = tape.backward(out_v).expect("output is on this tape");
    let vars: Vec<DiffScalar> = da.params().into_iter().chain(db.params()).collect();
    let mut out = Vec::with_capacity(8);
    for (k, v) in vars.iter().enumerate() {
        let f = |t: f64| {
            let (x, y) = if k < 4 {
                (with_param(a, k, t), *b)
            } else {
                (*a, with_param(b, k - 4, t))
            };
            rel_in_surrogate(&x, &y, beta).expect("finite pair")
        };
        let base = if k < 4 {
            a.params()[k]
        } else {
            b.params()[k - 4]
        };
        let (err, ok) = gradient_error(g.get(v), central(f, base));
        out.push((err, ok, format!("rel_in d/dp{k}: A={a} B={b} beta={beta}")));
    }
    out
}

/// `|d smooth_membership / dx|` over every point within `horizon` of the
/// support of a fixed interval, at `beta = 1 / horizon`.
pub fn non_vanishing(horizon: f64) -> SuiteReport {
    let i = FuzzyInterval::new(0.0, 0.1 * horizon, 0.3 * horizon, 0.4 * horizon).expect("ordered");
    let cfg = SmoothConfig::from_horizon(horizon);
    let n = 4000;
    let (lo, hi) = (i.a() - horizon, i.d() + horizon);
    let results = (0..=n)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / n as f64;
            let mut tape = Tape::new();
            let xv = tape.var(x);
            let m = smooth_membership(&mut tape, &DiffInterval::constant(&i), xv, cfg);
            let g = tape
                .backward(m)
                .expect("output is on this tape")
                .get(&xv)
                .abs();
            // Reported error is how far below the threshold the partial is.
            (
                (VANISH_TOL - g).max(0.0),
                g > VANISH_TOL,
                format!("x={x}: |d/dx|={g}"),
            )
        })
        .collect();
    collect("non-vanishing", VANISH_TOL, results)
}

/// Naive single-precision `sigmoid(beta * z)`, the softplus derivative as a
/// 32-bit framework would evaluate it.
pub fn sigmoid_f32(z: f32, beta: f32) -> f32 {
    1.0 / (1.0 + (-(beta * z)).exp())
}

fn crisp(i: u64, j: u64) -> FuzzyInterval {
    FuzzyInterval::crisp(i, j).expect("i <= j")
}

/// For each relation: a configuration that defines it and one that clearly
/// violates it. Endpoints are at least one unit apart.
pub fn allen_cases() -> [(Relation, [FuzzyInterval; 2], [FuzzyInterval; 2]); 9] {
    use Relation::*;
    [
        (In, [crisp(2, 4), crisp(0, 6)], [crisp(0, 2), crisp(4, 6)]),
        (Eq, [crisp(1, 4), crisp(1, 4)], [crisp(1, 4), crisp(5, 8)]),
        (Bf, [crisp(0, 1), crisp(2, 3)], [crisp(2, 3), crisp(0, 1)]),
        (Af, [crisp(2, 3), crisp(0, 1)], [crisp(0, 1), crisp(2, 3)]),
        (Mt, [crisp(0, 2), crisp(2, 4)], [crisp(0, 1), crisp(3, 5)]),
        (St, [crisp(0, 2), crisp(0, 5)], [crisp(2, 4), crisp(0, 5)]),
        (Dr, [crisp(2, 3), crisp(0, 5)], [crisp(0, 5), crisp(2, 3)]),
        (Fin, [crisp(3, 5), crisp(0, 5)], [crisp(0, 2), crisp(0, 5)]),
        (Ol, [crisp(0, 4), crisp(2, 6)], [crisp(0, 1), crisp(3, 5)]),
    ]
}

/// The nine relations on crisp intervals, 18 directed checks.
pub fn crisp_allen() -> SuiteReport {
    let exact = Exact::default();
    let mut results = Vec::with_capacity(18);
    for (rel, [x, y], [u, v]) in allen_cases() {
        let hold = exact.relate(rel, &x, &y).unwrap_or(f64::NAN);
        let err = 1.0 - hold;
        results.push((
            err,
            err <= ALLEN_TOL,
            format!("{x} {rel} {y} = {hold}, expected 1"),
        ));
        let fail = exact.relate(rel, &u, &v).unwrap_or(f64::NAN);
        results.push((
            fail,
            fail <= ALLEN_TOL,
            format!("{u} {rel} {v} = {fail}, expected 0"),
        ));
    }
    collect("crisp-allen", ALLEN_TOL, results)
}

/// All suites in a fixed order.
pub fn run_all(cfg: &CheckConfig, area: &AreaFn) -> Vec<SuiteReport> {
    vec![
        geometry_oracle(cfg, area),
        line_formula(cfg),
        gradient_checks(cfg),
        non_vanishing(100.0),
        crisp_allen(),
    ]
}
