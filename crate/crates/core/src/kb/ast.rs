//! Syntax tree and pretty-printer. Printing then re-parsing yields the same
//! tree up to source positions.

use std::fmt;

use crate::relations::Relation;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, PartialOrd, Ord)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Event {
        name: Ident,
        kind: EventKind,
        span: Span,
    },
    Scalar {
        name: Ident,
        kind: ScalarKind,
        span: Span,
    },
    Horizon {
        value: f64,
        span: Span,
    },
    Constraint {
        expr: Expr,
        span: Span,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Fixed {
        params: [f64; 4],
        happ: Option<f64>,
    },
    /// Logits `(happ, a, b - a, c - b, d - c)` before activation.
    Trainable {
        init: Option<[f64; 5]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarKind {
    Fixed(f64),
    Trainable { init: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Name(Ident),
    Start(Box<Term>, Span),
    End(Box<Term>, Span),
    Before(Box<Term>, Span),
    After(Box<Term>, Span),
    /// `[i, j]`
    Crisp {
        lo: u64,
        hi: u64,
        span: Span,
    },
}

impl Term {
    pub fn span(&self) -> Span {
        match self {
            Term::Name(id) => id.span,
            Term::Start(_, s) | Term::End(_, s) | Term::Before(_, s) | Term::After(_, s) => *s,
            Term::Crisp { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeExpr {
    Number(f64, Span),
    Name(Ident),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Relation {
        rel: Relation,
        left: Term,
        right: Term,
        span: Span,
    },
    /// `duration(t) ~= k`
    Duration {
        term: Term,
        target: f64,
        span: Span,
    },
    /// `t at x`
    Membership {
        term: Term,
        time: TimeExpr,
        span: Span,
    },
    Happ {
        event: Ident,
        span: Span,
    },
    /// `active(e) at x`
    Active {
        event: Ident,
        time: TimeExpr,
        span: Span,
    },
    Not(Box<Expr>, Span),
    And(Box<Expr>, Box<Expr>, Span),
    Or(Box<Expr>, Box<Expr>, Span),
    Implies(Box<Expr>, Box<Expr>, Span),
    /// `forall t in [lo, hi] : body`, over integer time points.
    Forall {
        var: Ident,
        lo: i64,
        hi: i64,
        body: Box<Expr>,
        span: Span,
    },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Relation { span, .. }
            | Expr::Duration { span, .. }
            | Expr::Membership { span, .. }
            | Expr::Happ { span, .. }
            | Expr::Active { span, .. }
            | Expr::Forall { span, .. }
            | Expr::Not(_, span)
            | Expr::And(_, _, span)
            | Expr::Or(_, _, span)
            | Expr::Implies(_, _, span) => *span,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Forall { .. } => 0,
            Expr::Implies(..) => 1,
            Expr::Or(..) => 2,
            Expr::And(..) => 3,
            Expr::Not(..) => 4,
            _ => 5,
        }
    }
}

/// Words that cannot be used as names.
pub const KEYWORDS: &[&str] = &[
    "event",
    "fixed",
    "trainable",
    "trapezoid",
    "happ",
    "init",
    "logits",
    "scalar",
    "horizon",
    "constraint",
    "not",
    "and",
    "or",
    "implies",
    "forall",
    "at",
    "duration",
    "active",
    "Start",
    "End",
    "Before",
    "After",
    "inf",
    "in",
    "eq",
    "bf",
    "af",
    "mt",
    "ol",
    "st",
    "dr",
    "fin",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

// Span erasure, for comparing trees parsed from different texts.

impl Program {
    pub fn strip_spans(&mut self) {
        for item in &mut self.items {
            match item {
                Item::Event { name, span, .. } | Item::Scalar { name, span, .. } => {
                    name.span = Span::default();
                    *span = Span::default();
                }
                Item::Horizon { span, .. } => *span = Span::default(),
                Item::Constraint { expr, span } => {
                    expr.strip_spans();
                    *span = Span::default();
                }
            }
        }
    }
}

impl Term {
    pub fn strip_spans(&mut self) {
        match self {
            Term::Name(id) => id.span = Span::default(),
            Term::Start(t, s) | Term::End(t, s) | Term::Before(t, s) | Term::After(t, s) => {
                t.strip_spans();
                *s = Span::default();
            }
            Term::Crisp { span, .. } => *span = Span::default(),
        }
    }
}

impl TimeExpr {
    fn strip_spans(&mut self) {
        match self {
            TimeExpr::Number(_, s) => *s = Span::default(),
            TimeExpr::Name(id) => id.span = Span::default(),
        }
    }
}

impl Expr {
    pub fn strip_spans(&mut self) {
        match self {
            Expr::Relation {
                left, right, span, ..
            } => {
                left.strip_spans();
                right.strip_spans();
                *span = Span::default();
            }
            Expr::Duration { term, span, .. } => {
                term.strip_spans();
                *span = Span::default();
            }
            Expr::Membership { term, time, span } => {
                term.strip_spans();
                time.strip_spans();
                *span = Span::default();
            }
            Expr::Happ { event, span } => {
                event.span = Span::default();
                *span = Span::default();
            }
            Expr::Active { event, time, span } => {
                event.span = Span::default();
                time.strip_spans();
                *span = Span::default();
            }
            Expr::Not(e, span) => {
                e.strip_spans();
                *span = Span::default();
            }
            Expr::And(l, r, span) | Expr::Or(l, r, span) | Expr::Implies(l, r, span) => {
                l.strip_spans();
                r.strip_spans();
                *span = Span::default();
            }
            Expr::Forall {
                var, body, span, ..
            } => {
                var.span = Span::default();
                body.strip_spans();
                *span = Span::default();
            }
        }
    }
}

// Printing. `f64` Display is the shortest text that parses back to the same
// value, and prints infinities as `inf` / `-inf`.

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(id) => f.write_str(&id.name),
            Term::Start(t, _) => write!(f, "Start({t})"),
            Term::End(t, _) => write!(f, "End({t})"),
            Term::Before(t, _) => write!(f, "Before({t})"),
            Term::After(t, _) => write!(f, "After({t})"),
            Term::Crisp { lo, hi, .. } => write!(f, "[{lo}, {hi}]"),
        }
    }
}

impl fmt::Display for TimeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeExpr::Number(v, _) => write!(f, "{v}"),
            TimeExpr::Name(id) => f.write_str(&id.name),
        }
    }
}

fn write_expr(e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let parens = e.precedence() < min_prec;
    if parens {
        f.write_str("(")?;
    }
    match e {
        Expr::Relation {
            rel, left, right, ..
        } => write!(f, "{left} {rel} {right}")?,
        Expr::Duration { term, target, .. } => write!(f, "duration({term}) ~= {target}")?,
        Expr::Membership { term, time, .. } => write!(f, "{term} at {time}")?,
        Expr::Happ { event, .. } => write!(f, "happ({})", event.name)?,
        Expr::Active { event, time, .. } => write!(f, "active({}) at {time}", event.name)?,
        Expr::Not(x, _) => {
            f.write_str("not ")?;
            write_expr(x, 4, f)?;
        }
        Expr::And(l, r, _) => {
            write_expr(l, 3, f)?;
            f.write_str(" and ")?;
            write_expr(r, 4, f)?;
        }
        Expr::Or(l, r, _) => {
            write_expr(l, 2, f)?;
            f.write_str(" or ")?;
            write_expr(r, 3, f)?;
        }
        Expr::Implies(l, r, _) => {
            write_expr(l, 2, f)?;
            f.write_str(" implies ")?;
            write_expr(r, 1, f)?;
        }
        Expr::Forall {
            var, lo, hi, body, ..
        } => {
            write!(f, "forall {} in [{lo}, {hi}] : ", var.name)?;
            write_expr(body, 0, f)?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, 0, f)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Event { name, kind, .. } => match kind {
                EventKind::Fixed {
                    params: [a, b, c, d],
                    happ,
                } => {
                    write!(f, "event {} fixed trapezoid({a}, {b}, {c}, {d})", name.name)?;
                    if let Some(h) = happ {
                        write!(f, " happ {h}")?;
                    }
                    Ok(())
                }
                EventKind::Trainable { init } => {
                    write!(f, "event {} trainable", name.name)?;
                    if let Some([l0, l1, l2, l3, l4]) = init {
                        write!(f, " init logits({l0}, {l1}, {l2}, {l3}, {l4})")?;
                    }
                    Ok(())
                }
            },
            Item::Scalar { name, kind, .. } => match kind {
                ScalarKind::Fixed(v) => write!(f, "scalar {} fixed {v}", name.name),
                ScalarKind::Trainable { init } => {
                    write!(f, "scalar {} trainable", name.name)?;
                    if let Some(v) = init {
                        write!(f, " init {v}")?;
                    }
                    Ok(())
                }
            },
            Item::Horizon { value, .. } => write!(f, "horizon {value}"),
            Item::Constraint { expr, .. } => write!(f, "constraint {expr}"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "{item}")?;
        }
        Ok(())
    }
}
