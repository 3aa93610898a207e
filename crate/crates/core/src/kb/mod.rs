//! Knowledge bases of temporal constraints: a small line-oriented language,
//! grounding of events as trainable trapezoids, and satisfaction training.
//!
//! ```text
//! horizon 10
//! event A fixed trapezoid(0, 1, 2, 3)
//! event B trainable init logits(0, 0, 0, 0, 0)
//! constraint duration(B) ~= 2 and B af A
//! ```

pub mod ast;
mod eval;
mod ground;
mod lexer;
mod parser;
pub mod report;
pub mod tasks;
mod train;

use std::collections::HashMap;

use thiserror::Error;

use crate::interval::{FuzzyInterval, IntervalError};

pub use ast::{EventKind, Expr, Item, Program, ScalarKind, Span, Term, TimeExpr};
pub use ground::{realize, EventGrounding, Groundings, ScalarGrounding};
pub use parser::parse_program;
pub use train::{
    adam_step, evaluate, train, AdamConfig, AdamState, Evaluation, StepRecord, TrainConfig,
    TrainRun,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("{pos}: lexical error: {msg}")]
    Lex { pos: Span, msg: String },
    #[error("{pos}: parse error: {msg}")]
    Parse { pos: Span, msg: String },
    #[error("{pos}: semantic error: {msg}")]
    Semantic { pos: Span, msg: String },
    #[error("{pos}: evaluation error: {source}")]
    Evaluation { pos: Span, source: IntervalError },
    #[error("constraint {index} `{text}` is not finite ({value}) at step {step}")]
    NonFinite {
        index: usize,
        text: String,
        value: f64,
        step: usize,
    },
    #[error("the knowledge base has no trainable events or scalars")]
    NothingToTrain,
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl KbError {
    pub fn position(&self) -> Option<Span> {
        match self {
            KbError::Lex { pos, .. }
            | KbError::Parse { pos, .. }
            | KbError::Semantic { pos, .. }
            | KbError::Evaluation { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

fn semantic<T>(pos: Span, msg: impl Into<String>) -> Result<T, KbError> {
    Err(KbError::Semantic {
        pos,
        msg: msg.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventDecl {
    pub name: String,
    pub span: Span,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDecl {
    pub name: String,
    pub span: Span,
    pub kind: ScalarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub expr: Expr,
    /// Canonical source text.
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Symbol {
    Event(usize),
    Scalar(usize),
}

/// Which sides of a term are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Shape {
    left_infinite: bool,
    right_infinite: bool,
}

const FINITE: Shape = Shape {
    left_infinite: false,
    right_infinite: false,
};

/// Largest number of time points a single `forall` may range over.
pub const MAX_FORALL_POINTS: i64 = 100_000;

/// A program that passed name, kind and shape checks.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    program: Program,
    pub events: Vec<EventDecl>,
    pub scalars: Vec<ScalarDecl>,
    pub horizon: Option<f64>,
    pub constraints: Vec<Constraint>,
    symbols: HashMap<String, Symbol>,
}

/// Parses and checks a knowledge base.
pub fn parse_kb(src: &str) -> Result<KnowledgeBase, KbError> {
    KnowledgeBase::from_program(parse_program(src)?)
}

impl KnowledgeBase {
    pub fn from_program(program: Program) -> Result<Self, KbError> {
        let mut kb = KnowledgeBase {
            program: Program { items: Vec::new() },
            events: Vec::new(),
            scalars: Vec::new(),
            horizon: None,
            constraints: Vec::new(),
            symbols: HashMap::new(),
        };
        // Declarations first, so constraints may precede them in the text.
        for item in &program.items {
            match item {
                Item::Event { name, kind, span } => {
                    kb.declare(name, Symbol::Event(kb.events.len()))?;
                    if let EventKind::Fixed {
                        params: [a, b, c, d],
                        happ,
                    } = kind
                    {
                        if let Err(e) = FuzzyInterval::new(*a, *b, *c, *d) {
                            return semantic(*span, format!("event `{}`: {e}", name.name));
                        }
                        if let Some(h) = happ {
                            if !(0.0..=1.0).contains(h) {
                                return semantic(
                                    *span,
                                    format!("happ {h} of `{}` is outside [0, 1]", name.name),
                                );
                            }
                        }
                    }
                    kb.events.push(EventDecl {
                        name: name.name.clone(),
                        span: *span,
                        kind: kind.clone(),
                    });
                }
                Item::Scalar { name, kind, span } => {
                    kb.declare(name, Symbol::Scalar(kb.scalars.len()))?;
                    kb.scalars.push(ScalarDecl {
                        name: name.name.clone(),
                        span: *span,
                        kind: kind.clone(),
                    });
                }
                Item::Horizon { value, span } => {
                    if kb.horizon.is_some() {
                        return semantic(*span, "horizon declared twice");
                    }
                    if !(*value > 0.0) {
                        return semantic(*span, format!("horizon must be positive, got {value}"));
                    }
                    kb.horizon = Some(*value);
                }
                Item::Constraint { .. } => {}
            }
        }
        for item in &program.items {
            if let Item::Constraint { expr, span } = item {
                let mut scope = Vec::new();
                kb.check_expr(expr, &mut scope)?;
                kb.constraints.push(Constraint {
                    expr: expr.clone(),
                    text: expr.to_string(),
                    span: *span,
                });
            }
        }
        kb.program = program;
        Ok(kb)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub(crate) fn symbol(&self, name: &str) -> Option<Symbol> {
        self.symbols.get(name).copied()
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        match self.symbol(name) {
            Some(Symbol::Event(i)) => Some(i),
            _ => None,
        }
    }

    pub fn scalar_index(&self, name: &str) -> Option<usize> {
        match self.symbol(name) {
            Some(Symbol::Scalar(i)) => Some(i),
            _ => None,
        }
    }

    /// Declared horizon, or the largest finite magnitude among fixed
    /// coordinates (at least 1).
    pub fn effective_horizon(&self) -> f64 {
        if let Some(h) = self.horizon {
            return h;
        }
        let mut m: f64 = 1.0;
        for e in &self.events {
            if let EventKind::Fixed { params, .. } = &e.kind {
                for p in params.iter().filter(|p| p.is_finite()) {
                    m = m.max(p.abs());
                }
            }
        }
        for s in &self.scalars {
            match s.kind {
                ScalarKind::Fixed(v) | ScalarKind::Trainable { init: Some(v) } => {
                    m = m.max(v.abs())
                }
                ScalarKind::Trainable { init: None } => {}
            }
        }
        m
    }

    fn declare(&mut self, name: &ast::Ident, sym: Symbol) -> Result<(), KbError> {
        if self.symbols.insert(name.name.clone(), sym).is_some() {
            return semantic(name.span, format!("`{}` is declared twice", name.name));
        }
        Ok(())
    }

    fn check_event_name(&self, id: &ast::Ident) -> Result<usize, KbError> {
        match self.symbol(&id.name) {
            Some(Symbol::Event(i)) => Ok(i),
            Some(Symbol::Scalar(_)) => semantic(
                id.span,
                format!("`{}` is a scalar, expected an event", id.name),
            ),
            None => semantic(id.span, format!("undeclared event `{}`", id.name)),
        }
    }

    fn check_term(&self, t: &Term) -> Result<Shape, KbError> {
        match t {
            Term::Name(id) => {
                let i = self.check_event_name(id)?;
                Ok(match &self.events[i].kind {
                    EventKind::Fixed { params, .. } => Shape {
                        left_infinite: params[0] == f64::NEG_INFINITY,
                        right_infinite: params[3] == f64::INFINITY,
                    },
                    EventKind::Trainable { .. } => FINITE,
                })
            }
            Term::Start(inner, span) | Term::Before(inner, span) => {
                let s = self.check_term(inner)?;
                let which = if matches!(t, Term::Start(..)) {
                    "Start"
                } else {
                    "Before"
                };
                if s.left_infinite {
                    return semantic(*span, format!("{which}({inner}) needs a finite left side"));
                }
                Ok(if which == "Start" {
                    FINITE
                } else {
                    Shape {
                        left_infinite: true,
                        right_infinite: false,
                    }
                })
            }
            Term::End(inner, span) | Term::After(inner, span) => {
                let s = self.check_term(inner)?;
                let which = if matches!(t, Term::End(..)) {
                    "End"
                } else {
                    "After"
                };
                if s.right_infinite {
                    return semantic(*span, format!("{which}({inner}) needs a finite right side"));
                }
                Ok(if which == "End" {
                    FINITE
                } else {
                    Shape {
                        left_infinite: false,
                        right_infinite: true,
                    }
                })
            }
            Term::Crisp { lo, hi, span } => {
                if lo > hi {
                    return semantic(*span, format!("crisp interval [{lo}, {hi}] is reversed"));
                }
                Ok(FINITE)
            }
        }
    }

    fn check_time(&self, t: &TimeExpr, scope: &[String]) -> Result<(), KbError> {
        if let TimeExpr::Name(id) = t {
            if scope.contains(&id.name) {
                return Ok(());
            }
            match self.symbol(&id.name) {
                Some(Symbol::Scalar(_)) => {}
                Some(Symbol::Event(_)) => {
                    return semantic(
                        id.span,
                        format!("`{}` is an event, expected a time point", id.name),
                    )
                }
                None => return semantic(id.span, format!("undeclared scalar `{}`", id.name)),
            }
        }
        Ok(())
    }

    fn check_expr(&self, e: &Expr, scope: &mut Vec<String>) -> Result<(), KbError> {
        match e {
            Expr::Relation {
                rel, left, right, ..
            } => {
                let l = self.check_term(left)?;
                let r = self.check_term(right)?;
                let [ls, le, rs, re] = rel.finiteness();
                let side = |need: bool, inf: bool, which: &str, t: &Term| {
                    if need && inf {
                        semantic(
                            t.span(),
                            format!("`{t}` must have a finite {which} side for `{rel}`"),
                        )
                    } else {
                        Ok(())
                    }
                };
                side(ls, l.left_infinite, "left", left)?;
                side(le, l.right_infinite, "right", left)?;
                side(rs, r.left_infinite, "left", right)?;
                side(re, r.right_infinite, "right", right)?;
                Ok(())
            }
            Expr::Duration { term, .. } => {
                let s = self.check_term(term)?;
                if s != FINITE {
                    return semantic(term.span(), format!("duration of `{term}` is infinite"));
                }
                Ok(())
            }
            Expr::Membership { term, time, .. } => {
                self.check_term(term)?;
                self.check_time(time, scope)
            }
            Expr::Happ { event, .. } => self.check_event_name(event).map(|_| ()),
            Expr::Active { event, time, .. } => {
                self.check_event_name(event)?;
                self.check_time(time, scope)
            }
            Expr::Not(x, _) => self.check_expr(x, scope),
            Expr::And(l, r, _) | Expr::Or(l, r, _) | Expr::Implies(l, r, _) => {
                self.check_expr(l, scope)?;
                self.check_expr(r, scope)
            }
            Expr::Forall {
                var,
                lo,
                hi,
                body,
                span,
            } => {
                if self.symbol(&var.name).is_some() || scope.contains(&var.name) {
                    return semantic(var.span, format!("`{}` shadows another name", var.name));
                }
                if lo > hi {
                    return semantic(*span, format!("empty range [{lo}, {hi}]"));
                }
                if hi - lo >= MAX_FORALL_POINTS {
                    return semantic(
                        *span,
                        format!("range [{lo}, {hi}] exceeds {MAX_FORALL_POINTS} points"),
                    );
                }
                scope.push(var.name.clone());
                let r = self.check_expr(body, scope);
                scope.pop();
                r
            }
        }
    }

    pub fn trainable_count(&self) -> usize {
        let ev = self
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Trainable { .. }))
            .count();
        let sc = self
            .scalars
            .iter()
            .filter(|s| matches!(s.kind, ScalarKind::Trainable { .. }))
            .count();
        5 * ev + sc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn semantic_at(src: &str) -> (Span, String) {
        match parse_kb(src) {
            Err(KbError::Semantic { pos, msg }) => (pos, msg),
            other => panic!("expected a semantic error, got {other:?}"),
        }
    }

    #[test]
    fn undeclared_name() {
        let (pos, msg) = semantic_at("constraint B bf C");
        assert_eq!(pos, Span { line: 1, col: 12 });
        assert!(msg.contains("`B`"), "{msg}");
    }

    #[test]
    fn kind_mismatch_and_duplicates() {
        let (_, msg) = semantic_at("scalar x fixed 1\nconstraint x bf x");
        assert!(msg.contains("scalar"));
        let (_, msg) = semantic_at("event A trainable\nconstraint A at A");
        assert!(msg.contains("event"));
        let (pos, _) = semantic_at("event A trainable\nscalar A fixed 0");
        assert_eq!(pos.line, 2);
    }

    #[test]
    fn infinite_sides_rejected() {
        let (pos, msg) =
            semantic_at("event A fixed trapezoid(-inf, -inf, 1, 2)\nconstraint Start(A) at 0");
        assert_eq!(pos, Span { line: 2, col: 12 });
        assert!(msg.contains("Start"));
        semantic_at("event A fixed trapezoid(0, 1, inf, inf)\nconstraint After(A) at 0");
        semantic_at("event A fixed trapezoid(0, 1, inf, inf)\nconstraint A eq A");
        semantic_at("event A fixed trapezoid(0, 1, inf, inf)\nconstraint duration(A) ~= 1");
        // `in` only needs a finite left operand.
        parse_kb("event A fixed trapezoid(0, 1, inf, inf)\nevent B trainable\nconstraint B in A")
            .unwrap();
    }

    #[test]
    fn malformed_declarations() {
        semantic_at("event A fixed trapezoid(3, 2, 1, 0)");
        semantic_at("event A fixed trapezoid(0, 1, 2, 3) happ 1.5");
        semantic_at("horizon 0");
        semantic_at("horizon 1\nhorizon 2");
        semantic_at("event A trainable\nconstraint forall A in [0, 1] : A at 0");
        semantic_at("event A trainable\nconstraint forall t in [3, 1] : A at t");
        semantic_at("event A trainable\nconstraint [3, 1] bf A");
    }

    #[test]
    fn forall_scope() {
        let kb = parse_kb("event A trainable\nconstraint forall t in [0, 3] : A at t").unwrap();
        assert_eq!(kb.constraints.len(), 1);
        semantic_at("event A trainable\nconstraint (forall t in [0, 3] : A at t) and A at t");
    }

    #[test]
    fn horizon_fallback() {
        let kb =
            parse_kb("event A fixed trapezoid(-inf, -inf, 4, 7.5)\nscalar x trainable init -9")
                .unwrap();
        assert_eq!(kb.effective_horizon(), 9.0);
        assert_eq!(parse_kb("").unwrap().effective_horizon(), 1.0);
    }
}
