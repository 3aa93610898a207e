use super::ast::{Expr, Term, TimeExpr};
use super::{KbError, KnowledgeBase, Symbol};
use crate::autodiff::{smooth_membership, DiffInterval, DiffScalar, TapeAlgebra};
use crate::interval::FuzzyInterval;
use crate::logic::TNorm;
use crate::relations::{relate, IntervalAlgebra};

/// Realized groundings on a tape, indexed like the knowledge base's
/// declarations.
pub(crate) struct Env<'a> {
    pub kb: &'a KnowledgeBase,
    pub events: &'a [(DiffInterval, DiffScalar)],
    pub scalars: &'a [DiffScalar],
}

pub(crate) struct Evaluator<'a, 't> {
    pub alg: TapeAlgebra<'t>,
    pub env: Env<'a>,
    bound: Vec<(String, f64)>,
}

impl<'a, 't> Evaluator<'a, 't> {
    pub fn new(alg: TapeAlgebra<'t>, env: Env<'a>) -> Self {
        Evaluator {
            alg,
            env,
            bound: Vec::new(),
        }
    }

    fn term(&mut self, t: &Term) -> Result<DiffInterval, KbError> {
        let wrap = |e| KbError::Evaluation {
            pos: t.span(),
            source: e,
        };
        match t {
            Term::Name(id) => match self.env.kb.symbol(&id.name) {
                Some(Symbol::Event(i)) => Ok(self.env.events[i].0),
                _ => unreachable!("names are resolved when the knowledge base is built"),
            },
            Term::Start(x, _) => {
                let x = self.term(x)?;
                self.alg.start(&x).map_err(wrap)
            }
            Term::End(x, _) => {
                let x = self.term(x)?;
                self.alg.end(&x).map_err(wrap)
            }
            Term::Before(x, _) => {
                let x = self.term(x)?;
                self.alg.before(&x).map_err(wrap)
            }
            Term::After(x, _) => {
                let x = self.term(x)?;
                self.alg.after(&x).map_err(wrap)
            }
            Term::Crisp { lo, hi, .. } => {
                let i = FuzzyInterval::crisp(*lo, *hi).map_err(wrap)?;
                Ok(DiffInterval::constant(&i))
            }
        }
    }

    fn time(&self, t: &TimeExpr) -> DiffScalar {
        match t {
            TimeExpr::Number(v, _) => DiffScalar::constant(*v),
            TimeExpr::Name(id) => {
                if let Some((_, v)) = self.bound.iter().rev().find(|(n, _)| *n == id.name) {
                    return DiffScalar::constant(*v);
                }
                match self.env.kb.symbol(&id.name) {
                    Some(Symbol::Scalar(i)) => self.env.scalars[i],
                    _ => unreachable!("names are resolved when the knowledge base is built"),
                }
            }
        }
    }

    /// `1 - T(1 - u, 1 - v)`.
    fn co_conj(&mut self, u: DiffScalar, v: DiffScalar) -> DiffScalar {
        let nu = self.alg.tape.one_minus(u);
        let nv = self.alg.tape.one_minus(v);
        let c = self.alg.conj(nu, nv);
        self.alg.tape.one_minus(c)
    }

    pub fn expr(&mut self, e: &Expr) -> Result<DiffScalar, KbError> {
        match e {
            Expr::Relation {
                rel,
                left,
                right,
                span,
            } => {
                let l = self.term(left)?;
                let r = self.term(right)?;
                relate(&mut self.alg, *rel, &l, &r)
                    .map_err(|source| KbError::Evaluation { pos: *span, source })
            }
            Expr::Duration { term, target, span } => {
                let i = self.term(term)?;
                let d = i
                    .duration(self.alg.tape)
                    .map_err(|source| KbError::Evaluation { pos: *span, source })?;
                // exp(-|d - k|)
                let diff = self.alg.tape.add_const(d, -target);
                let dist = self.alg.tape.abs(diff);
                let neg = self.alg.tape.neg(dist);
                Ok(self.alg.tape.exp(neg))
            }
            Expr::Membership { term, time, .. } => {
                let i = self.term(term)?;
                let x = self.time(time);
                Ok(smooth_membership(self.alg.tape, &i, x, self.alg.smooth))
            }
            Expr::Happ { event, .. } => Ok(self.event(&event.name).1),
            Expr::Active { event, time, .. } => {
                let (i, h) = self.event(&event.name);
                let x = self.time(time);
                let m = smooth_membership(self.alg.tape, &i, x, self.alg.smooth);
                Ok(self.alg.conj(m, h))
            }
            Expr::Not(x, _) => {
                let u = self.expr(x)?;
                Ok(self.alg.tape.one_minus(u))
            }
            Expr::And(l, r, _) => {
                let u = self.expr(l)?;
                let v = self.expr(r)?;
                Ok(self.alg.conj(u, v))
            }
            Expr::Or(l, r, _) => {
                let u = self.expr(l)?;
                let v = self.expr(r)?;
                Ok(self.co_conj(u, v))
            }
            Expr::Implies(l, r, _) => {
                let u = self.expr(l)?;
                let v = self.expr(r)?;
                if self.alg.t_norm == TNorm::Product {
                    // 1 - u + u v
                    let uv = self.alg.tape.mul(u, v);
                    let nu = self.alg.tape.one_minus(u);
                    Ok(self.alg.tape.add(nu, uv))
                } else {
                    let nu = self.alg.tape.one_minus(u);
                    Ok(self.co_conj(nu, v))
                }
            }
            Expr::Forall {
                var, lo, hi, body, ..
            } => {
                // Product over the batch, whatever the connective t-norm.
                let mut acc = DiffScalar::constant(1.0);
                for t in *lo..=*hi {
                    self.bound.push((var.name.clone(), t as f64));
                    let v = self.expr(body);
                    self.bound.pop();
                    acc = self.alg.tape.mul(acc, v?);
                }
                Ok(acc)
            }
        }
    }

    fn event(&self, name: &str) -> (DiffInterval, DiffScalar) {
        match self.env.kb.symbol(name) {
            Some(Symbol::Event(i)) => self.env.events[i],
            _ => unreachable!("names are resolved when the knowledge base is built"),
        }
    }
}
