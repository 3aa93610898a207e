use std::str::FromStr;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::KbError;
use crate::relations::Relation;

/// Parses program text. Only syntax is checked here; see
/// [`super::KnowledgeBase::from_program`] for name and shape checks.
pub fn parse_program(src: &str) -> Result<Program, KbError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, KbError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(KbError::Parse {
            pos: self.span(),
            msg: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.is_word(w) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{w}`"))
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            self.error(&tok.describe())
        }
    }

    fn name(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let span = self.bump().span;
                Ok(Ident { name: s, span })
            }
            Tok::Ident(s) => Err(KbError::Parse {
                pos: self.span(),
                msg: format!("`{s}` is a reserved word and cannot be used as a name"),
            }),
            _ => self.error("a name"),
        }
    }

    /// A real literal: optional `-`, then a number or `inf`.
    fn number(&mut self) -> PResult<f64> {
        let negate = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let v = match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                v
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                f64::INFINITY
            }
            _ => return self.error("a number"),
        };
        Ok(if negate { -v } else { v })
    }

    fn finite_number(&mut self) -> PResult<f64> {
        let span = self.span();
        let v = self.number()?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(KbError::Parse {
                pos: span,
                msg: "expected a finite number".into(),
            })
        }
    }

    fn integer(&mut self) -> PResult<i64> {
        let span = self.span();
        let v = self.finite_number()?;
        if v.fract() == 0.0 && v.abs() < 9.0e15 {
            Ok(v as i64)
        } else {
            Err(KbError::Parse {
                pos: span,
                msg: format!("expected an integer, found {v}"),
            })
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.error("end of line"),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline => {
                    self.bump();
                }
                _ => {
                    items.push(self.item()?);
                    self.end_of_line()?;
                }
            }
        }
        Ok(Program { items })
    }

    fn item(&mut self) -> PResult<Item> {
        let span = self.span();
        if self.eat_word("event") {
            let name = self.name()?;
            let kind = if self.eat_word("fixed") {
                self.expect_word("trapezoid")?;
                self.expect(Tok::LParen)?;
                let mut params = [0.0; 4];
                for (i, p) in params.iter_mut().enumerate() {
                    if i > 0 {
                        self.expect(Tok::Comma)?;
                    }
                    *p = self.number()?;
                }
                self.expect(Tok::RParen)?;
                let happ = if self.eat_word("happ") {
                    Some(self.finite_number()?)
                } else {
                    None
                };
                EventKind::Fixed { params, happ }
            } else if self.eat_word("trainable") {
                let init = if self.eat_word("init") {
                    self.expect_word("logits")?;
                    self.expect(Tok::LParen)?;
                    let mut l = [0.0; 5];
                    for (i, p) in l.iter_mut().enumerate() {
                        if i > 0 {
                            self.expect(Tok::Comma)?;
                        }
                        *p = self.finite_number()?;
                    }
                    self.expect(Tok::RParen)?;
                    Some(l)
                } else {
                    None
                };
                EventKind::Trainable { init }
            } else {
                return self.error("`fixed` or `trainable`");
            };
            Ok(Item::Event { name, kind, span })
        } else if self.eat_word("scalar") {
            let name = self.name()?;
            let kind = if self.eat_word("fixed") {
                ScalarKind::Fixed(self.finite_number()?)
            } else if self.eat_word("trainable") {
                let init = if self.eat_word("init") {
                    Some(self.finite_number()?)
                } else {
                    None
                };
                ScalarKind::Trainable { init }
            } else {
                return self.error("`fixed` or `trainable`");
            };
            Ok(Item::Scalar { name, kind, span })
        } else if self.eat_word("horizon") {
            let value = self.finite_number()?;
            Ok(Item::Horizon { value, span })
        } else if self.eat_word("constraint") {
            let expr = self.expr()?;
            Ok(Item::Constraint { expr, span })
        } else {
            self.error("`event`, `scalar`, `horizon` or `constraint`")
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.is_word("forall") {
            let span = self.bump().span;
            let var = self.name()?;
            self.expect_word("in")?;
            self.expect(Tok::LBracket)?;
            let lo = self.integer()?;
            self.expect(Tok::Comma)?;
            let hi = self.integer()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Colon)?;
            let body = self.expr()?;
            return Ok(Expr::Forall {
                var,
                lo,
                hi,
                body: Box::new(body),
                span,
            });
        }
        self.implication()
    }

    fn implication(&mut self) -> PResult<Expr> {
        let lhs = self.disjunction()?;
        if self.is_word("implies") {
            let span = self.bump().span;
            let rhs = if self.is_word("forall") {
                self.expr()?
            } else {
                self.implication()?
            };
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs), span));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Expr> {
        let mut lhs = self.conjunction()?;
        while self.is_word("or") {
            let span = self.bump().span;
            let rhs = self.conjunction()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.is_word("and") {
            let span = self.bump().span;
            let rhs = self.unary()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_word("not") {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr::Not(Box::new(inner), span));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        if *self.peek() == Tok::LParen {
            self.bump();
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        if self.is_word("duration") && *self.peek_at(1) == Tok::LParen {
            self.bump();
            self.expect(Tok::LParen)?;
            let term = self.term()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Approx)?;
            let target = self.finite_number()?;
            return Ok(Expr::Duration { term, target, span });
        }
        if self.is_word("happ") {
            self.bump();
            self.expect(Tok::LParen)?;
            let event = self.name()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::Happ { event, span });
        }
        if self.is_word("active") {
            self.bump();
            self.expect(Tok::LParen)?;
            let event = self.name()?;
            self.expect(Tok::RParen)?;
            self.expect_word("at")?;
            let time = self.time()?;
            return Ok(Expr::Active { event, time, span });
        }
        let left = self.term()?;
        if self.eat_word("at") {
            let time = self.time()?;
            return Ok(Expr::Membership {
                term: left,
                time,
                span,
            });
        }
        let rel = match self.peek() {
            Tok::Ident(s) => Relation::from_str(s).ok(),
            _ => None,
        };
        let Some(rel) = rel else {
            return self.error("a relation (in, eq, bf, af, mt, ol, st, dr, fin) or `at`");
        };
        self.bump();
        let right = self.term()?;
        Ok(Expr::Relation {
            rel,
            left,
            right,
            span,
        })
    }

    fn term(&mut self) -> PResult<Term> {
        let span = self.span();
        if *self.peek() == Tok::LBracket {
            self.bump();
            let lo_span = self.span();
            let lo = self.integer()?;
            self.expect(Tok::Comma)?;
            let hi = self.integer()?;
            self.expect(Tok::RBracket)?;
            if lo < 0 || hi < 0 {
                return Err(KbError::Parse {
                    pos: lo_span,
                    msg: "crisp interval bounds must be non-negative time points".into(),
                });
            }
            return Ok(Term::Crisp {
                lo: lo as u64,
                hi: hi as u64,
                span,
            });
        }
        type Wrap = fn(Box<Term>, Span) -> Term;
        let wrap: Option<Wrap> = match self.peek() {
            Tok::Ident(s) if s == "Start" => Some(Term::Start),
            Tok::Ident(s) if s == "End" => Some(Term::End),
            Tok::Ident(s) if s == "Before" => Some(Term::Before),
            Tok::Ident(s) if s == "After" => Some(Term::After),
            _ => None,
        };
        if let Some(wrap) = wrap {
            self.bump();
            self.expect(Tok::LParen)?;
            let inner = self.term()?;
            self.expect(Tok::RParen)?;
            return Ok(wrap(Box::new(inner), span));
        }
        match self.peek() {
            Tok::Ident(_) => Ok(Term::Name(self.name()?)),
            _ => self
                .error("an event, `Start(..)`, `End(..)`, `Before(..)`, `After(..)` or `[i, j]`"),
        }
    }

    fn time(&mut self) -> PResult<TimeExpr> {
        let span = self.span();
        match self.peek() {
            Tok::Ident(s) if s != "inf" => Ok(TimeExpr::Name(self.name()?)),
            _ => Ok(TimeExpr::Number(self.finite_number()?, span)),
        }
    }
}
