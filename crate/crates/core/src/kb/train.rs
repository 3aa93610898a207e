use serde::Serialize;

use super::eval::{Env, Evaluator};
use super::{Groundings, KbError, KnowledgeBase};
use crate::autodiff::{DiffScalar, SmoothConfig, Tape, TapeAlgebra};
use crate::interval::DEFAULT_DELTA_MIN;
use crate::logic::TNorm;
use crate::relations::IntervalAlgebra;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    /// Overrides the knowledge base's horizon.
    pub horizon: Option<f64>,
    pub delta_min: f64,
    /// Softplus temperature; `None` means `1 / horizon`.
    pub beta: Option<f64>,
    /// Stop once satisfaction reaches this value.
    pub target: Option<f64>,
    pub t_norm: TNorm,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 100,
            lr: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            horizon: None,
            delta_min: DEFAULT_DELTA_MIN,
            beta: None,
            target: None,
            t_norm: TNorm::Product,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), KbError> {
        let bad = |m: String| Err(KbError::Config(m));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam moment decay rates must lie in [0, 1)".into());
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.delta_min > 0.0 && self.delta_min.is_finite()) {
            return bad(format!(
                "delta_min must be positive, got {}",
                self.delta_min
            ));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("horizon must be positive, got {h}"));
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("beta must be positive, got {b}"));
            }
        }
        Ok(())
    }

    pub fn horizon_for(&self, kb: &KnowledgeBase) -> f64 {
        self.horizon.unwrap_or_else(|| kb.effective_horizon())
    }

    pub fn smooth_for(&self, kb: &KnowledgeBase) -> SmoothConfig {
        let cfg = SmoothConfig::from_horizon(self.horizon_for(kb));
        match self.beta {
            Some(b) => cfg.with_beta(b),
            None => cfg,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        TrainConfig::default().adam()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, cfg: &AdamConfig) {
    assert_eq!(params.len(), grads.len());
    if state.m.len() != params.len() {
        *state = AdamState::new(params.len());
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// Truth values of every constraint and their conjunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub satisfaction: f64,
    pub constraints: Vec<f64>,
}

struct Recorded {
    satisfaction: DiffScalar,
    constraints: Vec<DiffScalar>,
    vars: Vec<DiffScalar>,
}

fn record(
    tape: &mut Tape,
    kb: &KnowledgeBase,
    g: &Groundings,
    cfg: &TrainConfig,
    smooth: SmoothConfig,
) -> Result<Recorded, KbError> {
    let mut vars = Vec::new();
    let mut events = Vec::with_capacity(g.events.len());
    for e in &g.events {
        let (i, h, v) = e.realize_on(tape);
        events.push((i, h));
        vars.extend(v);
    }
    let mut scalars = Vec::with_capacity(g.scalars.len());
    let mut scalar_vars = Vec::new();
    for s in &g.scalars {
        if s.trainable {
            let v = tape.var(s.value);
            scalars.push(v);
            scalar_vars.push(v);
        } else {
            scalars.push(DiffScalar::constant(s.value));
        }
    }
    vars.extend(scalar_vars);
    let mut alg = TapeAlgebra::new(tape, smooth, cfg.delta_min);
    alg.t_norm = cfg.t_norm;
    let mut ev = Evaluator::new(
        alg,
        Env {
            kb,
            events: &events,
            scalars: &scalars,
        },
    );
    let mut constraints = Vec::with_capacity(kb.constraints.len());
    for c in &kb.constraints {
        constraints.push(ev.expr(&c.expr)?);
    }
    let mut sat = DiffScalar::constant(1.0);
    for (k, c) in constraints.iter().enumerate() {
        sat = if k == 0 { *c } else { ev.alg.conj(sat, *c) };
    }
    Ok(Recorded {
        satisfaction: sat,
        constraints,
        vars,
    })
}

/// Evaluates every constraint at the given groundings, without training.
pub fn evaluate(
    kb: &KnowledgeBase,
    g: &Groundings,
    cfg: &TrainConfig,
) -> Result<Evaluation, KbError> {
    cfg.validate()?;
    let mut tape = Tape::new();
    let r = record(&mut tape, kb, g, cfg, cfg.smooth_for(kb))?;
    Ok(Evaluation {
        satisfaction: r.satisfaction.value(),
        constraints: r.constraints.iter().map(|c| c.value()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub loss: f64,
    pub satisfaction: f64,
    pub constraints: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRun {
    /// One record per evaluated step, starting with the initial groundings.
    pub history: Vec<StepRecord>,
    /// Groundings at the last record.
    pub groundings: Groundings,
    pub early_stopped: bool,
    pub smooth: SmoothConfig,
}

impl TrainRun {
    pub fn last(&self) -> &StepRecord {
        self.history
            .last()
            .expect("history always holds the initial record")
    }
}

/// Maximizes satisfaction (minimizes `1 - satisfaction`) with Adam.
///
/// Records `steps + 1` entries unless the target is reached first; the
/// returned groundings are those of the last record.
pub fn train(
    kb: &KnowledgeBase,
    init: &Groundings,
    cfg: &TrainConfig,
) -> Result<TrainRun, KbError> {
    cfg.validate()?;
    let mut g = init.clone();
    let mut theta = g.parameters();
    if theta.is_empty() {
        return Err(KbError::NothingToTrain);
    }
    let smooth = cfg.smooth_for(kb);
    let adam = cfg.adam();
    let mut state = AdamState::new(theta.len());
    let mut history = Vec::with_capacity(cfg.steps + 1);
    let mut early_stopped = false;
    for step in 0..=cfg.steps {
        let mut tape = Tape::new();
        let r = record(&mut tape, kb, &g, cfg, smooth)?;
        let constraints: Vec<f64> = r.constraints.iter().map(|c| c.value()).collect();
        for (index, value) in constraints.iter().enumerate() {
            if !value.is_finite() {
                return Err(KbError::NonFinite {
                    index,
                    text: kb.constraints[index].text.clone(),
                    value: *value,
                    step,
                });
            }
        }
        let satisfaction = r.satisfaction.value();
        history.push(StepRecord {
            step,
            loss: 1.0 - satisfaction,
            satisfaction,
            constraints,
        });
        if cfg.target.is_some_and(|t| satisfaction >= t) {
            early_stopped = step < cfg.steps;
            break;
        }
        if step == cfg.steps {
            break;
        }
        let loss = tape.one_minus(r.satisfaction);
        let grads = tape.backward(loss).expect("loss was recorded on this tape");
        let gvec: Vec<f64> = r.vars.iter().map(|v| grads.get(v)).collect();
        if let Some(k) = gvec.iter().position(|x| !x.is_finite()) {
            let index = worst_constraint(&tape, &r.constraints, &r.vars, k);
            return Err(KbError::NonFinite {
                index,
                text: kb.constraints[index].text.clone(),
                value: gvec[k],
                step,
            });
        }
        adam_step(&mut theta, &gvec, &mut state, &adam);
        g.set_parameters(&theta);
        for e in &g.events {
            let [a, b, c, d] = e.interval_and_happ().0.params();
            debug_assert!(a <= b && b <= c && c <= d);
        }
    }
    Ok(TrainRun {
        history,
        groundings: g,
        early_stopped,
        smooth,
    })
}

/// First constraint whose own gradient in parameter `k` is not finite.
fn worst_constraint(
    tape: &Tape,
    constraints: &[DiffScalar],
    vars: &[DiffScalar],
    k: usize,
) -> usize {
    constraints
        .iter()
        .position(|c| {
            !tape
                .backward(*c)
                .map(|g| g.get(&vars[k]).is_finite())
                .unwrap_or(true)
        })
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_kb;

    fn eval_src(src: &str) -> Evaluation {
        let kb = parse_kb(src).unwrap();
        let g = Groundings::initial(&kb, 0, kb.effective_horizon());
        evaluate(&kb, &g, &TrainConfig::default()).unwrap()
    }

    #[test]
    fn reflexive_and_negated() {
        let a = "event A fixed trapezoid(0, 1, 2, 3)\n";
        assert_eq!(eval_src(&format!("{a}constraint A eq A")).satisfaction, 1.0);
        assert_eq!(
            eval_src(&format!("{a}constraint not (A eq A)")).satisfaction,
            0.0
        );
    }

    #[test]
    fn hand_configuration_satisfies_first_task() {
        let e = eval_src(
            "event A fixed trapezoid(0, 1, 2, 3)\nevent C fixed trapezoid(7, 8, 9, 10)\n\
             event B fixed trapezoid(4, 4.5, 6, 6.5)\n\
             constraint duration(B) ~= 2\nconstraint B af A\nconstraint B bf C",
        );
        assert!(e.satisfaction >= 0.95, "{e:?}");
        assert_eq!(e.constraints.len(), 3);
    }

    #[test]
    fn connectives_and_forall() {
        let e = eval_src(
            "event A fixed trapezoid(0, 2, 4, 6) happ 0.5\n\
             constraint A at 1 or A at 1\n\
             constraint A at 1 implies A at 3\n\
             constraint forall t in [2, 4] : A at t\n\
             constraint active(A) at 1\n\
             constraint happ(A)\n\
             constraint [1, 2] in A",
        );
        assert_eq!(e.constraints[0], 0.75);
        assert_eq!(e.constraints[1], 1.0);
        assert_eq!(e.constraints[2], 1.0);
        assert_eq!(e.constraints[3], 0.25);
        assert_eq!(e.constraints[4], 0.5);
        assert!((e.constraints[5] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn adam_first_step_moves_against_gradient() {
        let mut p = vec![1.0, -1.0, 0.5];
        let mut s = AdamState::default();
        adam_step(&mut p, &[2.0, -0.5, 0.0], &mut s, &AdamConfig::default());
        assert!((p[0] - 0.9).abs() < 1e-8);
        assert!((p[1] + 0.9).abs() < 1e-8);
        assert_eq!(p[2], 0.5);
        assert_eq!(s.t, 1);
        // Zero gradient afterwards: moments decay.
        let m0 = s.m[0];
        adam_step(&mut p, &[0.0, 0.0, 0.0], &mut s, &AdamConfig::default());
        assert!(s.m[0].abs() < m0.abs());
    }

    #[test]
    fn zero_steps_leave_groundings_unchanged() {
        let kb =
            parse_kb("event A fixed trapezoid(0, 1, 2, 3)\nevent B trainable\nconstraint B bf A")
                .unwrap();
        let g = Groundings::initial(&kb, 3, 10.0);
        let cfg = TrainConfig {
            steps: 0,
            ..Default::default()
        };
        let run = train(&kb, &g, &cfg).unwrap();
        assert_eq!(run.history.len(), 1);
        assert_eq!(run.groundings, g);
    }

    #[test]
    fn contradictory_constraints_complete() {
        let kb =
            parse_kb("event A trainable\nevent B trainable\nconstraint A bf B\nconstraint B bf A")
                .unwrap();
        let g = Groundings::initial(&kb, 1, 10.0);
        let cfg = TrainConfig {
            steps: 30,
            ..Default::default()
        };
        let run = train(&kb, &g, &cfg).unwrap();
        assert_eq!(run.history.len(), 31);
        assert!(run.last().satisfaction < 1.0);
        for r in &run.history {
            assert!((r.loss + r.satisfaction - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn nothing_to_train() {
        let kb = parse_kb("event A fixed trapezoid(0, 1, 2, 3)\nconstraint A eq A").unwrap();
        let g = Groundings::initial(&kb, 0, 1.0);
        assert_eq!(
            train(&kb, &g, &TrainConfig::default()),
            Err(KbError::NothingToTrain)
        );
    }

    #[test]
    fn scalar_moves_toward_plateau() {
        let kb = parse_kb("horizon 10\nevent A fixed trapezoid(4, 5, 6, 7)\nscalar x trainable init 0\nconstraint A at x").unwrap();
        let g = Groundings::initial(&kb, 0, 10.0);
        let run = train(
            &kb,
            &g,
            &TrainConfig {
                steps: 80,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(run.last().satisfaction > 0.9, "{:?}", run.last());
    }

    #[test]
    fn early_stop_honoured() {
        let kb = parse_kb("horizon 10\nevent A fixed trapezoid(4, 5, 6, 7)\nscalar x trainable init 4.5\nconstraint A at x").unwrap();
        let g = Groundings::initial(&kb, 0, 10.0);
        let cfg = TrainConfig {
            steps: 100,
            target: Some(0.4),
            ..Default::default()
        };
        let run = train(&kb, &g, &cfg).unwrap();
        assert_eq!(run.history.len(), 1);
        assert!(run.early_stopped);
    }

    #[test]
    fn adam_drift_bounded_when_satisfied() {
        // Already satisfied; the plateau surrogate still pushes x.
        let kb = parse_kb("horizon 10\nevent A fixed trapezoid(0, 1, 9, 10)\nscalar x trainable init 5\nconstraint A at x").unwrap();
        let mut g = Groundings::initial(&kb, 0, 10.0);
        let cfg = TrainConfig {
            steps: 1,
            ..Default::default()
        };
        let adam = cfg.adam();
        // Worst case of a bias-corrected Adam step.
        let bound = adam.lr * (1.0 - adam.beta1) / (1.0 - adam.beta2).sqrt();
        let mut theta = g.parameters();
        let mut state = AdamState::new(1);
        for _ in 0..10 {
            let mut tape = Tape::new();
            let r = record(&mut tape, &kb, &g, &cfg, cfg.smooth_for(&kb)).unwrap();
            assert_eq!(r.satisfaction.value(), 1.0);
            let loss = tape.one_minus(r.satisfaction);
            let grad = tape.backward(loss).unwrap().get(&r.vars[0]);
            let before = theta[0];
            adam_step(&mut theta, &[grad], &mut state, &adam);
            g.set_parameters(&theta);
            let step = (theta[0] - before).abs();
            assert!(step <= bound);
            // Slowly varying gradients keep the step within a hair of lr.
            assert!(step <= adam.lr * 1.01, "{step}");
        }
    }
}
