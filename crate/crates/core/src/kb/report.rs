//! Result documents (JSON) and sampled membership curves (CSV).

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::{Groundings, KnowledgeBase, StepRecord, TrainConfig, TrainRun};
use crate::interval::FuzzyInterval;

/// Sampling step of membership curves.
pub const CURVE_STEP: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub text: String,
    pub truth: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventReport {
    pub name: String,
    pub trainable: bool,
    pub interval: FuzzyInterval,
    pub happ: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarReport {
    pub name: String,
    pub trainable: bool,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub task: Option<String>,
    pub source: String,
    pub config: TrainConfig,
    pub horizon: f64,
    pub beta: f64,
    pub steps_run: usize,
    pub early_stopped: bool,
    pub satisfaction: f64,
    pub loss: f64,
    pub constraints: Vec<ConstraintReport>,
    pub events: Vec<EventReport>,
    pub scalars: Vec<ScalarReport>,
    pub history: Vec<StepRecord>,
    /// The only field that differs between identical runs.
    pub generated_at_unix: u64,
}

pub fn event_reports(kb: &KnowledgeBase, g: &Groundings) -> Vec<EventReport> {
    kb.events
        .iter()
        .zip(&g.events)
        .map(|(decl, eg)| {
            let (interval, happ) = eg.interval_and_happ();
            EventReport {
                name: decl.name.clone(),
                trainable: eg.is_trainable(),
                interval,
                happ,
            }
        })
        .collect()
}

pub fn scalar_reports(kb: &KnowledgeBase, g: &Groundings) -> Vec<ScalarReport> {
    kb.scalars
        .iter()
        .zip(&g.scalars)
        .map(|(decl, s)| ScalarReport {
            name: decl.name.clone(),
            trainable: s.trainable,
            value: s.value,
        })
        .collect()
}

pub fn result_document(
    kb: &KnowledgeBase,
    run: &TrainRun,
    cfg: &TrainConfig,
    task: Option<&str>,
    source: &str,
) -> ResultDocument {
    let last = run.last();
    ResultDocument {
        task: task.map(str::to_owned),
        source: source.to_owned(),
        config: cfg.clone(),
        horizon: cfg.horizon_for(kb),
        beta: run.smooth.beta,
        steps_run: last.step,
        early_stopped: run.early_stopped,
        satisfaction: last.satisfaction,
        loss: last.loss,
        constraints: kb
            .constraints
            .iter()
            .zip(&last.constraints)
            .map(|(c, t)| ConstraintReport {
                text: c.text.clone(),
                truth: *t,
            })
            .collect(),
        events: event_reports(kb, &run.groundings),
        scalars: scalar_reports(kb, &run.groundings),
        history: run.history.clone(),
        generated_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    }
}

/// Membership of every event on `[0, horizon]` at [`CURVE_STEP`]; one row
/// per sample, one column per event.
pub fn membership_csv(kb: &KnowledgeBase, g: &Groundings, horizon: f64) -> String {
    let intervals: Vec<FuzzyInterval> = g.events.iter().map(|e| e.interval_and_happ().0).collect();
    let mut out = String::from("x");
    for e in &kb.events {
        out.push(',');
        out.push_str(&e.name);
    }
    out.push('\n');
    // Dividing by the integer sample rate keeps x at the nearest decimal.
    let per_unit = (1.0 / CURVE_STEP).round();
    let n = (horizon * per_unit).round() as usize;
    for k in 0..=n {
        let x = k as f64 / per_unit;
        write!(out, "{x}").expect("writing to a String");
        for i in &intervals {
            write!(out, ",{}", i.membership(x)).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_kb, train};

    #[test]
    fn csv_shape() {
        let kb =
            parse_kb("event A fixed trapezoid(0, 1, 2, 3)\nevent B fixed trapezoid(1, 1, 1, 2)")
                .unwrap();
        let g = Groundings::initial(&kb, 0, 3.0);
        let csv = membership_csv(&kb, &g, 3.0);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,A,B");
        assert_eq!(lines.len(), 302);
        assert_eq!(lines[51], "0.5,0.5,0");
        assert_eq!(lines[301], "3,0,0");
    }

    #[test]
    fn document_serializes() {
        let kb = parse_kb("horizon 5\nevent A fixed trapezoid(-inf, -inf, 1, 2)\nscalar x trainable init 3\nconstraint A at x").unwrap();
        let g = Groundings::initial(&kb, 0, 5.0);
        let cfg = TrainConfig {
            steps: 2,
            ..Default::default()
        };
        let run = train(&kb, &g, &cfg).unwrap();
        let doc = result_document(&kb, &run, &cfg, None, "inline");
        let json = serde_json::to_value(&doc).unwrap();
        assert_eq!(json["events"][0]["interval"][0], "-inf");
        assert_eq!(json["history"].as_array().unwrap().len(), 3);
        assert_eq!(json["constraints"][0]["text"], "A at x");
        assert_eq!(json["beta"], 0.2);
    }
}
