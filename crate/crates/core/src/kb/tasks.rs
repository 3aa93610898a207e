//! The four bundled tasks.

use super::{parse_kb, KnowledgeBase, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub id: &'static str,
    pub source: &'static str,
    pub steps: usize,
    pub target: Option<f64>,
}

/// Satisfaction at which the bundled tasks stop early.
pub const TASK_TARGET: f64 = 0.99;

pub const TASKS: [Task; 4] = [
    Task {
        id: "T1",
        source: include_str!("../../tasks/t1.kb"),
        steps: 50,
        target: Some(TASK_TARGET),
    },
    Task {
        id: "T2",
        source: include_str!("../../tasks/t2.kb"),
        steps: 500,
        target: Some(TASK_TARGET),
    },
    Task {
        id: "T3",
        source: include_str!("../../tasks/t3.kb"),
        steps: 5000,
        target: Some(TASK_TARGET),
    },
    Task {
        id: "T4",
        source: include_str!("../../tasks/t4.kb"),
        steps: 200,
        target: Some(TASK_TARGET),
    },
];

/// Looks a task up by id, ignoring case.
pub fn task(id: &str) -> Option<&'static Task> {
    TASKS.iter().find(|t| t.id.eq_ignore_ascii_case(id))
}

impl Task {
    pub fn knowledge_base(&self) -> KnowledgeBase {
        parse_kb(self.source).expect("bundled tasks are valid")
    }

    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            steps: self.steps,
            target: self.target,
            ..TrainConfig::default()
        }
    }
}
