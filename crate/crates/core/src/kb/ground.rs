use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EventKind, KnowledgeBase, ScalarKind};
use crate::autodiff::{sigmoid, softplus, DiffInterval, DiffScalar, Tape};
use crate::interval::FuzzyInterval;
use crate::logic::{Event, TruthValue};

/// Realization always uses unit temperature for the logit softplus; the
/// smoothing temperature only affects relation and membership gradients.
const REALIZE_BETA: f64 = 1.0;

/// Half-width of the uniform range for logits without an explicit init.
const RANDOM_LOGIT_SPREAD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum EventGrounding {
    Fixed {
        interval: FuzzyInterval,
        happ: f64,
    },
    /// `gap_logits` map to `(a, b - a, c - b, d - c)` through softplus.
    Trainable {
        happ_logit: f64,
        gap_logits: [f64; 4],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarGrounding {
    pub value: f64,
    pub trainable: bool,
}

fn realize_params(gap_logits: [f64; 4]) -> [f64; 4] {
    let mut acc = 0.0;
    let mut out = [0.0; 4];
    for (k, l) in gap_logits.into_iter().enumerate() {
        let gap = softplus(l, REALIZE_BETA);
        acc = if k == 0 { gap } else { acc + gap };
        out[k] = acc;
    }
    out
}

impl EventGrounding {
    pub fn is_trainable(&self) -> bool {
        matches!(self, EventGrounding::Trainable { .. })
    }

    /// The interval and happening degree this grounding denotes.
    pub fn interval_and_happ(&self) -> (FuzzyInterval, f64) {
        match self {
            EventGrounding::Fixed { interval, happ } => (*interval, *happ),
            EventGrounding::Trainable {
                happ_logit,
                gap_logits,
            } => {
                let [a, b, c, d] = realize_params(*gap_logits);
                let interval =
                    FuzzyInterval::new(a, b, c, d).expect("cumulative softplus is ordered");
                (interval, sigmoid(*happ_logit))
            }
        }
    }

    /// Records the realization on `tape`. Returns the realized interval,
    /// happening degree, and the fresh logit variables (empty when fixed).
    pub(crate) fn realize_on(
        &self,
        tape: &mut Tape,
    ) -> (DiffInterval, DiffScalar, Vec<DiffScalar>) {
        match self {
            EventGrounding::Fixed { interval, happ } => (
                DiffInterval::constant(interval),
                DiffScalar::constant(*happ),
                Vec::new(),
            ),
            EventGrounding::Trainable {
                happ_logit,
                gap_logits,
            } => {
                let h = tape.var(*happ_logit);
                let ls: Vec<DiffScalar> = gap_logits.iter().map(|l| tape.var(*l)).collect();
                let mut params = [DiffScalar::constant(0.0); 4];
                for (k, l) in ls.iter().enumerate() {
                    let gap = tape.softplus(*l, REALIZE_BETA);
                    params[k] = if k == 0 {
                        gap
                    } else {
                        tape.add(params[k - 1], gap)
                    };
                }
                let interval =
                    DiffInterval::from_params(params).expect("cumulative softplus is ordered");
                let happ = tape.sigmoid(h);
                let mut vars = vec![h];
                vars.extend(ls);
                (interval, happ, vars)
            }
        }
    }
}

/// The plain event a grounding denotes.
pub fn realize(label: &str, g: &EventGrounding) -> Event {
    let (interval, happ) = g.interval_and_happ();
    Event::new(label, interval, TruthValue::clamped(happ))
}

/// Groundings for every declared event and scalar, in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Groundings {
    pub events: Vec<EventGrounding>,
    pub scalars: Vec<ScalarGrounding>,
}

impl Groundings {
    /// Declared initial values. Trainable events without `init` draw their
    /// logits uniformly from (-0.5, 0.5); trainable scalars without `init`
    /// draw uniformly from [0, horizon]. Both use `seed`.
    pub fn initial(kb: &KnowledgeBase, seed: u64, horizon: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let events = kb
            .events
            .iter()
            .map(|e| match &e.kind {
                EventKind::Fixed {
                    params: [a, b, c, d],
                    happ,
                } => EventGrounding::Fixed {
                    interval: FuzzyInterval::new(*a, *b, *c, *d)
                        .expect("checked when the knowledge base was built"),
                    happ: happ.unwrap_or(1.0),
                },
                EventKind::Trainable { init } => {
                    let l = init.unwrap_or_else(|| {
                        std::array::from_fn(|_| {
                            rng.gen_range(-RANDOM_LOGIT_SPREAD..RANDOM_LOGIT_SPREAD)
                        })
                    });
                    EventGrounding::Trainable {
                        happ_logit: l[0],
                        gap_logits: [l[1], l[2], l[3], l[4]],
                    }
                }
            })
            .collect();
        let scalars = kb
            .scalars
            .iter()
            .map(|s| match s.kind {
                ScalarKind::Fixed(v) => ScalarGrounding {
                    value: v,
                    trainable: false,
                },
                ScalarKind::Trainable { init } => ScalarGrounding {
                    value: init.unwrap_or_else(|| rng.gen_range(0.0..=horizon)),
                    trainable: true,
                },
            })
            .collect();
        Groundings { events, scalars }
    }

    /// Flattened trainable parameters: five logits per trainable event
    /// (happ first), then trainable scalars.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for e in &self.events {
            if let EventGrounding::Trainable {
                happ_logit,
                gap_logits,
            } = e
            {
                out.push(*happ_logit);
                out.extend_from_slice(gap_logits);
            }
        }
        out.extend(self.scalars.iter().filter(|s| s.trainable).map(|s| s.value));
        out
    }

    /// Inverse of [`Groundings::parameters`].
    pub fn set_parameters(&mut self, theta: &[f64]) {
        let mut it = theta.iter().copied();
        let mut next = || it.next().expect("parameter vector too short");
        for e in &mut self.events {
            if let EventGrounding::Trainable {
                happ_logit,
                gap_logits,
            } = e
            {
                *happ_logit = next();
                for g in gap_logits.iter_mut() {
                    *g = next();
                }
            }
        }
        for s in self.scalars.iter_mut().filter(|s| s.trainable) {
            s.value = next();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_kb;

    #[test]
    fn zero_logits() {
        let g = EventGrounding::Trainable {
            happ_logit: 0.0,
            gap_logits: [0.0; 4],
        };
        let (i, h) = g.interval_and_happ();
        let ln2 = std::f64::consts::LN_2;
        for (got, want) in i
            .params()
            .into_iter()
            .zip([ln2, 2.0 * ln2, 3.0 * ln2, 4.0 * ln2])
        {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((i.params()[3] - 2.7726).abs() < 1e-4);
        assert_eq!(h, 0.5);
        assert_eq!(realize("B", &g).interval, i);
    }

    #[test]
    fn fixed_is_identity() {
        let i = FuzzyInterval::new(0.0, 1.0, 2.0, 3.0).unwrap();
        let g = EventGrounding::Fixed {
            interval: i,
            happ: 0.8,
        };
        assert_eq!(g.interval_and_happ(), (i, 0.8));
    }

    #[test]
    fn large_negative_gaps_stay_ordered() {
        let g = EventGrounding::Trainable {
            happ_logit: 0.0,
            gap_logits: [2.0, -40.0, -800.0, -40.0],
        };
        let [a, b, c, d] = g.interval_and_happ().0.params();
        assert!(a <= b && b <= c && c <= d);
        assert!(d - a < 1e-12);
    }

    #[test]
    fn tape_realization_matches_plain() {
        let g = EventGrounding::Trainable {
            happ_logit: -0.3,
            gap_logits: [0.4, 1.7, -2.0, 0.9],
        };
        let mut t = Tape::new();
        let (i, h, vars) = g.realize_on(&mut t);
        assert_eq!(vars.len(), 5);
        let (pi, ph) = g.interval_and_happ();
        assert_eq!(i.value(), pi);
        assert_eq!(h.value(), ph);
        // d depends on every gap logit with slope sigmoid(l).
        let grads = t.backward(i.params()[3]).unwrap();
        for (v, l) in vars[1..].iter().zip([0.4, 1.7, -2.0, 0.9]) {
            assert!((grads.get(v) - sigmoid(l)).abs() < 1e-15);
        }
    }

    #[test]
    fn parameters_roundtrip_and_seeded_init() {
        let kb = parse_kb("event A trainable\nevent C fixed trapezoid(0,1,2,3)\nscalar x trainable\nscalar y fixed 2").unwrap();
        let g1 = Groundings::initial(&kb, 7, 10.0);
        let g2 = Groundings::initial(&kb, 7, 10.0);
        assert_eq!(g1, g2);
        assert_ne!(g1, Groundings::initial(&kb, 8, 10.0));
        let theta = g1.parameters();
        assert_eq!(theta.len(), 6);
        assert!(theta[..5].iter().all(|l| l.abs() < 0.5));
        assert!((0.0..=10.0).contains(&theta[5]));
        let mut g3 = g1.clone();
        g3.set_parameters(&theta.iter().map(|v| v + 1.0).collect::<Vec<_>>());
        assert_eq!(g3.parameters()[5], theta[5] + 1.0);
        assert_eq!(g3.scalars[1].value, 2.0);
    }
}
