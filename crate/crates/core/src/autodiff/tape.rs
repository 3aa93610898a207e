use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TapeError {
    #[error("output belongs to tape #{found}, not tape #{expected}")]
    ForeignOutput { expected: u64, found: u64 },
}

/// A scalar recorded on a [`Tape`], or a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffScalar {
    value: f64,
    node: Option<NodeRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct NodeRef {
    tape: u64,
    index: usize,
}

impl DiffScalar {
    pub fn constant(value: f64) -> Self {
        DiffScalar { value, node: None }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_constant(&self) -> bool {
        self.node.is_none()
    }
}

#[derive(Debug, Clone)]
struct Node {
    /// `(input node index, local partial)`.
    inputs: Vec<(usize, f64)>,
}

/// Append-only record of a computation. Node `i` only ever reads nodes with
/// smaller indices, so a reverse sweep visits each node once after all of
/// its consumers.
#[derive(Debug)]
pub struct Tape {
    id: u64,
    nodes: Vec<Node>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A new independent variable.
    pub fn var(&mut self, value: f64) -> DiffScalar {
        self.push(value, Vec::new())
    }

    fn push(&mut self, value: f64, inputs: Vec<(usize, f64)>) -> DiffScalar {
        let index = self.nodes.len();
        self.nodes.push(Node { inputs });
        DiffScalar {
            value,
            node: Some(NodeRef {
                tape: self.id,
                index,
            }),
        }
    }

    fn index_of(&self, x: &DiffScalar) -> Option<usize> {
        match x.node {
            Some(r) if r.tape == self.id => Some(r.index),
            Some(r) => panic!("scalar from tape #{} used on tape #{}", r.tape, self.id),
            None => None,
        }
    }

    /// Records an operation with an explicit forward value and explicit local
    /// partials. This is how custom forward/backward pairs are expressed: the
    /// value and the partials need not come from the same function.
    pub fn custom(&mut self, value: f64, partials: &[(DiffScalar, f64)]) -> DiffScalar {
        let inputs: Vec<(usize, f64)> = partials
            .iter()
            .filter_map(|(x, p)| self.index_of(x).map(|i| (i, *p)))
            .collect();
        if inputs.is_empty() {
            return DiffScalar::constant(value);
        }
        self.push(value, inputs)
    }

    pub fn add(&mut self, x: DiffScalar, y: DiffScalar) -> DiffScalar {
        self.custom(x.value + y.value, &[(x, 1.0), (y, 1.0)])
    }

    pub fn sub(&mut self, x: DiffScalar, y: DiffScalar) -> DiffScalar {
        self.custom(x.value - y.value, &[(x, 1.0), (y, -1.0)])
    }

    pub fn mul(&mut self, x: DiffScalar, y: DiffScalar) -> DiffScalar {
        self.custom(x.value * y.value, &[(x, y.value), (y, x.value)])
    }

    pub fn div(&mut self, x: DiffScalar, y: DiffScalar) -> DiffScalar {
        let q = x.value / y.value;
        self.custom(q, &[(x, 1.0 / y.value), (y, -q / y.value)])
    }

    pub fn neg(&mut self, x: DiffScalar) -> DiffScalar {
        self.custom(-x.value, &[(x, -1.0)])
    }

    pub fn add_const(&mut self, x: DiffScalar, k: f64) -> DiffScalar {
        self.custom(x.value + k, &[(x, 1.0)])
    }

    pub fn mul_const(&mut self, x: DiffScalar, k: f64) -> DiffScalar {
        self.custom(x.value * k, &[(x, k)])
    }

    /// `1 - x`.
    pub fn one_minus(&mut self, x: DiffScalar) -> DiffScalar {
        self.custom(1.0 - x.value, &[(x, -1.0)])
    }

    pub fn exp(&mut self, x: DiffScalar) -> DiffScalar {
        let e = x.value.exp();
        self.custom(e, &[(x, e)])
    }

    /// `|x|`, with zero slope at the kink.
    pub fn abs(&mut self, x: DiffScalar) -> DiffScalar {
        let slope = if x.value > 0.0 {
            1.0
        } else if x.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.custom(x.value.abs(), &[(x, slope)])
    }

    /// Minimum; ties route the gradient to `x`.
    pub fn min(&mut self, x: DiffScalar, y: DiffScalar) -> DiffScalar {
        if y.value < x.value {
            self.custom(y.value, &[(y, 1.0)])
        } else {
            self.custom(x.value, &[(x, 1.0)])
        }
    }

    /// Maximum; ties route the gradient to `x`.
    pub fn max(&mut self, x: DiffScalar, y: DiffScalar) -> DiffScalar {
        if y.value > x.value {
            self.custom(y.value, &[(y, 1.0)])
        } else {
            self.custom(x.value, &[(x, 1.0)])
        }
    }

    /// `(1/beta) ln(1 + exp(beta x))`.
    pub fn softplus(&mut self, x: DiffScalar, beta: f64) -> DiffScalar {
        let v = super::softplus(x.value, beta);
        self.custom(v, &[(x, super::sigmoid(beta * x.value))])
    }

    pub fn sigmoid(&mut self, x: DiffScalar) -> DiffScalar {
        let s = super::sigmoid(x.value);
        self.custom(s, &[(x, s * (1.0 - s))])
    }

    /// Reverse sweep seeded with `d output = 1`.
    ///
    /// A constant output yields all-zero gradients.
    pub fn backward(&self, output: DiffScalar) -> Result<Gradients, TapeError> {
        let mut adjoints = vec![0.0; self.nodes.len()];
        match output.node {
            None => {}
            Some(r) if r.tape != self.id => {
                return Err(TapeError::ForeignOutput {
                    expected: self.id,
                    found: r.tape,
                })
            }
            Some(r) => {
                adjoints[r.index] = 1.0;
                for i in (0..=r.index).rev() {
                    let adj = adjoints[i];
                    if adj == 0.0 {
                        continue;
                    }
                    for &(j, p) in &self.nodes[i].inputs {
                        adjoints[j] += adj * p;
                    }
                }
            }
        }
        Ok(Gradients {
            tape: self.id,
            adjoints,
        })
    }
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    tape: u64,
    adjoints: Vec<f64>,
}

impl Gradients {
    /// `d output / d x`; zero for constants.
    pub fn get(&self, x: &DiffScalar) -> f64 {
        match x.node {
            Some(r) if r.tape == self.tape => self.adjoints.get(r.index).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }
}
