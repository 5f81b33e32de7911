//! Scalar reverse-mode automatic differentiation.
//!
//! A [`Tape`] records every elementary operation as a [`Node`] holding its
//! value, up to two parent ids, and the partial derivatives with respect to
//! those parents evaluated at record time. [`Tape::backward`] then performs a
//! single reverse sweep. Parents always precede their children, so node ids
//! are already a topological order.

mod check;
mod var;

use std::cell::{Cell, RefCell};

use thiserror::Error;

pub use check::{grad_check, GradCheck};
pub use var::{sigmoid, Scalar, Var};

/// Gradient magnitude substituted for `d/dx x^c` at `x = 0`, `c < 1`.
pub const POW_GRAD_CLAMP: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("node {parent} referenced by a new node does not exist on a tape of length {len}")]
    InvalidParent { parent: usize, len: usize },
    #[error("{op:?} expects {expected} parents, got {got}")]
    Arity { op: OpKind, expected: usize, got: usize },
    #[error("local gradient {0} is not finite")]
    NonFiniteLocalGrad(f64),
    #[error("output node {0} does not exist")]
    UnknownOutput(usize),
    #[error("non-finite adjoint at node {node}")]
    NonFiniteAdjoint { node: usize },
    #[error("finite-difference step {0} outside [1e-7, 1e-3]")]
    InvalidStep(f64),
}

/// Identifier of a node on a tape; ids increase in recording order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Input,
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    /// `x^c` for a constant exponent `c`.
    PowConst,
    /// `c^x` for a constant base `c`.
    PowBase,
    Exp,
    Ln,
    Tanh,
    Sigmoid,
    Gamma,
}

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Input | OpKind::Constant => 0,
            OpKind::Add | OpKind::Sub | OpKind::Mul | OpKind::Div => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub value: f64,
    pub op: OpKind,
    parents: [usize; 2],
    local_grads: [f64; 2],
}

impl Node {
    pub fn parents(&self) -> Vec<NodeId> {
        self.parents[..self.op.arity()].iter().map(|&p| NodeId(p)).collect()
    }

    pub fn local_grads(&self) -> &[f64] {
        &self.local_grads[..self.op.arity()]
    }
}

/// Append-only operation record. Single writer: a `Tape` is `Send` but not `Sync`.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    params: RefCell<Vec<NodeId>>,
    clamped: Cell<usize>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self { nodes: RefCell::new(Vec::with_capacity(n)), ..Self::default() }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, id: NodeId) -> Option<Node> {
        self.nodes.borrow().get(id.0).copied()
    }

    /// Number of `pow_const` gradients replaced by [`POW_GRAD_CLAMP`].
    pub fn clamp_count(&self) -> usize {
        self.clamped.get()
    }

    /// Checked append of one node.
    pub fn record(
        &self,
        op: OpKind,
        parents: &[NodeId],
        value: f64,
        local_grads: &[f64],
    ) -> Result<NodeId, AutodiffError> {
        let arity = op.arity();
        if parents.len() != arity {
            return Err(AutodiffError::Arity { op, expected: arity, got: parents.len() });
        }
        if local_grads.len() != arity {
            return Err(AutodiffError::Arity { op, expected: arity, got: local_grads.len() });
        }
        let len = self.len();
        let mut p = [0usize; 2];
        let mut g = [0.0; 2];
        for (i, (&parent, &grad)) in parents.iter().zip(local_grads).enumerate() {
            if parent.0 >= len {
                return Err(AutodiffError::InvalidParent { parent: parent.0, len });
            }
            if !grad.is_finite() {
                return Err(AutodiffError::NonFiniteLocalGrad(grad));
            }
            p[i] = parent.0;
            g[i] = grad;
        }
        Ok(NodeId(self.push(op, p, value, g)))
    }

    #[inline]
    pub(crate) fn push(&self, op: OpKind, parents: [usize; 2], value: f64, local_grads: [f64; 2]) -> usize {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { value, op, parents, local_grads });
        nodes.len() - 1
    }

    pub(crate) fn note_clamp(&self) {
        self.clamped.set(self.clamped.get() + 1);
    }

    /// A leaf that is not reported among the parameters.
    pub fn input(&self, value: f64) -> Var<'_> {
        let id = self.push(OpKind::Input, [0; 2], value, [0.0; 2]);
        Var::from_parts(self, id, value)
    }

    /// A leaf whose adjoint is returned by [`Gradients::params`], in registration order.
    pub fn param(&self, value: f64) -> Var<'_> {
        let v = self.input(value);
        self.params.borrow_mut().push(v.id());
        v
    }

    pub fn constant(&self, value: f64) -> Var<'_> {
        let id = self.push(OpKind::Constant, [0; 2], value, [0.0; 2]);
        Var::from_parts(self, id, value)
    }

    pub fn param_ids(&self) -> Vec<NodeId> {
        self.params.borrow().clone()
    }

    /// Reverse sweep from `output`, seeding its adjoint with 1.
    pub fn backward(&self, output: NodeId) -> Result<Gradients, AutodiffError> {
        let nodes = self.nodes.borrow();
        if output.0 >= nodes.len() {
            return Err(AutodiffError::UnknownOutput(output.0));
        }
        let mut adjoints = vec![0.0f64; output.0 + 1];
        adjoints[output.0] = 1.0;
        for i in (0..=output.0).rev() {
            let a = adjoints[i];
            if a == 0.0 {
                continue;
            }
            if !a.is_finite() {
                return Err(AutodiffError::NonFiniteAdjoint { node: i });
            }
            let node = &nodes[i];
            for k in 0..node.op.arity() {
                adjoints[node.parents[k]] += a * node.local_grads[k];
            }
        }
        Ok(Gradients { adjoints, params: self.params.borrow().clone() })
    }
}

/// Adjoints ∂output/∂node for every node up to the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    adjoints: Vec<f64>,
    params: Vec<NodeId>,
}

impl Gradients {
    pub fn adjoint(&self, id: NodeId) -> f64 {
        self.adjoints.get(id.0).copied().unwrap_or(0.0)
    }

    pub fn wrt(&self, v: Var<'_>) -> f64 {
        self.adjoint(v.id())
    }

    /// Adjoints of the registered parameters, in registration order.
    pub fn params(&self) -> Vec<f64> {
        self.params.iter().map(|&id| self.adjoint(id)).collect()
    }

    pub fn adjoints(&self) -> &[f64] {
        &self.adjoints
    }
}
