//! Reverse-mode tape.
//!
//! A [`Graph`] records every primitive executed through it. [`Var`] handles
//! index into the tape. Calling [`Graph::backward`] on a scalar loss replays
//! the recorded operations in exact reverse order and accumulates gradients
//! for every named parameter. Graphs are cheap; training code builds one per
//! update and drops it afterwards, which also keeps tapes isolated from one
//! another.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Result, TensorError};
use crate::tensor::Tensor;

mod conv;
mod linalg;
mod nn;
mod shape;

static GRAPH_IDS: AtomicU64 = AtomicU64::new(1);

/// Handle to a node on a specific graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    graph: u64,
    idx: usize,
}

type BackFn = Box<dyn Fn(&Tensor) -> Vec<Tensor>>;

pub(crate) struct Node {
    value: Rc<Tensor>,
    parents: Vec<usize>,
    backward: Option<BackFn>,
}

pub struct Graph {
    id: u64,
    nodes: RefCell<Vec<Node>>,
    params: RefCell<Vec<(String, usize)>>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph {
            id: GRAPH_IDS.fetch_add(1, Ordering::Relaxed),
            nodes: RefCell::new(Vec::new()),
            params: RefCell::new(Vec::new()),
        }
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Insert a tensor that does not require gradients.
    pub fn constant(&self, value: Tensor) -> Var {
        self.push_unchecked(value, Vec::new(), None)
    }

    /// Insert a named trainable leaf. Gradients for every registered
    /// parameter are reported by [`Graph::backward`], as zeros when the
    /// parameter did not participate in the loss.
    pub fn param(&self, name: &str, value: &Tensor) -> Var {
        let var = self.push_unchecked(value.clone(), Vec::new(), None);
        self.params.borrow_mut().push((name.to_string(), var.idx));
        var
    }

    pub fn value(&self, var: Var) -> Rc<Tensor> {
        debug_assert_eq!(var.graph, self.id, "Var used on a foreign graph");
        Rc::clone(&self.nodes.borrow()[var.idx].value)
    }

    /// Shape of a node's value without cloning.
    pub fn shape_of(&self, var: Var) -> Vec<usize> {
        self.nodes.borrow()[var.idx].value.shape().to_vec()
    }

    fn push_unchecked(&self, value: Tensor, parents: Vec<usize>, backward: Option<BackFn>) -> Var {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value: Rc::new(value),
            parents,
            backward,
        });
        Var {
            graph: self.id,
            idx: nodes.len() - 1,
        }
    }

    /// Record an operation result, rejecting non-finite outputs.
    pub(crate) fn push_op(
        &self,
        op: &'static str,
        value: Tensor,
        parents: Vec<Var>,
        backward: BackFn,
    ) -> Result<Var> {
        if !value.all_finite() {
            return Err(TensorError::NonFinite { op: op.to_string() });
        }
        for p in &parents {
            debug_assert_eq!(p.graph, self.id, "{op}: Var from a foreign graph");
        }
        Ok(self.push_unchecked(
            value,
            parents.iter().map(|p| p.idx).collect(),
            Some(backward),
        ))
    }

    /// Reverse sweep from a scalar loss. Returns one gradient per registered
    /// parameter, zero-valued for parameters the loss never touched.
    pub fn backward(&self, loss: Var) -> Result<GradientMap> {
        debug_assert_eq!(loss.graph, self.id, "loss Var from a foreign graph");
        let nodes = self.nodes.borrow();
        let loss_value = &nodes[loss.idx].value;
        if !loss_value.is_scalar() {
            return Err(TensorError::NotScalar {
                op: "backward",
                shape: loss_value.shape().to_vec(),
            });
        }

        let mut grads: Vec<Option<Tensor>> = Vec::with_capacity(loss.idx + 1);
        grads.resize_with(loss.idx + 1, || None);
        grads[loss.idx] = Some(Tensor::scalar(1.0));

        for i in (0..=loss.idx).rev() {
            let Some(dy) = grads[i].take() else { continue };
            let node = &nodes[i];
            let keep_leaf = node.backward.is_none();
            if let Some(back) = &node.backward {
                let parent_grads = back(&dy);
                debug_assert_eq!(parent_grads.len(), node.parents.len());
                for (p, g) in node.parents.iter().zip(parent_grads) {
                    debug_assert_eq!(
                        g.shape(),
                        nodes[*p].value.shape(),
                        "gradient shape mismatch flowing into node {p}"
                    );
                    match &mut grads[*p] {
                        Some(acc) => {
                            for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                                *a += b;
                            }
                        }
                        slot @ None => *slot = Some(g),
                    }
                }
            }
            if keep_leaf {
                // Leaves keep their gradient for the parameter report below.
                grads[i] = Some(dy);
            }
        }

        let mut map = HashMap::new();
        for (name, idx) in self.params.borrow().iter() {
            let grad = if *idx <= loss.idx {
                grads[*idx]
                    .take()
                    .unwrap_or_else(|| Tensor::zeros(nodes[*idx].value.shape()))
            } else {
                Tensor::zeros(nodes[*idx].value.shape())
            };
            map.insert(name.clone(), grad);
        }
        Ok(GradientMap { grads: map })
    }
}

/// Gradients keyed by parameter name.
#[derive(Debug, Clone)]
pub struct GradientMap {
    grads: HashMap<String, Tensor>,
}

impl GradientMap {
    pub fn empty() -> Self {
        GradientMap {
            grads: HashMap::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.grads.get(name)
    }

    pub fn insert(&mut self, name: String, grad: Tensor) {
        self.grads.insert(name, grad);
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    /// Zero gradient entries where `keep` is false.
    pub fn mask(&mut self, name: &str, keep: &[bool]) {
        if let Some(g) = self.grads.get_mut(name) {
            debug_assert_eq!(g.len(), keep.len());
            for (v, &k) in g.data_mut().iter_mut().zip(keep) {
                if !k {
                    *v = 0.0;
                }
            }
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.grads.keys().map(|s| s.as_str())
    }

    /// Global L2 norm over every entry, accumulated in sorted-name order so
    /// the result does not depend on map iteration order.
    pub fn global_norm(&self) -> f64 {
        let mut names: Vec<&String> = self.grads.keys().collect();
        names.sort();
        let mut total = 0.0;
        for name in names {
            for v in self.grads[name].data() {
                total += v * v;
            }
        }
        total.sqrt()
    }

    /// Rescale all gradients so the global norm is at most `max_norm`.
    /// Returns the factor applied (1.0 when no clipping happened).
    pub fn scale_to_max_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm <= max_norm || norm == 0.0 {
            return 1.0;
        }
        let factor = max_norm / norm;
        for g in self.grads.values_mut() {
            for v in g.data_mut() {
                *v *= factor;
            }
        }
        factor
    }
}
