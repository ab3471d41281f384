//! Adam and RMSprop.

use std::collections::HashMap;

use crate::error::{Result, TensorError};
use crate::graph::GradientMap;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerConfig {
    Adam {
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
    RmsProp {
        learning_rate: f64,
        alpha: f64,
        epsilon: f64,
    },
}

impl OptimizerConfig {
    /// Adam defaults used by the recurrent and pixel trainers.
    pub fn adam(learning_rate: f64) -> Self {
        OptimizerConfig::Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-3,
        }
    }

    /// RMSprop defaults used by the classic-control trainer.
    pub fn rmsprop(learning_rate: f64) -> Self {
        OptimizerConfig::RmsProp {
            learning_rate,
            alpha: 0.99,
            epsilon: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            OptimizerConfig::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                *learning_rate > 0.0
                    && (0.0..1.0).contains(beta1)
                    && (0.0..1.0).contains(beta2)
                    && *epsilon > 0.0
            }
            OptimizerConfig::RmsProp {
                learning_rate,
                alpha,
                epsilon,
            } => *learning_rate > 0.0 && (0.0..1.0).contains(alpha) && *epsilon > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(TensorError::InvalidArgument {
                op: "optimizer",
                msg: format!("invalid configuration {self:?}"),
            })
        }
    }
}

/// Per-parameter moment accumulators.
#[derive(Debug, Clone)]
pub enum MomentSlot {
    Adam { m: Tensor, v: Tensor },
    Rms { sq: Tensor },
}

impl MomentSlot {
    /// Mutable views of every accumulator tensor in this slot.
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            MomentSlot::Adam { m, v } => vec![m, v],
            MomentSlot::Rms { sq } => vec![sq],
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OptimizerState {
    step: u64,
    slots: HashMap<String, MomentSlot>,
}

impl OptimizerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn slot_mut(&mut self, name: &str) -> Option<&mut MomentSlot> {
        self.slots.get_mut(name)
    }
}

/// Apply one optimizer update in place.
///
/// Every parameter gets updated from its gradient in `grads`; a missing
/// gradient entry counts as zero. Accumulators are created lazily with the
/// parameter's shape.
pub fn optimizer_step(
    state: &mut OptimizerState,
    config: &OptimizerConfig,
    params: &mut [(&str, &mut Tensor)],
    grads: &GradientMap,
) -> Result<()> {
    config.validate()?;
    state.step += 1;
    let t = state.step;
    for (name, tensor) in params.iter_mut() {
        let zero;
        let grad = match grads.get(name) {
            Some(g) => {
                if g.shape() != tensor.shape() {
                    return Err(TensorError::ShapeMismatch {
                        op: "optimizer_step",
                        lhs: tensor.shape().to_vec(),
                        rhs: g.shape().to_vec(),
                    });
                }
                g
            }
            None => {
                zero = Tensor::zeros(tensor.shape());
                &zero
            }
        };
        if !grad.all_finite() {
            return Err(TensorError::NonFiniteGradient {
                param: name.to_string(),
            });
        }
        match config {
            OptimizerConfig::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                let slot = state
                    .slots
                    .entry(name.to_string())
                    .or_insert_with(|| MomentSlot::Adam {
                        m: Tensor::zeros(tensor.shape()),
                        v: Tensor::zeros(tensor.shape()),
                    });
                let MomentSlot::Adam { m, v } = slot else {
                    return Err(TensorError::InvalidArgument {
                        op: "optimizer_step",
                        msg: format!("state for `{name}` belongs to a different optimizer"),
                    });
                };
                let bc1 = 1.0 - beta1.powi(t as i32);
                let bc2 = 1.0 - beta2.powi(t as i32);
                for ((w, g), (mi, vi)) in tensor
                    .data_mut()
                    .iter_mut()
                    .zip(grad.data())
                    .zip(m.data_mut().iter_mut().zip(v.data_mut().iter_mut()))
                {
                    *mi = beta1 * *mi + (1.0 - beta1) * g;
                    *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                    let m_hat = *mi / bc1;
                    let v_hat = *vi / bc2;
                    *w -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
            OptimizerConfig::RmsProp {
                learning_rate,
                alpha,
                epsilon,
            } => {
                let slot = state
                    .slots
                    .entry(name.to_string())
                    .or_insert_with(|| MomentSlot::Rms {
                        sq: Tensor::zeros(tensor.shape()),
                    });
                let MomentSlot::Rms { sq } = slot else {
                    return Err(TensorError::InvalidArgument {
                        op: "optimizer_step",
                        msg: format!("state for `{name}` belongs to a different optimizer"),
                    });
                };
                for ((w, g), s) in tensor
                    .data_mut()
                    .iter_mut()
                    .zip(grad.data())
                    .zip(sq.data_mut().iter_mut())
                {
                    *s = alpha * *s + (1.0 - alpha) * g * g;
                    *w -= learning_rate * g / (s.sqrt() + epsilon);
                }
            }
        }
        if !tensor.all_finite() {
            return Err(TensorError::NonFinite {
                op: format!("optimizer_step({name})"),
            });
        }
    }
    Ok(())
}
