use lt_tensor::{Graph, Rng, Tensor, Var};

use crate::config::ModelConfig;
use crate::error::{ModelError, ModelResult};
use crate::registry::{InitSpec, ParamRegistry, PruneGroup};

/// Carried recurrent state: one (h, c) pair per layer, shape [batch, hidden].
///
/// The state holds plain tensors, never graph handles. Feeding it back into
/// the next window therefore enters it as a constant, which is exactly the
/// truncation boundary of truncated backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmState {
    pub h: Vec<Tensor>,
    pub c: Vec<Tensor>,
}

impl LstmState {
    pub fn zeros(layers: usize, batch: usize, hidden: usize) -> Self {
        LstmState {
            h: (0..layers).map(|_| Tensor::zeros(&[batch, hidden])).collect(),
            c: (0..layers).map(|_| Tensor::zeros(&[batch, hidden])).collect(),
        }
    }
}

/// Word-level LSTM language model.
#[derive(Debug, Clone)]
pub struct LstmLm {
    pub config: ModelConfig,
    vocab: usize,
    hidden: usize,
    layers: usize,
    dropout: f64,
}

impl LstmLm {
    pub(crate) fn build(config: ModelConfig, reg: &mut ParamRegistry) -> ModelResult<Self> {
        let ModelConfig::LstmLm {
            vocab,
            embed,
            hidden,
            layers,
            dropout,
        } = config
        else {
            return Err(ModelError::Config("wrong family for LstmLm".into()));
        };
        reg.add(
            "embed.w",
            &[vocab, embed],
            InitSpec::NormalScaled {
                std: 1.0 / (embed as f64).sqrt(),
            },
            PruneGroup::Embedding,
        )?;
        let rec = InitSpec::UniformRecurrent {
            bound: (1.0 / hidden as f64).sqrt(),
        };
        let mut input = embed;
        for l in 0..layers {
            // Gate rows stacked [i; f; g; o], 4*hidden per matrix.
            reg.add(&format!("lstm.{l}.w_ih"), &[4 * hidden, input], rec, PruneGroup::Core)?;
            reg.add(&format!("lstm.{l}.w_hh"), &[4 * hidden, hidden], rec, PruneGroup::Core)?;
            reg.add(
                &format!("lstm.{l}.b"),
                &[4 * hidden],
                InitSpec::Constant(0.0),
                PruneGroup::Core,
            )?;
            input = hidden;
        }
        reg.add(
            "out.w",
            &[vocab, hidden],
            InitSpec::UniformFanIn {
                bound: (1.0 / hidden as f64).sqrt(),
            },
            PruneGroup::Core,
        )?;
        reg.add("out.b", &[vocab], InitSpec::Constant(0.0), PruneGroup::Core)?;
        Ok(LstmLm {
            vocab,
            hidden,
            layers,
            dropout,
            config,
        })
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// One pass over a [batch, steps] token window.
    ///
    /// Returns log-probabilities with shape [batch, steps, vocab] and the
    /// detached final state for the next window. `dropout_rng` enables
    /// train-mode dropout between recurrent layers; pass `None` to evaluate.
    #[allow(clippy::too_many_arguments)]
    pub fn forward(
        &self,
        g: &Graph,
        reg: &ParamRegistry,
        tokens: &[usize],
        batch: usize,
        steps: usize,
        state: Option<&LstmState>,
        mut dropout_rng: Option<&mut Rng>,
    ) -> ModelResult<(Var, LstmState)> {
        if tokens.len() != batch * steps || batch == 0 || steps == 0 {
            return Err(ModelError::Contract(format!(
                "token window {} does not match batch {batch} x steps {steps}",
                tokens.len()
            )));
        }
        if let Some(&bad) = tokens.iter().find(|&&t| t >= self.vocab) {
            return Err(ModelError::Contract(format!(
                "token id {bad} out of range for vocabulary {}",
                self.vocab
            )));
        }
        let owned_zero;
        let state = match state {
            Some(s) => {
                let ok = s.h.len() == self.layers
                    && s.c.len() == self.layers
                    && s.h.iter().chain(&s.c).all(|t| t.shape() == [batch, self.hidden]);
                if !ok {
                    return Err(ModelError::Contract(
                        "carried state shape does not match model/batch".into(),
                    ));
                }
                s
            }
            None => {
                owned_zero = LstmState::zeros(self.layers, batch, self.hidden);
                &owned_zero
            }
        };

        let p = reg.bind(g);
        let h4 = 4 * self.hidden;

        let mut h: Vec<Var> = state.h.iter().map(|t| g.constant(t.clone())).collect();
        let mut c: Vec<Var> = state.c.iter().map(|t| g.constant(t.clone())).collect();

        // Embed the whole window at once, then slice per step.
        let step_tokens: Vec<Vec<usize>> = (0..steps)
            .map(|t| (0..batch).map(|b| tokens[b * steps + t]).collect())
            .collect();

        let mut outputs: Vec<Var> = Vec::with_capacity(steps);
        for step_toks in &step_tokens {
            let mut x = g.embedding(p.var("embed.w"), step_toks)?; // [batch, embed]
            for l in 0..self.layers {
                if l > 0 && self.dropout > 0.0 {
                    if let Some(rng) = dropout_rng.as_deref_mut() {
                        x = g.dropout(x, 1.0 - self.dropout, rng)?;
                    }
                }
                let gates_x = g.linear(x, p.var(&format!("lstm.{l}.w_ih")), None)?;
                let gates_h = g.linear(h[l], p.var(&format!("lstm.{l}.w_hh")), None)?;
                let gates = g.add(gates_x, gates_h)?;
                let gates = g.add_bias(gates, p.var(&format!("lstm.{l}.b")))?;
                debug_assert_eq!(g.shape_of(gates), vec![batch, h4]);

                let i_gate = g.sigmoid(g.slice_last(gates, 0, self.hidden)?)?;
                let f_gate = g.sigmoid(g.slice_last(gates, self.hidden, self.hidden)?)?;
                let g_gate = g.tanh(g.slice_last(gates, 2 * self.hidden, self.hidden)?)?;
                let o_gate = g.sigmoid(g.slice_last(gates, 3 * self.hidden, self.hidden)?)?;

                let c_new = g.add(g.mul(f_gate, c[l])?, g.mul(i_gate, g_gate)?)?;
                let h_new = g.mul(o_gate, g.tanh(c_new)?)?;
                c[l] = c_new;
                h[l] = h_new;
                x = h_new;
            }
            outputs.push(g.reshape(x, &[1, batch, self.hidden])?);
        }

        let stacked = g.concat(&outputs, 0)?; // [steps, batch, hidden]
        let ordered = g.permute(stacked, &[1, 0, 2])?; // [batch, steps, hidden]
        let logits = g.linear(ordered, p.var("out.w"), Some(p.var("out.b")))?;
        let logp = g.log_softmax(logits)?;

        let new_state = LstmState {
            h: h.iter().map(|&v| (*g.value(v)).clone()).collect(),
            c: c.iter().map(|&v| (*g.value(v)).clone()).collect(),
        };
        Ok((logp, new_state))
    }
}
