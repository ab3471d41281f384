use lt_tensor::{Graph, Tensor, Var};

use crate::config::ModelConfig;
use crate::error::{ModelError, ModelResult};
use crate::registry::{BoundParams, InitSpec, ParamRegistry, PruneGroup};

const LN_EPS: f64 = 1e-5;
const MASK_NEG: f64 = -1e9;

/// Miniature encoder-decoder transformer with a shared source/target
/// vocabulary and sinusoidal positions.
#[derive(Debug, Clone)]
pub struct TinyTransformer {
    pub config: ModelConfig,
    vocab: usize,
    dim: usize,
    heads: usize,
    enc_layers: usize,
    dec_layers: usize,
    max_len: usize,
}

fn fan_in(n: usize) -> InitSpec {
    InitSpec::UniformFanIn {
        bound: (1.0 / n as f64).sqrt(),
    }
}

impl TinyTransformer {
    pub(crate) fn build(config: ModelConfig, reg: &mut ParamRegistry) -> ModelResult<Self> {
        let ModelConfig::TinyTransformer {
            vocab,
            model_dim,
            heads,
            enc_layers,
            dec_layers,
            ff_dim,
            max_len,
        } = config
        else {
            return Err(ModelError::Config("wrong family for TinyTransformer".into()));
        };
        let d = model_dim;
        reg.add(
            "embed.w",
            &[vocab, d],
            InitSpec::NormalScaled {
                std: 1.0 / (d as f64).sqrt(),
            },
            PruneGroup::Embedding,
        )?;
        let add_attn = |reg: &mut ParamRegistry, prefix: &str| -> ModelResult<()> {
            for part in ["q", "k", "v", "o"] {
                reg.add(&format!("{prefix}.{part}.w"), &[d, d], fan_in(d), PruneGroup::Core)?;
                reg.add(
                    &format!("{prefix}.{part}.b"),
                    &[d],
                    InitSpec::Constant(0.0),
                    PruneGroup::Core,
                )?;
            }
            Ok(())
        };
        let add_ln = |reg: &mut ParamRegistry, prefix: &str| -> ModelResult<()> {
            reg.add(&format!("{prefix}.g"), &[d], InitSpec::Constant(1.0), PruneGroup::Core)?;
            reg.add(&format!("{prefix}.b"), &[d], InitSpec::Constant(0.0), PruneGroup::Core)?;
            Ok(())
        };
        let add_ff = |reg: &mut ParamRegistry, prefix: &str| -> ModelResult<()> {
            reg.add(&format!("{prefix}.0.w"), &[ff_dim, d], fan_in(d), PruneGroup::Core)?;
            reg.add(
                &format!("{prefix}.0.b"),
                &[ff_dim],
                InitSpec::Constant(0.0),
                PruneGroup::Core,
            )?;
            reg.add(&format!("{prefix}.1.w"), &[d, ff_dim], fan_in(ff_dim), PruneGroup::Core)?;
            reg.add(
                &format!("{prefix}.1.b"),
                &[d],
                InitSpec::Constant(0.0),
                PruneGroup::Core,
            )?;
            Ok(())
        };
        for l in 0..enc_layers {
            add_attn(reg, &format!("enc.{l}.attn"))?;
            add_ln(reg, &format!("enc.{l}.ln1"))?;
            add_ff(reg, &format!("enc.{l}.ff"))?;
            add_ln(reg, &format!("enc.{l}.ln2"))?;
        }
        for l in 0..dec_layers {
            add_attn(reg, &format!("dec.{l}.self"))?;
            add_ln(reg, &format!("dec.{l}.ln1"))?;
            add_attn(reg, &format!("dec.{l}.cross"))?;
            add_ln(reg, &format!("dec.{l}.ln2"))?;
            add_ff(reg, &format!("dec.{l}.ff"))?;
            add_ln(reg, &format!("dec.{l}.ln3"))?;
        }
        reg.add("out.w", &[vocab, d], fan_in(d), PruneGroup::Core)?;
        reg.add("out.b", &[vocab], InitSpec::Constant(0.0), PruneGroup::Core)?;
        Ok(TinyTransformer {
            vocab,
            dim: d,
            heads,
            enc_layers,
            dec_layers,
            max_len,
            config,
        })
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    fn positional(&self, len: usize) -> Tensor {
        let d = self.dim;
        let mut data = vec![0.0; len * d];
        for pos in 0..len {
            for i in 0..d / 2 {
                let rate = 1.0 / 10000f64.powf(2.0 * i as f64 / d as f64);
                data[pos * d + 2 * i] = (pos as f64 * rate).sin();
                data[pos * d + 2 * i + 1] = (pos as f64 * rate).cos();
            }
        }
        Tensor::new(vec![len, d], data).expect("shape")
    }

    fn embed_sequence(
        &self,
        g: &Graph,
        p: &BoundParams,
        tokens: &[usize],
        batch: usize,
        len: usize,
    ) -> ModelResult<Var> {
        let emb = g.embedding(p.var("embed.w"), tokens)?; // [batch*len, d]
        let emb = g.scale(emb, (self.dim as f64).sqrt())?;
        let emb = g.reshape(emb, &[batch, len, self.dim])?;
        let pos = self.positional(len);
        let mut tiled = Vec::with_capacity(batch * len * self.dim);
        for _ in 0..batch {
            tiled.extend_from_slice(pos.data());
        }
        let pos = g.constant(Tensor::new(vec![batch, len, self.dim], tiled)?);
        Ok(g.add(emb, pos)?)
    }

    fn split_heads(&self, g: &Graph, x: Var, batch: usize, len: usize) -> ModelResult<Var> {
        let dk = self.dim / self.heads;
        let x = g.reshape(x, &[batch, len, self.heads, dk])?;
        let x = g.permute(x, &[0, 2, 1, 3])?;
        Ok(g.reshape(x, &[batch * self.heads, len, dk])?)
    }

    fn merge_heads(&self, g: &Graph, x: Var, batch: usize, len: usize) -> ModelResult<Var> {
        let dk = self.dim / self.heads;
        let x = g.reshape(x, &[batch, self.heads, len, dk])?;
        let x = g.permute(x, &[0, 2, 1, 3])?;
        Ok(g.reshape(x, &[batch, len, self.dim])?)
    }

    /// Multi-head attention. Returns (output, attention weights); weights
    /// have shape [batch*heads, q_len, k_len]. Public so tests can inspect
    /// the weights directly.
    #[allow(clippy::too_many_arguments)]
    pub fn attention(
        &self,
        g: &Graph,
        p: &BoundParams,
        prefix: &str,
        queries: Var,
        keys: Var,
        batch: usize,
        q_len: usize,
        k_len: usize,
        causal: bool,
    ) -> ModelResult<(Var, Var)> {
        let q = g.linear(queries, p.var(&format!("{prefix}.q.w")), Some(p.var(&format!("{prefix}.q.b"))))?;
        let k = g.linear(keys, p.var(&format!("{prefix}.k.w")), Some(p.var(&format!("{prefix}.k.b"))))?;
        let v = g.linear(keys, p.var(&format!("{prefix}.v.w")), Some(p.var(&format!("{prefix}.v.b"))))?;

        let q = self.split_heads(g, q, batch, q_len)?;
        let k = self.split_heads(g, k, batch, k_len)?;
        let v = self.split_heads(g, v, batch, k_len)?;

        let kt = g.permute(k, &[0, 2, 1])?;
        let dk = self.dim / self.heads;
        let scores = g.bmm(q, kt)?;
        let mut scores = g.scale(scores, 1.0 / (dk as f64).sqrt())?;
        if causal {
            // Finite large-negative additive mask above the diagonal.
            let mut mask = vec![0.0; batch * self.heads * q_len * k_len];
            for b in 0..batch * self.heads {
                for i in 0..q_len {
                    for j in 0..k_len {
                        if j > i {
                            mask[(b * q_len + i) * k_len + j] = MASK_NEG;
                        }
                    }
                }
            }
            let mask = g.constant(Tensor::new(vec![batch * self.heads, q_len, k_len], mask)?);
            scores = g.add(scores, mask)?;
        }
        let attn = g.softmax(scores)?;
        let ctx = g.bmm(attn, v)?;
        let merged = self.merge_heads(g, ctx, batch, q_len)?;
        let out = g.linear(merged, p.var(&format!("{prefix}.o.w")), Some(p.var(&format!("{prefix}.o.b"))))?;
        Ok((out, attn))
    }

    fn feed_forward(&self, g: &Graph, p: &BoundParams, prefix: &str, x: Var) -> ModelResult<Var> {
        let h = g.linear(x, p.var(&format!("{prefix}.0.w")), Some(p.var(&format!("{prefix}.0.b"))))?;
        let h = g.relu(h)?;
        Ok(g.linear(h, p.var(&format!("{prefix}.1.w")), Some(p.var(&format!("{prefix}.1.b"))))?)
    }

    fn residual_norm(
        &self,
        g: &Graph,
        p: &BoundParams,
        prefix: &str,
        x: Var,
        sub: Var,
    ) -> ModelResult<Var> {
        let sum = g.add(x, sub)?;
        Ok(g.layer_norm(sum, p.var(&format!("{prefix}.g")), p.var(&format!("{prefix}.b")), LN_EPS)?)
    }

    /// Teacher-forced forward: log-probabilities for each target position,
    /// shape [batch, tgt_len, vocab]. Causal masking guarantees position t
    /// only sees target tokens at positions <= t.
    pub fn forward(
        &self,
        g: &Graph,
        reg: &ParamRegistry,
        src: &[usize],
        tgt: &[usize],
        batch: usize,
    ) -> ModelResult<Var> {
        if batch == 0 || src.len() % batch != 0 || tgt.len() % batch != 0 {
            return Err(ModelError::Contract(
                "source/target lengths do not divide the batch".into(),
            ));
        }
        let s_len = src.len() / batch;
        let t_len = tgt.len() / batch;
        if s_len == 0 || t_len == 0 {
            return Err(ModelError::Contract("empty sequence".into()));
        }
        if s_len > self.max_len || t_len > self.max_len {
            return Err(ModelError::Contract(format!(
                "sequence length {} exceeds configured maximum {}",
                s_len.max(t_len),
                self.max_len
            )));
        }
        if let Some(&bad) = src.iter().chain(tgt).find(|&&t| t >= self.vocab) {
            return Err(ModelError::Contract(format!(
                "token id {bad} out of range for vocabulary {}",
                self.vocab
            )));
        }

        let p = reg.bind(g);

        // Encoder.
        let mut memory = self.embed_sequence(g, &p, src, batch, s_len)?;
        for l in 0..self.enc_layers {
            let (attn_out, _) = self.attention(
                g,
                &p,
                &format!("enc.{l}.attn"),
                memory,
                memory,
                batch,
                s_len,
                s_len,
                false,
            )?;
            memory = self.residual_norm(g, &p, &format!("enc.{l}.ln1"), memory, attn_out)?;
            let ff = self.feed_forward(g, &p, &format!("enc.{l}.ff"), memory)?;
            memory = self.residual_norm(g, &p, &format!("enc.{l}.ln2"), memory, ff)?;
        }

        // Decoder.
        let mut x = self.embed_sequence(g, &p, tgt, batch, t_len)?;
        for l in 0..self.dec_layers {
            let (self_out, _) = self.attention(
                g,
                &p,
                &format!("dec.{l}.self"),
                x,
                x,
                batch,
                t_len,
                t_len,
                true,
            )?;
            x = self.residual_norm(g, &p, &format!("dec.{l}.ln1"), x, self_out)?;
            let (cross_out, _) = self.attention(
                g,
                &p,
                &format!("dec.{l}.cross"),
                x,
                memory,
                batch,
                t_len,
                s_len,
                false,
            )?;
            x = self.residual_norm(g, &p, &format!("dec.{l}.ln2"), x, cross_out)?;
            let ff = self.feed_forward(g, &p, &format!("dec.{l}.ff"), x)?;
            x = self.residual_norm(g, &p, &format!("dec.{l}.ln3"), x, ff)?;
        }

        let logits = g.linear(x, p.var("out.w"), Some(p.var("out.b")))?;
        Ok(g.log_softmax(logits)?)
    }
}
