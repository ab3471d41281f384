use crate::error::{ModelError, ModelResult};

/// Size description for each network family.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    /// Shared ReLU trunk with a policy head (one logit per action) and a
    /// scalar value head.
    MlpActorCritic {
        obs_dim: usize,
        actions: usize,
        hidden: Vec<usize>,
    },
    /// Two conv+maxpool blocks feeding a ReLU MLP with the same two heads.
    /// Convolutions are 3x3, stride 1, padding 1; pooling is 2x2.
    ConvActorCritic {
        in_channels: usize,
        /// Square input resolution; must be divisible by 4 (two poolings).
        obs_size: usize,
        actions: usize,
        conv_channels: usize,
        fc: Vec<usize>,
    },
    /// Stacked LSTM language model with untied embedding and output
    /// projection; dropout sits between the recurrent layers.
    LstmLm {
        vocab: usize,
        embed: usize,
        hidden: usize,
        layers: usize,
        dropout: f64,
    },
    /// Small encoder-decoder transformer over a shared vocabulary.
    TinyTransformer {
        vocab: usize,
        model_dim: usize,
        heads: usize,
        enc_layers: usize,
        dec_layers: usize,
        ff_dim: usize,
        max_len: usize,
    },
}

impl ModelConfig {
    pub fn family_name(&self) -> &'static str {
        match self {
            ModelConfig::MlpActorCritic { .. } => "mlp-actor-critic",
            ModelConfig::ConvActorCritic { .. } => "conv-actor-critic",
            ModelConfig::LstmLm { .. } => "lstm-lm",
            ModelConfig::TinyTransformer { .. } => "tiny-transformer",
        }
    }

    pub fn validate(&self) -> ModelResult<()> {
        let fail = |msg: String| Err(ModelError::Config(msg));
        match self {
            ModelConfig::MlpActorCritic {
                obs_dim,
                actions,
                hidden,
            } => {
                if *obs_dim == 0 || hidden.is_empty() || hidden.iter().any(|&h| h == 0) {
                    return fail(format!("mlp-actor-critic sizes must be positive: {self:?}"));
                }
                if *actions < 2 {
                    return fail(format!("actor-critic needs >= 2 actions, got {actions}"));
                }
            }
            ModelConfig::ConvActorCritic {
                in_channels,
                obs_size,
                actions,
                conv_channels,
                fc,
            } => {
                if *in_channels == 0 || *obs_size == 0 || *conv_channels == 0 || fc.is_empty() {
                    return fail(format!("conv-actor-critic sizes must be positive: {self:?}"));
                }
                if obs_size % 4 != 0 {
                    return fail(format!(
                        "conv-actor-critic obs_size {obs_size} must be divisible by 4"
                    ));
                }
                if *actions < 2 {
                    return fail(format!("actor-critic needs >= 2 actions, got {actions}"));
                }
            }
            ModelConfig::LstmLm {
                vocab,
                embed,
                hidden,
                layers,
                dropout,
            } => {
                if *vocab == 0 || *embed == 0 || *hidden == 0 || *layers == 0 {
                    return fail(format!("lstm-lm sizes must be positive: {self:?}"));
                }
                if !(0.0..1.0).contains(dropout) {
                    return fail(format!("dropout {dropout} outside [0, 1)"));
                }
            }
            ModelConfig::TinyTransformer {
                vocab,
                model_dim,
                heads,
                enc_layers,
                dec_layers,
                ff_dim,
                max_len,
            } => {
                if *vocab == 0
                    || *model_dim == 0
                    || *heads == 0
                    || *enc_layers == 0
                    || *dec_layers == 0
                    || *ff_dim == 0
                    || *max_len == 0
                {
                    return fail(format!("tiny-transformer sizes must be positive: {self:?}"));
                }
                if model_dim % heads != 0 {
                    return fail(format!(
                        "model_dim {model_dim} not divisible by heads {heads}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Closed-form total parameter count, independent of registry
    /// construction. Tests assert the registry agrees with this.
    pub fn param_count(&self) -> usize {
        match self {
            ModelConfig::MlpActorCritic {
                obs_dim,
                actions,
                hidden,
            } => {
                let mut total = 0;
                let mut prev = *obs_dim;
                for &h in hidden {
                    total += prev * h + h;
                    prev = h;
                }
                total += prev * actions + actions; // policy head
                total += prev + 1; // value head
                total
            }
            ModelConfig::ConvActorCritic {
                in_channels,
                obs_size,
                actions,
                conv_channels,
                fc,
            } => {
                let c = *conv_channels;
                let mut total = c * in_channels * 9 + c; // conv block 1
                total += c * c * 9 + c; // conv block 2
                let flat = c * (obs_size / 4) * (obs_size / 4);
                let mut prev = flat;
                for &h in fc {
                    total += prev * h + h;
                    prev = h;
                }
                total += prev * actions + actions;
                total += prev + 1;
                total
            }
            ModelConfig::LstmLm {
                vocab,
                embed,
                hidden,
                layers,
                ..
            } => {
                let mut total = vocab * embed; // embedding
                let mut input = *embed;
                for _ in 0..*layers {
                    total += 4 * hidden * input; // input weights
                    total += 4 * hidden * hidden; // recurrent weights
                    total += 4 * hidden; // bias
                    input = *hidden;
                }
                total += vocab * hidden + vocab; // output projection
                total
            }
            ModelConfig::TinyTransformer {
                vocab,
                model_dim,
                enc_layers,
                dec_layers,
                ff_dim,
                ..
            } => {
                let d = *model_dim;
                let attn = 4 * (d * d + d); // q, k, v, o projections
                let ff = d * ff_dim + ff_dim + ff_dim * d + d;
                let ln = 2 * d; // gain + bias
                let enc_layer = attn + ff + 2 * ln;
                let dec_layer = 2 * attn + ff + 3 * ln;
                vocab * d // shared embedding
                    + enc_layers * enc_layer
                    + dec_layers * dec_layer
                    + vocab * d + vocab // output projection
            }
        }
    }
}
