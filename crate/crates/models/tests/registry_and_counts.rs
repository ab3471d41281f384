use lt_models::{build_model, InitSpec, ModelConfig, PruneGroup};
use lt_tensor::Rng;

#[test]
fn mlp_actor_critic_parameter_count_matches_closed_form() {
    // Trunk 4 -> 128 -> 128 -> 128 plus a 2-logit policy head and a scalar
    // value head. Sum of the per-layer terms:
    //   4*128+128 + 128*128+128 + 128*128+128 + 128*2+2 + 128*1+1 = 34_051
    let config = ModelConfig::MlpActorCritic {
        obs_dim: 4,
        actions: 2,
        hidden: vec![128, 128, 128],
    };
    let expected = (4 * 128 + 128)
        + (128 * 128 + 128)
        + (128 * 128 + 128)
        + (128 * 2 + 2)
        + (128 + 1);
    assert_eq!(expected, 34_051);
    assert_eq!(config.param_count(), expected);
    let (reg, _) = build_model(&config, 1).unwrap();
    assert_eq!(reg.total_params(), expected);
}

#[test]
fn lstm_gate_matrices_have_4h_rows() {
    let config = ModelConfig::LstmLm {
        vocab: 50,
        embed: 650,
        hidden: 650,
        layers: 2,
        dropout: 0.5,
    };
    let (reg, _) = build_model(&config, 3).unwrap();
    for l in 0..2 {
        let w_ih = reg.tensor(&format!("lstm.{l}.w_ih")).unwrap();
        let w_hh = reg.tensor(&format!("lstm.{l}.w_hh")).unwrap();
        assert_eq!(w_ih.shape()[0], 4 * 650);
        assert_eq!(w_hh.shape()[0], 4 * 650);
        assert_eq!(w_hh.shape()[1], 650);
    }
}

#[test]
fn registry_counts_match_closed_form_over_random_configs() {
    let mut rng = Rng::from_seed(77);
    for trial in 0..30 {
        let config = match trial % 4 {
            0 => ModelConfig::MlpActorCritic {
                obs_dim: 1 + rng.below(10),
                actions: 2 + rng.below(5),
                hidden: (0..1 + rng.below(3)).map(|_| 1 + rng.below(40)).collect(),
            },
            1 => ModelConfig::ConvActorCritic {
                in_channels: 1 + rng.below(3),
                obs_size: 4 * (1 + rng.below(4)),
                actions: 2 + rng.below(4),
                conv_channels: 1 + rng.below(8),
                fc: (0..1 + rng.below(2)).map(|_| 1 + rng.below(32)).collect(),
            },
            2 => ModelConfig::LstmLm {
                vocab: 2 + rng.below(50),
                embed: 1 + rng.below(20),
                hidden: 1 + rng.below(20),
                layers: 1 + rng.below(3),
                dropout: 0.5,
            },
            _ => ModelConfig::TinyTransformer {
                vocab: 2 + rng.below(30),
                model_dim: 4 * (1 + rng.below(4)),
                heads: 2,
                enc_layers: 1 + rng.below(3),
                dec_layers: 1 + rng.below(3),
                ff_dim: 1 + rng.below(32),
                max_len: 8,
            },
        };
        let (reg, _) = build_model(&config, rng.next_u64()).unwrap();
        assert_eq!(
            reg.total_params(),
            config.param_count(),
            "count mismatch for {config:?}"
        );
    }
}

#[test]
fn same_seed_builds_bit_identical_registries() {
    let config = ModelConfig::LstmLm {
        vocab: 20,
        embed: 8,
        hidden: 10,
        layers: 2,
        dropout: 0.5,
    };
    let (a, _) = build_model(&config, 42).unwrap();
    let (b, _) = build_model(&config, 42).unwrap();
    for (ea, eb) in a.entries().iter().zip(b.entries()) {
        assert_eq!(ea.name, eb.name);
        assert_eq!(ea.tensor.data(), eb.tensor.data());
    }
    let (c, _) = build_model(&config, 43).unwrap();
    assert!(a
        .entries()
        .iter()
        .zip(c.entries())
        .any(|(ea, ec)| ea.tensor.data() != ec.tensor.data()));
}

#[test]
fn resampling_init_specs_reproduces_build() {
    use lt_tensor::derive_seed;
    let config = ModelConfig::TinyTransformer {
        vocab: 11,
        model_dim: 8,
        heads: 2,
        enc_layers: 1,
        dec_layers: 1,
        ff_dim: 16,
        max_len: 8,
    };
    let seed = 99;
    let (reg, _) = build_model(&config, seed).unwrap();
    for entry in reg.entries() {
        let mut rng = Rng::from_seed(derive_seed(seed, &["init", &entry.name]));
        let resampled = entry.init.sample(entry.tensor.shape(), &mut rng);
        assert_eq!(resampled.data(), entry.tensor.data(), "entry {}", entry.name);
    }
}

#[test]
fn embedding_tensors_carry_embedding_group() {
    let lm = ModelConfig::LstmLm {
        vocab: 10,
        embed: 4,
        hidden: 5,
        layers: 2,
        dropout: 0.5,
    };
    let (reg, _) = build_model(&lm, 1).unwrap();
    for entry in reg.entries() {
        let expected = if entry.name == "embed.w" {
            PruneGroup::Embedding
        } else {
            PruneGroup::Core
        };
        assert_eq!(entry.group, expected, "entry {}", entry.name);
    }

    let tf = ModelConfig::TinyTransformer {
        vocab: 10,
        model_dim: 8,
        heads: 2,
        enc_layers: 2,
        dec_layers: 2,
        ff_dim: 16,
        max_len: 8,
    };
    let (reg, _) = build_model(&tf, 1).unwrap();
    let embedding_entries: Vec<_> = reg
        .entries()
        .iter()
        .filter(|e| e.group == PruneGroup::Embedding)
        .map(|e| e.name.clone())
        .collect();
    assert_eq!(embedding_entries, vec!["embed.w"]);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        ModelConfig::MlpActorCritic {
            obs_dim: 0,
            actions: 2,
            hidden: vec![8],
        },
        ModelConfig::MlpActorCritic {
            obs_dim: 4,
            actions: 1,
            hidden: vec![8],
        },
        ModelConfig::LstmLm {
            vocab: 10,
            embed: 4,
            hidden: 5,
            layers: 2,
            dropout: 1.0,
        },
        ModelConfig::TinyTransformer {
            vocab: 10,
            model_dim: 10,
            heads: 4,
            enc_layers: 1,
            dec_layers: 1,
            ff_dim: 8,
            max_len: 8,
        },
    ];
    for config in bad {
        assert!(build_model(&config, 1).is_err(), "{config:?} should fail");
    }
}

#[test]
fn biases_are_zero_and_layer_norm_gains_one() {
    let config = ModelConfig::TinyTransformer {
        vocab: 10,
        model_dim: 8,
        heads: 2,
        enc_layers: 1,
        dec_layers: 1,
        ff_dim: 16,
        max_len: 8,
    };
    let (reg, _) = build_model(&config, 5).unwrap();
    for entry in reg.entries() {
        match entry.init {
            InitSpec::Constant(v) => {
                assert!(entry.tensor.data().iter().all(|&x| x == v));
            }
            _ => assert!(entry.tensor.data().iter().any(|&x| x != 0.0)),
        }
    }
}
