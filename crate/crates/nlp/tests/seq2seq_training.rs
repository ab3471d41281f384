use lt_models::{build_model, Model, ModelConfig};
use lt_nlp::{eval_token_accuracy, train_seq2seq, SyntheticTask, TaskKind};
use lt_tensor::{OptimizerConfig, Tensor};

fn tiny_tf(vocab: usize, seed: u64) -> (lt_models::ParamRegistry, lt_models::TinyTransformer) {
    let (reg, model) = build_model(
        &ModelConfig::TinyTransformer {
            vocab,
            model_dim: 32,
            heads: 4,
            enc_layers: 1,
            dec_layers: 1,
            ff_dim: 64,
            max_len: 12,
        },
        seed,
    )
    .unwrap();
    let Model::TinyTransformer(tf) = model else { unreachable!() };
    (reg, tf)
}

#[test]
fn zero_weight_model_has_log_vocab_loss() {
    let vocab = 9;
    let (mut reg, tf) = tiny_tf(vocab, 1);
    for name in reg.entries().iter().map(|e| e.name.clone()).collect::<Vec<_>>() {
        let shape = reg.tensor(&name).unwrap().shape().to_vec();
        reg.set_tensor(&name, Tensor::zeros(&shape)).unwrap();
    }
    let task = SyntheticTask {
        kind: TaskKind::Copy,
        vocab,
        min_len: 4,
        max_len: 4,
        train_count: 8,
        test_count: 4,
        seed: 3,
    };
    let out = train_seq2seq(
        &tf,
        &mut reg,
        &task.train_split(),
        4,
        1,
        &OptimizerConfig::Adam {
            learning_rate: 1e-300,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        },
        None,
        None,
    )
    .unwrap();
    assert!(
        (out.epoch_losses[0] - (vocab as f64).ln()).abs() < 1e-9,
        "{}",
        out.epoch_losses[0]
    );
}

#[test]
fn copy_task_reaches_high_token_accuracy() {
    let vocab = 12;
    let (mut reg, tf) = tiny_tf(vocab, 7);
    let task = SyntheticTask {
        kind: TaskKind::Copy,
        vocab,
        min_len: 3,
        max_len: 8,
        train_count: 512,
        test_count: 48,
        seed: 11,
    };
    let out = train_seq2seq(
        &tf,
        &mut reg,
        &task.train_split(),
        32,
        30,
        &OptimizerConfig::adam(1e-3),
        None,
        None,
    )
    .unwrap();
    let first = out.epoch_losses[0];
    let last = *out.epoch_losses.last().unwrap();
    assert!(last < first * 0.5, "loss barely moved: {first} -> {last}");

    let acc = eval_token_accuracy(&tf, &reg, &task.test_split()).unwrap();
    assert!(acc > 0.95, "held-out token accuracy {acc}");
}

#[test]
fn accuracy_is_deterministic_and_order_independent() {
    let vocab = 10;
    let (reg, tf) = tiny_tf(vocab, 9);
    let task = SyntheticTask {
        kind: TaskKind::Reverse,
        vocab,
        min_len: 3,
        max_len: 6,
        train_count: 4,
        test_count: 20,
        seed: 5,
    };
    let split = task.test_split();
    let a = eval_token_accuracy(&tf, &reg, &split).unwrap();
    let b = eval_token_accuracy(&tf, &reg, &split).unwrap();
    assert_eq!(a, b);

    // Shuffling evaluation order cannot change the fraction.
    let mut shuffled = split.clone();
    shuffled.pairs.reverse();
    let c = eval_token_accuracy(&tf, &reg, &shuffled).unwrap();
    assert!((a - c).abs() < 1e-15);
}

#[test]
fn untrained_accuracy_matches_chance_on_uniform_targets() {
    // Greedy decoding from a zeroed model always emits token ids tied at
    // the maximum; ties resolve to id 0 (BOS), which never appears in
    // content, so accuracy trends to the frequency of... no content match.
    // Instead check the binomial regime with a *random* (not zero) model:
    // accuracy should be near 1/(vocab-1) over uniform content tokens.
    let vocab = 21; // 20 content symbols
    let (reg, tf) = tiny_tf(vocab, 13);
    let task = SyntheticTask {
        kind: TaskKind::Copy,
        vocab,
        min_len: 5,
        max_len: 5,
        train_count: 4,
        test_count: 120,
        seed: 17,
    };
    let acc = eval_token_accuracy(&tf, &reg, &task.test_split()).unwrap();
    // 600 Bernoulli(1/20) trials: mean 0.05, sd ~0.0089; allow 4 sd.
    assert!(acc < 0.05 + 4.0 * 0.0089, "accuracy {acc} implausibly high");
}
