use lt_models::{build_model, Model, ModelConfig};
use lt_tensor::{Graph, Rng, Tensor};

fn zero_weights(reg: &mut lt_models::ParamRegistry) {
    let names: Vec<String> = reg.entries().iter().map(|e| e.name.clone()).collect();
    for name in names {
        let shape = reg.tensor(&name).unwrap().shape().to_vec();
        reg.set_tensor(&name, Tensor::zeros(&shape)).unwrap();
    }
}

#[test]
fn zero_network_gives_uniform_policy_and_zero_value() {
    let config = ModelConfig::MlpActorCritic {
        obs_dim: 4,
        actions: 3,
        hidden: vec![8, 8],
    };
    let (mut reg, model) = build_model(&config, 7).unwrap();
    zero_weights(&mut reg);
    let g = Graph::new();
    let obs = Tensor::new(vec![2, 4], vec![0.3, -0.2, 0.5, 0.1, -1.0, 0.4, 0.0, 2.0]).unwrap();
    let (logits, values) = model.forward_actor_critic(&g, &reg, &obs).unwrap();
    let probs = g.softmax(logits).unwrap();
    for row in g.value(probs).data().chunks(3) {
        for &p in row {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }
    assert!(g.value(values).data().iter().all(|&v| v == 0.0));
}

#[test]
fn batch_of_observations_gives_matching_logit_rows() {
    let config = ModelConfig::MlpActorCritic {
        obs_dim: 4,
        actions: 2,
        hidden: vec![16],
    };
    let (reg, model) = build_model(&config, 11).unwrap();
    let mut rng = Rng::from_seed(5);
    let batch = 7;
    let obs = Tensor::new(
        vec![batch, 4],
        (0..batch * 4).map(|_| rng.uniform(-1.0, 1.0)).collect(),
    )
    .unwrap();
    let g = Graph::new();
    let (logits, values) = model.forward_actor_critic(&g, &reg, &obs).unwrap();
    assert_eq!(g.value(logits).shape(), &[batch, 2]);
    assert_eq!(g.value(values).shape(), &[batch]);

    // Each row equals the single-observation forward of that row.
    for b in 0..batch {
        let row = Tensor::new(vec![1, 4], obs.data()[b * 4..(b + 1) * 4].to_vec()).unwrap();
        let g1 = Graph::new();
        let (l1, _) = model.forward_actor_critic(&g1, &reg, &row).unwrap();
        assert_eq!(
            g1.value(l1).data(),
            &g.value(logits).data()[b * 2..(b + 1) * 2]
        );
    }
}

#[test]
fn fixed_seed_and_input_reproduce_logits() {
    let config = ModelConfig::ConvActorCritic {
        in_channels: 1,
        obs_size: 8,
        actions: 3,
        conv_channels: 4,
        fc: vec![16],
    };
    let obs = {
        let mut rng = Rng::from_seed(13);
        Tensor::new(vec![1, 1, 8, 8], (0..64).map(|_| rng.uniform(0.0, 1.0)).collect()).unwrap()
    };
    let run = || {
        let (reg, model) = build_model(&config, 21).unwrap();
        let g = Graph::new();
        let (logits, _) = model.forward_actor_critic(&g, &reg, &obs).unwrap();
        g.value(logits).data().to_vec()
    };
    assert_eq!(run(), run());
}

#[test]
fn zero_lstm_predicts_uniformly() {
    let vocab = 10;
    let config = ModelConfig::LstmLm {
        vocab,
        embed: 4,
        hidden: 5,
        layers: 2,
        dropout: 0.5,
    };
    let (mut reg, model) = build_model(&config, 3).unwrap();
    zero_weights(&mut reg);
    let Model::LstmLm(lm) = &model else { unreachable!() };
    let g = Graph::new();
    let tokens = vec![1usize, 2, 3, 4, 5, 6]; // batch 2 x steps 3
    let (logp, _) = lm.forward(&g, &reg, &tokens, 2, 3, None, None).unwrap();
    let expected = -(vocab as f64).ln();
    for &v in g.value(logp).data() {
        assert!((v - expected).abs() < 1e-12);
    }
}

#[test]
fn eval_mode_is_deterministic_and_train_dropout_is_not_a_noop() {
    let config = ModelConfig::LstmLm {
        vocab: 12,
        embed: 6,
        hidden: 8,
        layers: 2,
        dropout: 0.5,
    };
    let (reg, model) = build_model(&config, 17).unwrap();
    let Model::LstmLm(lm) = &model else { unreachable!() };
    let tokens = vec![3usize, 5, 7, 2, 0, 11];

    let eval = |_: u64| {
        let g = Graph::new();
        let (logp, _) = lm.forward(&g, &reg, &tokens, 2, 3, None, None).unwrap();
        g.value(logp).data().to_vec()
    };
    assert_eq!(eval(0), eval(1));

    let mut rng = Rng::from_seed(55);
    let g = Graph::new();
    let (logp, _) = lm
        .forward(&g, &reg, &tokens, 2, 3, None, Some(&mut rng))
        .unwrap();
    assert_ne!(g.value(logp).data().to_vec(), eval(0));
}

#[test]
fn carried_state_matches_single_full_pass_in_eval_mode() {
    let config = ModelConfig::LstmLm {
        vocab: 15,
        embed: 6,
        hidden: 7,
        layers: 2,
        dropout: 0.5,
    };
    let (reg, model) = build_model(&config, 29).unwrap();
    let Model::LstmLm(lm) = &model else { unreachable!() };
    let mut rng = Rng::from_seed(8);
    let batch = 3;
    let full_steps = 6;
    let tokens: Vec<usize> = (0..batch * full_steps).map(|_| rng.below(15)).collect();

    // Full pass.
    let g = Graph::new();
    let (logp_full, _) = lm
        .forward(&g, &reg, &tokens, batch, full_steps, None, None)
        .unwrap();
    let full = g.value(logp_full);

    // Two half passes with carried state.
    let half = full_steps / 2;
    let first: Vec<usize> = (0..batch)
        .flat_map(|b| tokens[b * full_steps..b * full_steps + half].to_vec())
        .collect();
    let second: Vec<usize> = (0..batch)
        .flat_map(|b| tokens[b * full_steps + half..(b + 1) * full_steps].to_vec())
        .collect();
    let g1 = Graph::new();
    let (_, carried) = lm.forward(&g1, &reg, &first, batch, half, None, None).unwrap();
    let g2 = Graph::new();
    let (logp_second, _) = lm
        .forward(&g2, &reg, &second, batch, half, Some(&carried), None)
        .unwrap();
    let split = g2.value(logp_second);

    // Final-position log-probs agree bitwise: same op sequence per step.
    let vocab = 15;
    for b in 0..batch {
        let from_full =
            &full.data()[((b * full_steps) + full_steps - 1) * vocab..((b * full_steps) + full_steps) * vocab];
        let from_split = &split.data()[((b * half) + half - 1) * vocab..((b * half) + half) * vocab];
        assert_eq!(from_full, from_split, "batch row {b}");
    }
}

#[test]
fn lstm_rejects_out_of_range_tokens() {
    let config = ModelConfig::LstmLm {
        vocab: 5,
        embed: 3,
        hidden: 4,
        layers: 1,
        dropout: 0.0,
    };
    let (reg, model) = build_model(&config, 1).unwrap();
    let Model::LstmLm(lm) = &model else { unreachable!() };
    let g = Graph::new();
    let err = lm.forward(&g, &reg, &[0, 1, 5, 2], 2, 2, None, None).unwrap_err();
    assert!(err.to_string().contains("out of range"), "{err}");
}
