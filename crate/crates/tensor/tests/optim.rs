use lt_tensor::{optimizer_step, GradientMap, OptimizerConfig, OptimizerState, Tensor};

#[test]
fn adam_first_step_matches_hand_computation() {
    // w=1, g=1, lr=1e-3, eps=1e-3: bias-corrected m_hat = v_hat = 1,
    // so w' = 1 - lr / (1 + eps).
    let cfg = OptimizerConfig::Adam {
        learning_rate: 1e-3,
        beta1: 0.9,
        beta2: 0.999,
        epsilon: 1e-3,
    };
    let mut state = OptimizerState::new();
    let mut w = Tensor::scalar(1.0);
    let mut grads = GradientMap::empty();
    grads.insert("w".into(), Tensor::scalar(1.0));
    optimizer_step(&mut state, &cfg, &mut [("w", &mut w)], &grads).unwrap();
    let expected = 1.0 - 1e-3 / (1.0 + 1e-3);
    assert!((w.item() - expected).abs() < 1e-15, "{} vs {expected}", w.item());
    assert_eq!(state.step_count(), 1);
}

#[test]
fn rmsprop_first_step_matches_hand_computation() {
    // v = (1-alpha) g^2 = 0.01, w' = 1 - lr * g / (sqrt(v) + eps)
    let cfg = OptimizerConfig::RmsProp {
        learning_rate: 1e-4,
        alpha: 0.99,
        epsilon: 1e-8,
    };
    let mut state = OptimizerState::new();
    let mut w = Tensor::scalar(1.0);
    let mut grads = GradientMap::empty();
    grads.insert("w".into(), Tensor::scalar(1.0));
    optimizer_step(&mut state, &cfg, &mut [("w", &mut w)], &grads).unwrap();
    let expected = 1.0 - 1e-4 / (0.1f64 + 1e-8);
    assert!((w.item() - expected).abs() < 1e-15, "{} vs {expected}", w.item());
}

#[test]
fn zero_gradient_is_a_fixed_point() {
    for cfg in [OptimizerConfig::adam(1e-3), OptimizerConfig::rmsprop(1e-4)] {
        let mut state = OptimizerState::new();
        let mut w = Tensor::new(vec![3], vec![0.5, -1.5, 2.0]).unwrap();
        let before = w.clone();
        let mut grads = GradientMap::empty();
        grads.insert("w".into(), Tensor::zeros(&[3]));
        for _ in 0..5 {
            optimizer_step(&mut state, &cfg, &mut [("w", &mut w)], &grads).unwrap();
        }
        assert_eq!(w.data(), before.data());
    }
}

#[test]
fn non_finite_gradient_names_the_parameter() {
    let cfg = OptimizerConfig::adam(1e-3);
    let mut state = OptimizerState::new();
    let mut w = Tensor::scalar(1.0);
    let mut grads = GradientMap::empty();
    grads.insert("w".into(), Tensor::scalar(f64::NAN));
    let err = optimizer_step(&mut state, &cfg, &mut [("w", &mut w)], &grads).unwrap_err();
    assert!(err.to_string().contains("`w`"), "{err}");
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        OptimizerConfig::Adam {
            learning_rate: 0.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        },
        OptimizerConfig::Adam {
            learning_rate: 1e-3,
            beta1: 1.0,
            beta2: 0.999,
            epsilon: 1e-8,
        },
        OptimizerConfig::RmsProp {
            learning_rate: 1e-4,
            alpha: 0.99,
            epsilon: 0.0,
        },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?} should be invalid");
    }
}

#[test]
fn missing_gradient_entry_counts_as_zero() {
    let cfg = OptimizerConfig::rmsprop(1e-4);
    let mut state = OptimizerState::new();
    let mut w = Tensor::scalar(4.0);
    let grads = GradientMap::empty();
    optimizer_step(&mut state, &cfg, &mut [("w", &mut w)], &grads).unwrap();
    assert_eq!(w.item(), 4.0);
}

#[test]
fn adam_two_steps_match_sequential_hand_computation() {
    let (lr, b1, b2, eps) = (1e-2, 0.9, 0.999, 1e-8);
    let cfg = OptimizerConfig::Adam {
        learning_rate: lr,
        beta1: b1,
        beta2: b2,
        epsilon: eps,
    };
    let mut state = OptimizerState::new();
    let mut w = Tensor::scalar(0.5);
    let gs = [0.3, -0.2];

    // Independent scalar recomputation.
    let (mut m, mut v, mut wx) = (0.0f64, 0.0f64, 0.5f64);
    for (t, g) in gs.iter().enumerate() {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let mh = m / (1.0 - b1.powi(t as i32 + 1));
        let vh = v / (1.0 - b2.powi(t as i32 + 1));
        wx -= lr * mh / (vh.sqrt() + eps);
    }

    for g in gs {
        let mut grads = GradientMap::empty();
        grads.insert("w".into(), Tensor::scalar(g));
        optimizer_step(&mut state, &cfg, &mut [("w", &mut w)], &grads).unwrap();
    }
    assert!((w.item() - wx).abs() < 1e-15);
}
