use lt_tensor::{Graph, Rng, Tensor, TensorError};

#[test]
fn softmax_of_equal_logits_is_uniform() {
    let g = Graph::new();
    let x = g.constant(Tensor::new(vec![1, 2], vec![0.0, 0.0]).unwrap());
    let y = g.softmax(x).unwrap();
    assert_eq!(g.value(y).data(), &[0.5, 0.5]);
}

#[test]
fn nll_of_perfect_prediction_is_zero() {
    // Log-probabilities assigning probability 1 to the true class.
    let g = Graph::new();
    let logp = g.constant(Tensor::new(vec![1, 3], vec![0.0, -1e9, -1e9]).unwrap());
    let loss = g.nll_mean(logp, &[0]).unwrap();
    assert_eq!(g.value(loss).item(), 0.0);
}

#[test]
fn max_pool_takes_window_maximum() {
    let g = Graph::new();
    let x = g.constant(Tensor::new(vec![1, 1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap());
    let y = g.max_pool2d(x, 2).unwrap();
    assert_eq!(g.value(y).shape(), &[1, 1, 1, 1]);
    assert_eq!(g.value(y).item(), 4.0);
}

#[test]
fn conv_output_size_matches_closed_form() {
    // (24 - 5 + 2*2)/1 + 1 = 24
    let g = Graph::new();
    let x = g.constant(Tensor::zeros(&[1, 1, 24, 24]));
    let w = g.constant(Tensor::zeros(&[4, 1, 5, 5]));
    let y = g.conv2d(x, w, None, 1, 2).unwrap();
    assert_eq!(g.value(y).shape(), &[1, 4, 24, 24]);
}

#[test]
fn conv_matches_hand_computed_values() {
    // 3x3 input, 2x2 kernel, stride 1, no padding.
    let g = Graph::new();
    let x = g.constant(
        Tensor::new(
            vec![1, 1, 3, 3],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0],
        )
        .unwrap(),
    );
    let w = g.constant(Tensor::new(vec![1, 1, 2, 2], vec![1.0, 0.0, 0.0, -1.0]).unwrap());
    let y = g.conv2d(x, w, None, 1, 0).unwrap();
    // out[i,j] = x[i,j] - x[i+1,j+1] = -4 everywhere
    assert_eq!(g.value(y).data(), &[-4.0, -4.0, -4.0, -4.0]);
}

#[test]
fn shape_mismatch_names_both_shapes() {
    let g = Graph::new();
    let a = g.constant(Tensor::zeros(&[2, 3]));
    let b = g.constant(Tensor::zeros(&[3, 3]));
    match g.add(a, b) {
        Err(TensorError::ShapeMismatch { op, lhs, rhs }) => {
            assert_eq!(op, "add");
            assert_eq!(lhs, vec![2, 3]);
            assert_eq!(rhs, vec![3, 3]);
        }
        other => panic!("expected shape mismatch, got {other:?}"),
    }
}

#[test]
fn non_finite_output_is_rejected_with_op_name() {
    let g = Graph::new();
    let a = g.constant(Tensor::new(vec![1], vec![1e308]).unwrap());
    let b = g.constant(Tensor::new(vec![1], vec![1e308]).unwrap());
    match g.add(a, b) {
        Err(TensorError::NonFinite { op }) => assert_eq!(op, "add"),
        other => panic!("expected non-finite error, got {other:?}"),
    }
}

#[test]
fn dropout_rejects_bad_keep_probability() {
    let g = Graph::new();
    let x = g.constant(Tensor::zeros(&[2, 2]));
    let mut rng = Rng::from_seed(1);
    assert!(g.dropout(x, 0.0, &mut rng).is_err());
    assert!(g.dropout(x, 1.2, &mut rng).is_err());
    assert!(g.dropout(x, 1.0, &mut rng).is_ok());
}

#[test]
fn dropout_preserves_expectation() {
    // Mean of dropout(x) over many trials stays within 1% of x.
    let mut rng = Rng::from_seed(99);
    let x = Tensor::new(vec![4], vec![1.0, -2.0, 0.5, 3.0]).unwrap();
    let keep = 0.6;
    let trials = 100_000;
    let mut sums = vec![0.0; 4];
    for _ in 0..trials {
        let g = Graph::new();
        let xv = g.constant(x.clone());
        let y = g.dropout(xv, keep, &mut rng).unwrap();
        for (s, v) in sums.iter_mut().zip(g.value(y).data()) {
            *s += v;
        }
    }
    for (s, v) in sums.iter().zip(x.data()) {
        let mean = s / trials as f64;
        assert!(
            (mean - v).abs() <= 0.01 * v.abs(),
            "mean {mean} vs expected {v}"
        );
    }
}

#[test]
fn concat_and_slice_are_inverse() {
    let g = Graph::new();
    let a = g.constant(Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap());
    let b = g.constant(Tensor::new(vec![2, 3], vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0]).unwrap());
    let c = g.concat(&[a, b], 1).unwrap();
    assert_eq!(
        g.value(c).data(),
        &[1.0, 2.0, 5.0, 6.0, 7.0, 3.0, 4.0, 8.0, 9.0, 10.0]
    );
    let back = g.slice_last(c, 2, 3).unwrap();
    assert_eq!(g.value(back).data(), g.value(b).data());
}

#[test]
fn identical_seeds_give_bit_identical_results() {
    let run = || {
        let mut rng = Rng::from_seed(2024);
        let g = Graph::new();
        let x = g.constant(Tensor::new(
            vec![4, 4],
            (0..16).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap());
        let w = g.constant(Tensor::new(
            vec![4, 4],
            (0..16).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap());
        let h = g.matmul(x, w).unwrap();
        let h = g.tanh(h).unwrap();
        let d = g.dropout(h, 0.8, &mut rng).unwrap();
        let s = g.softmax(d).unwrap();
        g.value(s).data().to_vec()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
}

#[test]
fn untaped_work_does_not_disturb_a_taped_run() {
    let make_loss = |g: &Graph| {
        let w = g.param("w", &Tensor::new(vec![2], vec![0.3, -0.7]).unwrap());
        let x = g.constant(Tensor::new(vec![2], vec![1.5, 2.5]).unwrap());
        let prod = g.mul(w, x).unwrap();
        g.sum_all(prod).unwrap()
    };

    // Clean run.
    let g1 = Graph::new();
    let loss1 = make_loss(&g1);
    let grads1 = g1.backward(loss1).unwrap();

    // Interleave unrelated, un-backpropagated work on other graphs.
    let noise = Graph::new();
    let n = noise.constant(Tensor::new(vec![3], vec![9.0, 8.0, 7.0]).unwrap());
    let _ = noise.tanh(n).unwrap();

    let g2 = Graph::new();
    let loss2 = make_loss(&g2);
    let grads2 = g2.backward(loss2).unwrap();

    assert_eq!(grads1.get("w").unwrap().data(), grads2.get("w").unwrap().data());
}
