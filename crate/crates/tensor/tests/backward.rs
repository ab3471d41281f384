use lt_tensor::{Graph, Tensor, TensorError};

#[test]
fn product_rule_single_weight() {
    // loss = w * x with w = 2, x = 3 -> dloss/dw = 3
    let g = Graph::new();
    let w = g.param("w", &Tensor::scalar(2.0));
    let x = g.constant(Tensor::scalar(3.0));
    let prod = g.mul(w, x).unwrap();
    let loss = g.sum_all(prod).unwrap();
    let grads = g.backward(loss).unwrap();
    assert_eq!(grads.get("w").unwrap().item(), 3.0);
}

#[test]
fn tanh_gradient_at_zero_is_one() {
    let g = Graph::new();
    let w = g.param("w", &Tensor::scalar(0.0));
    let y = g.tanh(w).unwrap();
    let loss = g.sum_all(y).unwrap();
    let grads = g.backward(loss).unwrap();
    assert_eq!(grads.get("w").unwrap().item(), 1.0);
}

#[test]
fn untouched_parameters_get_zero_gradients() {
    let g = Graph::new();
    let w = g.param("w", &Tensor::scalar(2.0));
    let unused = g.param("unused", &Tensor::zeros(&[3, 2]));
    let _ = unused;
    let y = g.tanh(w).unwrap();
    let loss = g.sum_all(y).unwrap();
    let grads = g.backward(loss).unwrap();
    let zero = grads.get("unused").unwrap();
    assert_eq!(zero.shape(), &[3, 2]);
    assert!(zero.data().iter().all(|&v| v == 0.0));
}

#[test]
fn backward_rejects_non_scalar_loss() {
    let g = Graph::new();
    let w = g.param("w", &Tensor::zeros(&[2, 2]));
    let y = g.tanh(w).unwrap();
    match g.backward(y) {
        Err(TensorError::NotScalar { shape, .. }) => assert_eq!(shape, vec![2, 2]),
        other => panic!("expected NotScalar, got {other:?}"),
    }
}

#[test]
fn reused_variable_accumulates_gradient() {
    // loss = w*w -> dloss/dw = 2w
    let g = Graph::new();
    let w = g.param("w", &Tensor::scalar(3.0));
    let sq = g.mul(w, w).unwrap();
    let loss = g.sum_all(sq).unwrap();
    let grads = g.backward(loss).unwrap();
    assert_eq!(grads.get("w").unwrap().item(), 6.0);
}

#[test]
fn all_primitives_pass_finite_difference_checks() {
    let names = lt_tensor::gradsuite::check_all_primitives(20, 1e-5, 0xfeed);
    // Keep an explicit inventory so a silently dropped case is caught.
    assert!(names.len() >= 24, "only {} primitives covered", names.len());
}
