//! Finite-difference checks for every primitive, shared by the unit tests
//! and the acceptance suite.

use std::collections::BTreeMap;

use crate::fdcheck::{check_gradients, FdParams};
use crate::graph::{Graph, Var};
use crate::rng::Rng;
use crate::tensor::Tensor;

fn random_tensor(rng: &mut Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    let len = shape.iter().product();
    Tensor::new(
        shape.to_vec(),
        (0..len).map(|_| rng.uniform(lo, hi)).collect(),
    )
    .expect("shape")
}

/// Bind every parameter into a graph under its name.
fn bind(g: &Graph, params: &FdParams) -> BTreeMap<String, Var> {
    params
        .iter()
        .map(|(name, t)| (name.clone(), g.param(name, t)))
        .collect()
}

type BuildFn = Box<dyn Fn(&Graph, &BTreeMap<String, Var>) -> Var>;

/// One primitive's check: a parameter set plus a loss builder.
///
/// The loss reduces the primitive's output to a scalar through `sum_all`
/// weighted by a fixed random projection so every output coordinate
/// contributes a distinct gradient path.
struct Case {
    name: &'static str,
    params: FdParams,
    build: BuildFn,
}

fn projected_loss(g: &Graph, out: Var, weights: &Tensor) -> Var {
    let w = g.constant(weights.clone());
    let prod = g.mul(out, w).expect("projection mul");
    g.sum_all(prod).expect("sum")
}

fn cases(rng: &mut Rng) -> Vec<Case> {
    let mut cases: Vec<Case> = Vec::new();

    // Elementwise binary ops.
    for (name, op) in [
        ("add", 0usize),
        ("sub", 1),
        ("mul", 2),
    ] {
        let a = random_tensor(rng, &[3, 4], -2.0, 2.0);
        let b = random_tensor(rng, &[3, 4], -2.0, 2.0);
        let proj = random_tensor(rng, &[3, 4], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("a".into(), a);
        params.insert("b".into(), b);
        cases.push(Case {
            name,
            params,
            build: Box::new(move |g, vars| {
                let out = match op {
                    0 => g.add(vars["a"], vars["b"]),
                    1 => g.sub(vars["a"], vars["b"]),
                    _ => g.mul(vars["a"], vars["b"]),
                }
                .expect("op");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // scale
    {
        let a = random_tensor(rng, &[2, 5], -2.0, 2.0);
        let proj = random_tensor(rng, &[2, 5], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("a".into(), a);
        cases.push(Case {
            name: "scale",
            params,
            build: Box::new(move |g, vars| {
                let out = g.scale(vars["a"], -1.7).expect("scale");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // add_bias
    {
        let x = random_tensor(rng, &[4, 3], -2.0, 2.0);
        let b = random_tensor(rng, &[3], -1.0, 1.0);
        let proj = random_tensor(rng, &[4, 3], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("b".into(), b);
        params.insert("x".into(), x);
        cases.push(Case {
            name: "add_bias",
            params,
            build: Box::new(move |g, vars| {
                let out = g.add_bias(vars["x"], vars["b"]).expect("add_bias");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // matmul
    {
        let a = random_tensor(rng, &[3, 4], -1.0, 1.0);
        let b = random_tensor(rng, &[4, 2], -1.0, 1.0);
        let proj = random_tensor(rng, &[3, 2], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("a".into(), a);
        params.insert("b".into(), b);
        cases.push(Case {
            name: "matmul",
            params,
            build: Box::new(move |g, vars| {
                let out = g.matmul(vars["a"], vars["b"]).expect("matmul");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // linear
    {
        let x = random_tensor(rng, &[3, 5], -1.0, 1.0);
        let w = random_tensor(rng, &[4, 5], -1.0, 1.0);
        let b = random_tensor(rng, &[4], -1.0, 1.0);
        let proj = random_tensor(rng, &[3, 4], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("b".into(), b);
        params.insert("w".into(), w);
        params.insert("x".into(), x);
        cases.push(Case {
            name: "linear",
            params,
            build: Box::new(move |g, vars| {
                let out = g
                    .linear(vars["x"], vars["w"], Some(vars["b"]))
                    .expect("linear");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // bmm
    {
        let a = random_tensor(rng, &[2, 3, 4], -1.0, 1.0);
        let b = random_tensor(rng, &[2, 4, 2], -1.0, 1.0);
        let proj = random_tensor(rng, &[2, 3, 2], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("a".into(), a);
        params.insert("b".into(), b);
        cases.push(Case {
            name: "bmm",
            params,
            build: Box::new(move |g, vars| {
                let out = g.bmm(vars["a"], vars["b"]).expect("bmm");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // Activations.
    for (name, op) in [("tanh", 0usize), ("sigmoid", 1), ("relu", 2)] {
        // Keep relu inputs away from the kink at zero.
        let x = Tensor::new(
            vec![3, 4],
            (0..12)
                .map(|_| {
                    let v = rng.uniform(0.1, 2.0);
                    if rng.bernoulli(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect(),
        )
        .expect("shape");
        let proj = random_tensor(rng, &[3, 4], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name,
            params,
            build: Box::new(move |g, vars| {
                let out = match op {
                    0 => g.tanh(vars["x"]),
                    1 => g.sigmoid(vars["x"]),
                    _ => g.relu(vars["x"]),
                }
                .expect("op");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // softmax / log_softmax
    for (name, log) in [("softmax", false), ("log_softmax", true)] {
        let x = random_tensor(rng, &[3, 5], -2.0, 2.0);
        let proj = random_tensor(rng, &[3, 5], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name,
            params,
            build: Box::new(move |g, vars| {
                let out = if log {
                    g.log_softmax(vars["x"])
                } else {
                    g.softmax(vars["x"])
                }
                .expect("op");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // nll_mean over log_softmax
    {
        let x = random_tensor(rng, &[4, 6], -2.0, 2.0);
        let targets: Vec<usize> = (0..4).map(|_| rng.below(6)).collect();
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "nll_mean",
            params,
            build: Box::new(move |g, vars| {
                let logp = g.log_softmax(vars["x"]).expect("log_softmax");
                g.nll_mean(logp, &targets).expect("nll")
            }),
        });
    }

    // select_index
    {
        let x = random_tensor(rng, &[5, 3], -2.0, 2.0);
        let idx: Vec<usize> = (0..5).map(|_| rng.below(3)).collect();
        let proj = random_tensor(rng, &[5], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "select_index",
            params,
            build: Box::new(move |g, vars| {
                let out = g.select_index(vars["x"], &idx).expect("select");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // embedding
    {
        let table = random_tensor(rng, &[7, 4], -1.0, 1.0);
        let tokens: Vec<usize> = (0..6).map(|_| rng.below(7)).collect();
        let proj = random_tensor(rng, &[6, 4], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("table".into(), table);
        cases.push(Case {
            name: "embedding",
            params,
            build: Box::new(move |g, vars| {
                let out = g.embedding(vars["table"], &tokens).expect("embedding");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // layer_norm
    {
        let x = random_tensor(rng, &[3, 6], -2.0, 2.0);
        let gain = random_tensor(rng, &[6], 0.5, 1.5);
        let bias = random_tensor(rng, &[6], -0.5, 0.5);
        let proj = random_tensor(rng, &[3, 6], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("bias".into(), bias);
        params.insert("gain".into(), gain);
        params.insert("x".into(), x);
        cases.push(Case {
            name: "layer_norm",
            params,
            build: Box::new(move |g, vars| {
                let out = g
                    .layer_norm(vars["x"], vars["gain"], vars["bias"], 1e-5)
                    .expect("layer_norm");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // conv2d
    {
        let x = random_tensor(rng, &[2, 2, 5, 5], -1.0, 1.0);
        let w = random_tensor(rng, &[3, 2, 3, 3], -1.0, 1.0);
        let b = random_tensor(rng, &[3], -0.5, 0.5);
        let proj = random_tensor(rng, &[2, 3, 5, 5], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("b".into(), b);
        params.insert("w".into(), w);
        params.insert("x".into(), x);
        cases.push(Case {
            name: "conv2d",
            params,
            build: Box::new(move |g, vars| {
                let out = g
                    .conv2d(vars["x"], vars["w"], Some(vars["b"]), 1, 1)
                    .expect("conv2d");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // max_pool2d; nudge values apart so finite differences do not cross
    // a tie between window entries.
    {
        let mut x = random_tensor(rng, &[2, 2, 4, 4], -1.0, 1.0);
        for (i, v) in x.data_mut().iter_mut().enumerate() {
            *v += i as f64 * 1e-3;
        }
        let proj = random_tensor(rng, &[2, 2, 2, 2], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "max_pool2d",
            params,
            build: Box::new(move |g, vars| {
                let out = g.max_pool2d(vars["x"], 2).expect("max_pool2d");
                projected_loss(g, out, &proj)
            }),
        });
    }

    // Shape ops: reshape, permute, concat, slice_last, sum_last, mean_all.
    {
        let x = random_tensor(rng, &[2, 6], -1.0, 1.0);
        let proj = random_tensor(rng, &[3, 4], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "reshape",
            params,
            build: Box::new(move |g, vars| {
                let out = g.reshape(vars["x"], &[3, 4]).expect("reshape");
                projected_loss(g, out, &proj)
            }),
        });
    }
    {
        let x = random_tensor(rng, &[2, 3, 4], -1.0, 1.0);
        let proj = random_tensor(rng, &[4, 2, 3], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "permute",
            params,
            build: Box::new(move |g, vars| {
                let out = g.permute(vars["x"], &[2, 0, 1]).expect("permute");
                projected_loss(g, out, &proj)
            }),
        });
    }
    {
        let a = random_tensor(rng, &[2, 3], -1.0, 1.0);
        let b = random_tensor(rng, &[2, 2], -1.0, 1.0);
        let proj = random_tensor(rng, &[2, 5], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("a".into(), a);
        params.insert("b".into(), b);
        cases.push(Case {
            name: "concat",
            params,
            build: Box::new(move |g, vars| {
                let out = g.concat(&[vars["a"], vars["b"]], 1).expect("concat");
                projected_loss(g, out, &proj)
            }),
        });
    }
    {
        let x = random_tensor(rng, &[3, 8], -1.0, 1.0);
        let proj = random_tensor(rng, &[3, 4], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "slice_last",
            params,
            build: Box::new(move |g, vars| {
                let out = g.slice_last(vars["x"], 2, 4).expect("slice_last");
                projected_loss(g, out, &proj)
            }),
        });
    }
    {
        let x = random_tensor(rng, &[3, 5], -1.0, 1.0);
        let proj = random_tensor(rng, &[3], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "sum_last",
            params,
            build: Box::new(move |g, vars| {
                let out = g.sum_last(vars["x"]).expect("sum_last");
                projected_loss(g, out, &proj)
            }),
        });
    }
    {
        let x = random_tensor(rng, &[4, 3], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "mean_all",
            params,
            build: Box::new(move |g, vars| g.mean_all(vars["x"]).expect("mean_all")),
        });
    }
    {
        let x = random_tensor(rng, &[4, 3], -1.0, 1.0);
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "sum_all",
            params,
            build: Box::new(move |g, vars| g.sum_all(vars["x"]).expect("sum_all")),
        });
    }

    // dropout with a frozen mask: re-seeding per evaluation keeps the mask
    // constant so the finite-difference path sees the same function.
    {
        let x = random_tensor(rng, &[4, 5], -1.0, 1.0);
        let proj = random_tensor(rng, &[4, 5], -1.0, 1.0);
        let mask_seed = rng.next_u64();
        let mut params = FdParams::new();
        params.insert("x".into(), x);
        cases.push(Case {
            name: "dropout",
            params,
            build: Box::new(move |g, vars| {
                let mut mask_rng = Rng::from_seed(mask_seed);
                let out = g.dropout(vars["x"], 0.7, &mut mask_rng).expect("dropout");
                projected_loss(g, out, &proj)
            }),
        });
    }

    cases
}

/// Run `trials` random instances of every primitive check.
///
/// Returns the list of primitive names exercised. Panics with a report on
/// the first failing coordinate.
pub fn check_all_primitives(trials: usize, tolerance: f64, seed: u64) -> Vec<&'static str> {
    let mut names = Vec::new();
    for trial in 0..trials {
        let mut rng = Rng::from_seed(
            crate::rng::derive_seed(seed, &["gradsuite", &trial.to_string()]),
        );
        for case in cases(&mut rng) {
            if trial == 0 {
                names.push(case.name);
            }
            let g = Graph::new();
            let vars = bind(&g, &case.params);
            let loss = (case.build)(&g, &vars);
            let grads = g.backward(loss).expect("backward");
            let build = &case.build;
            let result = check_gradients(
                &case.params,
                &grads,
                |p| {
                    let g = Graph::new();
                    let vars = bind(&g, p);
                    let loss = build(&g, &vars);
                    g.value(loss).item()
                },
                tolerance,
            );
            if let Err(f) = result {
                panic!(
                    "primitive `{}` failed gradient check (trial {trial}): \
                     param `{}`[{}] analytic {:.9e} vs numeric {:.9e} (rel {:.2e})",
                    case.name, f.param, f.coord, f.analytic, f.numeric, f.rel_err
                );
            }
        }
    }
    names
}
