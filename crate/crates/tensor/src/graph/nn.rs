use std::rc::Rc;

use crate::error::{Result, TensorError};
use crate::graph::{Graph, Var};
use crate::rng::Rng;
use crate::tensor::Tensor;

impl Graph {
    pub fn tanh(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        let data: Vec<f64> = xv.data().iter().map(|v| v.tanh()).collect();
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        let yc = Rc::new(out.clone());
        self.push_op(
            "tanh",
            out,
            vec![x],
            Box::new(move |dy| {
                let d = dy
                    .data()
                    .iter()
                    .zip(yc.data())
                    .map(|(g, y)| g * (1.0 - y * y))
                    .collect();
                vec![Tensor::new(dy.shape().to_vec(), d).expect("shape")]
            }),
        )
    }

    pub fn sigmoid(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        let data: Vec<f64> = xv
            .data()
            .iter()
            .map(|v| 1.0 / (1.0 + (-v).exp()))
            .collect();
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        let yc = Rc::new(out.clone());
        self.push_op(
            "sigmoid",
            out,
            vec![x],
            Box::new(move |dy| {
                let d = dy
                    .data()
                    .iter()
                    .zip(yc.data())
                    .map(|(g, y)| g * y * (1.0 - y))
                    .collect();
                vec![Tensor::new(dy.shape().to_vec(), d).expect("shape")]
            }),
        )
    }

    pub fn relu(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        let data: Vec<f64> = xv.data().iter().map(|v| v.max(0.0)).collect();
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        let xc = Rc::clone(&xv);
        self.push_op(
            "relu",
            out,
            vec![x],
            Box::new(move |dy| {
                let d = dy
                    .data()
                    .iter()
                    .zip(xc.data())
                    .map(|(g, v)| if *v > 0.0 { *g } else { 0.0 })
                    .collect();
                vec![Tensor::new(dy.shape().to_vec(), d).expect("shape")]
            }),
        )
    }

    /// Softmax over the last axis, numerically stabilized.
    pub fn softmax(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        let d = *xv.shape().last().ok_or(TensorError::InvalidArgument {
            op: "softmax",
            msg: "rank-0 input".into(),
        })?;
        let mut data = xv.data().to_vec();
        for row in data.chunks_mut(d) {
            let max = row.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        let yc = Rc::new(out.clone());
        self.push_op(
            "softmax",
            out,
            vec![x],
            Box::new(move |dy| {
                let mut dx = vec![0.0; dy.len()];
                for (r, (dy_row, y_row)) in
                    dy.data().chunks(d).zip(yc.data().chunks(d)).enumerate()
                {
                    let dot: f64 = dy_row.iter().zip(y_row).map(|(g, y)| g * y).sum();
                    for (i, slot) in dx[r * d..(r + 1) * d].iter_mut().enumerate() {
                        *slot = y_row[i] * (dy_row[i] - dot);
                    }
                }
                vec![Tensor::new(dy.shape().to_vec(), dx).expect("shape")]
            }),
        )
    }

    /// Log-softmax over the last axis.
    pub fn log_softmax(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        let d = *xv.shape().last().ok_or(TensorError::InvalidArgument {
            op: "log_softmax",
            msg: "rank-0 input".into(),
        })?;
        let mut data = xv.data().to_vec();
        for row in data.chunks_mut(d) {
            let max = row.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
            let lse = max
                + row
                    .iter()
                    .map(|v| (v - max).exp())
                    .sum::<f64>()
                    .ln();
            for v in row.iter_mut() {
                *v -= lse;
            }
        }
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        let yc = Rc::new(out.clone());
        self.push_op(
            "log_softmax",
            out,
            vec![x],
            Box::new(move |dy| {
                let mut dx = vec![0.0; dy.len()];
                for (r, (dy_row, y_row)) in
                    dy.data().chunks(d).zip(yc.data().chunks(d)).enumerate()
                {
                    let sum: f64 = dy_row.iter().sum();
                    for (i, slot) in dx[r * d..(r + 1) * d].iter_mut().enumerate() {
                        *slot = dy_row[i] - y_row[i].exp() * sum;
                    }
                }
                vec![Tensor::new(dy.shape().to_vec(), dx).expect("shape")]
            }),
        )
    }

    /// Mean negative log-likelihood: -(1/N) sum_i logp[i, target_i].
    ///
    /// `logp` is interpreted as rows of log-probabilities over the last
    /// axis; leading axes are flattened.
    pub fn nll_mean(&self, logp: Var, targets: &[usize]) -> Result<Var> {
        let lv = self.value(logp);
        let d = *lv.shape().last().ok_or(TensorError::InvalidArgument {
            op: "nll_mean",
            msg: "rank-0 input".into(),
        })?;
        let rows = lv.len() / d;
        if targets.len() != rows {
            return Err(TensorError::InvalidArgument {
                op: "nll_mean",
                msg: format!("{} targets for {} rows", targets.len(), rows),
            });
        }
        let mut total = 0.0;
        for (r, &t) in targets.iter().enumerate() {
            if t >= d {
                return Err(TensorError::InvalidArgument {
                    op: "nll_mean",
                    msg: format!("target {t} out of range for {d} classes"),
                });
            }
            total -= lv.data()[r * d + t];
        }
        let out = Tensor::scalar(total / rows as f64);
        let targets = targets.to_vec();
        let shape = lv.shape().to_vec();
        self.push_op(
            "nll_mean",
            out,
            vec![logp],
            Box::new(move |dy| {
                let g = dy.item();
                let mut dl = vec![0.0; rows * d];
                for (r, &t) in targets.iter().enumerate() {
                    dl[r * d + t] = -g / rows as f64;
                }
                vec![Tensor::new(shape.clone(), dl).expect("shape")]
            }),
        )
    }

    /// Pick one value per row: out[i] = x[i, index_i].
    pub fn select_index(&self, x: Var, indices: &[usize]) -> Result<Var> {
        let xv = self.value(x);
        if xv.rank() != 2 {
            return Err(TensorError::InvalidArgument {
                op: "select_index",
                msg: format!("expected rank-2 input, got {:?}", xv.shape()),
            });
        }
        let (rows, d) = (xv.shape()[0], xv.shape()[1]);
        if indices.len() != rows {
            return Err(TensorError::InvalidArgument {
                op: "select_index",
                msg: format!("{} indices for {} rows", indices.len(), rows),
            });
        }
        let mut data = Vec::with_capacity(rows);
        for (r, &i) in indices.iter().enumerate() {
            if i >= d {
                return Err(TensorError::InvalidArgument {
                    op: "select_index",
                    msg: format!("index {i} out of range for width {d}"),
                });
            }
            data.push(xv.data()[r * d + i]);
        }
        let out = Tensor::from_vec(data);
        let indices = indices.to_vec();
        self.push_op(
            "select_index",
            out,
            vec![x],
            Box::new(move |dy| {
                let mut dx = vec![0.0; rows * d];
                for (r, &i) in indices.iter().enumerate() {
                    dx[r * d + i] = dy.data()[r];
                }
                vec![Tensor::new(vec![rows, d], dx).expect("shape")]
            }),
        )
    }

    /// Row lookup: out[i, :] = table[token_i, :].
    pub fn embedding(&self, table: Var, tokens: &[usize]) -> Result<Var> {
        let tv = self.value(table);
        if tv.rank() != 2 {
            return Err(TensorError::InvalidArgument {
                op: "embedding",
                msg: format!("expected rank-2 table, got {:?}", tv.shape()),
            });
        }
        let (vocab, dim) = (tv.shape()[0], tv.shape()[1]);
        let mut data = Vec::with_capacity(tokens.len() * dim);
        for &t in tokens {
            if t >= vocab {
                return Err(TensorError::InvalidArgument {
                    op: "embedding",
                    msg: format!("token id {t} out of range for vocabulary {vocab}"),
                });
            }
            data.extend_from_slice(&tv.data()[t * dim..(t + 1) * dim]);
        }
        let out = Tensor::new(vec![tokens.len(), dim], data)?;
        let tokens = tokens.to_vec();
        self.push_op(
            "embedding",
            out,
            vec![table],
            Box::new(move |dy| {
                let mut dt = vec![0.0; vocab * dim];
                for (r, &t) in tokens.iter().enumerate() {
                    let src = &dy.data()[r * dim..(r + 1) * dim];
                    for (slot, v) in dt[t * dim..(t + 1) * dim].iter_mut().zip(src) {
                        *slot += v;
                    }
                }
                vec![Tensor::new(vec![vocab, dim], dt).expect("shape")]
            }),
        )
    }

    /// Layer normalization over the last axis with learned gain and bias.
    pub fn layer_norm(&self, x: Var, gain: Var, bias: Var, eps: f64) -> Result<Var> {
        let (xv, gv, bv) = (self.value(x), self.value(gain), self.value(bias));
        let d = *xv.shape().last().ok_or(TensorError::InvalidArgument {
            op: "layer_norm",
            msg: "rank-0 input".into(),
        })?;
        if gv.len() != d || bv.len() != d {
            return Err(TensorError::ShapeMismatch {
                op: "layer_norm",
                lhs: xv.shape().to_vec(),
                rhs: gv.shape().to_vec(),
            });
        }
        let rows = xv.len() / d;
        let mut normed = vec![0.0; rows * d];
        let mut inv_std = vec![0.0; rows];
        let mut out = vec![0.0; rows * d];
        for r in 0..rows {
            let row = &xv.data()[r * d..(r + 1) * d];
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + eps).sqrt();
            inv_std[r] = inv;
            for i in 0..d {
                let n = (row[i] - mean) * inv;
                normed[r * d + i] = n;
                out[r * d + i] = gv.data()[i] * n + bv.data()[i];
            }
        }
        let out = Tensor::new(xv.shape().to_vec(), out)?;
        let gc = Rc::clone(&gv);
        let normed = Rc::new(normed);
        let inv_std = Rc::new(inv_std);
        let shape = xv.shape().to_vec();
        self.push_op(
            "layer_norm",
            out,
            vec![x, gain, bias],
            Box::new(move |dy| {
                let mut dx = vec![0.0; rows * d];
                let mut dg = vec![0.0; d];
                let mut db = vec![0.0; d];
                for r in 0..rows {
                    let dy_row = &dy.data()[r * d..(r + 1) * d];
                    let n_row = &normed[r * d..(r + 1) * d];
                    let mut dn_mean = 0.0;
                    let mut dn_dot = 0.0;
                    for i in 0..d {
                        let dn = dy_row[i] * gc.data()[i];
                        dn_mean += dn;
                        dn_dot += dn * n_row[i];
                        dg[i] += dy_row[i] * n_row[i];
                        db[i] += dy_row[i];
                    }
                    dn_mean /= d as f64;
                    dn_dot /= d as f64;
                    for i in 0..d {
                        let dn = dy_row[i] * gc.data()[i];
                        dx[r * d + i] = inv_std[r] * (dn - dn_mean - n_row[i] * dn_dot);
                    }
                }
                vec![
                    Tensor::new(shape.clone(), dx).expect("shape"),
                    Tensor::from_vec(dg),
                    Tensor::from_vec(db),
                ]
            }),
        )
    }

    /// Train-mode dropout: Bernoulli keep mask with inverted scaling, so the
    /// expected value of the output equals the input and evaluation needs no
    /// rescaling. Evaluation simply skips this op.
    pub fn dropout(&self, x: Var, keep_prob: f64, rng: &mut Rng) -> Result<Var> {
        if !(keep_prob > 0.0 && keep_prob <= 1.0) {
            return Err(TensorError::InvalidArgument {
                op: "dropout",
                msg: format!("keep probability {keep_prob} outside (0, 1]"),
            });
        }
        let xv = self.value(x);
        let scale: Vec<f64> = (0..xv.len())
            .map(|_| {
                if rng.bernoulli(keep_prob) {
                    1.0 / keep_prob
                } else {
                    0.0
                }
            })
            .collect();
        let data = xv
            .data()
            .iter()
            .zip(&scale)
            .map(|(v, s)| v * s)
            .collect();
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        let scale = Rc::new(scale);
        self.push_op(
            "dropout",
            out,
            vec![x],
            Box::new(move |dy| {
                let d = dy
                    .data()
                    .iter()
                    .zip(scale.iter())
                    .map(|(g, s)| g * s)
                    .collect();
                vec![Tensor::new(dy.shape().to_vec(), d).expect("shape")]
            }),
        )
    }

    /// Mean over every element, producing a scalar.
    pub fn mean_all(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        let n = xv.len() as f64;
        let out = Tensor::scalar(xv.data().iter().sum::<f64>() / n);
        let shape = xv.shape().to_vec();
        self.push_op(
            "mean_all",
            out,
            vec![x],
            Box::new(move |dy| {
                let g = dy.item() / n;
                vec![Tensor::full(&shape, g)]
            }),
        )
    }

    /// Sum over every element, producing a scalar.
    pub fn sum_all(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        let out = Tensor::scalar(xv.data().iter().sum::<f64>());
        let shape = xv.shape().to_vec();
        self.push_op(
            "sum_all",
            out,
            vec![x],
            Box::new(move |dy| {
                let g = dy.item();
                vec![Tensor::full(&shape, g)]
            }),
        )
    }

    /// Sum over the last axis: (..., d) -> (...).
    pub fn sum_last(&self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        if xv.rank() < 2 {
            return Err(TensorError::InvalidArgument {
                op: "sum_last",
                msg: format!("need rank >= 2, got {:?}", xv.shape()),
            });
        }
        let d = *xv.shape().last().unwrap();
        let rows = xv.len() / d;
        let data: Vec<f64> = xv.data().chunks(d).map(|row| row.iter().sum()).collect();
        let out_shape = xv.shape()[..xv.rank() - 1].to_vec();
        let out = Tensor::new(out_shape, data)?;
        let in_shape = xv.shape().to_vec();
        self.push_op(
            "sum_last",
            out,
            vec![x],
            Box::new(move |dy| {
                let mut dx = vec![0.0; rows * d];
                for (r, &g) in dy.data().iter().enumerate() {
                    dx[r * d..(r + 1) * d].fill(g);
                }
                vec![Tensor::new(in_shape.clone(), dx).expect("shape")]
            }),
        )
    }
}
