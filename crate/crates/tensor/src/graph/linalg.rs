use std::rc::Rc;

use crate::error::{Result, TensorError};
use crate::graph::{Graph, Var};
use crate::kernels;
use crate::tensor::Tensor;

impl Graph {
    /// Elementwise a + b (same shape).
    pub fn add(&self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(TensorError::ShapeMismatch {
                op: "add",
                lhs: av.shape().to_vec(),
                rhs: bv.shape().to_vec(),
            });
        }
        let data = av.data().iter().zip(bv.data()).map(|(x, y)| x + y).collect();
        let out = Tensor::new(av.shape().to_vec(), data)?;
        self.push_op(
            "add",
            out,
            vec![a, b],
            Box::new(move |dy| vec![dy.clone(), dy.clone()]),
        )
    }

    /// Elementwise a - b (same shape).
    pub fn sub(&self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(TensorError::ShapeMismatch {
                op: "sub",
                lhs: av.shape().to_vec(),
                rhs: bv.shape().to_vec(),
            });
        }
        let data = av.data().iter().zip(bv.data()).map(|(x, y)| x - y).collect();
        let out = Tensor::new(av.shape().to_vec(), data)?;
        self.push_op(
            "sub",
            out,
            vec![a, b],
            Box::new(move |dy| {
                let neg = Tensor::new(
                    dy.shape().to_vec(),
                    dy.data().iter().map(|v| -v).collect(),
                )
                .expect("shape preserved");
                vec![dy.clone(), neg]
            }),
        )
    }

    /// Elementwise a * b (same shape).
    pub fn mul(&self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(TensorError::ShapeMismatch {
                op: "mul",
                lhs: av.shape().to_vec(),
                rhs: bv.shape().to_vec(),
            });
        }
        let data = av.data().iter().zip(bv.data()).map(|(x, y)| x * y).collect();
        let out = Tensor::new(av.shape().to_vec(), data)?;
        let (ac, bc) = (Rc::clone(&av), Rc::clone(&bv));
        self.push_op(
            "mul",
            out,
            vec![a, b],
            Box::new(move |dy| {
                let da = dy
                    .data()
                    .iter()
                    .zip(bc.data())
                    .map(|(g, y)| g * y)
                    .collect();
                let db = dy
                    .data()
                    .iter()
                    .zip(ac.data())
                    .map(|(g, x)| g * x)
                    .collect();
                vec![
                    Tensor::new(dy.shape().to_vec(), da).expect("shape preserved"),
                    Tensor::new(dy.shape().to_vec(), db).expect("shape preserved"),
                ]
            }),
        )
    }

    /// x * c for a compile-time constant factor.
    pub fn scale(&self, x: Var, c: f64) -> Result<Var> {
        let xv = self.value(x);
        let data = xv.data().iter().map(|v| v * c).collect();
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        self.push_op(
            "scale",
            out,
            vec![x],
            Box::new(move |dy| {
                vec![Tensor::new(
                    dy.shape().to_vec(),
                    dy.data().iter().map(|v| v * c).collect(),
                )
                .expect("shape preserved")]
            }),
        )
    }

    /// Broadcast-add a vector over the last axis: x[..., d] + b[d].
    pub fn add_bias(&self, x: Var, b: Var) -> Result<Var> {
        let (xv, bv) = (self.value(x), self.value(b));
        let d = *xv.shape().last().unwrap_or(&0);
        if bv.rank() != 1 || bv.len() != d {
            return Err(TensorError::ShapeMismatch {
                op: "add_bias",
                lhs: xv.shape().to_vec(),
                rhs: bv.shape().to_vec(),
            });
        }
        let mut data = xv.data().to_vec();
        for row in data.chunks_mut(d) {
            for (v, bb) in row.iter_mut().zip(bv.data()) {
                *v += bb;
            }
        }
        let out = Tensor::new(xv.shape().to_vec(), data)?;
        self.push_op(
            "add_bias",
            out,
            vec![x, b],
            Box::new(move |dy| {
                let mut db = vec![0.0; d];
                for row in dy.data().chunks(d) {
                    for (acc, v) in db.iter_mut().zip(row) {
                        *acc += v;
                    }
                }
                vec![dy.clone(), Tensor::from_vec(db)]
            }),
        )
    }

    /// General matrix product a[m,k] * b[k,n].
    pub fn matmul(&self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.rank() != 2 || bv.rank() != 2 || av.shape()[1] != bv.shape()[0] {
            return Err(TensorError::ShapeMismatch {
                op: "matmul",
                lhs: av.shape().to_vec(),
                rhs: bv.shape().to_vec(),
            });
        }
        let (m, k, n) = (av.shape()[0], av.shape()[1], bv.shape()[1]);
        let mut out = vec![0.0; m * n];
        kernels::mm(av.data(), bv.data(), m, k, n, &mut out);
        let out = Tensor::new(vec![m, n], out)?;
        let (ac, bc) = (Rc::clone(&av), Rc::clone(&bv));
        self.push_op(
            "matmul",
            out,
            vec![a, b],
            Box::new(move |dy| {
                let mut da = vec![0.0; m * k];
                kernels::mm_bt(dy.data(), bc.data(), m, n, k, &mut da);
                let mut db = vec![0.0; k * n];
                kernels::mm_at(ac.data(), dy.data(), m, k, n, &mut db);
                vec![
                    Tensor::new(vec![m, k], da).expect("shape"),
                    Tensor::new(vec![k, n], db).expect("shape"),
                ]
            }),
        )
    }

    /// Affine map y = x * w^T + b with x[rows, in], w[out, in], b[out].
    ///
    /// Leading axes of x beyond the last are treated as batch rows, so
    /// (B, T, in) inputs work directly.
    pub fn linear(&self, x: Var, w: Var, b: Option<Var>) -> Result<Var> {
        let (xv, wv) = (self.value(x), self.value(w));
        let in_dim = *xv.shape().last().unwrap_or(&0);
        if wv.rank() != 2 || wv.shape()[1] != in_dim {
            return Err(TensorError::ShapeMismatch {
                op: "linear",
                lhs: xv.shape().to_vec(),
                rhs: wv.shape().to_vec(),
            });
        }
        let out_dim = wv.shape()[0];
        let rows = xv.len() / in_dim;
        if let Some(bvar) = b {
            let bv = self.value(bvar);
            if bv.rank() != 1 || bv.len() != out_dim {
                return Err(TensorError::ShapeMismatch {
                    op: "linear",
                    lhs: wv.shape().to_vec(),
                    rhs: bv.shape().to_vec(),
                });
            }
        }

        // One transpose per call keeps the hot product in the fast kernel.
        let mut wt = vec![0.0; wv.len()];
        kernels::transpose(wv.data(), out_dim, in_dim, &mut wt);
        let mut out = vec![0.0; rows * out_dim];
        kernels::mm(xv.data(), &wt, rows, in_dim, out_dim, &mut out);
        if let Some(bvar) = b {
            let bv = self.value(bvar);
            for row in out.chunks_mut(out_dim) {
                for (v, bb) in row.iter_mut().zip(bv.data()) {
                    *v += bb;
                }
            }
        }
        let mut out_shape = xv.shape().to_vec();
        *out_shape.last_mut().unwrap() = out_dim;
        let out = Tensor::new(out_shape, out)?;

        let (xc, wc) = (Rc::clone(&xv), Rc::clone(&wv));
        let x_shape = xv.shape().to_vec();
        let mut parents = vec![x, w];
        if let Some(bvar) = b {
            parents.push(bvar);
        }
        let has_bias = b.is_some();
        self.push_op(
            "linear",
            out,
            parents,
            Box::new(move |dy| {
                // dy rows: [rows, out_dim]
                let mut dx = vec![0.0; rows * in_dim];
                kernels::mm(dy.data(), wc.data(), rows, out_dim, in_dim, &mut dx);
                let mut dw = vec![0.0; out_dim * in_dim];
                kernels::mm_at(dy.data(), xc.data(), rows, out_dim, in_dim, &mut dw);
                let mut grads = vec![
                    Tensor::new(x_shape.clone(), dx).expect("shape"),
                    Tensor::new(vec![out_dim, in_dim], dw).expect("shape"),
                ];
                if has_bias {
                    let mut db = vec![0.0; out_dim];
                    for row in dy.data().chunks(out_dim) {
                        for (acc, v) in db.iter_mut().zip(row) {
                            *acc += v;
                        }
                    }
                    grads.push(Tensor::from_vec(db));
                }
                grads
            }),
        )
    }

    /// Batched matrix product a[n,p,q] * b[n,q,r].
    pub fn bmm(&self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        let ok = av.rank() == 3
            && bv.rank() == 3
            && av.shape()[0] == bv.shape()[0]
            && av.shape()[2] == bv.shape()[1];
        if !ok {
            return Err(TensorError::ShapeMismatch {
                op: "bmm",
                lhs: av.shape().to_vec(),
                rhs: bv.shape().to_vec(),
            });
        }
        let (batch, p, q, r) = (av.shape()[0], av.shape()[1], av.shape()[2], bv.shape()[2]);
        let mut out = vec![0.0; batch * p * r];
        for i in 0..batch {
            kernels::mm(
                &av.data()[i * p * q..(i + 1) * p * q],
                &bv.data()[i * q * r..(i + 1) * q * r],
                p,
                q,
                r,
                &mut out[i * p * r..(i + 1) * p * r],
            );
        }
        let out = Tensor::new(vec![batch, p, r], out)?;
        let (ac, bc) = (Rc::clone(&av), Rc::clone(&bv));
        self.push_op(
            "bmm",
            out,
            vec![a, b],
            Box::new(move |dy| {
                let mut da = vec![0.0; batch * p * q];
                let mut db = vec![0.0; batch * q * r];
                for i in 0..batch {
                    let dyi = &dy.data()[i * p * r..(i + 1) * p * r];
                    kernels::mm_bt(
                        dyi,
                        &bc.data()[i * q * r..(i + 1) * q * r],
                        p,
                        r,
                        q,
                        &mut da[i * p * q..(i + 1) * p * q],
                    );
                    kernels::mm_at(
                        &ac.data()[i * p * q..(i + 1) * p * q],
                        dyi,
                        p,
                        q,
                        r,
                        &mut db[i * q * r..(i + 1) * q * r],
                    );
                }
                vec![
                    Tensor::new(vec![batch, p, q], da).expect("shape"),
                    Tensor::new(vec![batch, q, r], db).expect("shape"),
                ]
            }),
        )
    }
}
