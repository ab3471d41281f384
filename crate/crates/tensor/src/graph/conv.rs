use std::rc::Rc;

use crate::error::{Result, TensorError};
use crate::graph::{Graph, Var};
use crate::tensor::Tensor;

impl Graph {
    /// 2-D convolution, NCHW layout, zero padding.
    ///
    /// x: [batch, in_ch, h, w], weight: [out_ch, in_ch, kh, kw], bias: [out_ch].
    pub fn conv2d(
        &self,
        x: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
        padding: usize,
    ) -> Result<Var> {
        let (xv, wv) = (self.value(x), self.value(weight));
        if xv.rank() != 4 || wv.rank() != 4 || xv.shape()[1] != wv.shape()[1] {
            return Err(TensorError::ShapeMismatch {
                op: "conv2d",
                lhs: xv.shape().to_vec(),
                rhs: wv.shape().to_vec(),
            });
        }
        if stride == 0 {
            return Err(TensorError::InvalidArgument {
                op: "conv2d",
                msg: "stride must be positive".into(),
            });
        }
        let (batch, in_ch, h, w) = (xv.shape()[0], xv.shape()[1], xv.shape()[2], xv.shape()[3]);
        let (out_ch, _, kh, kw) = (wv.shape()[0], wv.shape()[1], wv.shape()[2], wv.shape()[3]);
        if h + 2 * padding < kh || w + 2 * padding < kw {
            return Err(TensorError::InvalidArgument {
                op: "conv2d",
                msg: format!("kernel {kh}x{kw} larger than padded input {h}x{w}+{padding}"),
            });
        }
        let oh = (h + 2 * padding - kh) / stride + 1;
        let ow = (w + 2 * padding - kw) / stride + 1;
        if let Some(bvar) = bias {
            let bv = self.value(bvar);
            if bv.len() != out_ch {
                return Err(TensorError::ShapeMismatch {
                    op: "conv2d",
                    lhs: wv.shape().to_vec(),
                    rhs: bv.shape().to_vec(),
                });
            }
        }

        let mut out = vec![0.0; batch * out_ch * oh * ow];
        let xd = xv.data();
        let wd = wv.data();
        for b in 0..batch {
            for oc in 0..out_ch {
                let base_b = if let Some(bvar) = bias {
                    self.value(bvar).data()[oc]
                } else {
                    0.0
                };
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = base_b;
                        for ic in 0..in_ch {
                            for ky in 0..kh {
                                let iy = oy * stride + ky;
                                if iy < padding || iy - padding >= h {
                                    continue;
                                }
                                let iy = iy - padding;
                                for kx in 0..kw {
                                    let ix = ox * stride + kx;
                                    if ix < padding || ix - padding >= w {
                                        continue;
                                    }
                                    let ix = ix - padding;
                                    acc += xd[((b * in_ch + ic) * h + iy) * w + ix]
                                        * wd[((oc * in_ch + ic) * kh + ky) * kw + kx];
                                }
                            }
                        }
                        out[((b * out_ch + oc) * oh + oy) * ow + ox] = acc;
                    }
                }
            }
        }
        let out = Tensor::new(vec![batch, out_ch, oh, ow], out)?;

        let (xc, wc) = (Rc::clone(&xv), Rc::clone(&wv));
        let mut parents = vec![x, weight];
        if let Some(bvar) = bias {
            parents.push(bvar);
        }
        let has_bias = bias.is_some();
        self.push_op(
            "conv2d",
            out,
            parents,
            Box::new(move |dy| {
                let mut dx = vec![0.0; batch * in_ch * h * w];
                let mut dw = vec![0.0; out_ch * in_ch * kh * kw];
                let mut db = vec![0.0; out_ch];
                let dyd = dy.data();
                for b in 0..batch {
                    for oc in 0..out_ch {
                        for oy in 0..oh {
                            for ox in 0..ow {
                                let g = dyd[((b * out_ch + oc) * oh + oy) * ow + ox];
                                if g == 0.0 {
                                    continue;
                                }
                                db[oc] += g;
                                for ic in 0..in_ch {
                                    for ky in 0..kh {
                                        let iy = oy * stride + ky;
                                        if iy < padding || iy - padding >= h {
                                            continue;
                                        }
                                        let iy = iy - padding;
                                        for kx in 0..kw {
                                            let ix = ox * stride + kx;
                                            if ix < padding || ix - padding >= w {
                                                continue;
                                            }
                                            let ix = ix - padding;
                                            let xi = ((b * in_ch + ic) * h + iy) * w + ix;
                                            let wi = ((oc * in_ch + ic) * kh + ky) * kw + kx;
                                            dw[wi] += g * xc.data()[xi];
                                            dx[xi] += g * wc.data()[wi];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                let mut grads = vec![
                    Tensor::new(vec![batch, in_ch, h, w], dx).expect("shape"),
                    Tensor::new(vec![out_ch, in_ch, kh, kw], dw).expect("shape"),
                ];
                if has_bias {
                    grads.push(Tensor::from_vec(db));
                }
                grads
            }),
        )
    }

    /// Non-overlapping max pooling with a square window.
    pub fn max_pool2d(&self, x: Var, window: usize) -> Result<Var> {
        let xv = self.value(x);
        if xv.rank() != 4 {
            return Err(TensorError::InvalidArgument {
                op: "max_pool2d",
                msg: format!("expected rank-4 input, got {:?}", xv.shape()),
            });
        }
        if window == 0 {
            return Err(TensorError::InvalidArgument {
                op: "max_pool2d",
                msg: "window must be positive".into(),
            });
        }
        let (batch, ch, h, w) = (xv.shape()[0], xv.shape()[1], xv.shape()[2], xv.shape()[3]);
        if h < window || w < window {
            return Err(TensorError::InvalidArgument {
                op: "max_pool2d",
                msg: format!("window {window} larger than input {h}x{w}"),
            });
        }
        let oh = h / window;
        let ow = w / window;
        let mut out = vec![0.0; batch * ch * oh * ow];
        let mut argmax = vec![0usize; batch * ch * oh * ow];
        let xd = xv.data();
        for b in 0..batch {
            for c in 0..ch {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut best = f64::NEG_INFINITY;
                        let mut best_idx = 0usize;
                        for ky in 0..window {
                            for kx in 0..window {
                                let iy = oy * window + ky;
                                let ix = ox * window + kx;
                                let idx = ((b * ch + c) * h + iy) * w + ix;
                                // Strict comparison: first maximum wins ties.
                                if xd[idx] > best {
                                    best = xd[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        let oi = ((b * ch + c) * oh + oy) * ow + ox;
                        out[oi] = best;
                        argmax[oi] = best_idx;
                    }
                }
            }
        }
        let out = Tensor::new(vec![batch, ch, oh, ow], out)?;
        let argmax = Rc::new(argmax);
        let in_len = xv.len();
        let in_shape = xv.shape().to_vec();
        self.push_op(
            "max_pool2d",
            out,
            vec![x],
            Box::new(move |dy| {
                let mut dx = vec![0.0; in_len];
                for (oi, &src) in argmax.iter().enumerate() {
                    dx[src] += dy.data()[oi];
                }
                vec![Tensor::new(in_shape.clone(), dx).expect("shape")]
            }),
        )
    }
}
