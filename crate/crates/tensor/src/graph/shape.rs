use crate::error::{Result, TensorError};
use crate::graph::{Graph, Var};
use crate::tensor::Tensor;

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

fn permute_data(data: &[f64], shape: &[usize], axes: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let out_shape: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
    let in_strides = strides(shape);
    let out_strides = strides(&out_shape);
    let mut out = vec![0.0; data.len()];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut rem = flat;
        let mut src = 0usize;
        for d in 0..axes.len() {
            let coord = rem / out_strides[d];
            rem %= out_strides[d];
            src += coord * in_strides[axes[d]];
        }
        *slot = data[src];
    }
    (out_shape, out)
}

impl Graph {
    /// View with a new shape (element count preserved).
    pub fn reshape(&self, x: Var, shape: &[usize]) -> Result<Var> {
        let xv = self.value(x);
        let out = xv.reshaped(shape)?;
        let orig = xv.shape().to_vec();
        self.push_op(
            "reshape",
            out,
            vec![x],
            Box::new(move |dy| vec![dy.reshaped(&orig).expect("shape")]),
        )
    }

    /// Permute axes; `axes` must be a permutation of 0..rank.
    pub fn permute(&self, x: Var, axes: &[usize]) -> Result<Var> {
        let xv = self.value(x);
        let rank = xv.rank();
        let mut seen = vec![false; rank];
        let valid = axes.len() == rank
            && axes.iter().all(|&a| {
                if a >= rank || seen[a] {
                    false
                } else {
                    seen[a] = true;
                    true
                }
            });
        if !valid {
            return Err(TensorError::InvalidArgument {
                op: "permute",
                msg: format!("axes {axes:?} is not a permutation of 0..{rank}"),
            });
        }
        let (out_shape, out_data) = permute_data(xv.data(), xv.shape(), axes);
        let out = Tensor::new(out_shape.clone(), out_data)?;
        let mut inverse = vec![0usize; rank];
        for (i, &a) in axes.iter().enumerate() {
            inverse[a] = i;
        }
        self.push_op(
            "permute",
            out,
            vec![x],
            Box::new(move |dy| {
                let (shape, data) = permute_data(dy.data(), &out_shape, &inverse);
                vec![Tensor::new(shape, data).expect("shape")]
            }),
        )
    }

    /// Concatenate along an axis; shapes must agree elsewhere.
    pub fn concat(&self, parts: &[Var], axis: usize) -> Result<Var> {
        if parts.is_empty() {
            return Err(TensorError::InvalidArgument {
                op: "concat",
                msg: "no inputs".into(),
            });
        }
        let values: Vec<_> = parts.iter().map(|&p| self.value(p)).collect();
        let rank = values[0].rank();
        if axis >= rank {
            return Err(TensorError::InvalidArgument {
                op: "concat",
                msg: format!("axis {axis} out of range for rank {rank}"),
            });
        }
        for v in &values[1..] {
            let same = v.rank() == rank
                && v.shape()
                    .iter()
                    .zip(values[0].shape())
                    .enumerate()
                    .all(|(d, (a, b))| d == axis || a == b);
            if !same {
                return Err(TensorError::ShapeMismatch {
                    op: "concat",
                    lhs: values[0].shape().to_vec(),
                    rhs: v.shape().to_vec(),
                });
            }
        }
        let mut out_shape = values[0].shape().to_vec();
        out_shape[axis] = values.iter().map(|v| v.shape()[axis]).sum();

        // Copy block rows: outer = product of dims before axis,
        // inner = product of dims after axis.
        let outer: usize = out_shape[..axis].iter().product();
        let inner: usize = out_shape[axis + 1..].iter().product();
        let mut out = vec![0.0; out_shape.iter().product()];
        let out_axis = out_shape[axis];
        let mut offset = 0usize;
        let mut part_axis_sizes = Vec::with_capacity(values.len());
        for v in &values {
            let a = v.shape()[axis];
            for o in 0..outer {
                let src = &v.data()[o * a * inner..(o + 1) * a * inner];
                let dst_start = (o * out_axis + offset) * inner;
                out[dst_start..dst_start + a * inner].copy_from_slice(src);
            }
            part_axis_sizes.push(a);
            offset += a;
        }
        let out = Tensor::new(out_shape.clone(), out)?;
        let part_shapes: Vec<Vec<usize>> = values.iter().map(|v| v.shape().to_vec()).collect();
        self.push_op(
            "concat",
            out,
            parts.to_vec(),
            Box::new(move |dy| {
                let mut grads = Vec::with_capacity(part_axis_sizes.len());
                let mut offset = 0usize;
                for (a, shape) in part_axis_sizes.iter().zip(&part_shapes) {
                    let mut g = vec![0.0; shape.iter().product()];
                    for o in 0..outer {
                        let src_start = (o * out_axis + offset) * inner;
                        g[o * a * inner..(o + 1) * a * inner]
                            .copy_from_slice(&dy.data()[src_start..src_start + a * inner]);
                    }
                    grads.push(Tensor::new(shape.clone(), g).expect("shape"));
                    offset += a;
                }
                grads
            }),
        )
    }

    /// Slice a window from the last axis: (..., d) -> (..., len).
    pub fn slice_last(&self, x: Var, start: usize, len: usize) -> Result<Var> {
        let xv = self.value(x);
        let d = *xv.shape().last().ok_or(TensorError::InvalidArgument {
            op: "slice_last",
            msg: "rank-0 input".into(),
        })?;
        if start + len > d || len == 0 {
            return Err(TensorError::InvalidArgument {
                op: "slice_last",
                msg: format!("window {start}..{} out of range for width {d}", start + len),
            });
        }
        let rows = xv.len() / d;
        let mut data = Vec::with_capacity(rows * len);
        for row in xv.data().chunks(d) {
            data.extend_from_slice(&row[start..start + len]);
        }
        let mut out_shape = xv.shape().to_vec();
        *out_shape.last_mut().unwrap() = len;
        let out = Tensor::new(out_shape, data)?;
        let in_shape = xv.shape().to_vec();
        self.push_op(
            "slice_last",
            out,
            vec![x],
            Box::new(move |dy| {
                let mut dx = vec![0.0; rows * d];
                for (r, row) in dy.data().chunks(len).enumerate() {
                    dx[r * d + start..r * d + start + len].copy_from_slice(row);
                }
                vec![Tensor::new(in_shape.clone(), dx).expect("shape")]
            }),
        )
    }
}
