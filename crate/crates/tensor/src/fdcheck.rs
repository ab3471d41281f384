//! Central finite-difference gradient checking.
//!
//! Used by the test suites: a loss is expressed as a pure function of a set
//! of named parameters, analytic gradients are compared coordinate by
//! coordinate against (f(x+h) - f(x-h)) / 2h with h scaled to the
//! coordinate's magnitude.

use std::collections::BTreeMap;

use crate::graph::GradientMap;
use crate::tensor::Tensor;

/// A named parameter set for checking, with stable iteration order.
pub type FdParams = BTreeMap<String, Tensor>;

/// Result of a single coordinate comparison that failed.
#[derive(Debug)]
pub struct FdFailure {
    pub param: String,
    pub coord: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

/// Compare analytic gradients against central finite differences.
///
/// `loss` must be deterministic in its parameters. The relative-error
/// denominator is floored at 1e-3: central differences carry roundoff noise
/// of roughly machine epsilon divided by the step (about 1e-9 here), so
/// coordinates whose true gradient is far below the floor cannot be compared
/// at the target tolerance, while any systematically wrong backward rule
/// still produces an error proportional to the gradient scale and fails.
pub fn check_gradients<F>(
    params: &FdParams,
    analytic: &GradientMap,
    loss: F,
    tolerance: f64,
) -> Result<(), FdFailure>
where
    F: Fn(&FdParams) -> f64,
{
    for (name, tensor) in params {
        let grad = analytic
            .get(name)
            .unwrap_or_else(|| panic!("no gradient reported for `{name}`"));
        assert_eq!(grad.shape(), tensor.shape(), "gradient shape for `{name}`");
        for coord in 0..tensor.len() {
            let base = tensor.data()[coord];
            let h = 1e-6 * base.abs().max(1.0);

            let mut bumped = params.clone();
            bumped.get_mut(name).unwrap().data_mut()[coord] = base + h;
            let up = loss(&bumped);
            bumped.get_mut(name).unwrap().data_mut()[coord] = base - h;
            let down = loss(&bumped);

            let numeric = (up - down) / (2.0 * h);
            let analytic_v = grad.data()[coord];
            let denom = analytic_v.abs().max(numeric.abs()).max(1e-3);
            let rel_err = (analytic_v - numeric).abs() / denom;
            if rel_err > tolerance {
                return Err(FdFailure {
                    param: name.clone(),
                    coord,
                    analytic: analytic_v,
                    numeric,
                    rel_err,
                });
            }
        }
    }
    Ok(())
}

/// Panic with a readable report when a check fails.
pub fn assert_gradients<F>(params: &FdParams, analytic: &GradientMap, loss: F, tolerance: f64)
where
    F: Fn(&FdParams) -> f64,
{
    if let Err(f) = check_gradients(params, analytic, loss, tolerance) {
        panic!(
            "gradient check failed for `{}`[{}]: analytic {:.12e}, numeric {:.12e}, rel err {:.3e}",
            f.param, f.coord, f.analytic, f.numeric, f.rel_err
        );
    }
}
