//! Central finite-difference verification of analytic gradients.

use crate::error::{Error, Result};
use crate::param::ParamStore;
use crate::tensor::Tensor;

/// Outcome of a finite-difference on analytic gradient comparison.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Max over components of |analytic - numeric| / max(1, |analytic|, |numeric|).
    /// The unit floor means near-zero components are compared absolutely.
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    pub worst_index: usize,
    pub components: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / 1.0f64.max(a.abs()).max(n.abs())
}

fn validate_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::Config(format!("grad_check eps must be in (0, 1e-2], got {eps}")));
    }
    Ok(())
}

/// Check `analytic` against central differences of the scalar function `f`
/// around `point`. `f` is evaluated 2N times for N components.
pub fn grad_check<F>(mut f: F, point: &Tensor, analytic: &Tensor, eps: f64) -> Result<GradCheckReport>
where
    F: FnMut(&Tensor) -> Result<f64>,
{
    validate_eps(eps)?;
    if point.shape() != analytic.shape() {
        return Err(Error::Shape(format!(
            "grad_check point {:?} vs analytic {:?}",
            point.shape(),
            analytic.shape()
        )));
    }
    let mut probe = point.clone();
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        worst_index: 0,
        components: point.len(),
    };
    for i in 0..point.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + eps as f32;
        let f_plus = f(&probe)?;
        probe.data_mut()[i] = orig - eps as f32;
        let f_minus = f(&probe)?;
        probe.data_mut()[i] = orig;
        if !f_plus.is_finite() || !f_minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "grad_check probe at component {i}: f(+)={f_plus}, f(-)={f_minus}"
            )));
        }
        let numeric = (f_plus - f_minus) / (2.0 * eps);
        let a = analytic.data()[i] as f64;
        let rel = rel_err(a, numeric);
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_index = i;
        }
        report.max_abs_err = report.max_abs_err.max((a - numeric).abs());
    }
    Ok(report)
}

/// Check the gradient buffer stored under `name` against finite differences
/// of `f` over that parameter. The analytic gradient must already have been
/// accumulated (run the backward pass before calling this).
pub fn grad_check_param<F>(
    mut f: F,
    store: &mut ParamStore,
    name: &str,
    eps: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&ParamStore) -> Result<f64>,
{
    validate_eps(eps)?;
    let analytic = store.grad(name).clone();
    let n = analytic.len();
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        worst_index: 0,
        components: n,
    };
    for i in 0..n {
        let orig = store.get(name).data()[i];
        store.get_mut(name).data_mut()[i] = orig + eps as f32;
        let f_plus = f(store)?;
        store.get_mut(name).data_mut()[i] = orig - eps as f32;
        let f_minus = f(store)?;
        store.get_mut(name).data_mut()[i] = orig;
        if !f_plus.is_finite() || !f_minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "grad_check probe of {name}[{i}]: f(+)={f_plus}, f(-)={f_minus}"
            )));
        }
        let numeric = (f_plus - f_minus) / (2.0 * eps);
        let a = analytic.data()[i] as f64;
        let rel = rel_err(a, numeric);
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_index = i;
        }
        report.max_abs_err = report.max_abs_err.max((a - numeric).abs());
    }
    Ok(report)
}
