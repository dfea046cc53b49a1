//! Anytime performance scoring of convergence traces.
//!
//! A trace is first mapped to log10 distance from the optimum, then scored
//! by the normalized area over the convergence curve:
//! `AOCC(y) = (1/B) * sum_i (1 - (clamp(y_i, lb, ub) - lb) / (ub - lb))`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::swarm::ConvergenceTrace;

/// Smallest error fed into the logarithm.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AoccBounds<T> {
    lb: T,
    ub: T,
}

impl<T: Scalar> AoccBounds<T> {
    pub fn new(lb: T, ub: T) -> Result<Self> {
        if lb < ub {
            Ok(Self { lb, ub })
        } else {
            Err(Error::Argument(format!("AOCC bounds need lb < ub, got [{lb}, {ub}]")))
        }
    }

    pub fn lb(&self) -> T {
        self.lb
    }

    pub fn ub(&self) -> T {
        self.ub
    }
}

impl<T: Scalar> Default for AoccBounds<T> {
    fn default() -> Self {
        Self { lb: T::lit(-5.0), ub: T::lit(5.0) }
    }
}

pub fn log_scale_trace<T: Scalar>(trace: &ConvergenceTrace<T>, f_opt: T) -> Result<Vec<T>> {
    log_scale(&trace.best_so_far, f_opt)
}

/// `log10(max(v - f_opt, LOG_FLOOR))` for every value.
pub fn log_scale<T: Scalar>(values: &[T], f_opt: T) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::Argument("empty trace".into()));
    }
    let floor = T::lit(LOG_FLOOR);
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let err = v - f_opt;
            if err < T::zero() || err.is_nan() {
                Err(Error::DataIntegrity(format!(
                    "trace value {v} at iteration {i} lies below the optimum {f_opt}"
                )))
            } else {
                Ok(err.max(floor).log10())
            }
        })
        .collect()
}

pub fn aocc<T: Scalar>(y: &[T], bounds: &AoccBounds<T>) -> Result<T> {
    if y.is_empty() {
        return Err(Error::Argument("AOCC of an empty trace".into()));
    }
    let AoccBounds { lb, ub } = *bounds;
    let range = ub - lb;
    let total: T = y
        .iter()
        .map(|&v| T::one() - (v.max(lb).min(ub) - lb) / range)
        .sum();
    Ok(total / T::lit(y.len() as f64))
}

/// Log-scales `trace` against `f_opt` and scores it.
pub fn trace_aocc<T: Scalar>(trace: &ConvergenceTrace<T>, f_opt: T, bounds: &AoccBounds<T>) -> Result<T> {
    aocc(&log_scale_trace(trace, f_opt)?, bounds)
}
