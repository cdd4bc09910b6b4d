use crate::error::{Error, Result};
use crate::numkit::std_normal_sf;
use crate::scalar::Scalar;

use super::{Method, TestOutcome};

/// [1 − Φ(λ₁/σ)] / [1 − Φ(λ₂/σ)], exactly uniform under the global null
/// for unit-norm predictors.
pub fn spacing_pvalue<T: Scalar>(lambda1: T, lambda2: T, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(lambda2 >= T::zero()) {
        return Err(Error::domain(format!("lambda2 must be nonnegative, got {lambda2}")));
    }
    if !(lambda1 >= lambda2) {
        return Err(Error::domain(format!("knots out of order: lambda1 {lambda1} < lambda2 {lambda2}")));
    }
    if lambda1 == lambda2 {
        return Ok(T::one());
    }
    let (a, b) = ((lambda1 / sigma).as_f64(), (lambda2 / sigma).as_f64());
    let (num, den) = (std_normal_sf(a), std_normal_sf(b));
    let ratio = if den > 1e-280 { num / den } else { (log_sf(a) - log_sf(b)).exp() };
    Ok(T::lit(ratio.clamp(0.0, 1.0)))
}

/// log(1 − Φ(x)), switching to the asymptotic Mills-ratio series where the
/// direct tail underflows.
fn log_sf(x: f64) -> f64 {
    if x < 30.0 {
        return std_normal_sf(x).ln();
    }
    let x2 = x * x;
    // 1 − 1/x² + 3/x⁴ − 15/x⁶ + 105/x⁸
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) + 105.0 / (x2 * x2 * x2 * x2);
    -0.5 * x2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
}

/// Spacing test at the first step of a path.
pub fn spacing_test<T: Scalar>(trace: &crate::lasso_path::PathTrace<T>, sigma: T) -> Result<TestOutcome> {
    if trace.knots.len() < 2 {
        return Err(Error::domain("spacing test needs the first two knots"));
    }
    let (l1, l2) = (trace.knots[0], trace.knots[1]);
    let p = spacing_pvalue(l1, l2, sigma)?;
    Ok(TestOutcome::new(1, Method::Spacing, (l1 / sigma).as_f64(), p.as_f64()))
}
