//! The covariance test statistic in fit form and knot form, and the lasso
//! criterion difference it is sometimes confused with.

use crate::error::{Error, Result};
use crate::lasso_path::{LassoOptions, LassoProblem, PathTrace};
use crate::numkit::DenseMatrix;
use crate::scalar::{dot, norm1, Scalar};

use super::{Method, TestOutcome};

/// Values below this are solver noise rather than a negative statistic.
const NEGATIVE_NOISE: f64 = 1e-8;

/// Full and active-set restricted lasso fits at λ_{k+1}, and everything the
/// covariance statistic and the criterion difference are built from.
#[derive(Debug, Clone)]
pub struct CovarianceParts<T> {
    pub step: usize,
    pub lambda_next: T,
    pub sigma: T,
    pub active: Vec<usize>,
    /// β̂(λ_{k+1}) on all columns.
    pub beta_full: Vec<T>,
    /// β̃_A(λ_{k+1}), ordered as `active`.
    pub beta_restricted: Vec<T>,
    /// ⟨y, Xβ̂⟩ and ⟨y, X_Aβ̃_A⟩
    pub inner_full: T,
    pub inner_restricted: T,
    /// ‖y − Xβ̂‖² and ‖y − X_Aβ̃_A‖²
    pub rss_full: T,
    pub rss_restricted: T,
    /// ‖Xβ̂‖² and ‖X_Aβ̃_A‖²
    pub fit_sq_full: T,
    pub fit_sq_restricted: T,
}

impl<T: Scalar> CovarianceParts<T> {
    /// T_k = (⟨y, Xβ̂⟩ − ⟨y, X_Aβ̃_A⟩)/σ²
    pub fn cov_stat(&self) -> T {
        (self.inner_full - self.inner_restricted) / (self.sigma * self.sigma)
    }

    /// Difference of the (unhalved) lasso criteria of the restricted and
    /// full fits, over σ².
    pub fn criterion_diff(&self) -> T {
        let l = self.lambda_next;
        let restricted = self.rss_restricted + l * norm1(&self.beta_restricted);
        let full = self.rss_full + l * norm1(&self.beta_full);
        (restricted - full) / (self.sigma * self.sigma)
    }

    /// ‖X_Aβ̃‖² − ‖Xβ̂‖² + λ_{k+1}(‖β̃‖₁ − ‖β̂‖₁), over σ²: the amount by which
    /// the criterion difference exceeds twice the covariance statistic.
    pub fn expansion_remainder(&self) -> T {
        let l1_diff = norm1(&self.beta_restricted) - norm1(&self.beta_full);
        (self.fit_sq_restricted - self.fit_sq_full + self.lambda_next * l1_diff) / (self.sigma * self.sigma)
    }
}

fn check_step<T: Scalar>(trace: &PathTrace<T>, k: usize, sigma: T) -> Result<()> {
    if !(sigma > T::zero()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if k == 0 || k >= trace.knots.len() {
        return Err(Error::domain(format!(
            "step {k} needs lambda_{} but the path has {} knots",
            k + 1,
            trace.knots.len()
        )));
    }
    Ok(())
}

fn parts_from_problem<T: Scalar>(
    full: &LassoProblem<T>,
    x: &DenseMatrix<T>,
    y: &[T],
    trace: &PathTrace<T>,
    k: usize,
    sigma: T,
    warm: Option<&[T]>,
) -> Result<CovarianceParts<T>> {
    let opts = LassoOptions::default();
    let lambda_next = trace.knots[k];
    let active = trace.active_sets[k - 1].clone();
    let beta_full = full.solve(lambda_next, &opts, warm)?.coef;
    let beta_restricted = if active.is_empty() {
        Vec::new()
    } else {
        full.restrict(&active).solve(lambda_next, &opts, None)?.coef
    };

    let fit_full = x.mul_vec(&beta_full);
    let mut fit_restricted = vec![T::zero(); y.len()];
    for (&j, &b) in active.iter().zip(&beta_restricted) {
        crate::scalar::axpy(b, x.col(j), &mut fit_restricted);
    }
    let rss = |fit: &[T]| y.iter().zip(fit).fold(T::zero(), |s, (&a, &f)| s + (a - f) * (a - f));
    Ok(CovarianceParts {
        step: k,
        lambda_next,
        sigma,
        active,
        inner_full: dot(y, &fit_full),
        inner_restricted: dot(y, &fit_restricted),
        rss_full: rss(&fit_full),
        rss_restricted: rss(&fit_restricted),
        fit_sq_full: dot(&fit_full, &fit_full),
        fit_sq_restricted: dot(&fit_restricted, &fit_restricted),
        beta_full,
        beta_restricted,
    })
}

/// Computes both lasso fits at λ_{k+1} for step `k` (1-based).
pub fn covariance_parts<T: Scalar>(
    trace: &PathTrace<T>,
    x: &DenseMatrix<T>,
    y: &[T],
    k: usize,
    sigma: T,
) -> Result<CovarianceParts<T>> {
    check_step(trace, k, sigma)?;
    let problem = LassoProblem::new(x, y)?;
    parts_from_problem(&problem, x, y, trace, k, sigma, None)
}

/// Covariance statistic T_k in fit form.
pub fn cov_stat_fit_form<T: Scalar>(trace: &PathTrace<T>, x: &DenseMatrix<T>, y: &[T], k: usize, sigma: T) -> Result<T> {
    Ok(covariance_parts(trace, x, y, k, sigma)?.cov_stat())
}

/// Lasso-criterion difference T(A, λ_{k+1}); not equal to 2·T_k in general.
pub fn criterion_diff_stat<T: Scalar>(
    trace: &PathTrace<T>,
    x: &DenseMatrix<T>,
    y: &[T],
    k: usize,
    sigma: T,
) -> Result<T> {
    Ok(covariance_parts(trace, x, y, k, sigma)?.criterion_diff())
}

/// Knot form C·λ_k(λ_k − c·λ_{k+1})/σ² with shrinkage factor `c`.
pub fn cov_stat_knot_form<T: Scalar>(trace: &PathTrace<T>, k: usize, sigma: T, c: T, big_c: T) -> Result<T> {
    check_step(trace, k, sigma)?;
    if !(c > T::zero() && c <= T::one()) {
        return Err(Error::domain(format!("shrinkage factor must lie in (0, 1], got {c}")));
    }
    if !(big_c > T::zero()) {
        return Err(Error::domain(format!("knot constant must be positive, got {big_c}")));
    }
    let (lk, lnext) = (trace.knots[k - 1], trace.knots[k]);
    if lk == lnext {
        return Err(Error::DegenerateKnot { step: k });
    }
    Ok(big_c * lk * (lk - c * lnext) / (sigma * sigma))
}

/// The constant C that makes the unshrunk knot form reproduce `t_k`.
pub fn infer_knot_constant<T: Scalar>(trace: &PathTrace<T>, k: usize, sigma: T, t_k: T) -> Result<T> {
    check_step(trace, k, sigma)?;
    let (lk, lnext) = (trace.knots[k - 1], trace.knots[k]);
    if lk == lnext {
        return Err(Error::DegenerateKnot { step: k });
    }
    Ok(t_k * sigma * sigma / (lk * (lk - lnext)))
}

/// exp(−rate·T): rate k under the global null at step k, rate 1 for the
/// incremental null.
pub fn cov_pvalue<T: Scalar>(stat: T, rate: T) -> Result<T> {
    if !(stat >= T::zero()) {
        return Err(Error::domain(format!("covariance statistic must be nonnegative, got {stat}")));
    }
    if !(rate > T::zero()) {
        return Err(Error::domain(format!("rate must be positive, got {rate}")));
    }
    Ok((-rate * stat).exp())
}

/// T_k and its p-value. Small negative values from solver noise are clamped
/// to zero; anything below −1e-8 is kept and flagged.
pub fn covariance_test<T: Scalar>(
    trace: &PathTrace<T>,
    x: &DenseMatrix<T>,
    y: &[T],
    k: usize,
    sigma: T,
    rate: T,
) -> Result<TestOutcome> {
    let stat = cov_stat_fit_form(trace, x, y, k, sigma)?.as_f64();
    outcome_from_stat(k, stat, rate.as_f64())
}

fn outcome_from_stat(k: usize, stat: f64, rate: f64) -> Result<TestOutcome> {
    let mut diagnostics = Vec::new();
    if stat < -NEGATIVE_NOISE {
        diagnostics.push(format!("negative covariance statistic {stat:e}"));
    }
    let p = cov_pvalue(stat.max(0.0), rate)?;
    let mut out = TestOutcome::new(k, Method::Covariance, stat, p);
    out.diagnostics = diagnostics;
    Ok(out)
}

/// Covariance statistics for steps 1..=K of one path, sharing one Gram
/// matrix and warm-starting the full lasso along decreasing λ.
#[derive(Debug)]
pub struct CovarianceSeries<'a, T> {
    x: &'a DenseMatrix<T>,
    y: &'a [T],
    problem: LassoProblem<T>,
}

impl<'a, T: Scalar> CovarianceSeries<'a, T> {
    pub fn new(x: &'a DenseMatrix<T>, y: &'a [T]) -> Result<Self> {
        Ok(Self { x, y, problem: LassoProblem::new(x, y)? })
    }

    pub fn parts(&self, trace: &PathTrace<T>, steps: usize, sigma: T) -> Result<Vec<CovarianceParts<T>>> {
        let mut out: Vec<CovarianceParts<T>> = Vec::with_capacity(steps);
        for k in 1..=steps {
            check_step(trace, k, sigma)?;
            let warm = out.last().map(|p| p.beta_full.as_slice());
            out.push(parts_from_problem(&self.problem, self.x, self.y, trace, k, sigma, warm)?);
        }
        Ok(out)
    }

    pub fn statistics(&self, trace: &PathTrace<T>, steps: usize, sigma: T) -> Result<Vec<T>> {
        Ok(self.parts(trace, steps, sigma)?.iter().map(CovarianceParts::cov_stat).collect())
    }

    /// One outcome per step; `rate_for_step(k)` picks the exponential rate.
    pub fn tests(
        &self,
        trace: &PathTrace<T>,
        steps: usize,
        sigma: T,
        rate_for_step: impl Fn(usize) -> f64,
    ) -> Result<Vec<TestOutcome>> {
        self.statistics(trace, steps, sigma)?
            .into_iter()
            .enumerate()
            .map(|(i, t)| outcome_from_stat(i + 1, t.as_f64(), rate_for_step(i + 1)))
            .collect()
    }
}
