//! Least angle regression path without variable deletions.

use crate::error::{Error, Result};
use crate::numkit::{least_squares, DenseMatrix};
use crate::scalar::{dot, Scalar};

/// One linear piece of the path: on `[lambda_end, lambda_start]` the active
/// coefficients are `coef_start + (lambda_start − λ)·direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSegment<T> {
    pub lambda_start: T,
    pub lambda_end: T,
    pub active: Vec<usize>,
    pub coef_start: Vec<T>,
    pub direction: Vec<T>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathDiagnostics<T> {
    /// Steps (1-based) whose entry was decided by the lowest-index tie rule.
    pub tied_steps: Vec<usize>,
    /// Largest λ at which an active coefficient reaches zero or moves
    /// against its entry sign. Below this the LAR path and the lasso path
    /// part ways; above it they coincide.
    pub first_sign_violation: Option<T>,
}

impl<T> PathDiagnostics<T> {
    pub fn has_tie(&self) -> bool {
        !self.tied_steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace<T> {
    /// λ_k at which the k-th variable enters (index 0 holds λ₁).
    pub knots: Vec<T>,
    pub entered: Vec<usize>,
    pub signs: Vec<i8>,
    /// `active_sets[k]` is the active set just before step k+1's entry.
    pub active_sets: Vec<Vec<usize>>,
    pub segments: Vec<PathSegment<T>>,
    pub n_features: usize,
    pub diagnostics: PathDiagnostics<T>,
}

impl<T: Scalar> PathTrace<T> {
    pub fn steps(&self) -> usize {
        self.knots.len()
    }

    /// Smallest λ at which the trace can be evaluated.
    pub fn floor(&self) -> T {
        self.segments.last().map_or(T::zero(), |s| s.lambda_end)
    }

    /// β̂(λ) on the full coordinate set.
    pub fn coefficients_at(&self, lambda: T) -> Result<Vec<T>> {
        let mut beta = vec![T::zero(); self.n_features];
        let Some(first) = self.knots.first() else {
            return Ok(beta);
        };
        if lambda >= *first {
            return Ok(beta);
        }
        if lambda < self.floor() || lambda.is_nan() {
            return Err(Error::domain(format!(
                "lambda {lambda} is below the computed path (floor {})",
                self.floor()
            )));
        }
        let seg = self
            .segments
            .iter()
            .find(|s| lambda >= s.lambda_end && lambda <= s.lambda_start)
            .expect("segments cover [floor, lambda_1]");
        let t = seg.lambda_start - lambda;
        for ((&j, &b0), &d) in seg.active.iter().zip(&seg.coef_start).zip(&seg.direction) {
            beta[j] = b0 + t * d;
        }
        Ok(beta)
    }
}

/// Computes the first `max_steps` entries of the LAR path.
///
/// Columns of `x` must have unit norm. Knot ties are broken by lowest
/// column index and recorded in the diagnostics.
pub fn lar_path<T: Scalar>(x: &DenseMatrix<T>, y: &[T], max_steps: usize) -> Result<PathTrace<T>> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::domain(format!("response length {} does not match {n} rows", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("response has non-finite entries"));
    }
    let bound = (n.saturating_sub(1)).min(p);
    if max_steps == 0 || max_steps > bound {
        return Err(Error::domain(format!(
            "max_steps must lie in 1..={bound} (min(rows - 1, cols)), got {max_steps}"
        )));
    }
    x.ensure_unit_columns()?;

    let tie_tol = T::lit(T::TIE_TOL);
    let mut beta = vec![T::zero(); p];
    let mut corr = x.t_mul_vec(y);

    let (first, tie) = argmax_lowest(corr.iter().map(|c| c.abs()).enumerate(), tie_tol);
    let lambda1 = corr[first].abs();

    let mut trace = PathTrace {
        knots: vec![lambda1],
        entered: vec![first],
        signs: vec![sign_of(corr[first])],
        active_sets: vec![Vec::new()],
        segments: Vec::new(),
        n_features: p,
        diagnostics: PathDiagnostics::default(),
    };
    if tie {
        trace.diagnostics.tied_steps.push(1);
    }
    if lambda1 == T::zero() {
        // y orthogonal to every column: the path is identically zero
        trace.segments.push(PathSegment {
            lambda_start: T::zero(),
            lambda_end: T::zero(),
            active: vec![first],
            coef_start: vec![T::zero()],
            direction: vec![T::zero()],
        });
        return Ok(trace);
    }

    loop {
        let active = trace.entered.clone();
        let s_active: Vec<T> = trace.signs.iter().map(|&s| T::lit(s as f64)).collect();
        let lambda_k = *trace.knots.last().unwrap();

        // equiangular direction w = (X_AᵀX_A)⁻¹ s_A
        let xa = x.select_columns(&active)?;
        let w = least_squares(&xa.gram(), &s_active).map_err(|e| match e {
            Error::Singular { rank, .. } => Error::Singular { rank, cols: active.len() },
            other => other,
        })?;
        let u = xa.mul_vec(&w);
        let a = x.t_mul_vec(&u);

        // next knot: largest λ in (0, λ_k) at which an inactive |c_j(λ)| = λ
        let mut candidates: Vec<(usize, T, i8)> = Vec::new();
        // a root within rounding of λ_k is a tie with the current knot
        let upper_gate = lambda_k * (T::one() + T::lit(T::TIE_TOL));
        for j in (0..p).filter(|j| !active.contains(j)) {
            let (cj, aj) = (corr[j], a[j]);
            let mut best: Option<(T, i8)> = None;
            if T::one() - aj != T::zero() {
                let l = (cj - lambda_k * aj) / (T::one() - aj);
                if l > T::zero() && l <= upper_gate {
                    best = Some((l.min(lambda_k), 1));
                }
            }
            if T::one() + aj != T::zero() {
                let l = (lambda_k * aj - cj) / (T::one() + aj);
                if l > T::zero() && l <= upper_gate && best.is_none_or(|(b, _)| l > b) {
                    best = Some((l.min(lambda_k), -1));
                }
            }
            if let Some((l, s)) = best {
                candidates.push((j, l, s));
            }
        }
        let next = if candidates.is_empty() {
            None
        } else {
            let (pos, tie) = argmax_lowest(candidates.iter().map(|c| c.1).enumerate(), tie_tol);
            Some((candidates[pos], tie))
        };
        let lambda_next = next.map_or(T::zero(), |((_, l, _), _)| l);

        let coef_start: Vec<T> = active.iter().map(|&j| beta[j]).collect();
        if trace.diagnostics.first_sign_violation.is_none() {
            trace.diagnostics.first_sign_violation =
                sign_violation(&coef_start, &w, &s_active, lambda_k, lambda_next);
        }
        let step = lambda_k - lambda_next;
        for (&j, &d) in active.iter().zip(&w) {
            beta[j] = beta[j] + step * d;
        }
        trace.segments.push(PathSegment {
            lambda_start: lambda_k,
            lambda_end: lambda_next,
            active: active.clone(),
            coef_start,
            direction: w,
        });

        let Some(((j, l, s), tie)) = next else { break };
        if trace.steps() == max_steps {
            break;
        }
        if tie {
            trace.diagnostics.tied_steps.push(trace.steps() + 1);
        }
        trace.active_sets.push(active);
        trace.knots.push(l);
        trace.entered.push(j);
        trace.signs.push(s);
        // resynchronise correlations with the residual
        let resid: Vec<T> = y.iter().zip(x.mul_vec(&beta)).map(|(&yi, fi)| yi - fi).collect();
        corr = x.columns().map(|c| dot(c, &resid)).collect();
    }
    Ok(trace)
}

fn sign_of<T: Scalar>(v: T) -> i8 {
    if v < T::zero() {
        -1
    } else {
        1
    }
}

/// Index of the maximum, lowest index on ties, and whether a runner-up came
/// within `tol` of it.
fn argmax_lowest<T: Scalar>(values: impl Iterator<Item = (usize, T)>, tol: T) -> (usize, bool) {
    let vals: Vec<(usize, T)> = values.collect();
    let max = vals.iter().fold(T::neg_infinity(), |m, &(_, v)| m.max(v));
    let mut within = vals.iter().filter(|&&(_, v)| max - v <= tol);
    let (idx, _) = *within.next().expect("non-empty candidate list");
    (idx, within.next().is_some())
}

/// Largest λ in [λ_end, λ_start) at which some active coefficient is zero
/// while moving against its entry sign.
fn sign_violation<T: Scalar>(coef: &[T], dir: &[T], signs: &[T], start: T, end: T) -> Option<T> {
    let mut worst: Option<T> = None;
    for ((&b, &d), &s) in coef.iter().zip(dir).zip(signs) {
        let hit = if b == T::zero() {
            // entering variable: must move in the direction of its sign
            (d * s < T::zero()).then_some(start)
        } else if b * s < T::zero() {
            Some(start)
        } else if d * s < T::zero() {
            let zero_at = start + b / d;
            (zero_at >= end && zero_at < start).then_some(zero_at)
        } else {
            None
        };
        if let Some(l) = hit {
            worst = Some(worst.map_or(l, |w: T| w.max(l)));
        }
    }
    worst
}
