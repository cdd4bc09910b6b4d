//! Fixed-λ lasso by cyclic coordinate descent, certified by its KKT residual.

use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct LassoOptions<T> {
    pub max_sweeps: usize,
    /// Stop once the KKT residual is at or below this.
    pub tol: T,
}

impl<T: Scalar> Default for LassoOptions<T> {
    fn default() -> Self {
        Self { max_sweeps: 100_000, tol: T::lit(T::KKT_TOL) }
    }
}

#[derive(Debug, Clone)]
pub struct LassoFit<T> {
    pub coef: Vec<T>,
    pub sweeps: usize,
    /// KKT residual recomputed from scratch at the returned coefficients.
    pub kkt_gap: T,
}

/// Precomputed Gram matrix and Xᵀy for repeated solves on one design.
#[derive(Debug, Clone)]
pub struct LassoProblem<T> {
    gram: DenseMatrix<T>,
    xty: Vec<T>,
}

impl<T: Scalar> LassoProblem<T> {
    pub fn new(x: &DenseMatrix<T>, y: &[T]) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::domain(format!(
                "design has {} rows but response has length {}",
                x.rows(),
                y.len()
            )));
        }
        x.ensure_unit_columns()?;
        Ok(Self { gram: x.gram(), xty: x.t_mul_vec(y) })
    }

    pub fn dim(&self) -> usize {
        self.xty.len()
    }

    pub fn xty(&self) -> &[T] {
        &self.xty
    }

    /// The same problem restricted to the listed columns.
    pub fn restrict(&self, idx: &[usize]) -> LassoProblem<T> {
        let k = idx.len();
        let mut sub = vec![T::zero(); k * k];
        for (b, &jb) in idx.iter().enumerate() {
            for (a, &ja) in idx.iter().enumerate() {
                sub[b * k + a] = self.gram.get(ja, jb);
            }
        }
        LassoProblem {
            gram: DenseMatrix::from_raw_column_major(k, k, sub),
            xty: idx.iter().map(|&j| self.xty[j]).collect(),
        }
    }

    /// Xᵀ(y − Xβ)
    pub fn gradient(&self, beta: &[T]) -> Vec<T> {
        let mut g = self.xty.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != T::zero() {
                for (gi, &gij) in g.iter_mut().zip(self.gram.col(j)) {
                    *gi = *gi - b * gij;
                }
            }
        }
        g
    }

    pub fn solve(&self, lambda: T, opts: &LassoOptions<T>, warm: Option<&[T]>) -> Result<LassoFit<T>> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::domain(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        let p = self.dim();
        let mut beta = match warm {
            Some(w) if w.len() == p => w.to_vec(),
            Some(w) => {
                return Err(Error::domain(format!("warm start has length {}, expected {p}", w.len())))
            }
            None => vec![T::zero(); p],
        };
        let mut grad = self.gradient(&beta);
        let mut sweeps = 0;
        loop {
            let gap = kkt_residual(&grad, &beta, lambda);
            if gap <= opts.tol {
                // the running gradient drifts; confirm on a fresh one
                grad = self.gradient(&beta);
                let exact = kkt_residual(&grad, &beta, lambda);
                if exact <= opts.tol {
                    return Ok(LassoFit { coef: beta, sweeps, kkt_gap: exact });
                }
            }
            if sweeps >= opts.max_sweeps {
                let exact = kkt_residual(&self.gradient(&beta), &beta, lambda);
                return Err(Error::Convergence { sweeps, kkt_gap: exact.as_f64() });
            }
            for j in 0..p {
                // unit-norm columns: G_jj = 1
                let z = grad[j] + beta[j];
                let updated = soft_threshold(z, lambda);
                let delta = updated - beta[j];
                if delta != T::zero() {
                    beta[j] = updated;
                    for (gi, &gij) in grad.iter_mut().zip(self.gram.col(j)) {
                        *gi = *gi - delta * gij;
                    }
                }
            }
            sweeps += 1;
        }
    }
}

#[inline]
pub fn soft_threshold<T: Scalar>(z: T, lambda: T) -> T {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        T::zero()
    }
}

/// Largest violation of the lasso optimality conditions given g = Xᵀ(y − Xβ).
pub fn kkt_residual<T: Scalar>(grad: &[T], beta: &[T], lambda: T) -> T {
    grad.iter().zip(beta).fold(T::zero(), |worst, (&g, &b)| {
        let v = if b == T::zero() {
            (g.abs() - lambda).max(T::zero())
        } else {
            (g - lambda * b.signum()).abs()
        };
        worst.max(v)
    })
}

/// KKT residual of β for the problem ½‖y − Xβ‖² + λ‖β‖₁, computed directly.
pub fn kkt_gap<T: Scalar>(x: &DenseMatrix<T>, y: &[T], beta: &[T], lambda: T) -> T {
    let fit = x.mul_vec(beta);
    let resid: Vec<T> = y.iter().zip(&fit).map(|(&a, &b)| a - b).collect();
    let grad: Vec<T> = x.columns().map(|c| dot(c, &resid)).collect();
    kkt_residual(&grad, beta, lambda)
}

/// Minimiser of ½‖y − Xβ‖² + λ‖β‖₁ for unit-norm columns.
pub fn lasso_at<T: Scalar>(x: &DenseMatrix<T>, y: &[T], lambda: T) -> Result<Vec<T>> {
    let problem = LassoProblem::new(x, y)?;
    Ok(problem.solve(lambda, &LassoOptions::default(), None)?.coef)
}

/// Lasso on the columns listed in `active` only; coefficients follow the
/// order of `active`. An empty set gives an empty vector (fit ≡ 0).
pub fn restricted_lasso<T: Scalar>(
    x: &DenseMatrix<T>,
    active: &[usize],
    y: &[T],
    lambda: T,
) -> Result<Vec<T>> {
    if !(lambda >= T::zero()) {
        return Err(Error::domain(format!("lambda must be nonnegative, got {lambda}")));
    }
    for (i, &j) in active.iter().enumerate() {
        if j >= x.cols() {
            return Err(Error::domain(format!("index {j} out of range for {} columns", x.cols())));
        }
        if active[..i].contains(&j) {
            return Err(Error::domain(format!("index {j} repeated in active set")));
        }
    }
    if x.rows() != y.len() {
        return Err(Error::domain("response length does not match design rows"));
    }
    if active.is_empty() {
        return Ok(Vec::new());
    }
    let sub = x.select_columns(active)?;
    lasso_at(&sub, y, lambda)
}
