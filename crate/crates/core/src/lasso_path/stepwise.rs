//! Forward stepwise regression driven by orthogonalized t statistics.

use crate::error::{Error, Result};
use crate::numkit::DenseMatrix;
use crate::scalar::{axpy, dot, norm2, Scalar};

/// Candidate predictors orthogonalized against an active set, each scaled to
/// unit norm so that t^{(j)}(v) = ⟨q_j, v⟩.
#[derive(Debug, Clone)]
pub struct CandidateBasis<T> {
    pub candidates: Vec<usize>,
    directions: Vec<Vec<T>>,
    /// Candidates dropped because ‖X_{j·A}‖₂ fell below the collinearity cutoff.
    pub excluded: Vec<usize>,
}

impl<T: Scalar> CandidateBasis<T> {
    pub fn new(x: &DenseMatrix<T>, active: &[usize]) -> Result<Self> {
        for &j in active {
            if j >= x.cols() {
                return Err(Error::domain(format!("active index {j} out of range")));
            }
        }
        let basis = orthonormal_basis(x, active)?;
        let cutoff = T::lit(T::COLLINEAR_TOL);
        let mut candidates = Vec::new();
        let mut directions = Vec::new();
        let mut excluded = Vec::new();
        for j in (0..x.cols()).filter(|j| !active.contains(j)) {
            let r = residualize(x.col(j), &basis);
            let norm = norm2(&r);
            if norm < cutoff {
                excluded.push(j);
                continue;
            }
            candidates.push(j);
            directions.push(r.into_iter().map(|v| v / norm).collect());
        }
        Ok(Self { candidates, directions, excluded })
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// t^{(j)}(v) for every retained candidate, in `candidates` order.
    pub fn statistics(&self, v: &[T]) -> Vec<T> {
        self.directions.iter().map(|d| dot(d, v)).collect()
    }

    /// max_j |t^{(j)}(v)|, or zero if there are no candidates.
    pub fn tmax(&self, v: &[T]) -> T {
        self.directions.iter().fold(T::zero(), |m, d| m.max(dot(d, v).abs()))
    }
}

/// Gram–Schmidt (applied twice) basis for the span of the active columns.
fn orthonormal_basis<T: Scalar>(x: &DenseMatrix<T>, active: &[usize]) -> Result<Vec<Vec<T>>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(active.len());
    for (k, &j) in active.iter().enumerate() {
        let r = residualize(x.col(j), &basis);
        let norm = norm2(&r);
        if norm < T::lit(T::COLLINEAR_TOL) {
            return Err(Error::Singular { rank: k, cols: active.len() });
        }
        basis.push(r.into_iter().map(|v| v / norm).collect());
    }
    Ok(basis)
}

fn residualize<T: Scalar>(v: &[T], basis: &[Vec<T>]) -> Vec<T> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &r);
            axpy(-c, q, &mut r);
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepwiseTrace<T> {
    pub entered: Vec<usize>,
    /// Realised t_max at each step.
    pub tstats: Vec<T>,
    /// Per step, t^{(j)}(y) for every column; `None` for active or excluded columns.
    pub candidate_stats: Vec<Vec<Option<T>>>,
    /// (step, column) pairs dropped as collinear with the active set.
    pub excluded: Vec<(usize, usize)>,
}

/// Runs `steps` steps of forward stepwise selection.
pub fn forward_stepwise<T: Scalar>(x: &DenseMatrix<T>, y: &[T], steps: usize) -> Result<StepwiseTrace<T>> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::domain(format!("response length {} does not match {n} rows", y.len())));
    }
    let bound = n.saturating_sub(1).min(p);
    if steps == 0 || steps > bound {
        return Err(Error::domain(format!("steps must lie in 1..={bound}, got {steps}")));
    }
    let mut trace = StepwiseTrace {
        entered: Vec::with_capacity(steps),
        tstats: Vec::with_capacity(steps),
        candidate_stats: Vec::with_capacity(steps),
        excluded: Vec::new(),
    };
    for step in 1..=steps {
        let basis = CandidateBasis::new(x, &trace.entered)?;
        trace.excluded.extend(basis.excluded.iter().map(|&j| (step, j)));
        if basis.is_empty() {
            return Err(Error::Singular { rank: trace.entered.len(), cols: trace.entered.len() + 1 });
        }
        let stats = basis.statistics(y);
        let mut row = vec![None; p];
        let mut best = 0;
        for (k, (&j, &t)) in basis.candidates.iter().zip(&stats).enumerate() {
            row[j] = Some(t);
            if t.abs() > stats[best].abs() {
                best = k;
            }
        }
        trace.entered.push(basis.candidates[best]);
        trace.tstats.push(stats[best].abs());
        trace.candidate_stats.push(row);
    }
    Ok(trace)
}
