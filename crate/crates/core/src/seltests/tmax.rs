//! Monte Carlo p-values for the forward stepwise t_max statistic.

use crate::error::{Error, Result};
use crate::lasso_path::CandidateBasis;
use crate::numkit::rng::fill_gaussian;
use crate::numkit::{DenseMatrix, RandomStream};
use crate::scalar::dot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPvalue {
    pub pvalue: f64,
    pub mc_se: f64,
    pub n_mc: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMc {
    pub pvalue: f64,
    pub mc_se: f64,
    pub accepted: usize,
    pub acceptance_rate: f64,
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// P(t_max(ε) > observed) for ε ~ N(0, I), with candidates j ∉ `active`
/// orthogonalized against the active columns. `observed` is in σ units.
pub fn tmax_mc_pvalue(
    x: &DenseMatrix<f64>,
    active: &[usize],
    observed_tmax: f64,
    n_mc: usize,
    stream: RandomStream,
) -> Result<McPvalue> {
    if n_mc == 0 {
        return Err(Error::domain("n_mc must be at least 1"));
    }
    let basis = CandidateBasis::new(x, active)?;
    if basis.is_empty() {
        return Err(Error::domain("no candidate predictors outside the active set"));
    }
    let mut rng = stream.rng();
    let mut exceed = 0usize;
    for _ in 0..n_mc {
        let eps = fill_gaussian(&mut rng, x.rows());
        if basis.tmax(&eps) > observed_tmax {
            exceed += 1;
        }
    }
    let p = exceed as f64 / n_mc as f64;
    Ok(McPvalue { pvalue: p, mc_se: binomial_se(p, n_mc), n_mc })
}

/// Step-two t_max p-value that conditions on `j_first` having won step one:
/// draws y* = X_j β̂_j + ε and keeps only those where forward stepwise picks
/// `j_first` first.
pub fn tmax_conditional_pvalue(
    x: &DenseMatrix<f64>,
    j_first: usize,
    y: &[f64],
    n_mc: usize,
    stream: RandomStream,
) -> Result<ConditionalMc> {
    if n_mc == 0 {
        return Err(Error::domain("n_mc must be at least 1"));
    }
    if j_first >= x.cols() {
        return Err(Error::domain(format!("column {j_first} out of range")));
    }
    if y.len() != x.rows() {
        return Err(Error::domain("response length does not match design rows"));
    }
    let step1 = CandidateBasis::new(x, &[])?;
    if first_pick(&step1, y) != Some(j_first) {
        return Err(Error::domain(format!("column {j_first} is not the first forward stepwise entry for y")));
    }
    let step2 = CandidateBasis::new(x, &[j_first])?;
    if step2.is_empty() {
        return Err(Error::domain("no candidates remain after the first step"));
    }
    let xj = x.col(j_first);
    let beta_j = dot(xj, y) / dot(xj, xj);
    let observed = step2.tmax(y);

    let mut rng = stream.rng();
    let (mut accepted, mut exceed) = (0usize, 0usize);
    let mut ystar = vec![0.0; x.rows()];
    for _ in 0..n_mc {
        let eps = fill_gaussian(&mut rng, x.rows());
        for ((ys, &e), &xv) in ystar.iter_mut().zip(&eps).zip(xj) {
            *ys = xv * beta_j + e;
        }
        if first_pick(&step1, &ystar) != Some(j_first) {
            continue;
        }
        accepted += 1;
        if step2.tmax(&ystar) > observed {
            exceed += 1;
        }
    }
    if accepted == 0 {
        return Err(Error::Estimation(format!(
            "no draw out of {n_mc} selected column {j_first} first; increase n_mc"
        )));
    }
    let p = exceed as f64 / accepted as f64;
    Ok(ConditionalMc {
        pvalue: p,
        mc_se: binomial_se(p, accepted),
        accepted,
        acceptance_rate: accepted as f64 / n_mc as f64,
    })
}

/// Forward stepwise's first entry (lowest index on ties).
fn first_pick(basis: &CandidateBasis<f64>, v: &[f64]) -> Option<usize> {
    let stats = basis.statistics(v);
    let mut best: Option<(usize, f64)> = None;
    for (&j, t) in basis.candidates.iter().zip(stats) {
        if best.is_none_or(|(_, b)| t.abs() > b) {
            best = Some((j, t.abs()));
        }
    }
    best.map(|(j, _)| j)
}
