//! Selection quality: false/true positives, FWER, FDR and the uninformative
//! variable rate.

use crate::error::{Error, Result};
use crate::numkit::{least_squares, DenseMatrix};

/// Projection coefficients at or below this magnitude count as zero.
pub const UVR_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicMetrics {
    pub fp: usize,
    pub tp: usize,
    pub fwer_violation: bool,
}

pub fn classic_metrics(selected: &[usize], true_support: &[usize]) -> ClassicMetrics {
    let tp = selected.iter().filter(|j| true_support.contains(j)).count();
    let fp = selected.len() - tp;
    ClassicMetrics { fp, tp, fwer_violation: fp >= 1 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UvrOutcome {
    pub uvr: f64,
    /// Per selected variable (same order): true if uninformative.
    pub uninformative: Vec<bool>,
    pub projection: Vec<f64>,
}

/// Projects μ = Xβ onto the selected columns; a selected variable is a false
/// positive iff its projection coefficient is zero.
pub fn uvr_metric(selected: &[usize], x: &DenseMatrix<f64>, beta_true: &[f64]) -> Result<UvrOutcome> {
    if selected.is_empty() {
        return Err(Error::domain("UVR needs a non-empty selection"));
    }
    if beta_true.len() != x.cols() {
        return Err(Error::domain("beta_true length does not match design columns"));
    }
    let mu = x.mul_vec(beta_true);
    let xs = x.select_columns(selected)?;
    let projection = least_squares(&xs, &mu)?;
    let uninformative: Vec<bool> = projection.iter().map(|c| c.abs() <= UVR_ZERO_TOL).collect();
    let uvr = uninformative.iter().filter(|&&f| f).count() as f64 / selected.len() as f64;
    Ok(UvrOutcome { uvr, uninformative, projection })
}

/// Per-replication selection outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRecord {
    pub rep: usize,
    pub selected: usize,
    pub fp: usize,
    pub tp: usize,
    pub fwer_violation: bool,
    /// fp / max(selected, 1)
    pub fdp: f64,
    /// Uninformative fraction among the selected (0 for an empty selection).
    pub uvp: f64,
}

impl SelectionRecord {
    pub fn new(rep: usize, selected: &[usize], true_support: &[usize], x: &DenseMatrix<f64>, beta: &[f64]) -> Result<Self> {
        let m = classic_metrics(selected, true_support);
        let uvp = if selected.is_empty() { 0.0 } else { uvr_metric(selected, x, beta)?.uvr };
        Ok(Self {
            rep,
            selected: selected.len(),
            fp: m.fp,
            tp: m.tp,
            fwer_violation: m.fwer_violation,
            fdp: m.fp as f64 / selected.len().max(1) as f64,
            uvp,
        })
    }
}

/// A mean and its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, se }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub reps: usize,
    pub avg_selected: Estimate,
    pub avg_fp: Estimate,
    pub avg_tp: Estimate,
    pub fwer: Estimate,
    pub fdr: Estimate,
    pub uvr: Estimate,
}

impl MetricsRow {
    /// Aggregates in record order.
    pub fn aggregate(records: &[SelectionRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::domain("cannot aggregate zero replications"));
        }
        let col = |f: &dyn Fn(&SelectionRecord) -> f64| {
            Estimate::from_samples(&records.iter().map(f).collect::<Vec<_>>())
        };
        Ok(Self {
            reps: records.len(),
            avg_selected: col(&|r| r.selected as f64),
            avg_fp: col(&|r| r.fp as f64),
            avg_tp: col(&|r| r.tp as f64),
            fwer: col(&|r| if r.fwer_violation { 1.0 } else { 0.0 }),
            fdr: col(&|r| r.fdp),
            uvr: col(&|r| r.uvp),
        })
    }
}
