//! Design and response generators.

use crate::error::{Error, Result};
use crate::numkit::rng::fill_gaussian;
use crate::numkit::{DenseMatrix, PivotedQr, RandomStream};
use crate::scalar::norm2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    /// Exactly orthonormal columns.
    Orthogonal,
    /// Population correlation ρ^|j−j′|.
    Ar1(f64),
    /// Population correlation ρ between every pair.
    Equicorrelated(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub n: usize,
    pub p: usize,
    pub structure: Correlation,
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::domain(format!("design needs n, p >= 1 (got {}x{})", self.n, self.p)));
        }
        match self.structure {
            Correlation::Orthogonal if self.n < self.p => Err(Error::domain(format!(
                "orthogonal design needs n >= p (got n = {}, p = {})",
                self.n, self.p
            ))),
            Correlation::Ar1(rho) | Correlation::Equicorrelated(rho) if !(0.0..1.0).contains(&rho) => {
                Err(Error::domain(format!("correlation must lie in [0, 1), got {rho}")))
            }
            _ => Ok(()),
        }
    }

    /// min(n − 1, p), the longest path or stepwise sequence the design admits.
    pub fn max_steps(&self) -> usize {
        self.n.saturating_sub(1).min(self.p)
    }
}

/// Draws an n×p design with Gaussian rows of the requested correlation and
/// rescales every column to unit norm.
pub fn generate_design(spec: &DesignSpec, stream: RandomStream) -> Result<DenseMatrix<f64>> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = stream.rng();
    let z = fill_gaussian(&mut rng, n * p);
    let mut cols: Vec<Vec<f64>> = z.chunks_exact(n).map(<[f64]>::to_vec).collect();
    match spec.structure {
        Correlation::Orthogonal => {
            let q = PivotedQr::new(&DenseMatrix::from_columns(cols)?).thin_q();
            return Ok(q);
        }
        Correlation::Ar1(rho) => {
            let innov = (1.0 - rho * rho).sqrt();
            for j in 1..p {
                let (prev, cur) = cols.split_at_mut(j);
                for (c, &pv) in cur[0].iter_mut().zip(&prev[j - 1]) {
                    *c = rho * pv + innov * *c;
                }
            }
        }
        Correlation::Equicorrelated(rho) => {
            let common = fill_gaussian(&mut rng, n);
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            for col in cols.iter_mut() {
                for (c, &z0) in col.iter_mut().zip(&common) {
                    *c = a * z0 + b * *c;
                }
            }
        }
    }
    for col in cols.iter_mut() {
        let norm = norm2(col);
        col.iter_mut().for_each(|v| *v /= norm);
    }
    DenseMatrix::from_columns(cols)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    FirstK0,
    Indices(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignPattern {
    Positive,
    Alternating,
}

/// True coefficient vector: `k0` nonzeros of magnitude `beta_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub k0: usize,
    pub beta_min: f64,
    pub support: Support,
    pub signs: SignPattern,
}

impl SignalSpec {
    /// The repository default: support = first k0 columns, all positive.
    pub fn first_k0(k0: usize, beta_min: f64) -> Self {
        Self { k0, beta_min, support: Support::FirstK0, signs: SignPattern::Positive }
    }

    pub fn null() -> Self {
        Self::first_k0(0, 1.0)
    }

    pub fn support_set(&self, p: usize) -> Result<Vec<usize>> {
        if self.k0 > p {
            return Err(Error::domain(format!("k0 = {} exceeds p = {p}", self.k0)));
        }
        let idx = match &self.support {
            Support::FirstK0 => (0..self.k0).collect(),
            Support::Indices(v) => {
                if v.len() != self.k0 {
                    return Err(Error::domain(format!("support lists {} indices but k0 = {}", v.len(), self.k0)));
                }
                for (i, &j) in v.iter().enumerate() {
                    if j >= p || v[..i].contains(&j) {
                        return Err(Error::domain(format!("invalid support index {j}")));
                    }
                }
                v.clone()
            }
        };
        Ok(idx)
    }

    pub fn beta(&self, p: usize) -> Result<Vec<f64>> {
        if self.k0 > 0 && !(self.beta_min > 0.0) {
            return Err(Error::domain(format!("beta_min must be positive, got {}", self.beta_min)));
        }
        let mut beta = vec![0.0; p];
        for (i, j) in self.support_set(p)?.into_iter().enumerate() {
            let sign = match self.signs {
                SignPattern::Positive => 1.0,
                SignPattern::Alternating if i % 2 == 1 => -1.0,
                SignPattern::Alternating => 1.0,
            };
            beta[j] = sign * self.beta_min;
        }
        Ok(beta)
    }
}

/// y = Xβ + σε. σ = 0 gives the noiseless response.
pub fn generate_response(x: &DenseMatrix<f64>, beta: &[f64], sigma: f64, stream: RandomStream) -> Result<Vec<f64>> {
    if beta.len() != x.cols() {
        return Err(Error::domain(format!("beta has length {} but X has {} columns", beta.len(), x.cols())));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("sigma must be finite and nonnegative, got {sigma}")));
    }
    let mut y = x.mul_vec(beta);
    if sigma > 0.0 {
        let eps = fill_gaussian(&mut stream.rng(), x.rows());
        for (yi, e) in y.iter_mut().zip(eps) {
            *yi += sigma * e;
        }
    }
    Ok(y)
}
