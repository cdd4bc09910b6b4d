//! Experiment drivers. Replication `r` draws everything from the stream
//! `(seed, r)`, so results do not depend on the rayon thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lasso_path::{forward_stepwise, lar_path};
use crate::numkit::ks::ks_statistic;
use crate::numkit::normal::half_normal_cdf;
use crate::numkit::rng::fill_gaussian;
use crate::numkit::RandomStream;
use crate::seltests::{gumbel_pvalue, spacing_pvalue, tmax_mc_pvalue, CovarianceSeries, Method};
use crate::stopping::forward_stop;

use super::design::{generate_design, generate_response, DesignSpec, SignalSpec};
use super::metrics::{MetricsRow, SelectionRecord};

const TAG_DESIGN: u64 = 1;
const TAG_NOISE: u64 = 2;
const TAG_MC: u64 = 16;

fn rep_stream(seed: u64, rep: usize) -> RandomStream {
    RandomStream::new(seed, rep as u64)
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    Ok(())
}

/// Runs `f` for every replication, in parallel, collecting in rep order.
fn replicate<R: Send>(reps: usize, f: impl Fn(usize) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    (0..reps).into_par_iter().map(f).collect()
}

// ---------------------------------------------------------------- screening

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningConfig {
    pub design: DesignSpec,
    /// Support and sign layout; `beta_min` is taken from `beta_min_grid`.
    pub signal: SignalSpec,
    pub sigma: f64,
    pub beta_min_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreeningRow {
    pub beta_min: f64,
    pub k: usize,
    pub prob: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningRecord {
    pub rep: usize,
    pub beta_min: f64,
    /// Smallest number of LAR steps whose entries contain the true support.
    pub containment_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningResult {
    pub rows: Vec<ScreeningRow>,
    pub records: Vec<ScreeningRecord>,
}

pub fn screening_experiment(cfg: &ScreeningConfig) -> Result<ScreeningResult> {
    check_reps(cfg.reps)?;
    cfg.design.validate()?;
    let max_k = *cfg.k_grid.iter().max().ok_or_else(|| Error::domain("k_grid is empty"))?;
    if max_k > cfg.design.max_steps() {
        return Err(Error::domain(format!(
            "k = {max_k} exceeds the path length bound {}",
            cfg.design.max_steps()
        )));
    }
    if cfg.beta_min_grid.is_empty() {
        return Err(Error::domain("beta_min grid is empty"));
    }
    let support = cfg.signal.support_set(cfg.design.p)?;

    let per_rep = replicate(cfg.reps, |r| {
        let stream = rep_stream(cfg.seed, r);
        let x = generate_design(&cfg.design, stream.child(TAG_DESIGN))?;
        let mut out = Vec::with_capacity(cfg.beta_min_grid.len());
        for &beta_min in &cfg.beta_min_grid {
            let signal = SignalSpec { beta_min, ..cfg.signal.clone() };
            let beta = signal.beta(cfg.design.p)?;
            // same noise for every grid point
            let y = generate_response(&x, &beta, cfg.sigma, stream.child(TAG_NOISE))?;
            let containment_step = if support.is_empty() {
                Some(0)
            } else {
                let trace = lar_path(&x, &y, max_k.max(1))?;
                let mut missing = support.len();
                trace.entered.iter().position(|j| {
                    if support.contains(j) {
                        missing -= 1;
                    }
                    missing == 0
                })
                .map(|pos| pos + 1)
            };
            out.push(ScreeningRecord { rep: r, beta_min, containment_step });
        }
        Ok(out)
    })?;
    let records: Vec<ScreeningRecord> = per_rep.into_iter().flatten().collect();

    let mut rows = Vec::new();
    for &beta_min in &cfg.beta_min_grid {
        for &k in &cfg.k_grid {
            let hits = records
                .iter()
                .filter(|rec| rec.beta_min == beta_min)
                .filter(|rec| rec.containment_step.is_some_and(|s| s <= k))
                .count();
            let prob = hits as f64 / cfg.reps as f64;
            let se = (prob * (1.0 - prob) / cfg.reps as f64).sqrt();
            rows.push(ScreeningRow { beta_min, k, prob, se });
        }
    }
    Ok(ScreeningResult { rows, records })
}

// ---------------------------------------------------------------------- qq

#[derive(Debug, Clone, PartialEq)]
pub struct QqConfig {
    pub design: DesignSpec,
    pub sigma: f64,
    pub steps: usize,
    pub methods: Vec<Method>,
    pub reps: usize,
    /// Monte Carlo draws per t_max p-value.
    pub n_mc: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QqRecord {
    pub rep: usize,
    pub step: usize,
    pub method: Method,
    pub pvalue: f64,
}

/// Global-null p-values for the first `steps` steps. Covariance p-values use
/// rate k at step k; the spacing test is reported at step 1 only.
pub fn qq_experiment(cfg: &QqConfig) -> Result<Vec<QqRecord>> {
    check_reps(cfg.reps)?;
    cfg.design.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::domain("qq experiment needs at least one method"));
    }
    if let Some(m) = cfg.methods.iter().find(|m| !matches!(m, Method::Covariance | Method::Spacing | Method::Tmax)) {
        return Err(Error::domain(format!("method `{m}` is not available in the qq experiment")));
    }
    if cfg.steps == 0 {
        return Err(Error::domain("steps must be at least 1"));
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::domain("sigma must be positive"));
    }
    let wants = |m: Method| cfg.methods.contains(&m);
    let needs_path = wants(Method::Covariance) || wants(Method::Spacing);
    let path_steps = if wants(Method::Covariance) { cfg.steps + 1 } else { 2 };
    if needs_path && path_steps > cfg.design.max_steps() {
        return Err(Error::domain(format!(
            "{path_steps} path steps exceed the bound {}",
            cfg.design.max_steps()
        )));
    }
    if wants(Method::Tmax) && cfg.steps > cfg.design.max_steps() {
        return Err(Error::domain("too many stepwise steps for this design"));
    }
    if wants(Method::Tmax) && cfg.n_mc == 0 {
        return Err(Error::domain("n_mc must be at least 1"));
    }

    let per_rep = replicate(cfg.reps, |r| {
        let stream = rep_stream(cfg.seed, r);
        let x = generate_design(&cfg.design, stream.child(TAG_DESIGN))?;
        let y = generate_response(&x, &vec![0.0; cfg.design.p], cfg.sigma, stream.child(TAG_NOISE))?;
        let mut out = Vec::new();
        if needs_path {
            let trace = lar_path(&x, &y, path_steps)?;
            if wants(Method::Covariance) {
                let available = cfg.steps.min(trace.steps().saturating_sub(1));
                let tests = CovarianceSeries::new(&x, &y)?.tests(&trace, available, cfg.sigma, |k| k as f64)?;
                out.extend(tests.into_iter().map(|t| QqRecord {
                    rep: r,
                    step: t.step,
                    method: Method::Covariance,
                    pvalue: t.pvalue,
                }));
            }
            if wants(Method::Spacing) && trace.steps() >= 2 {
                let p = spacing_pvalue(trace.knots[0], trace.knots[1], cfg.sigma)?;
                out.push(QqRecord { rep: r, step: 1, method: Method::Spacing, pvalue: p });
            }
        }
        if wants(Method::Tmax) {
            let fs = forward_stepwise(&x, &y, cfg.steps)?;
            for k in 1..=cfg.steps {
                let observed = fs.tstats[k - 1] / cfg.sigma;
                let mc = tmax_mc_pvalue(&x, &fs.entered[..k - 1], observed, cfg.n_mc, stream.child(TAG_MC + k as u64))?;
                out.push(QqRecord { rep: r, step: k, method: Method::Tmax, pvalue: mc.pvalue });
            }
        }
        out.sort_by_key(|rec| (rec.step, rec.method));
        Ok(out)
    })?;
    Ok(per_rep.into_iter().flatten().collect())
}

// --------------------------------------------------------------------- fdr

#[derive(Debug, Clone, PartialEq)]
pub struct FdrConfig {
    pub design: DesignSpec,
    pub signal: SignalSpec,
    pub sigma: f64,
    pub alpha: f64,
    /// Number of covariance p-values fed to ForwardStop.
    pub steps: usize,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrRecord {
    pub selection: SelectionRecord,
    pub k_hat: usize,
    pub pvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrResult {
    pub row: MetricsRow,
    pub records: Vec<FdrRecord>,
}

/// Largest p-value handed to ForwardStop; exp(−0) = 1 would make −log(1 − p) infinite.
const P_CLAMP: f64 = 1.0 - f64::EPSILON;

/// LAR + covariance p-values (rate 1, incremental null) + ForwardStop.
pub fn fdr_experiment(cfg: &FdrConfig) -> Result<FdrResult> {
    check_reps(cfg.reps)?;
    cfg.design.validate()?;
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::domain("sigma must be positive for the covariance test"));
    }
    if cfg.steps == 0 || cfg.steps + 1 > cfg.design.max_steps() {
        return Err(Error::domain(format!(
            "steps must lie in 1..={}",
            cfg.design.max_steps().saturating_sub(1)
        )));
    }
    let p = cfg.design.p;
    let beta = cfg.signal.beta(p)?;
    let support = cfg.signal.support_set(p)?;

    let records = replicate(cfg.reps, |r| {
        let stream = rep_stream(cfg.seed, r);
        let x = generate_design(&cfg.design, stream.child(TAG_DESIGN))?;
        let y = generate_response(&x, &beta, cfg.sigma, stream.child(TAG_NOISE))?;
        let trace = lar_path(&x, &y, cfg.steps + 1)?;
        let available = cfg.steps.min(trace.steps().saturating_sub(1));
        let pvalues: Vec<f64> = CovarianceSeries::new(&x, &y)?
            .tests(&trace, available, cfg.sigma, |_| 1.0)?
            .into_iter()
            .map(|t| t.pvalue.min(P_CLAMP))
            .collect();
        let k_hat = forward_stop(&pvalues, cfg.alpha)?.k_hat;
        let selected = &trace.entered[..k_hat];
        let selection = SelectionRecord::new(r, selected, &support, &x, &beta)?;
        Ok(FdrRecord { selection, k_hat, pvalues })
    })?;
    let selections: Vec<SelectionRecord> = records.iter().map(|r| r.selection.clone()).collect();
    Ok(FdrResult { row: MetricsRow::aggregate(&selections)?, records })
}

// ---------------------------------------------------------------- equicorr

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicorrConfig {
    pub p: usize,
    pub rho: f64,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquicorrResult {
    /// V₁ − √(2ρ log p) per replication.
    pub samples: Vec<f64>,
    pub centering: f64,
    /// KS distance of `samples` to |N(0, 1 − ρ)|.
    pub ks_distance: f64,
}

/// Samples U ~ N(0, (1−ρ)I + ρ11ᵀ) directly and centres its largest absolute
/// entry.
pub fn equicorr_limit_experiment(cfg: &EquicorrConfig) -> Result<EquicorrResult> {
    check_reps(cfg.reps)?;
    if cfg.p < 2 {
        return Err(Error::domain(format!("p must be at least 2, got {}", cfg.p)));
    }
    if !(cfg.rho > 0.0 && cfg.rho < 1.0) {
        return Err(Error::domain(format!("rho must lie in (0, 1), got {}", cfg.rho)));
    }
    let centering = (2.0 * cfg.rho * (cfg.p as f64).ln()).sqrt();
    let (a, b) = (cfg.rho.sqrt(), (1.0 - cfg.rho).sqrt());
    let samples = replicate(cfg.reps, |r| {
        let mut rng = rep_stream(cfg.seed, r).rng();
        let z = fill_gaussian(&mut rng, cfg.p + 1);
        let v1 = z[1..].iter().fold(0.0f64, |m, &zj| m.max((a * z[0] + b * zj).abs()));
        Ok(v1 - centering)
    })?;
    let var = 1.0 - cfg.rho;
    let ks_distance = ks_statistic(&samples, |s| half_normal_cdf(s, var));
    Ok(EquicorrResult { samples, centering, ks_distance })
}

// ------------------------------------------------------ gumbel vs covariance

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelCovConfig {
    pub design: DesignSpec,
    pub sigma: f64,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelCovRecord {
    pub rep: usize,
    /// First-step covariance statistic T₁.
    pub cov_stat: f64,
    pub gumbel_stat: f64,
    pub gumbel_pvalue: f64,
}

/// Under the global null, computes T₁ and the Gumbel test on U = Xᵀy/σ for
/// each replication.
pub fn gumbel_covariance_experiment(cfg: &GumbelCovConfig) -> Result<Vec<GumbelCovRecord>> {
    check_reps(cfg.reps)?;
    cfg.design.validate()?;
    if cfg.design.max_steps() < 2 || cfg.design.p < 2 {
        return Err(Error::domain("design too small for a two-knot path"));
    }
    replicate(cfg.reps, |r| {
        let stream = rep_stream(cfg.seed, r);
        let x = generate_design(&cfg.design, stream.child(TAG_DESIGN))?;
        let y = generate_response(&x, &vec![0.0; cfg.design.p], cfg.sigma, stream.child(TAG_NOISE))?;
        let trace = lar_path(&x, &y, 2)?;
        let cov_stat = CovarianceSeries::new(&x, &y)?.statistics(&trace, 1, cfg.sigma)?[0];
        let u: Vec<f64> = x.t_mul_vec(&y).into_iter().map(|v| v / cfg.sigma).collect();
        let g = gumbel_pvalue(&u, cfg.design.p)?;
        Ok(GumbelCovRecord { rep: r, cov_stat, gumbel_stat: g.statistic, gumbel_pvalue: g.pvalue })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::ks::{exponential_cdf, ks_pvalue, mean, uniform_cdf};
    use crate::simlab::design::Correlation;

    fn small_design() -> DesignSpec {
        DesignSpec { n: 40, p: 12, structure: Correlation::Ar1(0.3) }
    }

    #[test]
    fn screening_trivial_cases() {
        let base = ScreeningConfig {
            design: small_design(),
            signal: SignalSpec::null(),
            sigma: 1.0,
            beta_min_grid: vec![1.0],
            k_grid: vec![1, 3, 6],
            reps: 20,
            seed: 5,
        };
        let res = screening_experiment(&base).unwrap();
        assert!(res.rows.iter().all(|r| r.prob == 1.0));

        let cfg = ScreeningConfig {
            signal: SignalSpec::first_k0(4, 1.0),
            beta_min_grid: vec![8.0],
            k_grid: vec![2, 3, 8],
            ..base.clone()
        };
        let res = screening_experiment(&cfg).unwrap();
        assert_eq!(res.rows[0].prob, 0.0);
        assert_eq!(res.rows[1].prob, 0.0);
        assert!(res.rows[2].prob > 0.5);

        assert!(screening_experiment(&ScreeningConfig { reps: 0, ..base.clone() }).is_err());
        assert!(screening_experiment(&ScreeningConfig { k_grid: vec![40], ..base }).is_err());
    }

    #[test]
    fn qq_is_deterministic_and_thread_independent() {
        let cfg = QqConfig {
            design: small_design(),
            sigma: 1.0,
            steps: 2,
            methods: vec![Method::Covariance, Method::Spacing, Method::Tmax],
            reps: 8,
            n_mc: 50,
            seed: 77,
        };
        let a = qq_experiment(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| qq_experiment(&cfg).unwrap());
        assert_eq!(a, b);
        // 2 covariance + 1 spacing + 2 tmax per replication
        assert_eq!(a.len(), 8 * 5);
        assert!(qq_experiment(&QqConfig { methods: vec![], ..cfg.clone() }).is_err());
        assert!(qq_experiment(&QqConfig { methods: vec![Method::Gumbel], ..cfg }).is_err());
    }

    #[test]
    fn spacing_uniform_under_orthonormal_null() {
        let cfg = QqConfig {
            design: DesignSpec { n: 30, p: 20, structure: Correlation::Orthogonal },
            sigma: 1.0,
            steps: 1,
            methods: vec![Method::Spacing],
            reps: 2000,
            n_mc: 1,
            seed: 2024,
        };
        let p: Vec<f64> = qq_experiment(&cfg).unwrap().into_iter().map(|r| r.pvalue).collect();
        let d = ks_statistic(&p, uniform_cdf);
        assert!(ks_pvalue(d, p.len()) > 0.01, "D = {d}");
    }

    #[test]
    fn covariance_first_step_on_orthonormal_null() {
        let cfg = GumbelCovConfig {
            design: DesignSpec { n: 60, p: 50, structure: Correlation::Orthogonal },
            sigma: 1.0,
            reps: 400,
            seed: 99,
        };
        let recs = gumbel_covariance_experiment(&cfg).unwrap();
        // orthonormal X: T1 = u(1)(u(1) - u(2)) from the two largest |Xᵀy|
        for rec in &recs {
            let stream = rep_stream(cfg.seed, rec.rep);
            let x = generate_design(&cfg.design, stream.child(TAG_DESIGN)).unwrap();
            let y = generate_response(&x, &vec![0.0; 50], 1.0, stream.child(TAG_NOISE)).unwrap();
            let mut u: Vec<f64> = x.t_mul_vec(&y).iter().map(|v| v.abs()).collect();
            u.sort_by(|a, b| b.total_cmp(a));
            let want = u[0] * (u[0] - u[1]);
            assert!((rec.cov_stat - want).abs() < 1e-8 * want.max(1.0), "{} vs {want}", rec.cov_stat);
        }
        let t: Vec<f64> = recs.iter().map(|r| r.cov_stat).collect();
        assert!((mean(&t) - 1.0).abs() < 0.15, "mean {}", mean(&t));
        let d = ks_statistic(&t, |v| exponential_cdf(v, 1.0));
        assert!(d < 0.08, "D = {d}");
    }

    #[test]
    fn fdr_noiseless_single_signal() {
        let cfg = FdrConfig {
            design: DesignSpec { n: 40, p: 12, structure: Correlation::Ar1(0.3) },
            signal: SignalSpec::first_k0(1, 50.0),
            sigma: 1.0,
            alpha: 0.05,
            steps: 5,
            reps: 20,
            seed: 1,
        };
        let res = fdr_experiment(&cfg).unwrap();
        assert_eq!(res.row.avg_tp.mean, 1.0);
        assert!(res.row.avg_fp.mean <= 0.1);
        assert!(fdr_experiment(&FdrConfig { reps: 0, ..cfg }).is_err());
    }

    #[test]
    fn equicorr_edge_cases() {
        let base = EquicorrConfig { p: 50, rho: 0.5, reps: 30, seed: 3 };
        let a = equicorr_limit_experiment(&base).unwrap();
        assert_eq!(a, equicorr_limit_experiment(&base).unwrap());
        assert!(equicorr_limit_experiment(&EquicorrConfig { rho: 1.0, ..base }).is_err());
        assert!(equicorr_limit_experiment(&EquicorrConfig { rho: 0.0, ..base }).is_err());
        let near_one = equicorr_limit_experiment(&EquicorrConfig { rho: 0.999_999, reps: 200, ..base }).unwrap();
        let far = equicorr_limit_experiment(&EquicorrConfig { rho: 0.5, reps: 200, ..base }).unwrap();
        let spread = |xs: &[f64]| {
            let m = mean(xs);
            let v: f64 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
            v
        };
        // with ρ → 1 all entries coincide, V₁ ≈ |Z₀| and the spread tends
        // to Var|Z₀| = 1 − 2/π rather than growing with p
        assert!(spread(&near_one.samples) < spread(&far.samples) + 1.0);
    }
}
