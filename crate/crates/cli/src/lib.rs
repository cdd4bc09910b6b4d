//! Command-line front end for the covtest library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime or numerical
//! error. Diagnostics go to standard error.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use covtest::lasso_path::{forward_stepwise, lar_path};
use covtest::numkit::DenseMatrix;
use covtest::seltests::{gap_stat, gumbel_pvalue, spacing_test, tmax_mc_pvalue, CovarianceSeries, Method};
use covtest::simlab::{
    equicorr_limit_experiment, fdr_experiment, generate_design, generate_response, qq_experiment,
    screening_experiment, Correlation, DesignSpec, SignalSpec, Support,
};
use covtest::RandomStream;

use config::{CovRate, DataSource, ExperimentKind, Job, Overrides, RunConfig};
use output::{Cell, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "covtest", version, about = "Lasso paths, post-selection tests and simulation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Compute the LAR path of one data set.
    Path {
        /// CSV data file (column `y` is the response).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run significance tests along the path of one data set.
    Test {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run a simulation experiment.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
    },
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<output::EmitError> for Failure {
    fn from(e: output::EmitError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Domain errors come from inputs the library refuses; everything else
/// (singular systems, non-convergence, degenerate knots) is numerical.
impl From<covtest::Error> for Failure {
    fn from(e: covtest::Error) -> Self {
        match e {
            covtest::Error::Domain(m) => Failure::Config(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(written) => {
            for path in written {
                eprintln!("wrote {}", path.display());
            }
            EXIT_OK
        }
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Runtime(m) => eprintln!("error: {m}"),
            }
            f.code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => RunConfig::default(),
    };
    let (command, kind, data) = match &cli.command {
        Sub::Path { data } => (config::Command::Path, None, data.clone()),
        Sub::Test { data } => (config::Command::Test, None, data.clone()),
        Sub::Experiment { kind } => (config::Command::Experiment, Some(*kind), None),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        reps: cli.reps,
        out: cli.out.clone(),
        sigma: cli.sigma,
        alpha: cli.alpha,
        data,
    });
    let job = config::resolve(&cfg, command, kind)?;
    cfg.command = Some(command);
    cfg.experiment_kind = kind;

    let (stem, table, summary) = execute(&job)?;
    let dir = cfg.output_path.clone().unwrap_or_else(|| PathBuf::from("out"));
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let sidecar = json!({
        "library": "covtest",
        "version": covtest::VERSION,
        "config": serde_json::to_value(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?,
        "resolved": describe(&job),
        "summary": summary,
    });
    output::emit_csv(&table, &csv_path)?;
    output::emit_json(&sidecar, &json_path)?;
    Ok(vec![csv_path, json_path])
}

fn execute(job: &Job) -> Result<(&'static str, Table, Value), Failure> {
    match job {
        Job::Path { data, steps } => {
            let (x, y) = load_data(data)?;
            let bound = x.rows().saturating_sub(1).min(x.cols());
            let steps = steps.unwrap_or(bound);
            if steps == 0 || steps > bound {
                return Err(Failure::Config(format!("`steps` must lie in 1..={bound} for this data")));
            }
            let trace = lar_path(&x, &y, steps)?;
            let mut t = Table::new(vec!["step", "lambda", "entered", "sign"]);
            for k in 0..trace.steps() {
                t.push(vec![
                    (k + 1).into(),
                    trace.knots[k].into(),
                    trace.entered[k].into(),
                    Cell::Text(trace.signs[k].to_string()),
                ]);
            }
            let summary = json!({
                "n": x.rows(),
                "p": x.cols(),
                "tied_steps": trace.diagnostics.tied_steps,
                "first_sign_violation": trace.diagnostics.first_sign_violation,
                "floor": trace.floor(),
            });
            Ok(("path", t, summary))
        }
        Job::Test { data, sigma, steps, methods, cov_rate, n_mc, seed } => {
            let (x, y) = load_data(data)?;
            run_tests(&x, &y, *sigma, *steps, methods, *cov_rate, *n_mc, *seed)
        }
        Job::Qq(cfg) => {
            let records = qq_experiment(cfg)?;
            let mut t = Table::new(vec!["rep", "step", "method", "pvalue"]);
            for r in &records {
                t.push(vec![r.rep.into(), r.step.into(), r.method.name().into(), r.pvalue.into()]);
            }
            Ok(("qq", t, json!({ "records": records.len() })))
        }
        Job::Screening(cfg) => {
            let res = screening_experiment(cfg)?;
            let mut t = Table::new(vec!["beta_min", "k", "prob", "se"]);
            for r in &res.rows {
                t.push(vec![r.beta_min.into(), r.k.into(), r.prob.into(), r.se.into()]);
            }
            Ok(("screening", t, json!({ "rows": res.rows.len() })))
        }
        Job::Fdr(cfg) => {
            let res = fdr_experiment(cfg)?;
            let m = &res.row;
            let mut t = Table::new(vec![
                "reps", "avg_selected", "avg_selected_se", "avg_fp", "avg_fp_se", "avg_tp", "avg_tp_se", "fwer",
                "fwer_se", "fdr", "fdr_se", "uvr", "uvr_se",
            ]);
            let mut row = vec![m.reps.into()];
            for e in [m.avg_selected, m.avg_fp, m.avg_tp, m.fwer, m.fdr, m.uvr] {
                row.push(e.mean.into());
                row.push(e.se.into());
            }
            t.push(row);
            let mean_k: f64 = res.records.iter().map(|r| r.k_hat as f64).sum::<f64>() / res.records.len() as f64;
            Ok(("fdr", t, json!({ "mean_k_hat": mean_k })))
        }
        Job::Equicorr(cfg) => {
            let res = equicorr_limit_experiment(cfg)?;
            let mut t = Table::new(vec!["rep", "centered_max"]);
            for (r, v) in res.samples.iter().enumerate() {
                t.push(vec![r.into(), (*v).into()]);
            }
            let summary = json!({
                "centering": res.centering,
                "ks_distance_half_normal": res.ks_distance,
                "half_normal_variance": 1.0 - cfg.rho,
            });
            Ok(("equicorr", t, summary))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_tests(
    x: &DenseMatrix<f64>,
    y: &[f64],
    sigma: f64,
    steps: Option<usize>,
    methods: &[Method],
    cov_rate: CovRate,
    n_mc: usize,
    seed: u64,
) -> Result<(&'static str, Table, Value), Failure> {
    let bound = x.rows().saturating_sub(1).min(x.cols());
    if bound == 0 {
        return Err(Failure::Config("data has too few rows or columns".into()));
    }
    let steps = match steps {
        Some(s) if s > bound => {
            return Err(Failure::Config(format!("`steps` must lie in 1..={bound} for this data")));
        }
        Some(s) => s,
        None => bound.min(5),
    };
    let mut t = Table::new(vec!["step", "method", "statistic", "pvalue", "mc_se"]);
    let mut push = |step: usize, m: Method, stat: f64, p: f64, se: Option<f64>| {
        t.push(vec![step.into(), m.name().into(), stat.into(), p.into(), se.into()]);
    };
    let mut notes: Vec<String> = Vec::new();

    let wants = |m: Method| methods.contains(&m);
    if wants(Method::Covariance) || wants(Method::Spacing) {
        let trace = lar_path(x, y, (steps + 1).min(bound))?;
        if wants(Method::Covariance) {
            let available = steps.min(trace.steps().saturating_sub(1));
            if available < steps {
                notes.push(format!("covariance test stops at step {available}; the path needs one more knot"));
            }
            let rate = |k: usize| match cov_rate {
                CovRate::One => 1.0,
                CovRate::Step => k as f64,
            };
            for o in CovarianceSeries::new(x, y)?.tests(&trace, available, sigma, rate)? {
                notes.extend(o.diagnostics.iter().map(|d| format!("step {}: {d}", o.step)));
                push(o.step, Method::Covariance, o.statistic, o.pvalue, None);
            }
        }
        if wants(Method::Spacing) && trace.steps() >= 2 {
            let o = spacing_test(&trace, sigma)?;
            push(o.step, Method::Spacing, o.statistic, o.pvalue, None);
        }
    }
    if wants(Method::Tmax) {
        let fs = forward_stepwise(x, y, steps)?;
        let base = RandomStream::new(seed, 0);
        for k in 1..=fs.entered.len() {
            let observed = fs.tstats[k - 1] / sigma;
            let mc = tmax_mc_pvalue(x, &fs.entered[..k - 1], observed, n_mc, base.child(16 + k as u64))?;
            push(k, Method::Tmax, observed, mc.pvalue, Some(mc.mc_se));
        }
    }
    if wants(Method::Gumbel) || wants(Method::Gap) {
        let u: Vec<f64> = x.t_mul_vec(y).into_iter().map(|v| v / sigma).collect();
        if wants(Method::Gumbel) {
            let o = gumbel_pvalue(&u, x.cols())?;
            push(o.step, Method::Gumbel, o.statistic, o.pvalue, None);
        }
        if wants(Method::Gap) {
            let o = gap_stat(&u, x.cols())?;
            push(o.step, Method::Gap, o.statistic, o.pvalue, None);
        }
    }
    for n in &notes {
        eprintln!("note: {n}");
    }
    Ok(("test", t, json!({ "n": x.rows(), "p": x.cols(), "notes": notes })))
}

fn load_data(src: &DataSource) -> Result<(DenseMatrix<f64>, Vec<f64>), Failure> {
    match src {
        DataSource::Simulated { design, signal, sigma, seed } => {
            let stream = RandomStream::new(*seed, 0);
            let x = generate_design(design, stream.child(1))?;
            let beta = signal.beta(design.p)?;
            let y = generate_response(&x, &beta, *sigma, stream.child(2))?;
            Ok((x, y))
        }
        DataSource::File(path) => read_data_csv(path),
    }
}

/// Reads a data CSV and scales every predictor column to unit norm.
pub fn read_data_csv(path: &Path) -> Result<(DenseMatrix<f64>, Vec<f64>), Failure> {
    let bad = |m: String| Failure::Config(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let y_col = header.iter().position(|h| h.trim() == "y").ok_or_else(|| bad("no column named `y`".into()))?;
    let p = header.len() - 1;
    if p == 0 {
        return Err(bad("no predictor columns".into()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut row = Vec::with_capacity(p);
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| bad(format!("line {}: `{field}` is not a number", i + 2)))?;
            if !v.is_finite() {
                return Err(bad(format!("line {}: non-finite value", i + 2)));
            }
            if j == y_col {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(bad("need at least two rows".into()));
    }
    let mut x = DenseMatrix::from_row_major(rows.len(), p, &rows.concat())?;
    for j in 0..p {
        let norm = x.col(j).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(bad(format!("predictor column `{}` is all zeros", header_name(&header, y_col, j))));
        }
        x.col_mut(j).iter_mut().for_each(|v| *v /= norm);
    }
    Ok((x, y))
}

fn header_name(header: &csv::StringRecord, y_col: usize, j: usize) -> String {
    let idx = if j >= y_col { j + 1 } else { j };
    header.get(idx).unwrap_or("?").to_string()
}

fn describe_design(d: &DesignSpec) -> Value {
    let corr = match d.structure {
        Correlation::Orthogonal => json!("orthogonal"),
        Correlation::Ar1(r) => json!({ "ar1": r }),
        Correlation::Equicorrelated(r) => json!({ "equicorrelated": r }),
    };
    json!({ "n": d.n, "p": d.p, "correlation": corr })
}

fn describe_signal(s: &SignalSpec, p: usize) -> Value {
    json!({
        "k0": s.k0,
        "beta_min": s.beta_min,
        "support": s.support_set(p).unwrap_or_default(),
        "first_k0": matches!(s.support, Support::FirstK0),
        "signs": format!("{:?}", s.signs).to_lowercase(),
    })
}

fn describe_data(d: &DataSource) -> Value {
    match d {
        DataSource::File(p) => json!({ "file": p.display().to_string() }),
        DataSource::Simulated { design, signal, sigma, seed } => json!({
            "design": describe_design(design),
            "signal": describe_signal(signal, design.p),
            "sigma": sigma,
            "seed": seed,
        }),
    }
}

/// The fully defaulted parameters actually used.
fn describe(job: &Job) -> Value {
    match job {
        Job::Path { data, steps } => json!({ "data": describe_data(data), "steps": steps }),
        Job::Test { data, sigma, steps, methods, cov_rate, n_mc, seed } => json!({
            "data": describe_data(data),
            "sigma": sigma,
            "steps": steps,
            "methods": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "cov_rate": format!("{cov_rate:?}").to_lowercase(),
            "n_mc": n_mc,
            "seed": seed,
        }),
        Job::Qq(c) => json!({
            "design": describe_design(&c.design),
            "sigma": c.sigma,
            "steps": c.steps,
            "methods": c.methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "covariance_rate": "step",
            "reps": c.reps,
            "n_mc": c.n_mc,
            "seed": c.seed,
        }),
        Job::Screening(c) => json!({
            "design": describe_design(&c.design),
            "signal": describe_signal(&c.signal, c.design.p),
            "sigma": c.sigma,
            "beta_min_grid": c.beta_min_grid,
            "k_grid": c.k_grid,
            "reps": c.reps,
            "seed": c.seed,
        }),
        Job::Fdr(c) => json!({
            "design": describe_design(&c.design),
            "signal": describe_signal(&c.signal, c.design.p),
            "sigma": c.sigma,
            "alpha": c.alpha,
            "steps": c.steps,
            "covariance_rate": "one",
            "reps": c.reps,
            "seed": c.seed,
        }),
        Job::Equicorr(c) => json!({ "p": c.p, "rho": c.rho, "reps": c.reps, "seed": c.seed }),
    }
}
