//! Noise-level sweeps, rate fits and comparison tables.
//!
//! Every cell of a (method × δ × seed) grid is an independent solve. Cells run
//! in parallel and are reduced in grid order, so outputs do not depend on the
//! thread count.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{add_noise, make_bvp_problem, make_diagonal_problem, BvpExample, LinearOperator};
use crate::polynomials::MomentumSchedule;
use crate::solvers::{solve, Method, SolverConfig, Termination};
use crate::stopping::StoppingRule;

/// Test problem family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemSpec {
    /// `σ_n = n^(−s)`, `x†_n = (−1)^n n^(−p)`.
    Diagonal {
        n: usize,
        spectrum_exponent: f64,
        solution_exponent: f64,
    },
    Bvp { grid: usize, example: u32 },
}

impl ProblemSpec {
    /// `n = 1000`, `σ_n = n^(−2)`, `x†_n = (−1)^n n^(−4)`; smoothness just below 3/4.
    pub fn standard_diagonal() -> Self {
        Self::Diagonal {
            n: 1000,
            spectrum_exponent: 2.0,
            solution_exponent: 4.0,
        }
    }

    pub fn build(&self) -> Result<(Arc<dyn LinearOperator>, Vec<f64>)> {
        Ok(match *self {
            Self::Diagonal {
                n,
                spectrum_exponent,
                solution_exponent,
            } => {
                let (op, x) = make_diagonal_problem(n, spectrum_exponent, solution_exponent, true)?;
                (Arc::new(op), x)
            }
            Self::Bvp { grid, example } => {
                let (op, x) = make_bvp_problem(grid, example)?;
                (Arc::new(op), x)
            }
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Diagonal {
                n,
                spectrum_exponent,
                solution_exponent,
            } => format!("diagonal(n={n}, s={spectrum_exponent}, p={solution_exponent})"),
            Self::Bvp { grid, example } => format!("bvp(example={example}, grid={grid})"),
        }
    }
}

/// Parses `nesterov:<beta>`, `fista`, `landweber`, `nu:<nu>` or `cgne`.
pub fn parse_method(text: &str) -> Result<Method> {
    let text = text.trim();
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (text, None),
    };
    let number = |what: &str| -> Result<f64> {
        arg.ok_or_else(|| Error::Config(format!("method '{name}' needs a {what} value, e.g. {name}:1")))?
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("bad {what} in '{text}': {e}")))
    };
    let method = match name {
        "nesterov" => Method::Nesterov(MomentumSchedule::beta(number("beta")?)?),
        "fista" => Method::Nesterov(MomentumSchedule::Fista),
        "landweber" => Method::Landweber,
        "nu" | "nu-method" => Method::NuMethod { nu: number("nu")? },
        "cgne" => Method::Cgne,
        other => return Err(Error::Config(format!("unknown method '{other}'"))),
    };
    SolverConfig::new(method.clone())?;
    Ok(method)
}

/// Decades `10^(−from) … 10^(−to)`, largest first.
pub fn decades(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|e| 10f64.powi(-e)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateExperimentConfig {
    pub problem: ProblemSpec,
    pub methods: Vec<Method>,
    pub rule: StoppingRule,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Overrides each method's default cap.
    pub max_iterations: Option<usize>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl RateExperimentConfig {
    pub fn new(problem: ProblemSpec, methods: Vec<Method>, rule: StoppingRule) -> Self {
        Self {
            problem,
            methods,
            rule,
            deltas: decades(1, 5),
            seeds: (1..=10).collect(),
            max_iterations: None,
            jobs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods given".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.deltas.is_empty() {
            return Err(Error::Config("at least one noise level is required".into()));
        }
        for (i, d) in self.deltas.iter().enumerate() {
            if !(*d > 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("noise levels must be positive, got {d}")));
            }
            if self.deltas[..i].contains(d) {
                return Err(Error::Config(format!("noise level {d} listed twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Stopped,
    NotConverged,
    Breakdown,
    Failed(String),
}

impl CellStatus {
    pub fn label(&self) -> &str {
        match self {
            Self::Stopped => "ok",
            Self::NotConverged => "not-converged",
            Self::Breakdown => "breakdown",
            Self::Failed(_) => "failed",
        }
    }
}

/// Result of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRecord {
    pub method: String,
    pub delta: f64,
    pub seed: u64,
    /// `‖x_{k*} − x†‖`; NaN when the cell failed.
    pub error: f64,
    pub stop_k: usize,
    pub status: CellStatus,
}

/// Least-squares line through `(log δ, log value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation in log space.
    pub max_residual: f64,
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(d, v)| !(*d > 0.0 && *v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "log-log fit needs positive coordinates, got {p:?}"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(d, v)| (d.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope fit needs distinct abscissae".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Median; the mean of the two central values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Per-method aggregate over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSeries {
    pub method: String,
    pub deltas: Vec<f64>,
    /// Median error per δ; `None` unless every seed stopped normally.
    pub median_errors: Vec<Option<f64>>,
    /// Median stop index per δ over normally stopped seeds.
    pub median_stops: Vec<Option<f64>>,
    /// Error slope; absent with fewer than two usable δ.
    pub slope: Option<SlopeFit>,
    /// Smallest stop index per δ over normally stopped seeds.
    pub min_stops: Vec<Option<usize>>,
    /// Slope of `log k(δ)` against `log(1/δ)`, skipping δ at which some seed
    /// stopped at `k ≤ 1`: there the index is pinned by the start of the
    /// iteration rather than by δ.
    pub index_slope: Option<SlopeFit>,
}

impl MethodSeries {
    fn from_records(method: &str, deltas: &[f64], records: &[RateRecord]) -> Self {
        let mut median_errors = Vec::new();
        let mut median_stops = Vec::new();
        let mut min_stops = Vec::new();
        for &d in deltas {
            let cell: Vec<&RateRecord> = records
                .iter()
                .filter(|r| r.method == method && r.delta == d)
                .collect();
            let ok: Vec<&RateRecord> = cell
                .iter()
                .copied()
                .filter(|r| r.status == CellStatus::Stopped)
                .collect();
            let errors: Vec<f64> = ok.iter().map(|r| r.error).collect();
            let stops: Vec<f64> = ok.iter().map(|r| r.stop_k as f64).collect();
            median_errors.push(if !cell.is_empty() && ok.len() == cell.len() {
                median(&errors)
            } else {
                None
            });
            median_stops.push(median(&stops));
            min_stops.push(ok.iter().map(|r| r.stop_k).min());
        }
        let err_points: Vec<(f64, f64)> = deltas
            .iter()
            .zip(&median_errors)
            .filter_map(|(d, e)| e.filter(|e| *e > 0.0).map(|e| (*d, e)))
            .collect();
        let k_points: Vec<(f64, f64)> = deltas
            .iter()
            .zip(median_stops.iter().zip(&min_stops))
            .filter(|(_, (_, lo))| lo.is_some_and(|lo| lo > 1))
            .filter_map(|(d, (k, _))| k.map(|k| (*d, k)))
            .collect();
        let index_slope = fit_loglog_slope(&k_points).ok().map(|f| SlopeFit {
            slope: -f.slope,
            ..f
        });
        Self {
            method: method.to_string(),
            deltas: deltas.to_vec(),
            slope: fit_loglog_slope(&err_points).ok(),
            median_errors,
            median_stops,
            min_stops,
            index_slope,
        }
    }

    pub fn median_error_at(&self, delta: f64) -> Option<f64> {
        let i = self.deltas.iter().position(|d| *d == delta)?;
        self.median_errors[i]
    }

    pub fn median_stop_at(&self, delta: f64) -> Option<f64> {
        let i = self.deltas.iter().position(|d| *d == delta)?;
        self.median_stops[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub rule: String,
    pub records: Vec<RateRecord>,
    pub methods: Vec<MethodSeries>,
}

impl RateSeries {
    pub fn method(&self, name: &str) -> Option<&MethodSeries> {
        self.methods.iter().find(|m| m.method == name)
    }

    /// Fraction of cells whose rule fired.
    pub fn completion(&self) -> f64 {
        if self.records.is_empty() {
            return 1.0;
        }
        let ok = self
            .records
            .iter()
            .filter(|r| r.status == CellStatus::Stopped)
            .count();
        ok as f64 / self.records.len() as f64
    }
}

fn run_cell(
    op: &Arc<dyn LinearOperator>,
    x_true: &[f64],
    method: &Method,
    rule: &StoppingRule,
    delta: f64,
    seed: u64,
    cap: Option<usize>,
) -> RateRecord {
    let outcome = (|| {
        let problem = add_noise(op.clone(), x_true.to_vec(), delta, seed)?;
        let mut config = SolverConfig::new(method.clone())?;
        if let Some(cap) = cap {
            config = config.with_max_iterations(cap)?;
        }
        solve(&problem, &config, rule)
    })();
    let (error, stop_k, status) = match outcome {
        Ok(r) => (
            r.error_norm().unwrap_or(f64::NAN),
            r.stop_index,
            match r.status {
                Termination::Stopped => CellStatus::Stopped,
                Termination::NotConverged => CellStatus::NotConverged,
                Termination::Breakdown => CellStatus::Breakdown,
            },
        ),
        Err(e) => (f64::NAN, 0, CellStatus::Failed(e.to_string())),
    };
    RateRecord {
        method: method.name(),
        delta,
        seed,
        error,
        stop_k,
        status,
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Solves every (method, δ, seed) cell and aggregates per method.
pub fn run_rate_experiment(config: &RateExperimentConfig) -> Result<RateSeries> {
    config.validate()?;
    let (op, x_true) = config.problem.build()?;
    let cells: Vec<(&Method, f64, u64)> = config
        .methods
        .iter()
        .flat_map(|m| {
            config
                .deltas
                .iter()
                .flat_map(move |d| config.seeds.iter().map(move |s| (m, *d, *s)))
        })
        .collect();
    let records: Vec<RateRecord> = in_pool(config.jobs, || {
        cells
            .par_iter()
            .map(|(m, d, s)| run_cell(&op, &x_true, m, &config.rule, *d, *s, config.max_iterations))
            .collect()
    })?;
    let methods = config
        .methods
        .iter()
        .map(|m| MethodSeries::from_records(&m.name(), &config.deltas, &records))
        .collect();
    Ok(RateSeries {
        rule: config.rule.name().to_string(),
        records,
        methods,
    })
}

/// Slopes of a Landweber / Nesterov / ν-method triple with the ordering check.
#[derive(Debug, Clone, PartialEq)]
pub struct SemisaturationReport {
    pub series: RateSeries,
    pub landweber: Option<f64>,
    pub nesterov: Option<f64>,
    pub nu_method: Option<f64>,
    pub tolerance: f64,
}

impl SemisaturationReport {
    /// `slope(LW) ≥ slope(Nesterov) − tol` and `slope(Nesterov) ≥ slope(ν) − tol`.
    pub fn ordering_holds(&self) -> bool {
        match (self.landweber, self.nesterov, self.nu_method) {
            (Some(l), Some(n), Some(v)) => l - n >= -self.tolerance && n - v >= -self.tolerance,
            _ => false,
        }
    }
}

/// Landweber, Nesterov(β) and ν-method on one problem; parameters deliberately
/// below the smoothness of the solution expose the different saturation levels.
pub fn run_semisaturation_experiment(
    problem: ProblemSpec,
    beta: f64,
    nu: f64,
    rule: StoppingRule,
    deltas: Vec<f64>,
    seeds: Vec<u64>,
    jobs: Option<usize>,
) -> Result<SemisaturationReport> {
    let methods = vec![
        Method::Landweber,
        Method::Nesterov(MomentumSchedule::beta(beta)?),
        Method::NuMethod { nu },
    ];
    let mut config = RateExperimentConfig::new(problem, methods.clone(), rule);
    config.deltas = deltas;
    config.seeds = seeds;
    config.jobs = jobs;
    let series = run_rate_experiment(&config)?;
    let slope = |m: &Method| series.method(&m.name()).and_then(|s| s.slope).map(|f| f.slope);
    Ok(SemisaturationReport {
        landweber: slope(&methods[0]),
        nesterov: slope(&methods[1]),
        nu_method: slope(&methods[2]),
        tolerance: 0.05,
        series,
    })
}

/// One row of the comparison tables: a method under one stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub method: String,
    pub rule: String,
    /// Median error divided by the median Nesterov oracle error, per δ.
    pub error_ratio: Vec<Option<f64>>,
    /// Median stop index, per δ.
    pub iterations: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTables {
    pub deltas: Vec<f64>,
    pub rows: Vec<TableRow>,
}

impl ComparisonTables {
    pub fn row(&self, method: &str, rule: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.method == method && r.rule == rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablesConfig {
    pub problem: ProblemSpec,
    pub beta: f64,
    pub nu: f64,
    pub tau: f64,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub jobs: Option<usize>,
}

impl Default for TablesConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::standard_diagonal(),
            beta: 4.0,
            nu: 1.0,
            tau: 1.01,
            deltas: decades(1, 5).into_iter().rev().collect(),
            seeds: (1..=10).collect(),
            jobs: None,
        }
    }
}

/// Error ratios and iteration counts for Nesterov, Landweber, ν-method and
/// CGNE under oracle and discrepancy stopping. The first row is Nesterov with
/// the oracle rule, the reference of every ratio.
pub fn run_comparison_tables(config: &TablesConfig) -> Result<(ComparisonTables, Vec<RateSeries>)> {
    let methods = vec![
        Method::Nesterov(MomentumSchedule::beta(config.beta)?),
        Method::Landweber,
        Method::NuMethod { nu: config.nu },
        Method::Cgne,
    ];
    let mut all = Vec::new();
    for rule in [StoppingRule::Oracle, StoppingRule::discrepancy(config.tau)?] {
        let mut rc = RateExperimentConfig::new(config.problem.clone(), methods.clone(), rule);
        rc.deltas = config.deltas.clone();
        rc.seeds = config.seeds.clone();
        rc.jobs = config.jobs;
        all.push(run_rate_experiment(&rc)?);
    }
    let reference = all[0].methods[0].median_errors.clone();
    let mut rows = Vec::new();
    for series in &all {
        for m in &series.methods {
            let error_ratio = m
                .median_errors
                .iter()
                .zip(&reference)
                .map(|(e, r)| match (e, r) {
                    (Some(e), Some(r)) if *r > 0.0 => Some(e / r),
                    _ => None,
                })
                .collect();
            rows.push(TableRow {
                method: m.method.clone(),
                rule: series.rule.clone(),
                error_ratio,
                iterations: m.median_stops.clone(),
            });
        }
    }
    Ok((
        ComparisonTables {
            deltas: config.deltas.clone(),
            rows,
        },
        all,
    ))
}

/// Momentum parameter matched to the smoothness of a BVP example.
pub fn bvp_optimal_beta(example: BvpExample) -> f64 {
    match example {
        BvpExample::Smooth => 9.5,
        _ => 3.5,
    }
}

/// Noise levels at which the stop index of a BVP example leaves the `k = 1`
/// floor while staying above rounding noise.
pub fn bvp_default_deltas(example: BvpExample) -> Vec<f64> {
    match example {
        BvpExample::Rough => decades(1, 5),
        BvpExample::Medium => decades(3, 8),
        BvpExample::Smooth => decades(4, 8),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpConfig {
    pub example: BvpExample,
    pub grid: usize,
    pub betas: Vec<f64>,
    pub tau: f64,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub jobs: Option<usize>,
}

impl BvpConfig {
    /// Matched β and the low setting β = 1, discrepancy principle with τ = 1.1.
    pub fn new(example: BvpExample) -> Self {
        Self {
            example,
            grid: 400,
            betas: vec![bvp_optimal_beta(example), 1.0],
            tau: 1.1,
            deltas: bvp_default_deltas(example),
            seeds: (1..=5).collect(),
            jobs: None,
        }
    }
}

/// Nesterov rates on a boundary-value example for each β in the config.
pub fn run_bvp_rates(config: &BvpConfig) -> Result<RateSeries> {
    let methods = config
        .betas
        .iter()
        .map(|b| Ok(Method::Nesterov(MomentumSchedule::beta(*b)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut rc = RateExperimentConfig::new(
        ProblemSpec::Bvp {
            grid: config.grid,
            example: config.example.id(),
        },
        methods,
        StoppingRule::discrepancy(config.tau)?,
    );
    rc.deltas = config.deltas.clone();
    rc.seeds = config.seeds.clone();
    rc.jobs = config.jobs;
    run_rate_experiment(&rc)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::Writer::from_path(path)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

/// `method, delta, seed, error, stop_k, status`
pub fn write_rates_csv(path: &Path, series: &RateSeries) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["method", "delta", "seed", "error", "stop_k", "status"])?;
    for r in &series.records {
        w.write_record([
            r.method.clone(),
            r.delta.to_string(),
            r.seed.to_string(),
            r.error.to_string(),
            r.stop_k.to_string(),
            r.status.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `method, slope, intercept, residual`
pub fn write_slopes_csv(path: &Path, series: &RateSeries) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["method", "slope", "intercept", "residual"])?;
    for m in &series.methods {
        let f = m.slope;
        w.write_record([
            m.method.clone(),
            opt(f.map(|f| f.slope)),
            opt(f.map(|f| f.intercept)),
            opt(f.map(|f| f.max_residual)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_table(path: &Path, tables: &ComparisonTables, cell: fn(&TableRow) -> &[Option<f64>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["method".to_string(), "stop".to_string()];
    header.extend(tables.deltas.iter().map(|d| format!("{d:e}")));
    w.write_record(&header)?;
    for row in &tables.rows {
        let mut rec = vec![row.method.clone(), row.rule.clone()];
        rec.extend(cell(row).iter().map(|v| opt(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Error ratios to Nesterov with oracle stopping.
pub fn write_table1_csv(path: &Path, tables: &ComparisonTables) -> Result<()> {
    write_table(path, tables, |r| &r.error_ratio)
}

/// Median iteration counts.
pub fn write_table2_csv(path: &Path, tables: &ComparisonTables) -> Result<()> {
    write_table(path, tables, |r| &r.iterations)
}

/// One whitespace-separated `delta median_error` file per method.
pub fn write_gnuplot(dir: &Path, prefix: &str, series: &RateSeries) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for m in &series.methods {
        let name: String = m
            .method
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
            .collect();
        let path = dir.join(format!("{prefix}_{}.dat", name.trim_matches('_')));
        let mut text = format!("# {} ({})\n# delta median_error\n", m.method, series.rule);
        for (d, e) in m.deltas.iter().zip(&m.median_errors) {
            if let Some(e) = e {
                text.push_str(&format!("{d:e} {e:e}\n"));
            }
        }
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Optional entries of a run config file (TOML `key = value`). Run manifests
/// use the same format, so a manifest can be fed back as a config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub command: Option<String>,
    pub problem: Option<String>,
    pub n: Option<usize>,
    pub grid: Option<usize>,
    pub example: Option<u32>,
    pub method: Option<String>,
    pub methods: Option<Vec<String>>,
    pub stop: Option<String>,
    pub tau: Option<f64>,
    pub mu: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub beta: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub max_iterations: Option<usize>,
    pub k_max: Option<usize>,
    pub points: Option<usize>,
    pub lambda_stride: Option<usize>,
    pub output: Option<String>,
    pub gnuplot: Option<bool>,
    pub jobs: Option<usize>,
}

impl ExperimentFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Entries of `other` that are set replace those of `self`.
    pub fn overridden_by(self, other: Self) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { Self { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            command, problem, n, grid, example, method, methods, stop, tau, mu, c, beta, betas, nu,
            delta, deltas, seed, seeds, max_iterations, k_max, points, lambda_stride, output,
            gnuplot, jobs
        )
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain fields serialize")
    }
}
