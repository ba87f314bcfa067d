//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numerical
//! non-termination, 4 verification failure. Every subcommand writes a
//! `manifest.toml` with the fully resolved configuration into its output
//! directory; passing it back through `--config` repeats the run.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    bvp_default_deltas, bvp_optimal_beta, decades, parse_method, run_bvp_rates,
    run_comparison_tables, run_rate_experiment, run_semisaturation_experiment, write_gnuplot,
    write_rates_csv, write_slopes_csv, write_table1_csv, write_table2_csv, BvpConfig,
    ExperimentFile, ProblemSpec, RateExperimentConfig, RateSeries, TablesConfig,
};
use crate::operators::{add_noise, BvpExample};
use crate::polynomials::{
    filter_values, rate_bound_monitor, residual_by_recursion,
    residual_closed_form, unit_grid, MomentumSchedule,
};
use crate::solvers::{solve, Method, SolverConfig, Termination};
use crate::stopping::StoppingRule;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

const DEFAULT_BETAS: [f64; 7] = [-1.0, -0.5, 0.0, 1.0, 2.0, 4.0, 9.5];

#[derive(Debug, Parser)]
#[command(
    name = "iterreg",
    version,
    about = "Nesterov-accelerated iterative regularization: polynomial checks, solves and rate experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the closed form of the residual polynomials against their recursion,
    /// the residual and filter bounds, and the rate-bound monitor.
    VerifyPoly(VerifyArgs),
    /// Run one solver on one noisy problem and write its trace.
    Solve(SolveArgs),
    /// Error-versus-noise-level sweep with slope fits.
    Rates(RatesArgs),
    /// Landweber / Nesterov / ν-method slopes with under-tuned β and ν.
    Semisat(SemisatArgs),
    /// Error-ratio and iteration-count tables for all four methods.
    Tables(TablesArgs),
    /// Discrepancy-principle rates on the boundary-value examples.
    Bvp(BvpArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML file of `key = value` entries; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// Noise levels, comma separated [default: decades 1e-1..1e-5; per example for bvp].
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// Noise seeds, comma separated [default: 1..=10].
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Worker threads for the cell grid.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write `delta median_error` files per curve.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Args, Default)]
pub struct ProblemArgs {
    /// diagonal | bvp [default: diagonal]
    #[arg(long)]
    pub problem: Option<String>,
    /// Size of the diagonal problem [default: 1000].
    #[arg(long)]
    pub n: Option<usize>,
    /// Boundary-value example 1, 2 or 3 [default: 1].
    #[arg(long)]
    pub example: Option<u32>,
    /// Interior grid points of the boundary-value problem [default: 400].
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct StopArgs {
    /// discrepancy | apriori | oracle [default: discrepancy for solve, oracle otherwise]
    #[arg(long)]
    pub stop: Option<String>,
    /// Discrepancy factor τ > 1 [default: 1.01].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Smoothness index for the a priori rule [default: 0.75].
    #[arg(long)]
    pub mu: Option<f64>,
    /// Constant of the a priori rule [default: 1].
    #[arg(long = "C")]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// β values, comma separated [default: -1,-0.5,0,1,2,4,9.5].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    /// Highest polynomial degree checked [default: 150].
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Points of the λ grid on [0, 1] [default: 1001].
    #[arg(long)]
    pub points: Option<usize>,
    /// Write every n-th λ to residuals.csv [default: 10].
    #[arg(long)]
    pub lambda_stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    /// nesterov | fista | landweber | nu | cgne (or `nesterov:<beta>`, `nu:<nu>`).
    #[arg(long)]
    pub method: Option<String>,
    /// Momentum parameter β ≥ −1 [default: 4].
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// ν > 0 of the ν-method [default: 1].
    #[arg(long)]
    pub nu: Option<f64>,
    /// Noise level δ [default: 1e-3].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Noise seed [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration cap per solve [default: 1e6 for Landweber, 1e5 otherwise].
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Methods, comma separated [default: nesterov:4,landweber,nu:1].
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Iteration cap per solve [default: 1e6 for Landweber, 1e5 otherwise].
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SemisatArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Nesterov β [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// ν-method ν [default: 0.4].
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Nesterov β [default: 4].
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// ν-method ν [default: 1].
    #[arg(long)]
    pub nu: Option<f64>,
    /// Discrepancy factor [default: 1.01].
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BvpArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Example 1 (μ = 1/8), 2 (μ = 5/8) or 3 (μ = 17/8) [default: 2].
    #[arg(long)]
    pub example: Option<u32>,
    /// Interior grid points [default: 400].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Nesterov β values, comma separated [default: matched β and 1].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub betas: Option<Vec<f64>>,
    /// Discrepancy factor [default: 1.1].
    #[arg(long)]
    pub tau: Option<f64>,
}

impl CommonArgs {
    fn flags(&self, file: &mut ExperimentFile) {
        file.output = self.out.clone();
    }

    fn base(&self) -> Result<ExperimentFile> {
        // a missing file is a usage error, not an I/O failure
        if let Some(p) = self.config.as_ref().filter(|p| !p.exists()) {
            return Err(Error::Config(format!("no config file at {}", p.display())));
        }
        match &self.config {
            Some(p) => ExperimentFile::load(p),
            None => Ok(ExperimentFile::default()),
        }
    }
}

impl SweepArgs {
    fn flags(&self, f: &mut ExperimentFile) {
        f.deltas = self.deltas.clone();
        f.seeds = self.seeds.clone();
        f.jobs = self.jobs;
        f.gnuplot = self.gnuplot.then_some(true);
    }
}

impl ProblemArgs {
    fn flags(&self, f: &mut ExperimentFile) {
        f.problem = self.problem.clone();
        f.n = self.n;
        f.example = self.example;
        f.grid = self.grid;
    }
}

impl StopArgs {
    fn flags(&self, f: &mut ExperimentFile) {
        f.stop = self.stop.clone();
        f.tau = self.tau;
        f.mu = self.mu;
        f.c = self.c;
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => EXIT_IO,
                Error::Diverged { .. } => EXIT_NOT_CONVERGED,
                _ => EXIT_USAGE,
            }
        }
    }
}

/// Entry point of the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::VerifyPoly(a) => {
            let mut flags = ExperimentFile {
                beta: None,
                betas: a.beta.clone(),
                k_max: a.k_max,
                points: a.points,
                lambda_stride: a.lambda_stride,
                ..Default::default()
            };
            a.common.flags(&mut flags);
            verify_poly(merge(&a.common, flags, "verify-poly")?)
        }
        Command::Solve(a) => {
            let mut flags = ExperimentFile {
                method: a.method.clone(),
                beta: a.beta,
                nu: a.nu,
                delta: a.delta,
                seed: a.seed,
                max_iterations: a.max_iterations,
                ..Default::default()
            };
            a.common.flags(&mut flags);
            a.problem.flags(&mut flags);
            a.stop.flags(&mut flags);
            solve_cmd(merge(&a.common, flags, "solve")?)
        }
        Command::Rates(a) => {
            let mut flags = ExperimentFile {
                methods: a.methods.clone(),
                max_iterations: a.max_iterations,
                ..Default::default()
            };
            a.common.flags(&mut flags);
            a.problem.flags(&mut flags);
            a.stop.flags(&mut flags);
            a.sweep.flags(&mut flags);
            rates_cmd(merge(&a.common, flags, "rates")?)
        }
        Command::Semisat(a) => {
            let mut flags = ExperimentFile {
                beta: a.beta,
                nu: a.nu,
                ..Default::default()
            };
            a.common.flags(&mut flags);
            a.problem.flags(&mut flags);
            a.stop.flags(&mut flags);
            a.sweep.flags(&mut flags);
            semisat_cmd(merge(&a.common, flags, "semisat")?)
        }
        Command::Tables(a) => {
            let mut flags = ExperimentFile {
                beta: a.beta,
                nu: a.nu,
                tau: a.tau,
                ..Default::default()
            };
            a.common.flags(&mut flags);
            a.problem.flags(&mut flags);
            a.sweep.flags(&mut flags);
            tables_cmd(merge(&a.common, flags, "tables")?)
        }
        Command::Bvp(a) => {
            let mut flags = ExperimentFile {
                example: a.example,
                grid: a.grid,
                betas: a.betas.clone(),
                tau: a.tau,
                ..Default::default()
            };
            a.common.flags(&mut flags);
            a.sweep.flags(&mut flags);
            bvp_cmd(merge(&a.common, flags, "bvp")?)
        }
    }
}

/// Config file entries overridden by flags. A manifest written by another
/// subcommand is rejected.
fn merge(common: &CommonArgs, flags: ExperimentFile, command: &str) -> Result<ExperimentFile> {
    let base = common.base()?;
    if let Some(other) = base.command.as_deref().filter(|c| *c != command) {
        return Err(Error::Config(format!(
            "config was written by '{other}', not '{command}'"
        )));
    }
    Ok(base.overridden_by(flags))
}

fn out_dir(f: &mut ExperimentFile) -> Result<PathBuf> {
    let dir = PathBuf::from(f.output.get_or_insert_with(|| "out".into()).as_str());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_manifest(dir: &Path, command: &str, mut f: ExperimentFile) -> Result<()> {
    f.command = Some(command.into());
    fs::write(dir.join("manifest.toml"), f.to_toml())?;
    Ok(())
}

fn resolve_problem(f: &mut ExperimentFile) -> Result<ProblemSpec> {
    match f.problem.get_or_insert_with(|| "diagonal".into()).as_str() {
        "diagonal" => {
            let n = *f.n.get_or_insert(1000);
            if n == 0 {
                return Err(Error::Config("n must be positive".into()));
            }
            Ok(ProblemSpec::Diagonal {
                n,
                spectrum_exponent: 2.0,
                solution_exponent: 4.0,
            })
        }
        "bvp" => Ok(ProblemSpec::Bvp {
            grid: *f.grid.get_or_insert(400),
            example: BvpExample::from_id(*f.example.get_or_insert(1))?.id(),
        }),
        other => Err(Error::Config(format!("unknown problem '{other}'"))),
    }
}

fn resolve_rule(f: &mut ExperimentFile, default: &str) -> Result<StoppingRule> {
    match f.stop.get_or_insert_with(|| default.into()).as_str() {
        "discrepancy" => StoppingRule::discrepancy(*f.tau.get_or_insert(1.01)),
        "apriori" => StoppingRule::apriori(*f.mu.get_or_insert(0.75), *f.c.get_or_insert(1.0)),
        "oracle" => Ok(StoppingRule::Oracle),
        other => Err(Error::Config(format!("unknown stopping rule '{other}'"))),
    }
}

fn resolve_sweep(f: &mut ExperimentFile, deltas: Vec<f64>, seeds: Vec<u64>) -> (Vec<f64>, Vec<u64>) {
    (
        f.deltas.get_or_insert(deltas).clone(),
        f.seeds.get_or_insert(seeds).clone(),
    )
}

/// Row of the verification summary.
struct BetaSummary {
    beta: f64,
    max_diff: f64,
    max_abs_r: f64,
    g_excess: f64,
    monitor: Option<(f64, f64)>,
}

fn verify_poly(mut f: ExperimentFile) -> Result<i32> {
    let betas = f.betas.get_or_insert_with(|| DEFAULT_BETAS.to_vec()).clone();
    let k_max = *f.k_max.get_or_insert(150);
    let points = *f.points.get_or_insert(1001);
    let stride = *f.lambda_stride.get_or_insert(10);
    if k_max == 0 || points < 2 || stride == 0 {
        return Err(Error::Config(
            "k-max and lambda-stride must be positive and the grid needs 2 points".into(),
        ));
    }
    for &b in &betas {
        MomentumSchedule::beta(b)?;
    }
    let dir = out_dir(&mut f)?;
    write_manifest(&dir, "verify-poly", f.clone())?;
    let grid = unit_grid(points);

    let mut csv = csv::Writer::from_path(dir.join("residuals.csv"))?;
    csv.write_record(["k", "beta", "lambda", "r_recursion", "r_closed_form", "abs_diff"])?;
    let mut first_failure: Option<String> = None;
    let mut fail = |what: &str, k: usize, beta: f64, lambda: f64, value: f64| {
        if first_failure.is_none() {
            first_failure = Some(format!("{what} at k={k}, beta={beta}, lambda={lambda} (value {value:e})"));
        }
    };
    let mut summaries = Vec::new();

    for &beta in &betas {
        let schedule = MomentumSchedule::beta(beta)?;
        let rec = residual_by_recursion(&schedule, k_max, &grid)?;
        let mut s = BetaSummary {
            beta,
            max_diff: 0.0,
            max_abs_r: 0.0,
            g_excess: f64::NEG_INFINITY,
            monitor: None,
        };
        for ev in &rec {
            for (i, (&l, &r)) in grid.iter().zip(&ev.values).enumerate() {
                s.max_abs_r = s.max_abs_r.max(r.abs());
                if r.abs() > 1.0 + 1e-12 {
                    fail("|r_k| <= 1", ev.k, beta, l, r);
                }
                if ev.k == 0 {
                    continue;
                }
                let closed = residual_closed_form(ev.k, l, beta)?;
                let diff = (r - closed).abs();
                s.max_diff = s.max_diff.max(diff);
                if !(diff <= 1e-9) {
                    fail("closed form identity", ev.k, beta, l, diff);
                }
                if i % stride == 0 || i + 1 == grid.len() {
                    csv.write_record([
                        ev.k.to_string(),
                        beta.to_string(),
                        l.to_string(),
                        r.to_string(),
                        closed.to_string(),
                        diff.to_string(),
                    ])?;
                }
            }
        }
        let g: Vec<Vec<f64>> = grid
            .iter()
            .map(|l| filter_values(&schedule, k_max, *l))
            .collect::<Result<_>>()?;
        for k in 1..=k_max {
            let kf = k as f64;
            let bound = (kf + 1.0) / 2.0 + (kf - 1.0) * (kf - 1.0);
            for (l, gl) in grid.iter().zip(&g) {
                let excess = gl[k].abs() - bound;
                s.g_excess = s.g_excess.max(excess);
                if excess > 0.0 {
                    fail("|g_k| <= (k+1)/2 + (k-1)^2", k, beta, *l, gl[k]);
                }
            }
        }
        if beta > -1.0 {
            let m = rate_bound_monitor(k_max, beta, &grid)?;
            let half = (k_max / 2).max(1);
            let early = m[..half].iter().cloned().fold(0.0, f64::max);
            let late = m[half..].iter().cloned().fold(0.0, f64::max);
            if late > 2.0 * early || !late.is_finite() {
                let k = half + 1 + m[half..].iter().position(|v| *v == late).unwrap_or(0);
                fail("rate-bound monitor growth", k, beta, f64::NAN, late);
            }
            s.monitor = Some((early, late));
        }
        summaries.push(s);
    }
    csv.flush()?;

    let mut text = String::from("beta,max_abs_diff,max_abs_r,max_g_excess,monitor_first_half,monitor_second_half\n");
    for s in &summaries {
        let (a, b) = s
            .monitor
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .unwrap_or(("NA".into(), "NA".into()));
        text.push_str(&format!(
            "{},{:e},{},{},{},{}\n",
            s.beta, s.max_diff, s.max_abs_r, s.g_excess, a, b
        ));
    }
    fs::write(dir.join("summary.csv"), &text)?;
    let worst = summaries.iter().map(|s| s.max_diff).fold(0.0, f64::max);
    println!("max |recursion - closed form| = {worst:e} over k <= {k_max}, {points} lambda points");
    print!("{text}");
    Ok(match first_failure {
        Some(msg) => {
            eprintln!("verification failed: {msg}");
            EXIT_VERIFY
        }
        None => {
            println!("verify-poly: PASS");
            EXIT_OK
        }
    })
}

fn resolve_method(f: &mut ExperimentFile) -> Result<Method> {
    let name = f.method.get_or_insert_with(|| "nesterov".into()).clone();
    if name.contains(':') {
        return parse_method(&name);
    }
    let method = match name.as_str() {
        "nesterov" => Method::Nesterov(MomentumSchedule::beta(*f.beta.get_or_insert(4.0))?),
        "nu" | "nu-method" => Method::NuMethod {
            nu: *f.nu.get_or_insert(1.0),
        },
        other => parse_method(other)?,
    };
    SolverConfig::new(method.clone())?;
    Ok(method)
}

fn solve_cmd(mut f: ExperimentFile) -> Result<i32> {
    let problem_spec = resolve_problem(&mut f)?;
    let method = resolve_method(&mut f)?;
    let rule = resolve_rule(&mut f, "discrepancy")?;
    let delta = *f.delta.get_or_insert(1e-3);
    let seed = *f.seed.get_or_insert(1);
    let mut config = SolverConfig::new(method)?;
    if let Some(cap) = f.max_iterations {
        config = config.with_max_iterations(cap)?;
    }
    // reject incoherent combinations before touching the file system
    config.monitor(&rule, delta)?;

    let dir = out_dir(&mut f)?;
    let (op, x_true) = problem_spec.build()?;
    let problem = add_noise(Arc::clone(&op), x_true, delta, seed)?;
    write_manifest(&dir, "solve", f)?;
    let result = solve(&problem, &config, &rule)?;
    result.trace.write_csv(fs::File::create(dir.join("trace.csv"))?)?;

    let mut line = format!(
        "method={} stop={} stop_k={} residual={:e}",
        config.method.name(),
        rule.name(),
        result.stop_index,
        result.residual_norm()
    );
    if let Some(e) = result.error_norm() {
        line.push_str(&format!(" error={e:e}"));
    }
    line.push_str(&format!(" status={:?}", result.status));
    println!("{line}");
    std::io::stdout().flush()?;
    Ok(match result.status {
        Termination::Stopped => EXIT_OK,
        Termination::Breakdown => {
            eprintln!("CGNE breakdown at k = {}", result.stop_index);
            EXIT_OK
        }
        Termination::NotConverged => {
            eprintln!("stopping rule did not fire within {} iterations", config.max_iterations);
            EXIT_NOT_CONVERGED
        }
    })
}

fn emit_series(dir: &Path, series: &RateSeries, gnuplot: bool, prefix: &str) -> Result<()> {
    write_rates_csv(&dir.join("rates.csv"), series)?;
    write_slopes_csv(&dir.join("slopes.csv"), series)?;
    if gnuplot {
        write_gnuplot(dir, prefix, series)?;
    }
    for m in &series.methods {
        let slope = m
            .slope
            .map(|s| format!("{:.4}", s.slope))
            .unwrap_or_else(|| "NA".into());
        let index = m
            .index_slope
            .map(|s| format!("{:.4}", s.slope))
            .unwrap_or_else(|| "NA".into());
        println!("{:<24} {:<12} slope {slope}  index slope {index}", m.method, series.rule);
    }
    Ok(())
}

fn completion_code(series: &[&RateSeries]) -> i32 {
    let total: usize = series.iter().map(|s| s.records.len()).sum();
    let done: f64 = series
        .iter()
        .map(|s| s.completion() * s.records.len() as f64)
        .sum();
    let fraction = if total == 0 { 1.0 } else { done / total as f64 };
    if fraction < 0.9 {
        eprintln!("only {:.0}% of cells completed", 100.0 * fraction);
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    }
}

fn rates_cmd(mut f: ExperimentFile) -> Result<i32> {
    let problem = resolve_problem(&mut f)?;
    let rule = resolve_rule(&mut f, "oracle")?;
    let names = f
        .methods
        .get_or_insert_with(|| vec!["nesterov:4".into(), "landweber".into(), "nu:1".into()])
        .clone();
    let methods = names.iter().map(|m| parse_method(m)).collect::<Result<Vec<_>>>()?;
    let (deltas, seeds) = resolve_sweep(&mut f, decades(1, 5), (1..=10).collect());
    let mut config = RateExperimentConfig::new(problem, methods, rule);
    config.deltas = deltas;
    config.seeds = seeds;
    config.max_iterations = f.max_iterations;
    config.jobs = f.jobs;
    config.validate()?;
    let dir = out_dir(&mut f)?;
    let gnuplot = f.gnuplot.unwrap_or(false);
    write_manifest(&dir, "rates", f)?;
    let series = run_rate_experiment(&config)?;
    emit_series(&dir, &series, gnuplot, "rates")?;
    Ok(completion_code(&[&series]))
}

fn semisat_cmd(mut f: ExperimentFile) -> Result<i32> {
    let problem = resolve_problem(&mut f)?;
    let rule = resolve_rule(&mut f, "oracle")?;
    let beta = *f.beta.get_or_insert(0.0);
    let nu = *f.nu.get_or_insert(0.4);
    let (deltas, seeds) = resolve_sweep(&mut f, decades(1, 5), (1..=10).collect());
    let dir = out_dir(&mut f)?;
    let gnuplot = f.gnuplot.unwrap_or(false);
    let jobs = f.jobs;
    write_manifest(&dir, "semisat", f)?;
    let report = run_semisaturation_experiment(problem, beta, nu, rule, deltas, seeds, jobs)?;
    emit_series(&dir, &report.series, gnuplot, "semisat")?;
    let verdict = if report.ordering_holds() { "PASS" } else { "FAIL" };
    println!("LW ≥ Nesterov ≥ nu: {verdict}");
    let code = completion_code(&[&report.series]);
    Ok(if code != EXIT_OK {
        code
    } else if report.ordering_holds() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

fn tables_cmd(mut f: ExperimentFile) -> Result<i32> {
    let defaults = TablesConfig::default();
    let problem = resolve_problem(&mut f)?;
    let (deltas, seeds) = resolve_sweep(&mut f, defaults.deltas.clone(), defaults.seeds.clone());
    let config = TablesConfig {
        problem,
        beta: *f.beta.get_or_insert(defaults.beta),
        nu: *f.nu.get_or_insert(defaults.nu),
        tau: *f.tau.get_or_insert(defaults.tau),
        deltas,
        seeds,
        jobs: f.jobs,
    };
    let dir = out_dir(&mut f)?;
    write_manifest(&dir, "tables", f)?;
    let (tables, series) = run_comparison_tables(&config)?;
    write_table1_csv(&dir.join("table1.csv"), &tables)?;
    write_table2_csv(&dir.join("table2.csv"), &tables)?;
    let head: Vec<String> = tables.deltas.iter().map(|d| format!("{d:>10.0e}")).collect();
    println!("{:<24} {:<12} {}", "method", "stop", head.join(" "));
    for (title, pick) in [("error ratio", 0), ("iterations", 1)] {
        println!("-- {title}");
        for row in &tables.rows {
            let cells = if pick == 0 { &row.error_ratio } else { &row.iterations };
            let cells: Vec<String> = cells
                .iter()
                .map(|v| match v {
                    Some(v) if pick == 0 => format!("{v:>10.3}"),
                    Some(v) => format!("{v:>10}"),
                    None => format!("{:>10}", "NA"),
                })
                .collect();
            println!("{:<24} {:<12} {}", row.method, row.rule, cells.join(" "));
        }
    }
    Ok(completion_code(&series.iter().collect::<Vec<_>>()))
}

fn bvp_cmd(mut f: ExperimentFile) -> Result<i32> {
    let example = BvpExample::from_id(*f.example.get_or_insert(2))?;
    let mut config = BvpConfig::new(example);
    config.grid = *f.grid.get_or_insert(config.grid);
    config.betas = f.betas.get_or_insert(config.betas.clone()).clone();
    config.tau = *f.tau.get_or_insert(config.tau);
    let (deltas, seeds) = resolve_sweep(&mut f, bvp_default_deltas(example), config.seeds.clone());
    config.deltas = deltas;
    config.seeds = seeds;
    config.jobs = f.jobs;
    let dir = out_dir(&mut f)?;
    let gnuplot = f.gnuplot.unwrap_or(false);
    write_manifest(&dir, "bvp", f)?;
    let series = run_bvp_rates(&config)?;
    emit_series(&dir, &series, gnuplot, &format!("bvp{}", example.id()))?;
    let mu = example.mu();
    println!(
        "example {} (mu = {mu}): optimal slope {:.4}, matched beta {}",
        example.id(),
        2.0 * mu / (2.0 * mu + 1.0),
        bvp_optimal_beta(example)
    );
    Ok(completion_code(&[&series]))
}
