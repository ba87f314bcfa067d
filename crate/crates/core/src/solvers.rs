//! Nesterov, Landweber, ν-method and CGNE iterations with stopping rules.

use std::io::Write;

use crate::error::{Error, Result};
use crate::operators::{InverseProblem, LinearOperator};
use crate::polynomials::{Alphas, MomentumSchedule};
use crate::stopping::{apriori_stop, apriori_stop_landweber, Decision, StopMonitor, StoppingRule};
use crate::vector::{dist, dot};

/// Slack on `‖A*A‖ ≤ 1` tolerated from rounding in the operator norm estimate.
const NORM_TOLERANCE: f64 = 1e-12;

static ZERO_MOMENTUM: MomentumSchedule = MomentumSchedule::Zero;

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Nesterov(MomentumSchedule),
    Landweber,
    NuMethod { nu: f64 },
    Cgne,
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Self::Nesterov(MomentumSchedule::Beta(b)) => format!("nesterov(beta={b})"),
            Self::Nesterov(MomentumSchedule::Fista) => "nesterov(fista)".into(),
            Self::Nesterov(_) => "nesterov(sequence)".into(),
            Self::Landweber => "landweber".into(),
            Self::NuMethod { nu } => format!("nu-method(nu={nu})"),
            Self::Cgne => "cgne".into(),
        }
    }

    fn default_cap(&self) -> usize {
        match self {
            Self::Landweber => 1_000_000,
            _ => 100_000,
        }
    }
}

/// Which iterates a run keeps besides the returned solution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum IterateRetention {
    #[default]
    Final,
    All,
    Checkpoints(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iterations: usize,
    /// Record `‖x_k − x†‖` when `x†` is known.
    pub trace_errors: bool,
    pub retention: IterateRetention,
}

impl SolverConfig {
    /// Checked constructor with the method's default iteration cap.
    pub fn new(method: Method) -> Result<Self> {
        match &method {
            Method::Nesterov(MomentumSchedule::Beta(b)) => {
                MomentumSchedule::beta(*b)?;
            }
            Method::NuMethod { nu } if !(*nu > 0.0 && nu.is_finite()) => {
                return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
            }
            _ => {}
        }
        Ok(Self {
            max_iterations: method.default_cap(),
            method,
            trace_errors: true,
            retention: IterateRetention::Final,
        })
    }

    pub fn nesterov(beta: f64) -> Result<Self> {
        Self::new(Method::Nesterov(MomentumSchedule::beta(beta)?))
    }

    pub fn landweber() -> Self {
        Self::new(Method::Landweber).expect("always valid")
    }

    pub fn nu_method(nu: f64) -> Result<Self> {
        Self::new(Method::NuMethod { nu })
    }

    pub fn cgne() -> Self {
        Self::new(Method::Cgne).expect("always valid")
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        self.max_iterations = max_iterations;
        Ok(self)
    }

    pub fn with_trace_errors(mut self, on: bool) -> Self {
        self.trace_errors = on;
        self
    }

    pub fn with_retention(mut self, retention: IterateRetention) -> Self {
        self.retention = retention;
        self
    }

    /// Online monitor for `rule` at noise level `delta`.
    pub fn monitor(&self, rule: &StoppingRule, delta: f64) -> Result<StopMonitor> {
        match *rule {
            StoppingRule::Discrepancy { tau } => StopMonitor::discrepancy(delta, tau),
            StoppingRule::Oracle => Ok(StopMonitor::oracle()),
            StoppingRule::APriori { mu, c } => {
                let index = match &self.method {
                    Method::Nesterov(MomentumSchedule::Beta(beta)) => {
                        apriori_stop(delta, mu, *beta, c)?
                    }
                    Method::NuMethod { nu } => apriori_stop(delta, mu, 4.0 * nu - 1.0, c)?,
                    Method::Landweber => apriori_stop_landweber(delta, mu, c)?,
                    other => {
                        return Err(Error::RuleNotApplicable(format!(
                            "a priori stopping is not defined for {}",
                            other.name()
                        )))
                    }
                };
                Ok(StopMonitor::fixed(index))
            }
        }
    }
}

/// Per-iteration record of a run, indexed `k = 0, …, K`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterateTrace {
    pub residual_norms: Vec<f64>,
    pub error_norms: Option<Vec<f64>>,
    /// `(k, x_k)` pairs kept by the retention policy.
    pub iterates: Vec<(usize, Vec<f64>)>,
}

impl IterateTrace {
    /// Index of the last recorded iterate.
    pub fn last_index(&self) -> usize {
        self.residual_norms.len().saturating_sub(1)
    }

    /// CSV with columns `k, residual_norm, error_norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "residual_norm", "error_norm"])?;
        for (k, r) in self.residual_norms.iter().enumerate() {
            let e = self
                .error_norms
                .as_ref()
                .map(|e| e[k].to_string())
                .unwrap_or_default();
            w.write_record([k.to_string(), r.to_string(), e])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The stopping rule fired.
    Stopped,
    /// The iteration cap was reached first.
    NotConverged,
    /// CGNE produced a zero search direction.
    Breakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: Vec<f64>,
    pub stop_index: usize,
    pub trace: IterateTrace,
    pub status: Termination,
}

impl SolveResult {
    pub fn residual_norm(&self) -> f64 {
        self.trace.residual_norms[self.stop_index]
    }

    pub fn error_norm(&self) -> Option<f64> {
        self.trace.error_norms.as_ref().map(|e| e[self.stop_index])
    }
}

/// `(μ_j, ω_j)` of the ν-method step `x_j = x_{j−1} + μ_j (x_{j−1} − x_{j−2}) +
/// ω_j A*(y − A x_{j−1})`, `j ≥ 1`.
pub fn nu_coefficients(j: usize, nu: f64) -> (f64, f64) {
    let k = j as f64;
    // at ν = 1/2 the general μ_1 is 0/0
    let mu = if j <= 1 {
        0.0
    } else {
        (k - 1.0) * (2.0 * k - 3.0) * (2.0 * k + 2.0 * nu - 1.0)
            / ((k + 2.0 * nu - 1.0) * (2.0 * k + 4.0 * nu - 1.0) * (2.0 * k + 2.0 * nu - 3.0))
    };
    let omega = 4.0 * (2.0 * k + 2.0 * nu - 1.0) * (k + nu - 1.0)
        / ((k + 2.0 * nu - 1.0) * (2.0 * k + 4.0 * nu - 1.0));
    (mu, omega)
}

#[derive(Debug)]
enum Update<'a> {
    Momentum(Alphas<'a>),
    Nu { nu: f64 },
    Cg(CgState),
}

#[derive(Debug)]
struct CgState {
    /// data residual `y − A x`, updated recursively
    r: Vec<f64>,
    /// normal-equation residual `A* r`
    s: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    gamma: f64,
}

/// One iteration advanced step by step, exposing `x_k` and `A x_k`.
#[derive(Debug)]
pub struct Iteration<'a> {
    op: &'a dyn LinearOperator,
    y: &'a [f64],
    update: Update<'a>,
    k: usize,
    x: Vec<f64>,
    x_prev: Vec<f64>,
    ax: Vec<f64>,
    ax_prev: Vec<f64>,
    sol_work: Vec<f64>,
    data_work: Vec<f64>,
}

impl<'a> Iteration<'a> {
    /// Starts at `x_0 = 0`. Fails if `‖A*A‖ > 1` or `y` has the wrong length.
    pub fn new(op: &'a dyn LinearOperator, y: &'a [f64], method: &'a Method) -> Result<Self> {
        if y.len() != op.data_dim() {
            return Err(Error::DimensionMismatch {
                expected: op.data_dim(),
                got: y.len(),
            });
        }
        if !(op.norm_bound() <= 1.0 + NORM_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "iterations need ||A*A|| <= 1, operator bound is {}",
                op.norm_bound()
            )));
        }
        let (n, m) = (op.solution_dim(), op.data_dim());
        let update = match method {
            Method::Nesterov(s) => Update::Momentum(s.alphas()),
            Method::Landweber => Update::Momentum(ZERO_MOMENTUM.alphas()),
            Method::NuMethod { nu } => {
                if !(*nu > 0.0) {
                    return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
                }
                Update::Nu { nu: *nu }
            }
            Method::Cgne => {
                let s = op.apply_adjoint_vec(y);
                Update::Cg(CgState {
                    r: y.to_vec(),
                    gamma: dot(&s, &s),
                    p: s.clone(),
                    s,
                    q: vec![0.0; m],
                })
            }
        };
        Ok(Self {
            op,
            y,
            update,
            k: 0,
            x: vec![0.0; n],
            x_prev: vec![0.0; n],
            ax: vec![0.0; m],
            ax_prev: vec![0.0; m],
            sol_work: vec![0.0; n],
            data_work: vec![0.0; m],
        })
    }

    pub fn index(&self) -> usize {
        self.k
    }

    pub fn iterate(&self) -> &[f64] {
        &self.x
    }

    /// `A x_k`
    pub fn image(&self) -> &[f64] {
        &self.ax
    }

    /// `‖A x_k − y‖`
    pub fn residual_norm(&self) -> f64 {
        dist(&self.ax, self.y)
    }

    /// Moves to `x_{k+1}`. Returns `Ok(false)` on a CGNE breakdown, leaving the
    /// iterate unchanged.
    pub fn advance(&mut self) -> Result<bool> {
        match &mut self.update {
            Update::Momentum(alphas) => {
                let alpha = if self.k == 0 {
                    0.0
                } else {
                    alphas.next().ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "momentum sequence exhausted at k = {}",
                            self.k
                        ))
                    })?
                };
                // residual y − A z_k, with A z_k combined from stored images
                for i in 0..self.y.len() {
                    let az = self.ax[i] + alpha * (self.ax[i] - self.ax_prev[i]);
                    self.data_work[i] = self.y[i] - az;
                }
                self.op.apply_adjoint(&self.data_work, &mut self.sol_work);
                for i in 0..self.x.len() {
                    let z = self.x[i] + alpha * (self.x[i] - self.x_prev[i]);
                    self.sol_work[i] += z;
                }
                self.rotate();
            }
            Update::Nu { nu } => {
                let (mu, omega) = nu_coefficients(self.k + 1, *nu);
                for i in 0..self.y.len() {
                    self.data_work[i] = self.y[i] - self.ax[i];
                }
                self.op.apply_adjoint(&self.data_work, &mut self.sol_work);
                for i in 0..self.x.len() {
                    self.sol_work[i] = self.x[i]
                        + mu * (self.x[i] - self.x_prev[i])
                        + omega * self.sol_work[i];
                }
                self.rotate();
            }
            Update::Cg(cg) => {
                self.op.apply(&cg.p, &mut cg.q);
                let qq = dot(&cg.q, &cg.q);
                if qq == 0.0 || cg.gamma == 0.0 || !qq.is_finite() {
                    return Ok(false);
                }
                let a = cg.gamma / qq;
                for (xi, pi) in self.x.iter_mut().zip(&cg.p) {
                    *xi += a * pi;
                }
                for (ri, qi) in cg.r.iter_mut().zip(&cg.q) {
                    *ri -= a * qi;
                }
                self.op.apply_adjoint(&cg.r, &mut cg.s);
                let gamma = dot(&cg.s, &cg.s);
                let b = gamma / cg.gamma;
                for (pi, si) in cg.p.iter_mut().zip(&cg.s) {
                    *pi = si + b * *pi;
                }
                cg.gamma = gamma;
                std::mem::swap(&mut self.ax, &mut self.ax_prev);
                self.op.apply(&self.x, &mut self.ax);
            }
        }
        self.k += 1;
        Ok(true)
    }

    /// `sol_work` holds `x_{k+1}`; shift the two-step history and form its image.
    fn rotate(&mut self) {
        std::mem::swap(&mut self.x_prev, &mut self.x);
        std::mem::swap(&mut self.x, &mut self.sol_work);
        std::mem::swap(&mut self.ax_prev, &mut self.ax);
        self.op.apply(&self.x, &mut self.ax);
    }
}

/// Runs `config.method` on `problem` until `rule` fires or the cap is reached.
///
/// Under the oracle rule the run continues past the best index until the error
/// has not improved for [`crate::stopping::oracle_patience`] steps; reaching the
/// cap first returns the best iterate seen, flagged `NotConverged`.
pub fn solve(problem: &InverseProblem, config: &SolverConfig, rule: &StoppingRule) -> Result<SolveResult> {
    if config.max_iterations == 0 {
        return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
    }
    let mut monitor = config.monitor(rule, problem.delta)?;
    let truth = problem.x_true.as_deref();
    if monitor.needs_errors() && truth.is_none() {
        return Err(Error::RuleNotApplicable(
            "oracle rule needs the exact solution".into(),
        ));
    }
    let track_errors = truth.is_some() && (config.trace_errors || monitor.needs_errors());
    let op = problem.operator.as_ref();
    let mut it = Iteration::new(op, &problem.y_noisy, &config.method)?;
    let mut trace = IterateTrace {
        residual_norms: Vec::new(),
        error_norms: track_errors.then(Vec::new),
        iterates: Vec::new(),
    };
    let mut best: Option<Vec<f64>> = None;

    loop {
        let k = it.index();
        let residual = it.residual_norm();
        if !residual.is_finite() {
            return Err(Error::Diverged { k });
        }
        trace.residual_norms.push(residual);
        let error = match (track_errors, truth) {
            (true, Some(xt)) => {
                let e = dist(it.iterate(), xt);
                trace.error_norms.as_mut().expect("tracked").push(e);
                Some(e)
            }
            _ => None,
        };
        let keep = match &config.retention {
            IterateRetention::Final => false,
            IterateRetention::All => true,
            IterateRetention::Checkpoints(ks) => ks.contains(&k),
        };
        if keep {
            trace.iterates.push((k, it.iterate().to_vec()));
        }
        let decision = monitor.observe(k, residual, error)?;
        if monitor.best() == Some(k) {
            match &mut best {
                Some(b) => b.copy_from_slice(it.iterate()),
                None => best = Some(it.iterate().to_vec()),
            }
        }
        if let Decision::Stop(ks) = decision {
            let solution = if ks == k {
                it.iterate().to_vec()
            } else {
                best.take().expect("best iterate retained")
            };
            return Ok(SolveResult {
                solution,
                stop_index: ks,
                trace,
                status: Termination::Stopped,
            });
        }
        let status = if k >= config.max_iterations {
            Some(Termination::NotConverged)
        } else if !it.advance()? {
            Some(Termination::Breakdown)
        } else {
            None
        };
        if let Some(status) = status {
            return Ok(match (monitor.best(), best) {
                (Some(kb), Some(xb)) => SolveResult {
                    solution: xb,
                    stop_index: kb,
                    trace,
                    status,
                },
                _ => SolveResult {
                    solution: it.iterate().to_vec(),
                    stop_index: k,
                    trace,
                    status,
                },
            });
        }
    }
}

fn solve_checked(
    problem: &InverseProblem,
    config: &SolverConfig,
    rule: &StoppingRule,
    ok: fn(&Method) -> bool,
    what: &str,
) -> Result<SolveResult> {
    if !ok(&config.method) {
        return Err(Error::InvalidParameter(format!(
            "{what} requested with method {}",
            config.method.name()
        )));
    }
    solve(problem, config, rule)
}

pub fn nesterov_solve(problem: &InverseProblem, config: &SolverConfig, rule: &StoppingRule) -> Result<SolveResult> {
    solve_checked(problem, config, rule, |m| matches!(m, Method::Nesterov(_)), "nesterov_solve")
}

pub fn landweber_solve(problem: &InverseProblem, config: &SolverConfig, rule: &StoppingRule) -> Result<SolveResult> {
    solve_checked(problem, config, rule, |m| matches!(m, Method::Landweber), "landweber_solve")
}

pub fn nu_method_solve(problem: &InverseProblem, config: &SolverConfig, rule: &StoppingRule) -> Result<SolveResult> {
    solve_checked(problem, config, rule, |m| matches!(m, Method::NuMethod { .. }), "nu_method_solve")
}

pub fn cgne_solve(problem: &InverseProblem, config: &SolverConfig, rule: &StoppingRule) -> Result<SolveResult> {
    solve_checked(problem, config, rule, |m| matches!(m, Method::Cgne), "cgne_solve")
}

/// `‖A x − y‖` recomputed from scratch.
pub fn residual_of(op: &dyn LinearOperator, x: &[f64], y: &[f64]) -> f64 {
    dist(&op.apply_vec(x), y)
}
