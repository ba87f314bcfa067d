//! Linear forward operators and test-problem construction.
//!
//! Every solver in this crate assumes `‖A*A‖ ≤ 1`. Operators certify that
//! through [`LinearOperator::norm_bound`]; [`DenseOperator`] rescales its
//! matrix at construction so the bound holds.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::vector::{dist, dot, norm, scale};

/// Relative slack applied when a matrix is rescaled to unit norm.
const NORM_SLACK: f64 = 1e-6;

/// A bounded linear map `A: X → Y` between finite-dimensional Hilbert spaces.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    /// Dimension of the solution space `X`.
    fn solution_dim(&self) -> usize;

    /// Dimension of the data space `Y`.
    fn data_dim(&self) -> usize;

    /// `out ← A x`
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// `out ← A* y`
    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]);

    /// Certified upper bound on `‖A*A‖`.
    fn norm_bound(&self) -> f64;

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.data_dim()];
        self.apply(x, &mut out);
        out
    }

    fn apply_adjoint_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.solution_dim()];
        self.apply_adjoint(y, &mut out);
        out
    }
}

/// `A = diag(σ_1, …, σ_n)` acting coordinatewise.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    singular_values: Vec<f64>,
    norm_sq: f64,
}

impl DiagonalOperator {
    pub fn new(singular_values: Vec<f64>) -> Result<Self> {
        if singular_values.is_empty() {
            return Err(Error::InvalidParameter("empty spectrum".into()));
        }
        if let Some(s) = singular_values.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "singular values must be positive and finite, found {s}"
            )));
        }
        let norm_sq = singular_values.iter().fold(0.0_f64, |m, s| m.max(s * s));
        if norm_sq > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "max σ² = {norm_sq} exceeds 1"
            )));
        }
        Ok(Self {
            singular_values,
            norm_sq,
        })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }
}

impl LinearOperator for DiagonalOperator {
    fn solution_dim(&self) -> usize {
        self.singular_values.len()
    }

    fn data_dim(&self) -> usize {
        self.singular_values.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for ((o, xi), s) in out.iter_mut().zip(x).zip(&self.singular_values) {
            *o = s * xi;
        }
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.apply(y, out)
    }

    fn norm_bound(&self) -> f64 {
        self.norm_sq
    }
}

/// Row-major dense matrix with `rows = data_dim`, `cols = solution_dim`.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    scale: f64,
    norm_bound: f64,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseOperator")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("scale", &self.scale)
            .field("norm_bound", &self.norm_bound)
            .finish()
    }
}

impl DenseOperator {
    /// Wraps a matrix, scaling it down only if its estimated `‖A*A‖` exceeds 1.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::build(rows, cols, data, false)
    }

    /// Wraps a matrix and rescales it so that `‖A‖ = 1/(1 + 1e-6)`.
    pub fn normalized(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::build(rows, cols, data, true)
    }

    fn build(rows: usize, cols: usize, data: Vec<f64>, always: bool) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let mut op = Self {
            rows,
            cols,
            data,
            scale: 1.0,
            norm_bound: f64::INFINITY,
        };
        let est = power_iteration_norm(&op, 1000);
        if est == 0.0 {
            return Err(Error::InvalidParameter("zero matrix".into()));
        }
        let target = 1.0 / (1.0 + NORM_SLACK);
        let factor = if always || est > target * target {
            target / est.sqrt()
        } else {
            1.0
        };
        scale(factor, &mut op.data);
        op.scale = factor;
        op.norm_bound = (est * factor * factor).min(1.0);
        Ok(op)
    }

    /// Factor the input matrix was multiplied by at construction.
    pub fn scale_factor(&self) -> f64 {
        self.scale
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.data
    }
}

impl LinearOperator for DenseOperator {
    fn solution_dim(&self) -> usize {
        self.cols
    }

    fn data_dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (yi, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += yi * a;
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        self.norm_bound
    }
}

/// Estimates `‖A*A‖` by power iteration on `A*A` from a fixed start vector.
pub fn power_iteration_norm(op: &dyn LinearOperator, max_iter: usize) -> f64 {
    let n = op.solution_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| 1.0 + 0.1 * rng.random::<f64>()).collect();
    let nv = norm(&v);
    scale(1.0 / nv, &mut v);
    let mut av = vec![0.0; op.data_dim()];
    let mut w = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..max_iter {
        op.apply(&v, &mut av);
        op.apply_adjoint(&av, &mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let prev = est;
        est = nw;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (est - prev).abs() <= 1e-15 * est {
            break;
        }
    }
    est
}

/// Largest relative adjoint defect `|⟨Ax, y⟩ − ⟨x, A*y⟩| / (‖x‖‖y‖)` over
/// `pairs` random vector pairs.
pub fn adjoint_defect(op: &dyn LinearOperator, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..pairs {
        let x: Vec<f64> = (0..op.solution_dim())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let y: Vec<f64> = (0..op.data_dim())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let lhs = dot(&op.apply_vec(&x), &y);
        let rhs = dot(&x, &op.apply_adjoint_vec(&y));
        worst = worst.max((lhs - rhs).abs() / (norm(&x) * norm(&y)));
    }
    worst
}

/// Operator, exact solution and noisy data with a known noise level.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    pub operator: Arc<dyn LinearOperator>,
    /// `x†`; `None` when the exact solution is withheld.
    pub x_true: Option<Vec<f64>>,
    pub y_exact: Vec<f64>,
    pub y_noisy: Vec<f64>,
    /// `‖y_noisy − y_exact‖`
    pub delta: f64,
}

impl InverseProblem {
    /// Builds a problem from explicit data. `delta` is measured, not trusted.
    pub fn from_data(
        operator: Arc<dyn LinearOperator>,
        x_true: Option<Vec<f64>>,
        y_exact: Vec<f64>,
        y_noisy: Vec<f64>,
    ) -> Result<Self> {
        check_len(operator.data_dim(), y_exact.len())?;
        check_len(operator.data_dim(), y_noisy.len())?;
        if let Some(x) = &x_true {
            check_len(operator.solution_dim(), x.len())?;
        }
        let delta = dist(&y_noisy, &y_exact);
        Ok(Self {
            operator,
            x_true,
            y_exact,
            y_noisy,
            delta,
        })
    }

    /// Same problem with `x†` hidden from the solvers.
    pub fn without_truth(mut self) -> Self {
        self.x_true = None;
        self
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `σ_n = n^(−spectrum_exponent)`, `x†_n = (±1) n^(−solution_exponent)` with the
/// sign `(−1)^n` when `alternating` is set.
pub fn make_diagonal_problem(
    n_max: usize,
    spectrum_exponent: f64,
    solution_exponent: f64,
    alternating: bool,
) -> Result<(DiagonalOperator, Vec<f64>)> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if !(spectrum_exponent > 0.0) || !spectrum_exponent.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spectrum exponent must be positive, got {spectrum_exponent}"
        )));
    }
    if !solution_exponent.is_finite() {
        return Err(Error::InvalidParameter("non-finite solution exponent".into()));
    }
    let sigma = (1..=n_max)
        .map(|n| (n as f64).powf(-spectrum_exponent))
        .collect();
    let x = (1..=n_max)
        .map(|n| {
            let sign = if alternating && n % 2 == 1 { -1.0 } else { 1.0 };
            sign * (n as f64).powf(-solution_exponent)
        })
        .collect();
    Ok((DiagonalOperator::new(sigma)?, x))
}

/// Smoothness classes for the boundary-value test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvpExample {
    /// `μ = 1/8`
    Rough,
    /// `μ = 5/8`
    Medium,
    /// `μ = 17/8`
    Smooth,
}

impl BvpExample {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Self::Rough),
            2 => Ok(Self::Medium),
            3 => Ok(Self::Smooth),
            _ => Err(Error::InvalidParameter(format!(
                "unknown BVP example {id}; expected 1, 2 or 3"
            ))),
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Self::Rough => 1,
            Self::Medium => 2,
            Self::Smooth => 3,
        }
    }

    /// Source-condition index `μ` of the exact solution.
    pub fn mu(self) -> f64 {
        match self {
            Self::Rough => 0.125,
            Self::Medium => 0.625,
            Self::Smooth => 2.125,
        }
    }

    fn omega_seed(self) -> u64 {
        0xB0B0_0000 + u64::from(self.id())
    }
}

/// Discrete solution operator of `−u'' = f`, `u(0) = u(1) = 0`, on `grid_size`
/// interior points, together with an exact solution satisfying a source
/// condition with the example's index `μ`.
///
/// The exact solution is built spectrally as `x† = c·(A*A)^μ ω` where
/// `ω_j = ±j^(−1/2)` in the sine eigenbasis (random signs from a fixed seed)
/// and `c` is chosen so that `‖A x†‖ = 1`; noise levels are therefore relative.
pub fn make_bvp_problem(grid_size: usize, example_id: u32) -> Result<(DenseOperator, Vec<f64>)> {
    let example = BvpExample::from_id(example_id)?;
    if grid_size < 8 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be at least 8, got {grid_size}"
        )));
    }
    let n = grid_size;
    let h = 1.0 / (n as f64 + 1.0);

    // Columns of (K/h²)⁻¹ with K = tridiag(−1, 2, −1), by the Thomas algorithm.
    let mut green = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        rhs.fill(0.0);
        rhs[j] = h * h;
        solve_second_difference(&rhs, &mut col);
        for (i, v) in col.iter().enumerate() {
            green[i * n + j] = *v;
        }
    }
    // The Green's matrix is symmetric; average out the solver's rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (green[i * n + j] + green[j * n + i]);
            green[i * n + j] = m;
            green[j * n + i] = m;
        }
    }
    let op = DenseOperator::normalized(n, n, green)?;

    // Eigenpairs of the assembled operator: v_j(i) = √(2h) sin(jπ i h),
    // σ_j = scale · h² / (4 sin²(jπh/2)).
    let mu = example.mu();
    let mut rng = ChaCha8Rng::seed_from_u64(example.omega_seed());
    let mut omega: Vec<f64> = (1..=n)
        .map(|j| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign / (j as f64).sqrt()
        })
        .collect();
    let on = norm(&omega);
    scale(1.0 / on, &mut omega);

    let sigma: Vec<f64> = (1..=n)
        .map(|j| {
            let s = (j as f64 * PI * h / 2.0).sin();
            op.scale_factor() * h * h / (4.0 * s * s)
        })
        .collect();
    let coeff: Vec<f64> = sigma
        .iter()
        .zip(&omega)
        .map(|(s, w)| s.powf(2.0 * mu) * w)
        .collect();
    let data_norm = sigma
        .iter()
        .zip(&coeff)
        .map(|(s, c)| (s * c) * (s * c))
        .sum::<f64>()
        .sqrt();

    let norm_v = (2.0 * h).sqrt();
    let mut x = vec![0.0; n];
    for (j, c) in coeff.iter().enumerate() {
        let freq = (j + 1) as f64 * PI * h;
        let c = c / data_norm * norm_v;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += c * (freq * (i + 1) as f64).sin();
        }
    }
    Ok((op, x))
}

/// Solves `K u = rhs` for `K = tridiag(−1, 2, −1)`.
fn solve_second_difference(rhs: &[f64], out: &mut [f64]) {
    let n = rhs.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    c_prime[0] = -1.0 / 2.0;
    d_prime[0] = rhs[0] / 2.0;
    for i in 1..n {
        let denom = 2.0 + c_prime[i - 1];
        c_prime[i] = -1.0 / denom;
        d_prime[i] = (rhs[i] + d_prime[i - 1]) / denom;
    }
    out[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d_prime[i] - c_prime[i] * out[i + 1];
    }
}

/// Adds noise of norm exactly `delta`: `y^δ = A x† + δ·e/‖e‖` with `e`
/// standard normal from a generator seeded by `seed`.
pub fn add_noise(
    operator: Arc<dyn LinearOperator>,
    x_true: Vec<f64>,
    delta: f64,
    seed: u64,
) -> Result<InverseProblem> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise level must be non-negative, got {delta}"
        )));
    }
    check_len(operator.solution_dim(), x_true.len())?;
    let y_exact = operator.apply_vec(&x_true);
    let mut y_noisy = y_exact.clone();
    if delta > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = loop {
            let e: Vec<f64> = (0..y_exact.len())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let ne = norm(&e);
            if ne > 0.0 {
                break e.into_iter().map(|v: f64| v * delta / ne).collect::<Vec<_>>();
            }
        };
        for (y, ei) in y_noisy.iter_mut().zip(&e) {
            *y += ei;
        }
    }
    Ok(InverseProblem {
        operator,
        x_true: Some(x_true),
        y_exact,
        y_noisy,
        delta,
    })
}
