//! Residual and filter polynomials of the momentum iterations.
//!
//! For the Nesterov iteration with momentum `α_k` the residual polynomials obey
//!
//! ```text
//! r_{k+1}(λ) = (1−λ)[r_k(λ) + α_k (r_k(λ) − r_{k−1}(λ))],  r_0 = 1, r_1 = 1−λ.
//! ```
//!
//! With `α_k = (k−1)/(k+β)` they have the closed form
//! `r_k(λ) = (1−λ)^((k+1)/2) · C_{k−1}(√(1−λ)) / C_{k−1}(1)` where `C_n` is the
//! Gegenbauer polynomial of parameter `(β+1)/2`. Gegenbauer values at 1 grow
//! without bound, so the ratio `C_n(x)/C_n(1)` is propagated directly through
//! the normalized recursion
//!
//! ```text
//! q_{m+1}(x) = (1 + a_m) x q_m(x) − a_m q_{m−1}(x),  a_m = m/(m+1+β),
//! q_0 = 1, q_1 = x
//! ```
//!
//! and never formed from unnormalized values.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Rule producing the momentum coefficients `α_k`, `k ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentumSchedule {
    /// `α_k = (k−1)/(k+β)`; `β = −1` is admitted with `α_1 := 0`.
    Beta(f64),
    /// `α_k = (t_k − 1)/t_{k+1}` with `t_{k+1} = (1 + √(1+4t_k²))/2`, `t_1 = 1`.
    Fista,
    /// Explicit `α_1, α_2, …`, typically from [`recurrence_to_alpha`].
    Sequence(Vec<f64>),
    /// `α_k ≡ 0` (Landweber).
    Zero,
}

impl MomentumSchedule {
    pub fn beta(beta: f64) -> Result<Self> {
        if !(beta >= -1.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must satisfy beta >= -1, got {beta}"
            )));
        }
        Ok(Self::Beta(beta))
    }

    /// Schedule whose residuals follow the orthogonal-polynomial recurrence.
    pub fn from_recurrence(coeffs: &RecurrenceCoefficients, k_max: usize) -> Result<Self> {
        Ok(Self::Sequence(recurrence_to_alpha(coeffs, k_max)?))
    }

    /// `α_k` for `k ≥ 1`.
    pub fn alpha(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidParameter("alpha is defined for k >= 1".into()));
        }
        match self {
            Self::Beta(beta) => Ok(beta_alpha(*beta, k)),
            Self::Fista => Ok(fista_alpha(k)),
            Self::Sequence(a) => a.get(k - 1).copied().ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "momentum sequence has {} terms, alpha_{k} requested",
                    a.len()
                ))
            }),
            Self::Zero => Ok(0.0),
        }
    }

    /// Number of `α_k` available, `None` when unbounded.
    pub fn known_len(&self) -> Option<usize> {
        match self {
            Self::Sequence(a) => Some(a.len()),
            _ => None,
        }
    }

    /// Streams `α_1, α_2, …` with O(1) work per term.
    pub fn alphas(&self) -> Alphas<'_> {
        Alphas {
            schedule: self,
            k: 0,
            t: 1.0,
        }
    }
}

/// Iterator over `α_1, α_2, …` of a [`MomentumSchedule`].
#[derive(Debug, Clone)]
pub struct Alphas<'a> {
    schedule: &'a MomentumSchedule,
    k: usize,
    t: f64,
}

impl Iterator for Alphas<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.k += 1;
        match self.schedule {
            MomentumSchedule::Beta(beta) => Some(beta_alpha(*beta, self.k)),
            MomentumSchedule::Fista => {
                let t_next = fista_next(self.t);
                let a = (self.t - 1.0) / t_next;
                self.t = t_next;
                Some(a)
            }
            MomentumSchedule::Sequence(a) => a.get(self.k - 1).copied(),
            MomentumSchedule::Zero => Some(0.0),
        }
    }
}

fn beta_alpha(beta: f64, k: usize) -> f64 {
    if k == 1 {
        // exact for every beta > -1 and the defining extension at beta = -1
        0.0
    } else {
        (k as f64 - 1.0) / (k as f64 + beta)
    }
}

fn fista_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// `t_1, …, t_{n}` of the FISTA sequence.
pub fn fista_t(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n);
    let mut cur = 1.0;
    for _ in 0..n {
        t.push(cur);
        cur = fista_next(cur);
    }
    t
}

/// `α_k = (t_k − 1)/t_{k+1}` for the FISTA sequence.
pub fn fista_alpha(k: usize) -> f64 {
    assert!(k >= 1, "fista_alpha is defined for k >= 1");
    let t = fista_t(k + 1);
    (t[k - 1] - 1.0) / t[k]
}

/// Residual polynomial values `r_k` on a λ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEvaluation {
    pub k: usize,
    pub values: Vec<f64>,
    pub grid: Arc<[f64]>,
}

/// `points` equispaced nodes on `[0, 1]`, endpoints included.
pub fn unit_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| i as f64 / (points - 1) as f64)
            .collect(),
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        Some(&value) => Err(Error::OutsideUnitInterval { value }),
        None => Ok(()),
    }
}

/// `r_0, …, r_{k_max}` by the three-term residual recursion.
pub fn residual_by_recursion(
    schedule: &MomentumSchedule,
    k_max: usize,
    grid: &[f64],
) -> Result<Vec<ResidualEvaluation>> {
    check_grid(grid)?;
    if let Some(len) = schedule.known_len() {
        if k_max > len + 1 {
            return Err(Error::InvalidParameter(format!(
                "schedule provides {len} coefficients, {k_max} residuals requested"
            )));
        }
    }
    let shared: Arc<[f64]> = grid.into();
    let mut out = Vec::with_capacity(k_max + 1);
    let mut prev = vec![1.0; grid.len()];
    out.push(ResidualEvaluation {
        k: 0,
        values: prev.clone(),
        grid: shared.clone(),
    });
    if k_max == 0 {
        return Ok(out);
    }
    let mut cur: Vec<f64> = grid.iter().map(|l| 1.0 - l).collect();
    out.push(ResidualEvaluation {
        k: 1,
        values: cur.clone(),
        grid: shared.clone(),
    });
    for (k, alpha) in (1..k_max).zip(schedule.alphas()) {
        let next: Vec<f64> = grid
            .iter()
            .zip(cur.iter().zip(&prev))
            .map(|(l, (r, rp))| (1.0 - l) * (r + alpha * (r - rp)))
            .collect();
        prev = std::mem::replace(&mut cur, next);
        out.push(ResidualEvaluation {
            k: k + 1,
            values: cur.clone(),
            grid: shared.clone(),
        });
    }
    Ok(out)
}

/// `C_n(x)/C_n(1)` for the Gegenbauer polynomial of parameter `(β+1)/2`.
pub fn gegenbauer_ratio(n: usize, x: f64, beta: f64) -> Result<f64> {
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Gegenbauer ratio needs beta > -1, got {beta}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutsideUnitInterval { value: x });
    }
    Ok(normalized_ratio(n, x, beta))
}

/// Normalized recursion; at `β = −1` every `a_m` equals 1 and the values are
/// Chebyshev polynomials of the first kind `T_n(x)`.
fn normalized_ratio(n: usize, x: f64, beta: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for m in 1..n {
        let a = m as f64 / (m as f64 + 1.0 + beta);
        let next = (1.0 + a) * x * cur - a * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All ratios `C_0(x)/C_0(1), …, C_{n_max}(x)/C_{n_max}(1)`.
pub fn gegenbauer_ratios(n_max: usize, x: f64, beta: f64) -> Result<Vec<f64>> {
    gegenbauer_ratio(0, x, beta)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return Ok(out);
    }
    out.push(x);
    for m in 1..n_max {
        let a = m as f64 / (m as f64 + 1.0 + beta);
        let v = (1.0 + a) * x * out[m] - a * out[m - 1];
        out.push(v);
    }
    Ok(out)
}

/// `r_k(λ) = (1−λ)^((k+1)/2) · C_{k−1}(√(1−λ))/C_{k−1}(1)`, `k ≥ 1`.
///
/// For `β = −1` the ratio is `T_{k−1}(√(1−λ))`.
pub fn residual_closed_form(k: usize, lambda: f64, beta: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("closed form holds for k >= 1".into()));
    }
    if !(beta >= -1.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must satisfy beta >= -1, got {beta}"
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutsideUnitInterval { value: lambda });
    }
    let s = (1.0 - lambda).sqrt();
    Ok(s.powi(k as i32 + 1) * normalized_ratio(k - 1, s, beta))
}

/// Residual of the ν-method, `C_{2k}^{(2ν)}(√(1−λ)) / C_{2k}^{(2ν)}(1)`.
///
/// Gegenbauer parameter `2ν` corresponds to `β = 4ν − 1`.
pub fn nu_method_residual(k: usize, lambda: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutsideUnitInterval { value: lambda });
    }
    Ok(normalized_ratio(2 * k, (1.0 - lambda).sqrt(), 4.0 * nu - 1.0))
}

/// `g_0(λ), …, g_{k_max}(λ)` where `g_k(λ) = (1 − r_k(λ))/λ`.
///
/// Evaluated through the recursion `g_{k+1} = 1 + (1−λ)[(1+α_k) g_k − α_k g_{k−1}]`,
/// `g_0 = 0`, `g_1 = 1`, which is the residual recursion rewritten for `g`. It
/// stays accurate for λ down to 0, where the difference quotient cancels.
pub fn filter_values(schedule: &MomentumSchedule, k_max: usize, lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutsideUnitInterval { value: lambda });
    }
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(0.0);
    if k_max == 0 {
        return Ok(out);
    }
    out.push(1.0);
    let mut alphas = schedule.alphas();
    for k in 1..k_max {
        let a = alphas.next().ok_or_else(|| {
            Error::InvalidParameter(format!("momentum sequence exhausted at k = {k}"))
        })?;
        let s = (1.0 + a) * out[k] - a * out[k - 1];
        out.push(1.0 + (1.0 - lambda) * s);
    }
    Ok(out)
}

/// `g_k(λ) = (1 − r_k(λ))/λ` for `λ ∈ (0, 1]`.
pub fn filter_function(schedule: &MomentumSchedule, k: usize, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::InvalidParameter(
            "filter function requested at lambda = 0".into(),
        ));
    }
    Ok(filter_values(schedule, k, lambda)?[k])
}

/// Coefficients of `P_{k+1}(x) = c_k x P_k(x) − d_k P_{k−1}(x)`, `P_0 = 1`,
/// `P_1 = c_0 x`.
///
/// `c[k]` and `d[k]` hold `c_k`, `d_k`; `d[0]` is unused. When
/// `first_alpha_zero` is set the correspondence with a momentum sequence starts
/// at `k = 2` and `α_1 = 0`; `P_1` is then unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceCoefficients {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub first_alpha_zero: bool,
}

impl RecurrenceCoefficients {
    /// `c_k = (2k+β−1)/k`, `d_k = (k+β−1)/k`, `c_0 = β+1`.
    pub fn gegenbauer(beta: f64, k_max: usize) -> Self {
        let mut c = vec![beta + 1.0];
        let mut d = vec![0.0];
        for k in 1..=k_max {
            let kf = k as f64;
            c.push((2.0 * kf + beta - 1.0) / kf);
            d.push((kf + beta - 1.0) / kf);
        }
        Self {
            c,
            d,
            first_alpha_zero: true,
        }
    }

    /// `c_k = 1 + t_k/t_{k+1}`, `d_k = c_{k−1} − 1`.
    pub fn fista(k_max: usize) -> Self {
        let t = fista_t(k_max + 2);
        let mut c = vec![1.0];
        let mut d = vec![0.0];
        for k in 1..=k_max {
            c.push(1.0 + t[k - 1] / t[k]);
            d.push(c[k - 1] - 1.0);
        }
        Self {
            c,
            d,
            first_alpha_zero: true,
        }
    }

    /// Hermite polynomials: `c_k = 2`, `d_k = 2k`, `P_1 = 2x`.
    pub fn hermite(k_max: usize) -> Self {
        Self {
            c: vec![2.0; k_max + 1],
            d: (0..=k_max).map(|k| 2.0 * k as f64).collect(),
            first_alpha_zero: false,
        }
    }

    pub fn len(&self) -> usize {
        self.c.len().min(self.d.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `c_k c_{k−1} / d_k`
    fn product(&self, k: usize) -> f64 {
        self.c[k] * self.c[k - 1] / self.d[k]
    }

    /// Largest relative violation of the coefficient/momentum relations
    /// `c_1 c_0/d_1 = 1 + 1/α_1` and
    /// `c_k c_{k−1}/d_k = (1 + 1/α_k)(α_{k−1} + 1)` over `k ≤ alphas.len()`.
    pub fn relation_defect(&self, alphas: &[f64]) -> f64 {
        let start = if self.first_alpha_zero { 2 } else { 1 };
        let mut worst = 0.0_f64;
        for k in start..=alphas.len().min(self.len().saturating_sub(1)) {
            let lhs = self.product(k);
            let rhs = if k == 1 {
                1.0 + 1.0 / alphas[0]
            } else {
                (1.0 + 1.0 / alphas[k - 1]) * (alphas[k - 2] + 1.0)
            };
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
        worst
    }
}

/// Canonical recurrence coefficients for a momentum sequence `α_1, …`.
///
/// The relations fix only the products `c_k c_{k−1}/d_k`; the canonical gauge
/// takes `d_k = 1` and `c_0 = 1`. If `α_1 = 0` the anchor moves to `k = 2` and
/// `c_1 = 1`.
pub fn alpha_to_recurrence(alphas: &[f64], k_max: usize) -> Result<RecurrenceCoefficients> {
    if alphas.len() < k_max {
        return Err(Error::InvalidParameter(format!(
            "{} momentum terms supplied, {k_max} required",
            alphas.len()
        )));
    }
    for (i, &a) in alphas.iter().take(k_max).enumerate() {
        let k = i + 1;
        let admissible = a.is_finite() && (a > 0.0 || (k == 1 && a == 0.0));
        if !admissible {
            return Err(Error::NonPositiveMomentum { k, alpha: a });
        }
    }
    let first_alpha_zero = k_max == 0 || alphas[0] == 0.0;
    let mut c = vec![1.0];
    let mut d = vec![0.0];
    if k_max >= 1 {
        c.push(if first_alpha_zero {
            1.0
        } else {
            1.0 + 1.0 / alphas[0]
        });
        d.push(1.0);
    }
    for k in 2..=k_max {
        let rhs = (1.0 + 1.0 / alphas[k - 1]) * (alphas[k - 2] + 1.0);
        c.push(rhs / c[k - 1]);
        d.push(1.0);
    }
    Ok(RecurrenceCoefficients {
        c,
        d,
        first_alpha_zero,
    })
}

/// Momentum sequence `α_1, …, α_{k_max}` realizing the given recurrence.
///
/// Fails with [`Error::NonPositiveMomentum`] at the first `k` where `α_k` is not
/// positive and finite.
pub fn recurrence_to_alpha(coeffs: &RecurrenceCoefficients, k_max: usize) -> Result<Vec<f64>> {
    if coeffs.len() <= k_max {
        return Err(Error::InvalidParameter(format!(
            "coefficients cover k < {}, {k_max} requested",
            coeffs.len()
        )));
    }
    let mut alphas = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let alpha = if k == 1 {
            if coeffs.first_alpha_zero {
                alphas.push(0.0);
                continue;
            }
            1.0 / (coeffs.product(1) - 1.0)
        } else {
            1.0 / (coeffs.product(k) / (1.0 + alphas[k - 2]) - 1.0)
        };
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::NonPositiveMomentum { k, alpha });
        }
        alphas.push(alpha);
    }
    Ok(alphas)
}

/// `M_k = k^((β+1)/2) · max_λ λ^((β+1)/4) |C_k(√(1−λ))/C_k(1)|` for
/// `k = 1, …, k_max`. Bounded in `k` for every `β > −1`.
pub fn rate_bound_monitor(k_max: usize, beta: f64, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let e = (beta + 1.0) / 4.0;
    let mut sup = vec![0.0_f64; k_max + 1];
    for &l in grid {
        let w = l.powf(e);
        let ratios = gegenbauer_ratios(k_max, (1.0 - l).sqrt(), beta)?;
        for (s, q) in sup.iter_mut().zip(&ratios) {
            *s = s.max(w * q.abs());
        }
    }
    Ok((1..=k_max)
        .map(|k| (k as f64).powf(2.0 * e) * sup[k])
        .collect())
}

/// `L_k = (k+1)^μ · max_λ λ^μ (1−λ)^k` for `k = 0, …, k_max`; bounded by 1 for
/// `0 < μ ≤ 1`.
pub fn landweber_rate_monitor(k_max: usize, mu: f64, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    let mut sup = vec![0.0_f64; k_max + 1];
    for &l in grid {
        let mut v = l.powf(mu);
        for s in sup.iter_mut() {
            *s = s.max(v);
            v *= 1.0 - l;
        }
    }
    Ok(sup
        .iter()
        .enumerate()
        .map(|(k, s)| (k as f64 + 1.0).powf(mu) * s)
        .collect())
}

/// Worst point found by a verification sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub value: f64,
    pub k: usize,
    pub beta: f64,
    pub lambda: f64,
}

/// Largest `|r_k^{recursion}(λ) − r_k^{closed}(λ)|` for `1 ≤ k ≤ k_max`.
pub fn closed_form_deviation(beta: f64, k_max: usize, grid: &[f64]) -> Result<Deviation> {
    let schedule = MomentumSchedule::beta(beta)?;
    let rec = residual_by_recursion(&schedule, k_max, grid)?;
    let mut worst = Deviation {
        value: 0.0,
        k: 0,
        beta,
        lambda: 0.0,
    };
    for ev in rec.iter().skip(1) {
        for (&l, &r) in grid.iter().zip(&ev.values) {
            let diff = (r - residual_closed_form(ev.k, l, beta)?).abs();
            if diff > worst.value || diff.is_nan() {
                worst = Deviation {
                    value: diff,
                    k: ev.k,
                    beta,
                    lambda: l,
                };
            }
        }
    }
    Ok(worst)
}

/// Largest `|r_k(λ)|` over the grid for `0 ≤ k ≤ k_max`.
pub fn max_abs_residual(beta: f64, k_max: usize, grid: &[f64]) -> Result<Deviation> {
    let schedule = MomentumSchedule::beta(beta)?;
    let mut worst = Deviation {
        value: 0.0,
        k: 0,
        beta,
        lambda: 0.0,
    };
    for ev in residual_by_recursion(&schedule, k_max, grid)? {
        for (&l, &r) in grid.iter().zip(&ev.values) {
            if r.abs() > worst.value {
                worst = Deviation {
                    value: r.abs(),
                    k: ev.k,
                    beta,
                    lambda: l,
                };
            }
        }
    }
    Ok(worst)
}

/// Largest `|g_k(λ)| − ((k+1)/2 + (k−1)²)` over the grid (positive means the
/// bound fails) for `1 ≤ k ≤ k_max`.
pub fn filter_bound_excess(beta: f64, k_max: usize, grid: &[f64]) -> Result<Deviation> {
    check_grid(grid)?;
    let schedule = MomentumSchedule::beta(beta)?;
    let mut worst = Deviation {
        value: f64::NEG_INFINITY,
        k: 0,
        beta,
        lambda: 0.0,
    };
    for &l in grid {
        let g = filter_values(&schedule, k_max, l)?;
        for (k, gk) in g.iter().enumerate().skip(1) {
            let kf = k as f64;
            let bound = (kf + 1.0) / 2.0 + (kf - 1.0) * (kf - 1.0);
            let excess = gk.abs() - bound;
            if excess > worst.value {
                worst = Deviation {
                    value: excess,
                    k,
                    beta,
                    lambda: l,
                };
            }
        }
    }
    Ok(worst)
}
