//! Stopping rules: discrepancy principle, a priori index and the oracle index.

use crate::error::{Error, Result};

/// How a solver run decides its stopping index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// First `k ≥ 0` with `‖A x_k − y^δ‖ ≤ τ δ`.
    Discrepancy { tau: f64 },
    /// Fixed index `⌈C δ^(−e)⌉`, the exponent chosen from the smoothness `μ`.
    APriori { mu: f64, c: f64 },
    /// `argmin_k ‖x_k − x†‖`; needs the exact solution.
    Oracle,
}

/// Branch of the a priori exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `μ ≤ (β+1)/4`: exponent `1/(2μ+1)`.
    Optimal,
    /// `μ > (β+1)/4`: exponent `1/(μ + (β+1)/4 + 1)`.
    Suboptimal,
}

impl StoppingRule {
    pub fn discrepancy(tau: f64) -> Result<Self> {
        if !(tau > 1.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must exceed 1, got {tau}")));
        }
        Ok(Self::Discrepancy { tau })
    }

    pub fn apriori(mu: f64, c: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) || !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "a priori rule needs mu > 0 and C > 0, got mu = {mu}, C = {c}"
            )));
        }
        Ok(Self::APriori { mu, c })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Discrepancy { .. } => "discrepancy",
            Self::APriori { .. } => "apriori",
            Self::Oracle => "oracle",
        }
    }
}

/// First index whose residual is at most `τ δ`, if any.
pub fn discrepancy_stop(residual_norms: &[f64], delta: f64, tau: f64) -> Result<Option<usize>> {
    check_discrepancy(delta, tau)?;
    Ok(residual_norms.iter().position(|r| *r <= tau * delta))
}

fn check_discrepancy(delta: f64, tau: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(Error::RuleNotApplicable(format!(
            "discrepancy principle needs a positive noise level, got {delta}"
        )));
    }
    if !(tau > 1.0) {
        return Err(Error::InvalidParameter(format!("tau must exceed 1, got {tau}")));
    }
    Ok(())
}

pub fn apriori_regime(mu: f64, beta: f64) -> Regime {
    if mu <= (beta + 1.0) / 4.0 {
        Regime::Optimal
    } else {
        Regime::Suboptimal
    }
}

/// A priori index for the Nesterov iteration with parameter `β`.
pub fn apriori_stop(delta: f64, mu: f64, beta: f64, c: f64) -> Result<usize> {
    if !(delta > 0.0) || !(mu > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "a priori index needs delta, mu, C > 0, got {delta}, {mu}, {c}"
        )));
    }
    if !(beta >= -1.0) {
        return Err(Error::InvalidParameter(format!("beta must be >= -1, got {beta}")));
    }
    let exponent = match apriori_regime(mu, beta) {
        Regime::Optimal => 1.0 / (2.0 * mu + 1.0),
        Regime::Suboptimal => 1.0 / (mu + (beta + 1.0) / 4.0 + 1.0),
    };
    index_from_power(c, delta, exponent)
}

/// A priori index for Landweber, whose iteration count scales like the square
/// of the accelerated ones: `⌈C δ^(−2/(2μ+1))⌉`.
pub fn apriori_stop_landweber(delta: f64, mu: f64, c: f64) -> Result<usize> {
    if !(delta > 0.0) || !(mu > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "a priori index needs delta, mu, C > 0, got {delta}, {mu}, {c}"
        )));
    }
    index_from_power(c, delta, 2.0 / (2.0 * mu + 1.0))
}

/// `⌈C δ^(−e)⌉`, ignoring rounding noise just above an integer.
fn index_from_power(c: f64, delta: f64, exponent: f64) -> Result<usize> {
    let v = c * delta.powf(-exponent);
    if !v.is_finite() || v > usize::MAX as f64 / 2.0 {
        return Err(Error::InvalidParameter(format!("a priori index overflows: {v}")));
    }
    let nearest = v.round();
    let k = if (v - nearest).abs() <= 1e-9 * v.max(1.0) {
        nearest
    } else {
        v.ceil()
    };
    Ok((k as usize).max(1))
}

/// Smallest index attaining the minimum error.
pub fn oracle_stop(error_norms: &[f64]) -> Result<usize> {
    if error_norms.is_empty() {
        return Err(Error::RuleNotApplicable("oracle rule needs recorded errors".into()));
    }
    let mut best = 0;
    for (k, e) in error_norms.iter().enumerate() {
        if e.is_nan() {
            return Err(Error::InvalidParameter(format!("error norm at k = {k} is NaN")));
        }
        if *e < error_norms[best] {
            best = k;
        }
    }
    Ok(best)
}

/// Iterations without improvement after which the oracle search ends.
pub fn oracle_patience(k_best: usize) -> usize {
    100.max(2 * k_best)
}

/// Outcome of feeding one iterate to a [`StopMonitor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    /// Stop; the returned index is the one whose iterate is the answer.
    Stop(usize),
}

/// Online form of a [`StoppingRule`] bound to a noise level.
#[derive(Debug, Clone)]
pub enum StopMonitor {
    Discrepancy { threshold: f64 },
    Fixed { index: usize },
    Oracle { best: Option<(usize, f64)> },
}

impl StopMonitor {
    pub fn discrepancy(delta: f64, tau: f64) -> Result<Self> {
        check_discrepancy(delta, tau)?;
        Ok(Self::Discrepancy {
            threshold: tau * delta,
        })
    }

    pub fn fixed(index: usize) -> Self {
        Self::Fixed { index }
    }

    pub fn oracle() -> Self {
        Self::Oracle { best: None }
    }

    pub fn needs_errors(&self) -> bool {
        matches!(self, Self::Oracle { .. })
    }

    /// Index of the best iterate so far (oracle only).
    pub fn best(&self) -> Option<usize> {
        match self {
            Self::Oracle { best } => best.map(|(k, _)| k),
            _ => None,
        }
    }

    /// Feeds iterate `k`. Indices must arrive in order starting at 0.
    pub fn observe(&mut self, k: usize, residual: f64, error: Option<f64>) -> Result<Decision> {
        match self {
            Self::Discrepancy { threshold } => Ok(if residual <= *threshold {
                Decision::Stop(k)
            } else {
                Decision::Continue
            }),
            Self::Fixed { index } => Ok(if k >= *index {
                Decision::Stop(k)
            } else {
                Decision::Continue
            }),
            Self::Oracle { best } => {
                let e = error.ok_or_else(|| {
                    Error::RuleNotApplicable("oracle rule needs the exact solution".into())
                })?;
                if e.is_nan() {
                    return Err(Error::InvalidParameter(format!("error norm at k = {k} is NaN")));
                }
                match best {
                    Some((_, b)) if e >= *b => {}
                    _ => *best = Some((k, e)),
                }
                let (kb, _) = best.expect("set above");
                Ok(if k - kb >= oracle_patience(kb) {
                    Decision::Stop(kb)
                } else {
                    Decision::Continue
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrepancy_examples() {
        let d = 0.01;
        let r = [5.0 * d, 3.0 * d, 0.9 * d];
        assert_eq!(discrepancy_stop(&r, d, 1.01).unwrap(), Some(2));
        assert_eq!(discrepancy_stop(&[0.5 * d], d, 1.01).unwrap(), Some(0));
        assert_eq!(discrepancy_stop(&r[..2], d, 1.01).unwrap(), None);
        assert!(discrepancy_stop(&r, 0.0, 1.01).is_err());
        assert!(discrepancy_stop(&r, d, 1.0).is_err());
        assert!(StoppingRule::discrepancy(0.9).is_err());
        assert!(StopMonitor::discrepancy(0.0, 1.1).is_err());
    }

    #[test]
    fn apriori_examples() {
        assert_eq!(apriori_stop(1e-5, 0.75, 4.0, 1.0).unwrap(), 100);
        assert_eq!(apriori_regime(0.75, 4.0), Regime::Optimal);
        assert_eq!(apriori_stop(1e-4, 0.75, 0.0, 1.0).unwrap(), 100);
        assert_eq!(apriori_regime(0.75, 0.0), Regime::Suboptimal);
        let one = apriori_stop(1e-3, 0.75, 4.0, 1.0).unwrap();
        let two = apriori_stop(1e-3, 0.75, 4.0, 2.0).unwrap();
        assert!(two.abs_diff(2 * one) <= 1);
        assert!(apriori_stop(0.0, 0.75, 4.0, 1.0).is_err());
        assert!(apriori_stop(1e-3, -1.0, 4.0, 1.0).is_err());
        assert!(apriori_stop(1e-3, 0.75, 4.0, 0.0).is_err());
        assert!(StoppingRule::apriori(0.75, -1.0).is_err());
        assert_eq!(apriori_stop_landweber(1e-5, 0.75, 1.0).unwrap(), 10_000);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_stop(&[5.0, 3.0, 2.0, 2.5, 4.0]).unwrap(), 2);
        assert_eq!(oracle_stop(&[1.0; 6]).unwrap(), 0);
        assert_eq!(oracle_stop(&[3.0, 1.0, 2.0, 1.0]).unwrap(), 1);
        assert!(oracle_stop(&[]).is_err());
    }

    #[test]
    fn oracle_monitor_waits_for_patience() {
        let mut m = StopMonitor::oracle();
        let errors: Vec<f64> = (0..400).map(|k| ((k as f64) - 30.0).abs() + 1.0).collect();
        let mut stop = None;
        for (k, e) in errors.iter().enumerate() {
            if let Decision::Stop(kb) = m.observe(k, 1.0, Some(*e)).unwrap() {
                stop = Some((k, kb));
                break;
            }
        }
        assert_eq!(stop, Some((130, 30)));
        assert!(StopMonitor::oracle().observe(0, 1.0, None).is_err());
    }

    #[test]
    fn fixed_monitor() {
        let mut m = StopMonitor::fixed(3);
        for k in 0..3 {
            assert_eq!(m.observe(k, 1.0, None).unwrap(), Decision::Continue);
        }
        assert_eq!(m.observe(3, 1.0, None).unwrap(), Decision::Stop(3));
    }
}
