use std::sync::Arc;

use iterreg::operators::{
    add_noise, adjoint_defect, make_bvp_problem, make_diagonal_problem, power_iteration_norm,
};
use iterreg::polynomials::{residual_closed_form, MomentumSchedule};
use iterreg::solvers::{
    cgne_solve, landweber_solve, nesterov_solve, nu_coefficients, residual_of, solve,
    IterateRetention, Iteration,
};
use iterreg::{
    DenseOperator, DiagonalOperator, InverseProblem, LinearOperator, Method, SolverConfig,
    StoppingRule, Termination,
};

fn diagonal(n: usize, delta: f64, seed: u64) -> InverseProblem {
    let (op, x) = make_diagonal_problem(n, 2.0, 4.0, true).unwrap();
    add_noise(Arc::new(op), x, delta, seed).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn all_methods() -> Vec<SolverConfig> {
    vec![
        SolverConfig::nesterov(4.0).unwrap(),
        SolverConfig::new(Method::Nesterov(MomentumSchedule::Fista)).unwrap(),
        SolverConfig::landweber(),
        SolverConfig::nu_method(1.0).unwrap(),
        SolverConfig::cgne(),
    ]
}

#[test]
fn recorded_residuals_match_recomputation() {
    let p = diagonal(300, 1e-3, 3);
    let rule = StoppingRule::discrepancy(1.01).unwrap();
    for config in all_methods() {
        let config = config.with_retention(IterateRetention::All);
        let res = solve(&p, &config, &rule).unwrap();
        assert_eq!(res.trace.iterates.len(), res.trace.residual_norms.len());
        for (k, x) in &res.trace.iterates {
            let direct = residual_of(p.operator.as_ref(), x, &p.y_noisy);
            let recorded = res.trace.residual_norms[*k];
            assert!(
                (direct - recorded).abs() <= 1e-12 * direct.max(1e-300),
                "{} k {k}: {recorded} vs {direct}",
                config.method.name()
            );
        }
        assert!(res.residual_norm() <= 1.01 * p.delta);
        assert!(res.trace.residual_norms[..res.stop_index]
            .iter()
            .all(|r| *r > 1.01 * p.delta));
    }
}

#[test]
fn noise_free_iterations_converge() {
    let p = diagonal(100, 0.0, 0);
    let x_true = p.x_true.clone().unwrap();
    for config in all_methods() {
        let mut it = Iteration::new(p.operator.as_ref(), &p.y_noisy, &config.method).unwrap();
        let mut errors = Vec::new();
        for k in 1..=3000 {
            if !it.advance().unwrap() {
                break;
            }
            if [10, 100, 1000, 3000].contains(&k) {
                errors.push(dist(it.iterate(), &x_true));
            }
        }
        for w in errors.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{}: {errors:?}", config.method.name());
        }
        let last = *errors.last().unwrap_or(&0.0);
        assert!(last < 0.05, "{}: final error {last}", config.method.name());
    }
}

#[test]
fn cgne_solves_three_by_three_in_three_steps() {
    let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
    let op = DenseOperator::new(3, 3, a).unwrap();
    let x = [1.0, -2.0, 0.5];
    let y = op.apply_vec(&x);
    let method = Method::Cgne;
    let mut it = Iteration::new(&op, &y, &method).unwrap();
    for _ in 0..3 {
        assert!(it.advance().unwrap());
    }
    assert!(it.residual_norm() < 1e-12, "{}", it.residual_norm());
    for (xi, ti) in it.iterate().iter().zip(&x) {
        assert!((xi - ti).abs() < 1e-9);
    }
}

#[test]
fn cgne_needs_few_iterations_under_discrepancy() {
    let rule = StoppingRule::discrepancy(1.01).unwrap();
    for delta in [1e-2, 1e-3, 1e-4] {
        let p = diagonal(1000, delta, 1);
        let res = cgne_solve(&p, &SolverConfig::cgne(), &rule).unwrap();
        assert_eq!(res.status, Termination::Stopped);
        assert!(res.stop_index < 10, "delta {delta}: {}", res.stop_index);
    }
}

#[test]
fn nu_method_first_step() {
    let p = diagonal(50, 1e-2, 2);
    for nu in [0.4, 0.5, 1.0, 2.0] {
        let method = Method::NuMethod { nu };
        let mut it = Iteration::new(p.operator.as_ref(), &p.y_noisy, &method).unwrap();
        it.advance().unwrap();
        let (mu, omega) = nu_coefficients(1, nu);
        assert_eq!(mu, 0.0);
        assert!((omega - (4.0 * nu + 2.0) / (4.0 * nu + 1.0)).abs() < 1e-15);
        let want = p.operator.apply_adjoint_vec(&p.y_noisy);
        for (x, w) in it.iterate().iter().zip(&want) {
            assert!((x - omega * w).abs() < 1e-15);
        }
    }
}

#[test]
fn nu_method_converges_for_half_integer_nu() {
    let p = diagonal(300, 1e-3, 4);
    let rule = StoppingRule::discrepancy(1.01).unwrap();
    for nu in [0.5, 1.5] {
        let res = solve(&p, &SolverConfig::nu_method(nu).unwrap(), &rule).unwrap();
        assert_eq!(res.status, Termination::Stopped, "nu {nu}");
        assert!(res.error_norm().unwrap().is_finite());
    }
}

#[test]
fn landweber_matches_spectral_closed_form() {
    let sigma: Vec<f64> = (1..=40).map(|n| 1.0 / n as f64).collect();
    let op = DiagonalOperator::new(sigma.clone()).unwrap();
    let y: Vec<f64> = (1..=40).map(|n| (n as f64).sin()).collect();
    let mut it = Iteration::new(&op, &y, &Method::Landweber).unwrap();
    for k in 1..=200 {
        it.advance().unwrap();
        for (n, s) in sigma.iter().enumerate() {
            let want = (1.0 - (1.0 - s * s).powi(k)) / s * y[n];
            let got = it.iterate()[n];
            assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()), "k {k} n {n}");
        }
    }
}

#[test]
fn nesterov_residual_is_residual_polynomial() {
    let sigma: Vec<f64> = (1..=30).map(|n| (n as f64).powf(-1.5)).collect();
    let op = DiagonalOperator::new(sigma.clone()).unwrap();
    let y: Vec<f64> = (1..=30).map(|n| 1.0 / n as f64).collect();
    for beta in [-1.0, 0.0, 2.0, 4.0] {
        let method = Method::Nesterov(MomentumSchedule::beta(beta).unwrap());
        let mut it = Iteration::new(&op, &y, &method).unwrap();
        for k in 1..=120 {
            it.advance().unwrap();
            for (n, s) in sigma.iter().enumerate() {
                let r = residual_closed_form(k, s * s, beta).unwrap();
                let got = y[n] - it.image()[n];
                assert!((got - r * y[n]).abs() < 1e-11, "beta {beta} k {k} n {n}");
            }
        }
    }
}

#[test]
fn oracle_returns_best_iterate() {
    let p = diagonal(500, 1e-3, 5);
    let config = SolverConfig::nesterov(4.0).unwrap();
    let res = nesterov_solve(&p, &config, &StoppingRule::Oracle).unwrap();
    let errors = res.trace.error_norms.as_ref().unwrap();
    let best = errors
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert_eq!(res.error_norm(), Some(best));
    assert!(errors.len() > res.stop_index + 100);
    let direct = dist(&res.solution, p.x_true.as_ref().unwrap());
    assert!((direct - best).abs() < 1e-14);
}

#[test]
fn nesterov_beats_landweber_on_iteration_count() {
    let p = diagonal(1000, 1e-4, 1);
    let rule = StoppingRule::discrepancy(1.01).unwrap();
    let n = nesterov_solve(&p, &SolverConfig::nesterov(4.0).unwrap(), &rule).unwrap();
    let lw = landweber_solve(&p, &SolverConfig::landweber(), &rule).unwrap();
    assert!(lw.stop_index > 5 * n.stop_index, "{} vs {}", lw.stop_index, n.stop_index);
}

#[test]
fn rule_guards() {
    let p = diagonal(50, 1e-2, 1);
    let apriori = StoppingRule::apriori(0.5, 1.0).unwrap();
    assert!(solve(&p, &SolverConfig::cgne(), &apriori).is_err());
    let hidden = p.clone().without_truth();
    assert!(solve(&hidden, &SolverConfig::landweber(), &StoppingRule::Oracle).is_err());
    assert!(landweber_solve(&p, &SolverConfig::cgne(), &apriori).is_err());
    let exact = diagonal(50, 0.0, 1);
    assert!(solve(&exact, &SolverConfig::landweber(), &StoppingRule::discrepancy(1.1).unwrap()).is_err());
}

#[test]
fn bvp_operator_is_normalized() {
    for example in 1..=3 {
        let (op, x) = make_bvp_problem(120, example).unwrap();
        assert!(op.norm_bound() <= 1.0);
        assert!(power_iteration_norm(&op, 500) <= 1.0);
        assert!(adjoint_defect(&op, 5, 9) < 1e-12);
        assert_eq!(x.len(), op.solution_dim());
    }
}

#[test]
fn noise_has_requested_norm_and_is_reproducible() {
    let a = diagonal(200, 1e-3, 11);
    let b = diagonal(200, 1e-3, 11);
    let c = diagonal(200, 1e-3, 12);
    assert!((a.delta - 1e-3).abs() < 1e-15);
    assert_eq!(a.y_noisy, b.y_noisy);
    assert_ne!(a.y_noisy, c.y_noisy);
}
