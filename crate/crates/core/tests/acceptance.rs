//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use iterreg::experiments::{
    run_bvp_rates, run_comparison_tables, run_rate_experiment, run_semisaturation_experiment,
    BvpConfig, ComparisonTables, ProblemSpec, RateExperimentConfig, RateSeries, TablesConfig,
};
use iterreg::operators::{add_noise, make_diagonal_problem, BvpExample};
use iterreg::polynomials::{
    alpha_to_recurrence, closed_form_deviation, filter_bound_excess, fista_t,
    landweber_rate_monitor, max_abs_residual, nu_method_residual, recurrence_to_alpha, unit_grid,
    MomentumSchedule, RecurrenceCoefficients,
};
use iterreg::solvers::Iteration;
use iterreg::{Error, Method, StoppingRule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: Option<f64>, center: f64, tol: f64) -> bool {
    x.is_some_and(|x| (x - center).abs() <= tol)
}

fn fmt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "NA".into())
}

fn slope(series: &RateSeries, method: &Method) -> Option<f64> {
    series.method(&method.name())?.slope.map(|f| f.slope)
}

fn nesterov(beta: f64) -> Method {
    Method::Nesterov(MomentumSchedule::Beta(beta))
}

fn criterion_1() -> Outcome {
    let grid = unit_grid(1001);
    let mut worst = 0.0_f64;
    let mut at = String::new();
    for beta in [-1.0, -0.5, 0.0, 1.0, 2.0, 4.0, 9.5] {
        let d = closed_form_deviation(beta, 150, &grid).expect("valid sweep");
        if d.value > worst || d.value.is_nan() {
            worst = d.value;
            at = format!("k={} beta={} lambda={}", d.k, d.beta, d.lambda);
        }
    }
    outcome(worst <= 1e-9, format!("max |recursion - closed form| = {worst:.2e} ({at})"))
}

fn criterion_2() -> Outcome {
    let grid = unit_grid(1001);
    let mut ok = true;
    let mut notes = Vec::new();
    for beta in [0.0, 1.0, 4.0] {
        let r = max_abs_residual(beta, 200, &grid).expect("valid sweep");
        let g = filter_bound_excess(beta, 200, &grid).expect("valid sweep");
        ok &= r.value <= 1.0 + 1e-12 && g.value <= 0.0;
        notes.push(format!("beta={beta}: max|r|={:.6} g-excess={:.3}", r.value, g.value));
    }
    for mu in [0.5, 0.75] {
        let m = landweber_rate_monitor(10_000, mu, &grid).expect("valid sweep");
        let max = m.iter().cloned().fold(0.0, f64::max);
        ok &= max <= 1.0;
        notes.push(format!("landweber mu={mu}: sup (k+1)^mu lambda^mu (1-lambda)^k = {max:.4}"));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0_f64;
    for family in [
        MomentumSchedule::Beta(-1.0),
        MomentumSchedule::Beta(0.0),
        MomentumSchedule::Beta(1.0),
        MomentumSchedule::Beta(4.0),
        MomentumSchedule::Fista,
    ] {
        let alphas: Vec<f64> = family.alphas().take(100).collect();
        let coeffs = alpha_to_recurrence(&alphas, 100).expect("positive sequence");
        let back = recurrence_to_alpha(&coeffs, 100).expect("positive sequence");
        for (a, b) in alphas.iter().zip(&back) {
            worst = worst.max((a - b).abs());
        }
    }
    let t = fista_t(110);
    let a: Vec<f64> = MomentumSchedule::Fista.alphas().take(101).collect();
    let mut identity = 0.0_f64;
    for k in 2..=100 {
        let lhs = (1.0 + 1.0 / a[k - 1]) * (a[k - 2] + 1.0);
        let (tp, tk, tn) = (t[k - 2], t[k - 1], t[k]);
        let rhs = tk / tp * (1.0 + tk / tn) * (1.0 + tp / tk);
        identity = identity.max(((lhs - rhs) / rhs).abs());
    }
    let hermite = recurrence_to_alpha(&RecurrenceCoefficients::hermite(10), 10);
    let hermite_ok = matches!(hermite, Err(Error::NonPositiveMomentum { k: 2, .. }));
    outcome(
        worst <= 1e-12 && identity <= 1e-12 && hermite_ok,
        format!(
            "roundtrip {worst:.1e}, FISTA identity {identity:.1e}, Hermite -> {:?}",
            hermite.err()
        ),
    )
}

fn criterion_4() -> Outcome {
    let (op, x) = make_diagonal_problem(100, 2.0, 4.0, true).expect("valid");
    let sigma = op.singular_values().to_vec();
    let problem = add_noise(Arc::new(op), x, 1e-3, 42).expect("valid");
    let y = &problem.y_noisy;
    let op = problem.operator.as_ref();

    let mut filter_dev = 0.0_f64;
    for schedule in [MomentumSchedule::Beta(4.0), MomentumSchedule::Zero] {
        let method = match &schedule {
            MomentumSchedule::Zero => Method::Landweber,
            s => Method::Nesterov(s.clone()),
        };
        let g: Vec<Vec<f64>> = sigma
            .iter()
            .map(|s| iterreg::polynomials::filter_values(&schedule, 50, s * s).expect("valid"))
            .collect();
        let mut it = Iteration::new(op, y, &method).expect("valid");
        for k in 1..=50 {
            it.advance().expect("no breakdown");
            for (n, gn) in g.iter().enumerate() {
                let want = gn[k] * sigma[n] * y[n];
                filter_dev = filter_dev.max((it.iterate()[n] - want).abs());
            }
        }
    }

    let mut nu_dev = 0.0_f64;
    for nu in [0.5, 1.0] {
        let method = Method::NuMethod { nu };
        let mut it = Iteration::new(op, y, &method).expect("valid");
        for k in 1..=50 {
            it.advance().expect("no breakdown");
            let want: f64 = sigma
                .iter()
                .zip(y)
                .map(|(s, yn)| {
                    let r = nu_method_residual(k, s * s, nu).expect("valid");
                    (r * yn).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            nu_dev = nu_dev.max((it.residual_norm() - want).abs());
        }
    }
    outcome(
        filter_dev <= 1e-10 && nu_dev <= 1e-8,
        format!("filter deviation {filter_dev:.2e}, nu residual deviation {nu_dev:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let delta = 1e-3;
    let (op, x) = make_diagonal_problem(1000, 2.0, 4.0, true).expect("valid");
    let op = Arc::new(op);
    let mut worst_ratio = 0.0_f64;
    let mut ok = true;
    for beta in [0.0, 1.0, 4.0] {
        let method = nesterov(beta);
        for seed in 1..=5 {
            let p = add_noise(op.clone(), x.clone(), delta, seed).expect("valid");
            let mut noisy = Iteration::new(p.operator.as_ref(), &p.y_noisy, &method).expect("valid");
            let mut exact = Iteration::new(p.operator.as_ref(), &p.y_exact, &method).expect("valid");
            for k in 1..=1000 {
                noisy.advance().expect("no breakdown");
                exact.advance().expect("no breakdown");
                let diff: f64 = noisy
                    .iterate()
                    .iter()
                    .zip(exact.iterate())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let bound = 2f64.sqrt() * k as f64 * delta;
                ok &= diff <= bound + 1e-10;
                worst_ratio = worst_ratio.max(diff / bound);
            }
        }
    }
    outcome(ok, format!("max ||x_k^delta - x_k|| / (sqrt2 k delta) = {worst_ratio:.3}"))
}

struct DiagonalRuns {
    tables: ComparisonTables,
    oracle: RateSeries,
    discrepancy: RateSeries,
}

fn diagonal_runs() -> DiagonalRuns {
    let config = TablesConfig::default();
    let (tables, mut series) = run_comparison_tables(&config).expect("valid config");
    let discrepancy = series.pop().expect("two rules");
    let oracle = series.pop().expect("two rules");
    DiagonalRuns {
        tables,
        oracle,
        discrepancy,
    }
}

fn criterion_6(runs: &DiagonalRuns) -> Outcome {
    let n = nesterov(4.0);
    let lw = Method::Landweber;
    let nu = Method::NuMethod { nu: 1.0 };
    let cg = Method::Cgne;
    let s = |series: &RateSeries, m: &Method| slope(series, m);
    let slopes_ok = within(s(&runs.oracle, &n), 0.6, 0.12)
        && within(s(&runs.discrepancy, &n), 0.6, 0.12)
        && within(s(&runs.oracle, &lw), 0.6, 0.12)
        && within(s(&runs.discrepancy, &lw), 0.6, 0.12)
        && within(s(&runs.oracle, &nu), 0.6, 0.12);

    let mut ratios_ok = true;
    let mut ratio_range = (f64::INFINITY, f64::NEG_INFINITY);
    for m in [&n, &lw, &nu, &cg] {
        let row = runs.tables.row(&m.name(), "oracle").expect("row present");
        for r in &row.error_ratio {
            match r {
                Some(r) => {
                    ratios_ok &= (0.5..=2.0).contains(r);
                    ratio_range = (ratio_range.0.min(*r), ratio_range.1.max(*r));
                }
                None => ratios_ok = false,
            }
        }
    }
    let k_n5 = runs.oracle.method(&n.name()).and_then(|m| m.median_stop_at(1e-5));
    let k_lw5 = runs.oracle.method(&lw.name()).and_then(|m| m.median_stop_at(1e-5));
    let count_ratio = k_lw5.zip(k_n5).map(|(a, b)| a / b);
    let k_n3 = runs.oracle.method(&n.name()).and_then(|m| m.median_stop_at(1e-3));
    let counts_ok = count_ratio.is_some_and(|r| r >= 5.0) && k_n3.is_some_and(|k| (30.0..=130.0).contains(&k));

    outcome(
        slopes_ok && ratios_ok && counts_ok,
        format!(
            "slopes oracle N/LW/nu = {}/{}/{}, discrepancy N/LW = {}/{} (nu discrepancy {}, not asserted); \
             oracle ratios in [{:.2}, {:.2}]; LW/N count at 1e-5 = {}; N k_opt at 1e-3 = {}",
            fmt(s(&runs.oracle, &n)),
            fmt(s(&runs.oracle, &lw)),
            fmt(s(&runs.oracle, &nu)),
            fmt(s(&runs.discrepancy, &n)),
            fmt(s(&runs.discrepancy, &lw)),
            fmt(s(&runs.discrepancy, &nu)),
            ratio_range.0,
            ratio_range.1,
            fmt(count_ratio),
            fmt(k_n3),
        ),
    )
}

fn criterion_7() -> Outcome {
    let report = run_semisaturation_experiment(
        ProblemSpec::standard_diagonal(),
        0.0,
        0.4,
        StoppingRule::Oracle,
        iterreg::experiments::decades(1, 5),
        (1..=10).collect(),
        None,
    )
    .expect("valid config");
    outcome(
        report.ordering_holds(),
        format!(
            "slopes LW {} >= Nesterov(beta=0) {} >= nu(0.4) {}",
            fmt(report.landweber),
            fmt(report.nesterov),
            fmt(report.nu_method)
        ),
    )
}

fn criterion_8(runs: &DiagonalRuns) -> Outcome {
    let m = runs.discrepancy.method(&nesterov(4.0).name()).expect("present");
    let s = m.index_slope.map(|f| f.slope);
    outcome(
        within(s, 0.4, 0.1),
        format!(
            "index slope {} from median stops {:?}",
            fmt(s),
            m.median_stops.iter().map(|k| fmt(*k)).collect::<Vec<_>>()
        ),
    )
}

fn criterion_9() -> Outcome {
    let run = |example: BvpExample| {
        let series = run_bvp_rates(&BvpConfig::new(example)).expect("valid config");
        let high = slope(&series, &nesterov(iterreg::experiments::bvp_optimal_beta(example)));
        let low = slope(&series, &nesterov(1.0));
        (high, low)
    };
    let opt = |mu: f64| 2.0 * mu / (2.0 * mu + 1.0);

    let (r_hi, r_lo) = run(BvpExample::Rough);
    let rough_ok = within(r_hi, opt(0.125), 0.15)
        && r_hi.zip(r_lo).is_some_and(|(a, b)| (a - b).abs() <= 0.05);

    let (m_hi, m_lo) = run(BvpExample::Medium);
    let medium_ok =
        within(m_hi, opt(0.625), 0.15) && m_lo.is_some_and(|lo| lo <= opt(0.625) - 0.1);

    let (s_hi, s_lo) = run(BvpExample::Smooth);
    let smooth_ok = within(s_hi, opt(2.125), 0.25);

    outcome(
        rough_ok && medium_ok && smooth_ok,
        format!(
            "mu=1/8: beta=3.5 {} beta=1 {} (opt {:.3}); mu=5/8: beta=3.5 {} beta=1 {} (opt {:.3}); \
             mu=17/8: beta=9.5 {} beta=1 {} (opt {:.3})",
            fmt(r_hi),
            fmt(r_lo),
            opt(0.125),
            fmt(m_hi),
            fmt(m_lo),
            opt(0.625),
            fmt(s_hi),
            fmt(s_lo),
            opt(2.125)
        ),
    )
}

fn criterion_10() -> Outcome {
    let config = RateExperimentConfig::new(
        ProblemSpec::standard_diagonal(),
        vec![nesterov(4.0)],
        StoppingRule::apriori(0.75, 1.0).expect("valid"),
    );
    let series = run_rate_experiment(&config).expect("valid config");
    let m = &series.methods[0];
    let errs: Vec<Option<f64>> = m.median_errors.clone();
    let decreasing = errs.iter().all(Option::is_some)
        && errs.windows(2).all(|w| w[1].unwrap() < w[0].unwrap());
    outcome(
        decreasing,
        format!(
            "median errors {:?}",
            errs.iter().map(|e| e.map(|v| format!("{v:.3e}")).unwrap_or("NA".into())).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, budget: Duration, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {name}: {} [{:.1}s / {}s] {}{}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail,
            if in_time { "" } else { " (over time budget)" }
        );
    };
    let secs = Duration::from_secs;

    report(1, "closed-form identity", secs(5), &mut criterion_1);
    report(2, "bound suite", secs(10), &mut criterion_2);
    report(3, "coefficient roundtrips", secs(1), &mut criterion_3);
    report(4, "spectral filter equivalence", secs(5), &mut criterion_4);
    report(5, "stability estimate", secs(10), &mut criterion_5);

    let mut runs = None;
    report(6, "optimal rates", secs(180), &mut || {
        let r = diagonal_runs();
        let o = criterion_6(&r);
        runs = Some(r);
        o
    });
    report(7, "semi-saturation", secs(180), &mut criterion_7);
    report(8, "stop-index scaling", secs(60), &mut || match &runs {
        Some(r) => criterion_8(r),
        None => outcome(false, "diagonal sweep did not run".into()),
    });
    report(9, "BVP discrepancy rates", secs(300), &mut criterion_9);
    report(10, "regularization property", secs(60), &mut criterion_10);

    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
