use blowuplab::pdesim::*;
use blowuplab::testfuncs::{c_fg, f1_lower_bound, RadialProfile};
use blowuplab::Error;

fn bump(eps: f64) -> ProblemSpec {
    ProblemSpec::with_bump(3, 0.5, 1.8, eps, 1.0, DEFAULT_BUMP_AMPLITUDE).unwrap()
}

fn run(spec: &ProblemSpec, div: f64, t_max: f64) -> SolutionTrace {
    solve(spec, &Grid::new(1.0 / div, 0.5, t_max, spec.support_radius), 1e6).unwrap()
}

fn blowup_time(trace: &SolutionTrace) -> f64 {
    trace.blowup.as_ref().expect("run should blow up").time_estimate
}

#[test]
fn zero_data_stays_zero() {
    let spec = bump(0.0);
    let trace = run(&spec, 50.0, 3.0);
    assert!(trace.blowup.is_none());
    assert!(trace.len() > 100);
    for col in [
        &trace.f0,
        &trace.f0p,
        &trace.f1,
        &trace.sup_norm,
        &trace.source_integral,
    ] {
        assert!(col.iter().all(|v| *v == 0.0));
    }
    assert_eq!(identity_residual(&trace, spec.mu), 0.0);
}

#[test]
fn linear_mean_velocity_decays_like_the_damping() {
    // without the source F0'' + μ F0'/(1+t) = 0
    let spec = bump(0.5);
    let err = |div: f64| {
        let grid = Grid::new(1.0 / div, 0.5, 20.0, 1.0);
        let trace = solve_with(&spec, &grid, 1e6, &SolverOptions::linear()).unwrap();
        trace
            .times
            .iter()
            .zip(&trace.f0p)
            .map(|(t, v)| (v / (trace.f0p[0] * (1.0 + t).powf(-spec.mu)) - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(25.0), err(50.0));
    assert!(coarse < 1e-3, "coarse error {coarse}");
    let ratio = coarse / fine;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} ({coarse} / {fine})");
}

#[test]
fn blowup_time_decreases_with_eps_at_two_resolutions() {
    for div in [50.0, 100.0] {
        let times: Vec<f64> = [0.25, 0.5, 1.0]
            .iter()
            .map(|&e| blowup_time(&run(&bump(e), div, 120.0)))
            .collect();
        assert!(times.windows(2).all(|w| w[1] < w[0]), "dr = 1/{div}: {times:?}");
    }
}

#[test]
fn identity_residual_is_second_order() {
    let spec = bump(0.5);
    let traces: Vec<SolutionTrace> = [50.0, 100.0, 200.0].iter().map(|&d| run(&spec, d, 60.0)).collect();
    let window = traces[2].window_end(0.9);
    let res: Vec<f64> = traces
        .iter()
        .map(|t| identity_residual_until(t, spec.mu, window))
        .collect();
    assert!(res[2] < 1e-2, "baseline residual {}", res[2]);
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} in {res:?}");
    }
}

#[test]
fn sup_norm_converges_at_second_order_after_focusing() {
    // the r = R kink of the data focuses at the origin near t = R; the window
    // starts after it
    let spec = bump(0.5);
    let traces: Vec<SolutionTrace> = [50.0, 100.0, 200.0].iter().map(|&d| run(&spec, d, 60.0)).collect();
    let diff = |a: &SolutionTrace, b: &SolutionTrace| {
        let mut worst = 0.0f64;
        for (k, &t) in a.times.iter().enumerate() {
            if !(1.5..=30.0).contains(&t) {
                continue;
            }
            let j = b.times.partition_point(|&s| s < t - 1e-9);
            if (b.times[j] - t).abs() < 1e-9 {
                worst = worst.max((a.sup_norm[k] - b.sup_norm[j]).abs());
            }
        }
        worst
    };
    let (d1, d2) = (diff(&traces[0], &traces[1]), diff(&traces[1], &traces[2]));
    let ratio = d1 / d2;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} ({d1} / {d2})");
}

#[test]
fn positivity_chain_and_f1_bound() {
    let spec = bump(0.5);
    let trace = run(&spec, 100.0, 60.0);
    let zero = RadialProfile::zero(3, 1.0).unwrap();
    let c_f0 = c_fg(&spec.f, &zero).unwrap();
    let k = trace.count_until(trace.window_end(0.9));
    for j in 0..k {
        assert!(trace.f0p[j] > 0.0 && trace.f0[j] >= trace.f0[0], "step {j}");
        let bound = f1_lower_bound(trace.times[j], spec.mu, spec.eps, c_f0).unwrap();
        assert!(trace.f1[j] >= 0.95 * bound, "t = {}", trace.times[j]);
    }
}

#[test]
fn holder_lower_bound_holds() {
    let spec = bump(0.5);
    let ratio = holder_check(&run(&spec, 100.0, 60.0), &spec);
    assert!(ratio >= 1.0 - 1e-3, "ratio {ratio}");
}

#[test]
fn support_stays_near_the_light_cone() {
    // the discrete front has an Airy precursor of width ~ (t dr²)^{1/3}
    let spec = bump(0.25);
    let div = 50.0;
    let trace = run(&spec, div, 100.0);
    for (t, r) in trace.times.iter().zip(&trace.support_radius) {
        let allowed = (4.0 + 4.0 * (t * div).cbrt()) / div;
        assert!(r - (t + 1.0) <= allowed, "t = {t}: support {r}");
    }
}

#[test]
fn liouville_residual_is_small_before_blowup() {
    let spec = bump(0.5);
    let grid = Grid::default_for(&spec, 60.0);
    let reference = run(&spec, 200.0, 60.0);
    let window = reference.window_end(0.9);
    let mut worst = 0.0f64;
    solve_observed(&spec, &grid, 1e6, &SolverOptions::default(), |view| {
        if view.times[2] <= window {
            worst = worst.max(liouville_residual(&view, spec.n, spec.mu, spec.p).relative);
        }
    })
    .unwrap();
    assert!(worst < 1e-2, "relative residual {worst}");
}

#[test]
fn ode_limit_matches_kato_equality() {
    use blowuplab::odeblowup::{integrate_kato_equality, KatoParams};
    for (p, eps) in [(1.8, 0.5), (2.0, 1.0), (3.0, 2.0)] {
        let spec = ProblemSpec {
            mu: 0.0,
            ..ProblemSpec::uniform(3, 0.5, p, eps, 1.0).unwrap()
        };
        let policy = GridPolicy {
            options: SolverOptions::ode_limit(),
            ..GridPolicy::default_for(&spec, 50.0)
        };
        let est = estimate_blowup_time(&spec, &policy).unwrap();
        let kato = KatoParams {
            p,
            a: 1.0,
            q: 0.0,
            growth: 1.0,
            source: 1.0,
            shift: 1.0,
            t0: 1.0,
            f_init: eps,
            fp_init: eps,
        };
        let oracle = integrate_kato_equality(&kato, 1e10, 1e-3).unwrap().blowup_time();
        assert!(
            (est.t_est / oracle - 1.0).abs() < 1e-2,
            "p={p}, eps={eps}: {} vs {oracle}",
            est.t_est
        );
        assert!(est.t_lower <= est.t_est && est.t_est <= est.t_upper);
    }
}

#[test]
fn doubled_eps_gives_earlier_estimate() {
    let spec = bump(0.5);
    let policy = GridPolicy {
        dr: 1.0 / 100.0,
        ..GridPolicy::default_for(&spec, 60.0)
    };
    let slow = estimate_blowup_time(&spec, &policy).unwrap();
    let fast = estimate_blowup_time(&spec.with_eps(1.0), &policy).unwrap();
    assert!(fast.t_upper < slow.t_lower, "{fast:?} vs {slow:?}");
    assert_eq!(slow.levels.len(), 3);
    assert!(slow.spread < 0.1);
}

#[test]
fn zero_data_never_blows_up() {
    let spec = bump(0.0);
    let policy = GridPolicy {
        dr: 1.0 / 50.0,
        ..GridPolicy::default_for(&spec, 5.0)
    };
    assert!(matches!(estimate_blowup_time(&spec, &policy), Err(Error::NoBlowup(_))));
}

#[test]
fn grid_and_spec_errors() {
    let spec = bump(0.5);
    let mut grid = Grid::new(0.02, 0.5, 10.0, 1.0);
    grid.dt = 0.02;
    assert!(matches!(solve(&spec, &grid, 1e6), Err(Error::CflViolation { .. })));

    // allowed by cfl but above the stability limit of the stencil in n = 5
    let spec5 = ProblemSpec::with_bump(5, 0.5, 1.5, 0.5, 1.0, 1.0).unwrap();
    let grid5 = Grid::new(0.02, 0.9, 10.0, 1.0);
    assert!(matches!(solve(&spec5, &grid5, 1e6), Err(Error::CflViolation { .. })));

    let short = Grid {
        r_max: 5.0,
        ..Grid::new(0.02, 0.5, 10.0, 1.0)
    };
    assert!(matches!(solve(&spec, &short, 1e6), Err(Error::BoundaryContact { .. })));

    for bad in [
        ProblemSpec {
            mu: 0.0,
            ..spec.clone()
        },
        ProblemSpec { p: 1.0, ..spec.clone() },
        ProblemSpec {
            beta: -2.0,
            ..spec.clone()
        },
        ProblemSpec {
            support_radius: 0.5,
            ..spec.clone()
        },
        ProblemSpec { n: 2, ..spec.clone() },
    ] {
        assert!(matches!(bad.validate(), Err(Error::Domain(_))), "{bad:?}");
    }
    assert!(ProblemSpec::with_bump(3, 0.5, 1.8, 1.0, 1.0, 0.0).is_err());
}

#[test]
fn trace_serializes_with_capitalized_functionals() {
    let trace = run(&bump(0.5), 25.0, 2.0);
    let json = serde_json::to_value(&trace).unwrap();
    for key in [
        "times",
        "F0",
        "F0p",
        "F1",
        "sup_norm",
        "support_radius",
        "source_integral",
    ] {
        assert!(json.get(key).is_some(), "{key}");
    }
}
