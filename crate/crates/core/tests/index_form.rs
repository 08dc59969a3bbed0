use std::f64::consts::PI;

use blowuplab::index_form::{
    axis_sine_trial, completed_square_axis, find_conjugate, fredholm_diagnostics, index_form,
    laplacian_identity_odd, ConjugateSearchParams, ConjugateStatus, VariationField,
};
use blowuplab::models::{run_axis_even, run_boundary_even, run_scenario, RunStatus};
use blowuplab::{
    CoefficientProfile, Error, FixedPointScenario, Location, Parity, SolverTolerances, SwirlConstants,
    VerticalPressure,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn axis(b0: f64, prr: f64, a0: f64, t_end: f64) -> FixedPointScenario {
    FixedPointScenario {
        location: Location::Axis,
        parity: Parity::EvenSwirl,
        swirl: SwirlConstants::axis(b0),
        a0,
        c0z: 2.0 * a0,
        pressure_rr: CoefficientProfile::constant(prr),
        pressure_zz: VerticalPressure::Constraint,
        t_end,
        tolerances: SolverTolerances::default(),
    }
}

fn odd(b3: f64, prr: f64, a0: f64, t_end: f64) -> FixedPointScenario {
    FixedPointScenario {
        location: Location::Boundary,
        parity: Parity::OddSwirl,
        swirl: SwirlConstants::boundary_odd(b3),
        a0,
        c0z: a0,
        pressure_rr: CoefficientProfile::constant(prr),
        pressure_zz: VerticalPressure::Constraint,
        t_end,
        tolerances: SolverTolerances::default(),
    }
}

/// `f'' = 1`, `f = 1 - a0 t + t^2/2` with `f'(T)^2 = a0^2 - 2`.
fn boundary_parabola(q2: f64) -> FixedPointScenario {
    let mut tol = SolverTolerances::default();
    tol.f_stop = 1e-9;
    FixedPointScenario {
        location: Location::Boundary,
        parity: Parity::EvenSwirl,
        swirl: SwirlConstants::boundary_even(0.5, 0.5),
        a0: (2.0 + q2).sqrt(),
        c0z: (2.0 + q2).sqrt(),
        pressure_rr: CoefficientProfile::constant(-0.75),
        pressure_zz: VerticalPressure::Constraint,
        t_end: 2.0,
        tolerances: tol,
    }
}

#[test]
fn frozen_axis_half_sine_sign() {
    let s = axis(1.0, 1.0, 0.0, 10.0);
    let sol = run_axis_even(&s).unwrap();
    let short = axis_sine_trial(&sol, &s, 0.5, 0.5 + PI / 2.0, 1, 2000);
    let long = axis_sine_trial(&sol, &s, 0.5, 0.5 + 2.0 * PI, 1, 4000);
    let i_short = index_form(&short, &sol, &s).unwrap().value;
    let i_long = index_form(&long, &sol, &s).unwrap().value;
    assert!(i_short > 0.0, "{i_short}");
    assert!(i_long < 0.0, "{i_long}");
    // analytic value of the frozen form with w = 2, m = 1
    let frozen = |l: f64| {
        let k = 2.0 * 2.0 * l / (PI * l);
        l / 2.0 * (PI * PI / (l * l) - 4.0) + k * k * l
    };
    assert!((i_short - frozen(PI / 2.0)).abs() < 1e-7);
    assert!((i_long - frozen(2.0 * PI)).abs() < 1e-7);
}

#[test]
fn mean_zero_sine_flips_at_threshold() {
    let s = axis(1.0, 1.0, 0.0, 10.0);
    let sol = run_axis_even(&s).unwrap();
    // m = 2 in s = t, threshold Δs = π
    for (ds, sign) in [(0.9 * PI, 1.0), (1.1 * PI, -1.0)] {
        let v = axis_sine_trial(&sol, &s, 0.2, 0.2 + ds, 2, 4000);
        let i = index_form(&v, &sol, &s).unwrap().value;
        let exact = ds / 2.0 * (4.0 * PI * PI / (ds * ds) - 4.0);
        assert!(i * sign > 0.0);
        assert!((i - exact).abs() < 1e-7, "{i} vs {exact}");
    }
}

#[test]
fn completed_square_matches_direct_quadrature() {
    let s = axis(0.8, 3.0, 0.3, 6.0);
    let sol = run_axis_even(&s).unwrap();
    for (t1, t2, m) in [(0.1, 2.0, 2), (1.0, 4.5, 4), (0.0, 5.0, 2)] {
        let v = axis_sine_trial(&sol, &s, t1, t2, m, 8000);
        let direct = index_form(&v, &sol, &s).unwrap().value;
        let square = completed_square_axis(&v, &sol, &s).unwrap();
        assert!((direct - square).abs() < 1e-7, "{direct} vs {square}");
    }
}

#[test]
fn endpoint_and_coverage_errors() {
    let s = axis(1.0, 1.0, 0.0, 2.0);
    let sol = run_axis_even(&s).unwrap();
    let bad = VariationField::from_fn(0.0, 1.0, 100, |t| ([t, 0.0, 0.0], [1.0, 0.0, 0.0]));
    assert!(matches!(index_form(&bad, &sol, &s), Err(Error::EndpointNonzero(_))));
    let outside = VariationField::sine_series(1.0, 3.0, &[[1.0, 0.0, 0.0]], 100);
    assert!(matches!(index_form(&outside, &sol, &s), Err(Error::InvalidArgument(_))));
    let zero = VariationField::sine_series(0.0, 1.0, &[[0.0; 3]], 100);
    assert_eq!(index_form(&zero, &sol, &s).unwrap().value, 0.0);
}

#[test]
fn odd_swirl_is_positive_for_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = odd(1.3, 0.5, 0.4, 3.0);
    let sol = run_scenario(&s).unwrap();
    for _ in 0..50 {
        let v = VariationField::random(&mut rng, 0.2, 2.8, 5, 400);
        let r = index_form(&v, &sol, &s).unwrap();
        assert!(r.value >= -1e-9, "{}", r.value);
    }
}

#[test]
fn axis_search_finds_consecutive_intervals() {
    let s = axis(1.0, 4.0, 0.0, 12.0);
    let sol = run_axis_even(&s).unwrap();
    let r = find_conjugate(&sol, &s, &ConjugateSearchParams::default()).unwrap();
    assert_eq!(r.status, ConjugateStatus::Found);
    assert!(r.intervals.len() >= 2);
    for w in r.intervals.windows(2) {
        assert_eq!(w[0].1, w[1].0);
    }
    for (t1, t2, i) in &r.intervals {
        assert!(*i < -1e-6);
        assert!(sol.winding_at(*t2) - sol.winding_at(*t1) > PI);
    }
    let gap: f64 = r.intervals.iter().map(|(a, b, _)| 2.0 / (b - a)).sum();
    assert!((r.gap_sum - gap).abs() < 1e-12);
}

#[test]
fn zero_swirl_axis_has_no_certificate() {
    let s = axis(0.0, 0.0, 0.3, 2.0);
    let sol = run_axis_even(&s).unwrap();
    let r = find_conjugate(&sol, &s, &ConjugateSearchParams::default()).unwrap();
    assert_eq!(r.status, ConjugateStatus::NoneFound);
}

#[test]
fn boundary_log_oscillator_finds_three_intervals() {
    let s = boundary_parabola(0.02);
    let sol = run_boundary_even(&s).unwrap();
    assert_eq!(sol.terminated, RunStatus::BlowupDetected);
    let r = find_conjugate(&sol, &s, &ConjugateSearchParams::log_oscillator()).unwrap();
    assert_eq!(r.status, ConjugateStatus::Found, "{:?}", r.diagnostics);
    assert!(r.intervals.len() >= 3, "{:?}", r.intervals);
    assert_eq!(r.diagnostics["q_source"], "estimated_from_last_point");
    let t_star = s.a0 - 0.02f64.sqrt();
    assert!((r.diagnostics["blowup_time_estimate"].as_f64().unwrap() - t_star).abs() < 1e-6);
    for w in r.intervals.windows(2) {
        assert!(w[0].1 <= w[1].0);
    }
}

#[test]
fn boundary_below_threshold_has_none() {
    // ζ^2 = 2 < q^2 = 3
    let s = boundary_parabola(3.0);
    let sol = run_boundary_even(&s).unwrap();
    let r = find_conjugate(&sol, &s, &ConjugateSearchParams::log_oscillator()).unwrap();
    assert_eq!(r.status, ConjugateStatus::NoneFound);
}

#[test]
fn odd_swirl_search_reports_none() {
    let s = odd(1.0, 0.0, 0.2, 2.0);
    let sol = run_scenario(&s).unwrap();
    for p in [ConjugateSearchParams::default(), ConjugateSearchParams::log_oscillator()] {
        assert_eq!(find_conjugate(&sol, &s, &p).unwrap().status, ConjugateStatus::NoneFound);
    }
}

#[test]
fn odd_laplacian_on_a_linear_run() {
    // P_rr = 0: f = 1 - a0 t
    let s = odd(1.0, 0.0, 0.4, 2.0);
    let sol = run_scenario(&s).unwrap();
    let d = laplacian_identity_odd(&sol).unwrap();
    // ∫ -2 a0^2/(1 - a0 t)^2 = -2 a0 (1/(1 - a0 T) - 1)
    let exact = -2.0 * 0.4 * (1.0 / (1.0 - 0.8) - 1.0);
    assert!((d.int_delta_p.last().unwrap() - exact).abs() < 1e-6);
    assert!(d.poincare_holds, "{} {} {}", d.int_delta_p.last().unwrap(), d.sup_xi_sq, d.poincare_constant);
    let fr = fredholm_diagnostics(&sol, &s).unwrap();
    assert_eq!(fr.basis[2], "r");
    assert!(fr.final_integral > 0.0);
}

#[test]
fn fredholm_needs_vorticity() {
    let s = axis(0.0, 0.0, 0.3, 1.0);
    let sol = run_axis_even(&s).unwrap();
    assert!(matches!(fredholm_diagnostics(&sol, &s), Err(Error::ZeroVorticity)));
}
