use blowuplab::criteria::sturm_compare;
use blowuplab::index_form::{
    axis_sine_trial, build_stretch, completed_square_axis, index_form, VariationField,
};
use blowuplab::models::{central_force_oracle, run_axis_even, run_boundary_even, run_scenario};
use blowuplab::ode::{integrate, integrate_with, EventSpec, IntegrateOptions, SecondOrderIvp};
use blowuplab::{
    CoefficientProfile, FixedPointScenario, Location, Parity, SolverTolerances, SwirlConstants, VerticalPressure,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn knots(vals: Vec<f64>, t_end: f64) -> CoefficientProfile {
    let n = vals.len() - 1;
    CoefficientProfile::piecewise_linear(
        vals.into_iter()
            .enumerate()
            .map(|(i, v)| (t_end * i as f64 / n as f64, v))
            .collect(),
    )
}

fn profile(lo: f64, hi: f64, t_end: f64) -> impl Strategy<Value = CoefficientProfile> {
    prop_oneof![
        (lo..hi).prop_map(CoefficientProfile::constant),
        prop::collection::vec(lo..hi, 2..6).prop_map(move |v| knots(v, t_end)),
    ]
}

fn axis(b0: f64, prr: CoefficientProfile, a0: f64, t_end: f64) -> FixedPointScenario {
    FixedPointScenario {
        location: Location::Axis,
        parity: Parity::EvenSwirl,
        swirl: SwirlConstants::axis(b0),
        a0,
        c0z: 2.0 * a0,
        pressure_rr: prr,
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

fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, prop::bool::ANY).prop_map(|(x, s)| if s { x } else { -x })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_conserved(q in profile(-2.0, 4.0, 5.0)) {
        let tol = SolverTolerances::default();
        let ivp = SecondOrderIvp::new(
            |t, y, _, ypp| {
                let qv = q.value(t)?;
                ypp[0] = -qv * y[0];
                ypp[1] = -qv * y[1];
                Ok(())
            },
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            (0.0, 5.0),
        );
        let tr = integrate(&ivp, &tol, &[]).unwrap();
        for x in &tr.states {
            let w = x[0] * x[3] - x[1] * x[2];
            prop_assert!((w - 1.0).abs() <= 100.0 * tol.rel_tol * (1.0 + x[0].abs().max(x[1].abs()).powi(2)));
        }
    }

    #[test]
    fn event_times_do_not_depend_on_step_cap(q in profile(1.0, 9.0, 6.0)) {
        let tol = SolverTolerances::default();
        let ivp = SecondOrderIvp::new(
            |t, y, _, ypp| {
                ypp[0] = -q.value(t)? * y[0];
                Ok(())
            },
            vec![1.0],
            vec![0.0],
            (0.0, 6.0),
        );
        let ev = [EventSpec::component_zero("zero", 0)];
        let coarse = integrate(&ivp, &tol, &ev).unwrap();
        let fine = integrate_with(&ivp, &tol, &ev, &IntegrateOptions { max_step: Some(0.01), fixed_step: None }).unwrap();
        prop_assert_eq!(coarse.events.len(), fine.events.len());
        for (a, b) in coarse.events.iter().zip(&fine.events) {
            prop_assert!((a.t - b.t).abs() < 1e-8, "{} vs {}", a.t, b.t);
        }
    }

    #[test]
    fn oracle_matches_radial_equation(b0 in nonzero(0.5, 2.0), a0 in -0.5f64..0.5, f in profile(-1.0, 3.0, 5.0)) {
        let mut s = axis(b0, f.clone(), a0, 5.0);
        s.tolerances.rel_tol = 1e-12;
        s.tolerances.abs_tol = 1e-14;
        let sol = run_axis_even(&s).unwrap();
        let orc = central_force_oracle(b0, -a0, &f, 5.0, &s.tolerances).unwrap();
        for i in 0..=100 {
            let t = 0.05 * i as f64;
            prop_assert!((sol.f_at(t) - orc.rho_at(t)).abs() <= 1e-7);
        }
    }

    #[test]
    fn scenario_json_round_trip(b0 in -3.0f64..3.0, a0 in -2.0f64..2.0, p in profile(-5.0, 5.0, 3.0), t_end in 0.1f64..10.0) {
        let s = axis(b0, p, a0, t_end);
        prop_assert_eq!(FixedPointScenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn stretch_has_unit_determinant(
        which in 0usize..3,
        c in 0.2f64..1.5,
        d in -1.0f64..1.0,
        prr in -1.0f64..1.0,
        a0 in -0.4f64..0.4,
    ) {
        let mut s = axis(c, CoefficientProfile::constant(prr), a0, 2.0);
        if which == 1 {
            s.location = Location::Boundary;
            s.swirl = SwirlConstants::boundary_even(c, d);
            s.c0z = a0;
        } else if which == 2 {
            s = odd(c, prr, a0, 1.0);
        }
        let sol = run_scenario(&s).unwrap();
        for &t in &sol.grid {
            let m = build_stretch(&sol, &s, t);
            prop_assert!((m.det() - 1.0).abs() <= 1e-8, "t = {t}, det = {}", m.det());
            prop_assert!(m.is_symmetric(0.0) && m.is_positive_definite());
        }
    }

    #[test]
    fn index_form_scales_quadratically(seed in 0u64..1000, c in -4.0f64..4.0) {
        let s = odd(1.2, 0.3, 0.2, 2.0);
        let sol = run_scenario(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = VariationField::random(&mut rng, 0.1, 1.9, 4, 200);
        let i1 = index_form(&v, &sol, &s).unwrap().value;
        let ic = index_form(&v.scaled(c), &sol, &s).unwrap().value;
        prop_assert!((ic - c * c * i1).abs() <= 1e-10 * (1.0 + (c * c * i1).abs()));
    }

    #[test]
    fn odd_swirl_form_is_nonnegative(b3 in nonzero(0.1, 2.0), prr in -1.0f64..1.0, a0 in -0.3f64..0.3, seed in 0u64..10_000) {
        let s = odd(b3, prr, a0, 1.0);
        let sol = run_scenario(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let v = VariationField::random(&mut rng, 0.0, 1.0, 5, 200);
            prop_assert!(index_form(&v, &sol, &s).unwrap().value >= -1e-9);
        }
    }

    #[test]
    fn completed_square_agrees(b0 in nonzero(0.3, 1.5), prr in 0.5f64..4.0, a0 in -0.3f64..0.3, m in 1u32..4, t1 in 0.0f64..1.0, len in 0.5f64..3.0) {
        let s = axis(b0, CoefficientProfile::constant(prr), a0, 4.5);
        let sol = run_axis_even(&s).unwrap();
        let v = axis_sine_trial(&sol, &s, t1, t1 + len, 2 * m, 4000);
        let direct = index_form(&v, &sol, &s).unwrap().value;
        let square = completed_square_axis(&v, &sol, &s).unwrap();
        prop_assert!((direct - square).abs() <= 1e-7, "{direct} vs {square}");
    }

    #[test]
    fn reduction_of_order_residual(q1 in -3.0f64..0.0, gap in 0.0f64..1.0) {
        let tol = SolverTolerances::default();
        let r = sturm_compare(
            &CoefficientProfile::constant(q1),
            &CoefficientProfile::constant(q1 - gap),
            (1.0, 0.0),
            (0.0, 3.0),
            &tol,
        )
        .unwrap();
        prop_assert!(r.reduction_residual_q1.unwrap() <= 1e-6);
        prop_assert!(r.envelope.unwrap().holds);
    }

    #[test]
    fn boundary_trace_mode_keeps_constraint(b1 in 0.2f64..1.0, b2 in -0.5f64..1.0, prr in -1.0f64..1.0, a0 in -0.3f64..0.3) {
        let s = FixedPointScenario {
            location: Location::Boundary,
            parity: Parity::EvenSwirl,
            swirl: SwirlConstants::boundary_even(b1, b2),
            a0,
            c0z: a0,
            pressure_rr: CoefficientProfile::constant(prr),
            pressure_zz: VerticalPressure::DerivedFromTrace,
            t_end: 1.5,
            tolerances: SolverTolerances::default(),
        };
        let sol = run_boundary_even(&s).unwrap();
        prop_assert!(sol.constraint_residual.iter().all(|&r| r <= 1e-6));
    }
}
