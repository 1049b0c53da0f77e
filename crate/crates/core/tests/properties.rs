//! Randomized invariants of the order, the critical-time measure and extraction.

use lambdaflow::dissipation::is_solution;
use lambdaflow::metric::{uniform_grid, Point, SampledCurve};
use lambdaflow::order::{extract_minimal, is_minimal, precedes, singular_dilate, translate, Verdict};
use lambdaflow::problems::{cantor_scenario, degenerate_power_scenario, quadratic_scenario, x_tau};
use proptest::prelude::*;

const DT: f64 = 1e-3;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 16, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn waiting_time_equals_critical_measure(k in 0usize..=800) {
        let tau = k as f64 * DT;
        let s = degenerate_power_scenario(&[0.0, tau], 1.5).unwrap();
        let xt = s.solution(&format!("tau={tau}")).unwrap();
        let r = is_minimal(&s.problem, xt, None).unwrap();
        prop_assert!((r.critical_measure - tau).abs() <= 2.0 * DT);
        prop_assert_eq!(r.verdict == Verdict::Minimal, k <= 1);
    }

    #[test]
    fn extraction_recovers_x0_and_is_idempotent(k in 1usize..=800) {
        let tau = k as f64 * DT;
        let s = degenerate_power_scenario(&[0.0, tau], 1.5).unwrap();
        let p = &s.problem;
        let x0 = s.solution("tau=0").unwrap();
        let xt = s.solution(&format!("tau={tau}")).unwrap();
        let e = extract_minimal(p, xt).unwrap();
        let worst = e.curve.times().iter().zip(e.curve.points())
            .map(|(&t, q)| (q.x() - x_tau(0.0, t)).abs())
            .fold(0.0, f64::max);
        prop_assert!(worst <= 1e-2);
        prop_assert!(e.reparam.sup_error(|t| (t - tau).max(0.0)) <= 2.0 * DT);
        let again = extract_minimal(p, &e.curve).unwrap();
        prop_assert!(again.curve.sup_distance(&e.curve, &p.space) <= 1e-10);
        prop_assert!(precedes(xt, x0, &p.space, p.eps_d));
        prop_assert!(!precedes(x0, xt, &p.space, p.eps_d));
    }

    #[test]
    fn quadratic_flows_are_reflexive_minimal_and_shift_invariant(
        a in -2.0f64..2.0, b in -2.0f64..2.0, shift in 0usize..500,
    ) {
        prop_assume!(a.hypot(b) > 0.1);
        let s = quadratic_scenario(2).unwrap();
        let p = &s.problem;
        let c = SampledCurve::from_fn(uniform_grid(1.0, DT), |t| {
            Point::new(vec![a * (-t).exp(), b * (-t).exp()]).unwrap()
        }).unwrap();
        prop_assert!(is_solution(p, &c, None).unwrap().0);
        prop_assert!(precedes(&c, &c, &p.space, p.eps_d));
        prop_assert_eq!(is_minimal(p, &c, None).unwrap().verdict, Verdict::Minimal);
        let shifted = translate(&c, shift as f64 * DT).unwrap();
        prop_assert!(is_solution(p, &shifted, None).unwrap().0);
        prop_assert_eq!(is_minimal(p, &shifted, None).unwrap().verdict, Verdict::Minimal);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn cantor_dilation_is_detected_at_every_depth(depth in 1u32..=6) {
        let s = cantor_scenario(depth).unwrap();
        let p = &s.problem;
        let setup = s.cantor.as_ref().unwrap();
        let u = singular_dilate(&setup.w, &setup.dilation()).unwrap();
        let r = is_minimal(p, &u, None).unwrap();
        let mass = setup.singular_mass();
        prop_assert_eq!(r.verdict, Verdict::NotMinimal);
        prop_assert!((r.critical_measure - mass).abs() <= 0.1 * mass);
        prop_assert_eq!(is_minimal(p, &setup.w, None).unwrap().verdict, Verdict::Minimal);
    }
}
