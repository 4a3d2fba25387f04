use implicit_online::data::{gen_lower_bound, parse_libsvm, preprocess, write_libsvm};
use implicit_online::learners::run;
use implicit_online::linalg::{dist_sq, dot, norm};
use implicit_online::losses::pairwise_variability_term;
use implicit_online::metrics::{regret, temporal_variability};
use implicit_online::prox::implicit_step;
use implicit_online::{Algorithm, Dataset, LearnerConfig, Loss, MirrorSetup, SparseRow, Task};
use proptest::prelude::*;

fn features(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, d).prop_filter("nonzero", |z| norm(z) > 1e-3)
}

fn loss_1d() -> impl Strategy<Value = Loss> {
    prop_oneof![
        (features(1), any::<bool>()).prop_map(|(z, s)| Loss::hinge(z, if s { 1.0 } else { -1.0 }).unwrap()),
        (features(1), -5.0..5.0f64).prop_map(|(z, y)| Loss::absolute(z, y).unwrap()),
        (features(1), -5.0..5.0f64).prop_map(|(z, y)| Loss::square(z, y).unwrap()),
        (-20.0..20.0f64).prop_map(|y| Loss::quad1d(y).unwrap()),
        (features(1), 0.0..3.0f64).prop_map(|(g, s)| Loss::linear(g, s).unwrap()),
    ]
}

fn loss_2d() -> impl Strategy<Value = Loss> {
    prop_oneof![
        (features(2), any::<bool>()).prop_map(|(z, s)| Loss::hinge(z, if s { 1.0 } else { -1.0 }).unwrap()),
        (features(2), -5.0..5.0f64).prop_map(|(z, y)| Loss::absolute(z, y).unwrap()),
        (features(2), -5.0..5.0f64).prop_map(|(z, y)| Loss::square(z, y).unwrap()),
        (features(2), 0.0..3.0f64).prop_map(|(g, s)| Loss::linear(g, s).unwrap()),
    ]
}

fn setup() -> impl Strategy<Value = MirrorSetup> {
    prop_oneof![Just(MirrorSetup::unconstrained()), (0.5..5.0f64).prop_map(|r| MirrorSetup::ball(r).unwrap())]
}

fn eta() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #[test]
    fn subgradient_matches_finite_differences(loss in loss_2d(), x in prop::collection::vec(-4.0..4.0f64, 2)) {
        let g = loss.subgradient(&x).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm, f0) = (loss.eval(&xp).unwrap(), loss.eval(&xm).unwrap(), loss.eval(&x).unwrap());
            // one-sided slopes bracket any subgradient component at a kink
            let right = (fp - f0) / h;
            let left = (f0 - fm) / h;
            prop_assert!(g[k] <= right.max(left) + 1e-4 && g[k] >= right.min(left) - 1e-4);
        }
    }

    #[test]
    fn subgradient_inequality(loss in loss_2d(), x in prop::collection::vec(-4.0..4.0f64, 2), y in prop::collection::vec(-4.0..4.0f64, 2)) {
        let g = loss.subgradient(&x).unwrap();
        let lhs = loss.eval(&y).unwrap();
        let rhs = loss.eval(&x).unwrap() + dot(&g, &[y[0] - x[0], y[1] - x[1]]);
        prop_assert!(lhs >= rhs - 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn variability_pair_terms_are_not_both_negative(a in loss_1d(), b in loss_1d(), r in 0.5..5.0f64) {
        let s = MirrorSetup::ball(r).unwrap();
        let ab = pairwise_variability_term(&a, &b, &s).unwrap();
        let ba = pairwise_variability_term(&b, &a, &s).unwrap();
        prop_assert!(ab + ba >= -1e-9);
        prop_assert!(pairwise_variability_term(&a, &a, &s).unwrap() == 0.0);
    }

    #[test]
    fn variability_dominates_pointwise_differences(a in loss_1d(), b in loss_1d(), r in 0.5..5.0f64, x in -1.0..1.0f64) {
        let s = MirrorSetup::ball(r).unwrap();
        let term = pairwise_variability_term(&a, &b, &s).unwrap();
        let p = [x * r];
        prop_assert!(term >= a.eval(&p).unwrap() - b.eval(&p).unwrap() - 1e-9);
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive(
        s in setup(),
        x in prop::collection::vec(-10.0..10.0f64, 3),
        y in prop::collection::vec(-10.0..10.0f64, 3),
    ) {
        let px = s.project(&x);
        let py = s.project(&y);
        prop_assert_eq!(s.project(&px), px.clone());
        prop_assert!(s.contains(&px, 1e-12));
        prop_assert!(dist_sq(&px, &py) <= dist_sq(&x, &y) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn bregman_is_bounded_by_the_diameter(
        r in 0.5..5.0f64,
        x in prop::collection::vec(-10.0..10.0f64, 3),
        y in prop::collection::vec(-10.0..10.0f64, 3),
    ) {
        let s = MirrorSetup::ball(r).unwrap();
        let b = s.bregman(&s.project(&x), &s.project(&y)).unwrap();
        prop_assert!(b >= 0.0);
        prop_assert!(b <= s.bregman_diameter_sq() * (1.0 + 1e-12));
    }

    #[test]
    fn implicit_step_stays_feasible_with_nonnegative_delta(loss in loss_2d(), s in setup(), x in prop::collection::vec(-5.0..5.0f64, 2), eta in eta()) {
        let x_t = s.project(&x);
        let step = implicit_step(&loss, &x_t, eta, &s).unwrap();
        prop_assert!(s.contains(&step.x_next, 1e-9));
        let delta = loss.eval(&x_t).unwrap() - loss.eval(&step.x_next).unwrap() - s.bregman(&step.x_next, &x_t).unwrap() / eta;
        prop_assert!(delta >= -1e-9);
    }

    #[test]
    fn learners_stay_feasible(
        seq in prop::collection::vec(loss_2d(), 1..40),
        r in 0.5..3.0f64,
        beta in (-3.0..3.0f64).prop_map(|e| 2f64.powf(e)),
    ) {
        let s = MirrorSetup::ball(r).unwrap();
        for algo in [Algorithm::Ogd, Algorithm::AdaOgd, Algorithm::ImplicitDecay, Algorithm::AdaImplicit] {
            let trace = run(&LearnerConfig::new(algo, beta, vec![0.0, 0.0], s.clone()), &seq).unwrap();
            prop_assert!(trace.records.iter().all(|rec| s.contains(&rec.x, 1e-9)));
            prop_assert!(s.contains(&trace.x_final, 1e-9));
        }
    }

    #[test]
    fn adaimplicit_lambda_is_monotone(seq in prop::collection::vec(loss_2d(), 1..60), beta in 0.1..10.0f64) {
        let s = MirrorSetup::ball(2.0).unwrap();
        let trace = run(&LearnerConfig::new(Algorithm::AdaImplicit, beta, vec![0.0, 0.0], s), &seq).unwrap();
        let mut prev = 0.0;
        for rec in &trace.records {
            prop_assert!(rec.delta >= -1e-9);
            prop_assert!(rec.lambda >= prev - 1e-12);
            prev = rec.lambda;
        }
        prop_assert!(trace.lambda_final >= prev - 1e-12);
    }

    #[test]
    fn doubling_restarts_return_to_the_initial_point(seq in prop::collection::vec(loss_1d().prop_filter("lipschitz", |l| l.lipschitz().is_some()), 1..80), x0 in -1.0..1.0f64) {
        let s = MirrorSetup::ball(2.0).unwrap();
        let l = seq.iter().map(|loss| loss.lipschitz_on(&s).unwrap()).fold(1e-3, f64::max);
        let cfg = LearnerConfig::new(Algorithm::DoublingImplicit, 1.0, vec![x0], s).with_lipschitz(l);
        let trace = run(&cfg, &seq).unwrap();
        for t in 1..=trace.horizon() {
            if trace.records[t - 1].restarted {
                prop_assert_eq!(trace.iterate(t + 1), &[x0][..]);
            }
        }
        prop_assert_eq!(trace.restarts, trace.records.iter().filter(|r| r.restarted).count());
    }

    #[test]
    fn regret_is_translation_invariant(
        zs in prop::collection::vec((features(2), -3.0..3.0f64), 1..30),
        shift in prop::collection::vec(-5.0..5.0f64, 2),
        u in prop::collection::vec(-2.0..2.0f64, 2),
        beta in 0.1..5.0f64,
    ) {
        // moving the problem by c moves every implicit iterate by c
        let seq: Vec<Loss> = zs.iter().map(|(z, y)| Loss::absolute(z.clone(), *y).unwrap()).collect();
        let moved: Vec<Loss> = zs.iter().map(|(z, y)| Loss::absolute(z.clone(), y + dot(z, &shift)).unwrap()).collect();
        let u_moved = [u[0] + shift[0], u[1] + shift[1]];
        for algo in [Algorithm::ImplicitDecay, Algorithm::AdaImplicit] {
            let a = run(&LearnerConfig::new(algo, beta, vec![0.0, 0.0], MirrorSetup::unconstrained()), &seq).unwrap();
            let b = run(&LearnerConfig::new(algo, beta, shift.clone(), MirrorSetup::unconstrained()), &moved).unwrap();
            let (ra, rb) = (regret(&a, &seq, &u).unwrap(), regret(&b, &moved, &u_moved).unwrap());
            prop_assert!((ra - rb).abs() <= 1e-7 * (1.0 + ra.abs()), "{:?}: {} vs {}", algo, ra, rb);
        }
    }

    #[test]
    fn lower_bound_sequence(v in 0.0..1000.0f64, x1 in prop::collection::vec(-0.7..0.7f64, 2), t in 1usize..50) {
        let s = MirrorSetup::ball(1.0).unwrap();
        let seq = gen_lower_bound(v, &s, &x1, t).unwrap();
        let Loss::Linear { g, s: scale } = &seq[0] else { panic!("linear sequence expected") };
        prop_assert!((norm(g) - 1.0).abs() <= 1e-12);
        prop_assert!(dot(g, &x1).abs() <= 1e-12);
        prop_assert!((scale - v).abs() <= 1e-12 * (1.0 + v));
        let vt = temporal_variability(&seq, &s).unwrap();
        let expected = if t == 1 { 0.0 } else { v };
        prop_assert!((vt - expected).abs() <= 1e-9 * (1.0 + v));
    }

    #[test]
    fn libsvm_round_trip(
        rows in prop::collection::vec(
            (any::<bool>(), prop::collection::btree_map(1usize..20, -1e3..1e3f64, 1..6)),
            1..20,
        )
    ) {
        let ds = Dataset {
            rows: rows
                .iter()
                .map(|(_, m)| SparseRow { indices: m.keys().copied().collect(), values: m.values().copied().collect() })
                .collect(),
            labels: rows.iter().map(|(y, _)| if *y { 1.0 } else { -1.0 }).collect(),
            d: rows.iter().flat_map(|(_, m)| m.keys().copied()).max().unwrap(),
            task: Task::Classification,
            has_bias: false,
        };
        let text = write_libsvm(&ds);
        let back = parse_libsvm(text.as_bytes(), Task::Classification).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn preprocessing_is_idempotent_and_bounded(
        rows in prop::collection::vec(prop::collection::btree_map(1usize..8, -50.0..50.0f64, 1..5), 1..15)
    ) {
        let ds = Dataset {
            labels: vec![0.5; rows.len()],
            rows: rows
                .iter()
                .map(|m| SparseRow { indices: m.keys().copied().collect(), values: m.values().copied().collect() })
                .collect(),
            d: 8,
            task: Task::Regression,
            has_bias: false,
        };
        let once = preprocess(&ds);
        prop_assert_eq!(preprocess(&once), once.clone());
        prop_assert_eq!(once.d, 9);
        for row in &once.rows {
            prop_assert!(row.values.iter().all(|v| (-1.0..=1.0).contains(v)));
            prop_assert_eq!(row.indices.last(), Some(&9));
            prop_assert_eq!(row.values.last(), Some(&1.0));
        }
    }
}
