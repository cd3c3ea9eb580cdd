use admissible_flow::admissible::{
    build_invariants, curvature_weight, fano_parameters, fano_residual, single_root_check, AdmissibleData,
    BaseFactor,
};
use admissible_flow::config::{parse_config, serialize_config, RunConfig};
use admissible_flow::flow::{FlowConfig, InitialData};
use admissible_flow::gqe::gqe_profile;
use admissible_flow::polycalc::{exp_weighted_integral, isolate_real_roots, rat, rat_int, rat_to_f64, Polynomial};
use admissible_flow::stability::{log_concavity_check, q_function};
use num_rational::BigRational;
use proptest::prelude::*;

fn small_poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-20i64..=20, 1..=7).prop_map(|c| Polynomial::from_ints(&c))
}

fn interval() -> impl Strategy<Value = (BigRational, BigRational)> {
    (-30i64..30, 1i64..40, 1i64..9).prop_map(|(a, w, den)| (rat(a, den), rat(a + w, den)))
}

fn abs_scale(p: &Polynomial, a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs()).max(1.0);
    p.coeffs().iter().enumerate().map(|(i, c)| rat_to_f64(c).abs() * m.powi(i as i32)).sum::<f64>() * (b - a)
}

/// Base factors with small, nonzero `x`.
fn factor(xmax: i64) -> impl Strategy<Value = BaseFactor> {
    (1u32..=3, -5i64..=5, (1i64..=xmax).prop_flat_map(|m| prop_oneof![Just(m), Just(-m)]))
        .prop_map(|(d, s, m)| BaseFactor::new(d, rat_int(s), rat(m, 10)))
}

fn data(xmax: i64) -> impl Strategy<Value = AdmissibleData> {
    (prop::collection::vec(factor(xmax), 0..=2), 0u32..=2, 0u32..=2)
        .prop_map(|(f, d0, dinf)| AdmissibleData::new(f, d0, dinf).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn definite_integral_is_antiderivative_difference(p in small_poly(), (a, b) in interval()) {
        let q = p.antiderivative();
        prop_assert_eq!(p.definite_integral(&a, &b), q.eval(&b) - q.eval(&a));
    }

    #[test]
    fn exp_weight_zero_is_plain_integral(p in small_poly(), (a, b) in interval()) {
        let exact = rat_to_f64(&p.definite_integral(&a, &b));
        let (af, bf) = (rat_to_f64(&a), rat_to_f64(&b));
        let got = exp_weighted_integral(&p, 0.0, af, bf);
        prop_assert!((got - exact).abs() <= 1e-14 * abs_scale(&p, af, bf), "{got} vs {exact}");
    }

    #[test]
    fn k_derivative_is_moment(p in small_poly(), k in -8.0f64..8.0) {
        let h = 1e-3;
        let fd = (exp_weighted_integral(&p, k + h, -1.0, 1.0) - exp_weighted_integral(&p, k - h, -1.0, 1.0)) / (2.0 * h);
        let tp = &p * &Polynomial::identity();
        let exact = exp_weighted_integral(&tp, k, -1.0, 1.0);
        let scale = abs_scale(&p, -1.0, 1.0) * k.abs().exp();
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "{fd} vs {exact}");
    }

    #[test]
    fn root_count_matches_sign_changes(
        picks in prop::sample::subsequence((0..10i64).collect::<Vec<_>>(), 0..=6),
        lead in prop_oneof![Just(-3i64), Just(1), Just(2)],
        quad in prop::option::of(1i64..5),
    ) {
        // Roots sit on a 0.2 lattice shifted off the sample points.
        let mut p = Polynomial::constant(rat_int(lead));
        for j in &picks {
            let r = rat(-9 + 2 * j, 10) + rat(1, 97);
            p = &p * &Polynomial::linear(-r, rat_int(1));
        }
        if let Some(c) = quad {
            p = &p * &Polynomial::from_ints(&[c, 0, 1]);
        }
        let brackets = isolate_real_roots(&p, &rat_int(-1), &rat_int(1)).unwrap();
        let samples: Vec<f64> = (0..10_000).map(|i| p.eval_f64(-1.0 + (i as f64 + 0.5) * 2e-4)).collect();
        let changes = samples.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        prop_assert_eq!(brackets.len(), picks.len());
        prop_assert_eq!(changes, picks.len());
    }

    #[test]
    fn boundary_values_and_mean_curvature(d in data(9)) {
        let inv = build_invariants(&d).unwrap();
        let one = rat_int(1);
        let minus = rat_int(-1);
        prop_assert_eq!(inv.p.eval(&minus), rat_int(2) * inv.p_c.eval(&minus));
        prop_assert_eq!(inv.p.eval(&one), rat_int(-2) * inv.p_c.eval(&one));
        let lhs = &inv.p.derivative() + &inv.p_c.scale(&(rat_int(2) * inv.mean_scalar_curvature()));
        let rhs = curvature_weight(&d, &inv.p_c).unwrap().scale(&rat_int(2));
        prop_assert_eq!(lhs.definite_integral(&minus, &one), rhs.definite_integral(&minus, &one));
    }

    #[test]
    fn p_is_affine_in_each_scalar_curvature(d in data(9), which in 0usize..2) {
        prop_assume!(which < d.base_factors.len());
        let bump = |k: i64| {
            let mut e = d.clone();
            e.base_factors[which].s = &e.base_factors[which].s + rat_int(k);
            build_invariants(&e).unwrap().p
        };
        let (p0, p1, p2) = (bump(0), bump(1), bump(2));
        prop_assert!((&(&p2 - &p1) - &(&p1 - &p0)).is_zero());
    }

    #[test]
    fn fano_classes_have_root_at_shift(l in 1u32..=3, m in 1i64..=9, neg in any::<bool>()) {
        let x = rat(if neg { -m } else { m }, 10);
        let d = AdmissibleData::koiso(l, x).unwrap();
        let inv = build_invariants(&d).unwrap();
        let fp = fano_parameters(&d);
        prop_assert!(fano_residual(&inv, &fp).is_zero());
        let check = single_root_check(&inv).unwrap();
        prop_assert!(check.holds());
        let shift = &fp.c / (rat_int(2) * &fp.lambda);
        prop_assert!(check.root().unwrap().contains(&shift));
    }

    #[test]
    fn config_round_trip(
        d in data(9),
        n in (8usize..200).prop_map(|h| 2 * h),
        cfl in 0.01f64..0.5,
        t_end in 0.1f64..100.0,
        perturbed in prop::option::of((-0.5f64..0.5, 1.0f64..4.0)),
        scales in prop::option::of(prop::collection::vec((1i64..=8, 1i64..=8), 1..4)),
    ) {
        let config = RunConfig {
            data: d,
            flow: FlowConfig { n, cfl, t_end, ..FlowConfig::default() },
            initial: match perturbed {
                Some((amplitude, power)) => InitialData::Perturbed { amplitude, power },
                None => InitialData::Canonical,
            },
            sweep: scales.map(|v| v.into_iter().map(|(a, b)| rat(a.min(b), a.max(b))).collect()),
        };
        let text = serialize_config(&config);
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &config);
        prop_assert_eq!(serialize_config(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Log-concavity of `P` together with a single root forces the decay
    /// condition.
    #[test]
    fn sign_theorem_small_x(d in data(1)) {
        let inv = build_invariants(&d).unwrap();
        let single = single_root_check(&inv).unwrap().holds();
        prop_assume!(single && log_concavity_check(&inv));
        let profile = gqe_profile(&inv).unwrap();
        let (_, report) = q_function(&profile, &inv).unwrap();
        prop_assert!(report.condition_holds, "q_min = {}", report.q_min);
    }
}
