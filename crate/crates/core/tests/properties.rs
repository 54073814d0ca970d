use proptest::prelude::*;

use holder_reg::calculus::{classify, HomogeneousSampler, Tolerances, Verdict};
use holder_reg::catalog::{PenaltySpec, ProblemSpec};
use holder_reg::config::RunConfig;
use holder_reg::lsip::{solve_lp, LpStatus, LsipProblem};
use holder_reg::moduli::sharp_minimum_modulus;
use holder_reg::penalty::penalty_threshold;
use holder_reg::report::to_json;
use holder_reg::setmap::{DirectionGrid, HolderOrder, ScalarFn, SetRepr};
use holder_reg::Settings;

fn order(q: f64) -> HolderOrder {
    HolderOrder::new(q).unwrap()
}

/// JSON-ish text assembled from the tokens the problem schemas use, so that
/// many cases get past the tokenizer and into field validation.
fn jsonish() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        Just("{".to_owned()),
        Just("}".to_owned()),
        Just("[".to_owned()),
        Just("]".to_owned()),
        Just(",".to_owned()),
        Just(":".to_owned()),
        Just("\"kind\"".to_owned()),
        Just("\"map\"".to_owned()),
        Just("\"function\"".to_owned()),
        Just("\"family\"".to_owned()),
        Just("\"params\"".to_owned()),
        Just("\"power\"".to_owned()),
        Just("\"epigraph\"".to_owned()),
        Just("\"exponent\"".to_owned()),
        Just("\"dim\"".to_owned()),
        Just("\"n\"".to_owned()),
        Just("\"c\"".to_owned()),
        Just("\"N\"".to_owned()),
        Just("\"finite\"".to_owned()),
        Just("\"rows\"".to_owned()),
        Just("\"f\"".to_owned()),
        Just("\"g\"".to_owned()),
        (-1e6f64..1e6).prop_map(|v| v.to_string()),
        (0u64..40).prop_map(|v| v.to_string()),
    ];
    prop::collection::vec(token, 0..40).prop_map(|t| t.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsers_never_panic_on_bytes(text in "\\PC{0,200}") {
        let _ = ProblemSpec::from_json(&text).map(|s| s.build());
        let _ = LsipProblem::from_json(&text);
        let _ = PenaltySpec::from_json(&text).map(|s| s.build(Some(1.0), None));
        let _ = RunConfig::from_toml(&text);
    }

    #[test]
    fn parsers_never_panic_on_schema_tokens(text in jsonish()) {
        let _ = ProblemSpec::from_json(&text).map(|s| s.build());
        let _ = LsipProblem::from_json(&text).map(|p| p.discretized());
        let _ = PenaltySpec::from_json(&text).map(|s| s.build(None, None));
    }

    #[test]
    fn reports_round_trip(values in prop::collection::vec(prop_oneof![
        any::<f64>(),
        Just(f64::INFINITY),
        Just(f64::NEG_INFINITY),
    ], 0..20)) {
        let text = to_json(&values).unwrap();
        let back: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.len(), values.len());
        for (v, b) in values.iter().zip(&back) {
            match v {
                v if v.is_nan() => prop_assert_eq!(b, "nan"),
                v if *v == f64::INFINITY => prop_assert_eq!(b, "inf"),
                v if *v == f64::NEG_INFINITY => prop_assert_eq!(b, "-inf"),
                v => prop_assert_eq!(b.as_f64().unwrap(), *v),
            }
        }
    }

    #[test]
    fn constant_sequences_converge_to_their_value(v in 1e-3f64..1e3, k in 3usize..12) {
        let (value, verdict, converged) = classify(&vec![v; k], &Tolerances::default());
        prop_assert!(converged);
        prop_assert_eq!(verdict, Verdict::Positive);
        prop_assert!((value - v).abs() <= 1e-12 * v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // H(u) = {c·u} on unit directions has lower and outer norm |c| at every order.
    #[test]
    fn exact_linear_sampler_norms(c in -5.0f64..5.0, q in 0.25f64..4.0) {
        prop_assume!(c.abs() > 1e-3);
        let h = HomogeneousSampler::exact(1, 1, order(q), DirectionGrid::new(1, 2).unwrap(), move |u: &[f64]| {
            SetRepr::point(vec![c * u[0]])
        })
        .unwrap();
        let (lo, hi) = (h.norm_lower(), h.norm_outer());
        prop_assert!(lo.value <= hi.value + 1e-12);
        prop_assert!((lo.value - c.abs()).abs() <= 1e-9, "lower {}", lo.value);
        prop_assert!((hi.value - c.abs()).abs() <= 1e-9, "outer {}", hi.value);
    }

    // c|x|^q has sharp constant exactly c at order q.
    #[test]
    fn power_sharp_constant(c in 0.1f64..10.0, q in 0.5f64..3.0) {
        let s = Settings::default();
        let f = ScalarFn::new(1, move |x| c * x[0].abs().powf(q));
        let r = sharp_minimum_modulus(&f, &[0.0], order(q), &s.radii, &s.grid(1).unwrap(), &s.tol).unwrap();
        prop_assert!((r.modulus - c).abs() <= 1e-2 * c, "modulus {} for c {}", r.modulus, c);
    }

    // The simplex optimum is feasible and no worse than random feasible points.
    #[test]
    fn lp_optimum_dominates_feasible_points(
        rows in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0.1f64..3.0), 1..8),
        c in (-2.0f64..2.0, -2.0f64..2.0),
        probes in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 20),
    ) {
        // The origin is strictly feasible and the box keeps the program bounded.
        let mut a: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let mut b = vec![4.0; 4];
        for (x, y, rhs) in rows {
            a.push(vec![x, y]);
            b.push(rhs);
        }
        let c = [c.0, c.1];
        let sol = solve_lp(&c, &a, &b).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        for (row, bk) in a.iter().zip(&b) {
            prop_assert!(row[0] * sol.x[0] + row[1] * sol.x[1] <= bk + 1e-9);
        }
        for (x, y) in probes {
            if a.iter().zip(&b).all(|(row, bk)| row[0] * x + row[1] * y <= *bk) {
                prop_assert!(sol.objective <= c[0] * x + c[1] * y + 1e-9);
            }
        }
    }

    // min αx s.t. β|x| <= 0: the penalty αx + rβ|x| is sharp iff rβ > |α|.
    #[test]
    fn linear_penalty_threshold(alpha in -3.0f64..3.0, beta in 0.2f64..3.0) {
        prop_assume!(alpha.abs() > 0.05);
        let text = format!(
            r#"{{"f":{{"family":"max_affine","params":{{"pieces":[[[{alpha}],0.0]]}}}},"g":[{{"family":"abs","params":{{"coef":{beta}}}}}],"p":1}}"#
        );
        let problem = PenaltySpec::from_json(&text).unwrap().build(None, None).unwrap();
        let rep = penalty_threshold(&problem, order(1.0), &Settings::default()).unwrap();
        let want = alpha.abs() / beta;
        prop_assert!((rep.rho0 - want).abs() <= 1e-6 * (1.0 + want), "rho0 {} want {}", rep.rho0, want);
    }
}
