use dualcap::awgn::{d_x_numeric, decode, AwgnBoundProblem};
use dualcap::channel::{relative_entropy, DiscreteChannel};
use dualcap::cli::fmt9;
use dualcap::constraint::{ConstraintSpec, RunLimit, StateDiagram};
use dualcap::family::{bec_one_inf_mu1, bec_one_two_mu3, ClassF, ParamMap};
use dualcap::metric::{decomposed_walk_metric, divergence_parts, uniform_init, walk_metric, EdgeMetricTable};
use dualcap::numeric::h2;
use dualcap::oracle::{count_words, valid_words};
use dualcap::solvers::{thm2_part1, thm2_part2, thm3_part2, thm4_dinfty, thm5_bsc};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = ConstraintSpec> {
    (0usize..3, prop_oneof![Just(None), (1usize..5).prop_map(Some)]).prop_map(|(d, extra)| match extra {
        None => ConstraintSpec::infinite(d),
        Some(e) => ConstraintSpec::finite(d, d + e).unwrap(),
    })
}

fn bits(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_words_are_walks(spec in spec_strategy(), word in bits(14)) {
        let mu = spec.min_memory().max(1);
        let g = StateDiagram::build(spec, mu).unwrap();
        if word.len() > mu {
            prop_assert_eq!(spec.is_valid_word(&word), g.walk_of(&word).is_ok());
        }
    }

    #[test]
    fn counts_match_enumeration(spec in spec_strategy(), n in 0usize..12) {
        prop_assert_eq!(count_words(&spec, n), valid_words(&spec, n).len() as u128);
    }

    #[test]
    fn walk_metric_decomposes(eps in 0.01f64..0.99, a in 0.05f64..0.95, b in 0.05f64..0.95, word in bits(30)) {
        let spec = ConstraintSpec::infinite(1);
        prop_assume!(word.len() >= 2 && spec.is_valid_word(&word));
        let g = StateDiagram::build(spec, 1).unwrap();
        let p = ParamMap::new().with("alpha", a).with("beta", b);
        let t = EdgeMetricTable::build(&bec_one_inf_mu1(), &p, &DiscreteChannel::bec(eps).unwrap(), &g).unwrap();
        let direct = walk_metric(&t, &word).unwrap();
        let split = decomposed_walk_metric(&t, &g, &word).unwrap();
        prop_assert!((direct - split).abs() < 1e-10);
    }

    #[test]
    fn divergence_chain_rule(eps in 0.05f64..0.95, seed in prop::collection::vec(0.05f64..0.95, 8), idx in 0usize..1000) {
        let fam = bec_one_two_mu3();
        let ch = DiscreteChannel::bec(eps).unwrap();
        let params: ParamMap = fam.param_names().iter().zip(&seed).map(|(n, v)| (n.clone(), *v)).collect();
        let spec = ConstraintSpec::finite(1, 2).unwrap();
        let words = valid_words(&spec, 8);
        let w = &words[idx % words.len()];
        let parts = divergence_parts(&fam.rows(&params, &ch).unwrap(), &ch, 3, w, &uniform_init(&ch, 3)).unwrap();
        prop_assert!((parts.direct - parts.decomposed).abs() <= 1e-10);
    }

    #[test]
    fn edge_metrics_nonnegative(eps in 0.0f64..1.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let g = StateDiagram::build(ConstraintSpec::infinite(1), 1).unwrap();
        let p = ParamMap::new().with("alpha", a).with("beta", b);
        let t = EdgeMetricTable::build(&bec_one_inf_mu1(), &p, &DiscreteChannel::bec(eps).unwrap(), &g).unwrap();
        for (_, v) in t.entries() {
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn relative_entropy_nonnegative(p in prop::collection::vec(0.01f64..1.0, 3), q in prop::collection::vec(0.01f64..1.0, 3)) {
        let sp: f64 = p.iter().sum();
        let sq: f64 = q.iter().sum();
        let p: Vec<f64> = p.iter().map(|v| v / sp).collect();
        let q: Vec<f64> = q.iter().map(|v| v / sq).collect();
        prop_assert!(relative_entropy(&p, &q) >= -1e-15);
        prop_assert!(relative_entropy(&p, &p).abs() < 1e-15);
    }

    #[test]
    fn params_text_roundtrip(vals in prop::collection::vec(0.0f64..1.0, 1..6)) {
        let p: ParamMap = vals.iter().enumerate().map(|(i, v)| (format!("w{i}"), *v)).collect();
        prop_assert_eq!(ParamMap::from_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn bounds_ordered(eps in 0.0f64..=1.0) {
        let a = thm2_part1(eps).unwrap().bound;
        let b = thm2_part2(eps).unwrap().bound;
        prop_assert!(b <= a + 1e-9);
        prop_assert!(a <= (1.0 - eps) + 1e-12);
        prop_assert!(a <= 0.6942419136306174 + 1e-12);
    }

    #[test]
    fn bounds_nonincreasing(e1 in 0.0f64..1.0, step in 1e-3f64..0.2) {
        let e2 = (e1 + step).min(1.0);
        for f in [thm2_part1, thm2_part2, thm3_part2] {
            prop_assert!(f(e2).unwrap().bound <= f(e1).unwrap().bound + 1e-12);
        }
        prop_assert!(thm4_dinfty(2, e2).unwrap().bound <= thm4_dinfty(2, e1).unwrap().bound + 1e-12);
    }

    #[test]
    fn bsc_bound_below_capacity(p in 0.0f64..=0.5) {
        let r = thm5_bsc(p).unwrap();
        prop_assert!(r.bound <= 1.0 - h2(p) + 1e-9);
        prop_assert!(r.kkt_residual_max <= 1e-8);
    }

    #[test]
    fn class_f_between_limits(c in prop::collection::vec(0.01f64..1.0, 4), y in -10.0f64..10.0, sigma in 0.2f64..3.0) {
        let f = ClassF([c[0], c[1], c[2], c[3]]);
        let (lo, hi) = f.limits();
        let v = f.value(y, sigma);
        prop_assert!(v >= lo.min(hi) - 1e-12 && v <= lo.max(hi) + 1e-12);
    }

    #[test]
    fn nine_digit_format(x in -1e6f64..1e6) {
        let s = fmt9(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-9 * x.abs().max(1e-300));
    }

    #[test]
    fn run_limit_roundtrip(k in 1usize..100) {
        let r = RunLimit::Finite(k);
        prop_assert_eq!(r.to_string().parse::<RunLimit>().unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dx_closed_form_matches_integration(
        z in prop::collection::vec(-3.0f64..3.0, 18),
        sigma in 0.3f64..2.0,
        y1 in -3.0f64..3.0,
        x in 0u8..2,
    ) {
        let fam = decode(sigma, &z);
        let a = AwgnBoundProblem::new(fam).d_x(y1, x);
        let b = d_x_numeric(&fam, y1, x);
        prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
    }
}
