use proptest::prelude::*;
use wchernoff::affinity::{chernoff_numeric, AffinityCurve};
use wchernoff::expfam::weighted_kl;
use wchernoff::models::{weighted_normaliser, weighted_normaliser_numeric};
use wchernoff::{chernoff, rho_w, Model, Point, Weight};

fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, m).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn table(m: usize) -> impl Strategy<Value = Weight> {
    prop::collection::vec(0.1f64..3.0, m).prop_map(|v| Weight::table(v).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swapping_hypotheses_reflects_alpha(l1 in 0.2f64..6.0, l2 in 0.2f64..6.0, g in -0.5f64..0.5, a in 0.0f64..=1.0) {
        let (p, q, w) = (Model::poisson(l1).unwrap(), Model::poisson(l2).unwrap(), Weight::tilt(g).unwrap());
        prop_assert!(close(rho_w(&p, &q, &w, a).unwrap(), rho_w(&q, &p, &w, 1.0 - a).unwrap(), 1e-12));
    }

    #[test]
    fn holder_bound(pp in simplex(4), qq in simplex(4), w in table(4), a in 0.0f64..=1.0) {
        let (p, q) = (Model::categorical(pp).unwrap(), Model::categorical(qq).unwrap());
        let ep = weighted_normaliser(&p, &w).unwrap();
        let eq = weighted_normaliser(&q, &w).unwrap();
        prop_assert!(rho_w(&p, &q, &w, a).unwrap() <= ep.powf(a) * eq.powf(1.0 - a) * (1.0 + 1e-12));
    }

    #[test]
    fn log_affinity_is_midpoint_convex(pp in simplex(3), qq in simplex(3), w in table(3)) {
        let curve = AffinityCurve::new(&Model::categorical(pp).unwrap(), &Model::categorical(qq).unwrap(), &w).unwrap();
        let f: Vec<f64> = (0..=100).map(|k| curve.log_rho(k as f64 / 100.0).unwrap()).collect();
        for k in 1..100 {
            prop_assert!(f[k - 1] + f[k + 1] - 2.0 * f[k] >= -1e-9);
        }
    }

    #[test]
    fn affinity_factorises_over_observations(pp in simplex(3), qq in simplex(3), wv in prop::collection::vec(0.1f64..3.0, 3), a in 0.0f64..=1.0) {
        let w = Weight::table(wv.clone()).unwrap();
        let single = rho_w(&Model::categorical(pp.clone()).unwrap(), &Model::categorical(qq.clone()).unwrap(), &w, a).unwrap();
        let mut pair = 0.0;
        let mut triple = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let term = |k: usize| wv[k] * pp[k].powf(a) * qq[k].powf(1.0 - a);
                pair += term(i) * term(j);
                for k in 0..3 {
                    triple += term(i) * term(j) * term(k);
                }
            }
        }
        prop_assert!(close(pair, single.powi(2), 1e-12));
        prop_assert!(close(triple, single.powi(3), 1e-12));
    }

    #[test]
    fn generic_solver_matches_closed_form(l1 in 0.3f64..8.0, l2 in 0.3f64..8.0, g in -0.3f64..0.3) {
        prop_assume!((l1 - l2).abs() > 0.1);
        let (p, q, w) = (Model::poisson(l1).unwrap(), Model::poisson(l2).unwrap(), Weight::tilt(g).unwrap());
        let a = chernoff(&p, &q, &w).unwrap();
        let b = chernoff_numeric(&p, &q, &w).unwrap();
        prop_assert!(close(a.d_c_w, b.d_c_w, 1e-9), "{a:?} {b:?}");
        prop_assert_eq!(a.boundary, b.boundary);
    }

    #[test]
    fn chernoff_is_below_both_divergences(pp in simplex(3), qq in simplex(3)) {
        let (p, q) = (Model::categorical(pp).unwrap(), Model::categorical(qq).unwrap());
        let c = chernoff(&p, &q, &Weight::Const).unwrap().d_c_w;
        prop_assert!(c >= -1e-15);
        prop_assert!(c <= weighted_kl(&p, &q, &Weight::Const).unwrap() + 1e-12);
        prop_assert!(c <= weighted_kl(&q, &p, &Weight::Const).unwrap() + 1e-12);
    }

    #[test]
    fn normaliser_closed_form_matches_numeric(rate in 0.5f64..4.0, frac in -1.0f64..0.9) {
        let (m, w) = (Model::exponential(rate).unwrap(), Weight::tilt(frac * rate).unwrap());
        prop_assert!(close(weighted_normaliser(&m, &w).unwrap(), weighted_normaliser_numeric(&m, &w).unwrap(), 1e-9));
    }

    #[test]
    fn categorical_density_sums_to_one(pp in simplex(5)) {
        let m = Model::categorical(pp).unwrap();
        let s: f64 = (0..5u64).map(|k| m.density(&Point::Count(k)).unwrap()).sum();
        prop_assert!((s - 1.0).abs() < 1e-14);
    }
}
