use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use restricta::digits::{count_restricted, enumerate_restricted};
use restricta::farey::simplest_in_interval;
use restricta::fourier::{restricted_exp_sum, FourierProfile};
use restricta::gcd_graph::{
    build_gcd_graph, compression_step, model_problem_search, BipartiteGcdGraph, GcdInstance,
};
use restricta::metric::{dirichlet_approx, Alpha, IntervalUnion};
use restricta::DigitSystem;

fn system() -> impl Strategy<Value = DigitSystem> {
    (2u32..12)
        .prop_flat_map(|q| {
            (
                Just(q),
                proptest::collection::btree_set(0..q, 1..=q as usize),
            )
        })
        .prop_map(|(q, d)| DigitSystem::new(q, d).unwrap())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn union() -> impl Strategy<Value = IntervalUnion> {
    proptest::collection::vec((0i64..200, 0i64..40), 0..8).prop_map(|v| {
        IntervalUnion::from_intervals(
            v.into_iter()
                .map(|(a, w)| (rat(a - 20, 160), rat(a - 20 + w, 160))),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn count_matches_enumeration(sys in system(), x in 0u64..20_000) {
        let list = enumerate_restricted(&sys, x).unwrap();
        prop_assert_eq!(count_restricted(&sys, x as u128), list.len() as u128);
        prop_assert!(list.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(list.iter().all(|&n| sys.is_member(n as u128)));
    }

    #[test]
    fn padded_count_is_a_power(sys in system(), k in 1u32..5) {
        prop_assume!(sys.contains(0));
        let n = (sys.q() as u128).pow(k) - 1;
        prop_assert_eq!(count_restricted(&sys, n), (sys.len() as u128).pow(k));
    }

    #[test]
    fn exp_sum_is_bounded_by_the_set_size(sys in system(), k in 1u32..6, theta in 0.0f64..1.0) {
        let p = FourierProfile::new(sys.clone(), k).unwrap();
        let size = (sys.len() as f64).powi(k as i32);
        prop_assert!(restricted_exp_sum(&p, theta).norm() <= size * (1.0 + 1e-12));
        prop_assert!((restricted_exp_sum(&p, 0.0).re - size).abs() <= 1e-9 * size);
    }

    #[test]
    fn interval_inclusion_exclusion(a in union(), b in union()) {
        let lhs = a.union(&b).measure() + a.intersection_measure(&b);
        prop_assert_eq!(lhs, a.measure() + b.measure());
        prop_assert_eq!(a.intersect(&b).measure(), a.intersection_measure(&b));
        prop_assert!(a.union(&b).measure() <= BigRational::from_integer(1.into()));
        for w in a.parts().windows(2) {
            prop_assert!(w[0].1 < w[1].0);
        }
    }

    #[test]
    fn dirichlet_bound_holds(p in 0i64..1_000_000, extra in 1i64..1_000_000, n_max in 1u64..100_000) {
        let q = p + extra;
        let alpha = rat(p, q);
        let pt = dirichlet_approx(&Alpha::Rational(alpha.clone()), n_max).unwrap();
        prop_assert!(pt.s >= 1 && pt.s <= n_max);
        prop_assert_eq!(num_integer::gcd(pt.r, pt.s), 1);
        let err = (alpha - rat(pt.r as i64, pt.s as i64)).abs();
        prop_assert!(err < rat(1, (pt.s * n_max) as i64) || err == rat(0, 1));
    }

    #[test]
    fn simplest_fraction_is_minimal(a in 0i64..500, w in 1i64..500, d in 1i64..500) {
        let (lo, hi) = (rat(a, d), rat(a + w, 3 * d));
        prop_assume!(lo <= hi);
        let (r, s) = simplest_in_interval(a as i128, d as i128, (a + w) as i128, 3 * d as i128);
        let f = rat(r as i64, s as i64);
        prop_assert!(lo <= f && f <= hi);
        for t in 1..s as i64 {
            let smallest = (&lo * BigInt::from(t)).ceil();
            prop_assert!(smallest > &hi * BigInt::from(t), "denominator {} also fits", t);
        }
    }

    #[test]
    fn gcd_graph_is_symmetric(s in proptest::collection::btree_set(1u64..500, 1..30), b in 1u64..40) {
        let s: Vec<u64> = s.into_iter().collect();
        let g = build_gcd_graph(&s, b).unwrap();
        for &u in &s {
            for &v in &s {
                prop_assert_eq!(g.has_edge(u, v), g.has_edge(v, u));
                let listed = g.edges.contains(&(u, v)) || g.edges.contains(&(v, u));
                prop_assert_eq!(listed, u != v && num_integer::gcd(u, v) >= b);
            }
        }
    }

    #[test]
    fn compression_partitions_the_edges(
        v in proptest::collection::vec(1u64..300, 1..20),
        w in proptest::collection::vec(1u64..300, 1..20),
        b in 1u64..20,
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
    ) {
        let g = BipartiteGcdGraph::new(v.clone(), w.clone(), b).unwrap();
        let c = compression_step(&g, p).unwrap();
        prop_assert_eq!(c[0].graph.v.len() + c[2].graph.v.len(), v.len());
        prop_assert_eq!(c[0].graph.w.len() + c[1].graph.w.len(), w.len());
        let mut all: Vec<(u64, u64)> = c.iter().flat_map(|x| x.graph.edge_values()).collect();
        let mut orig = g.edge_values();
        all.sort_unstable();
        orig.sort_unstable();
        prop_assert_eq!(all, orig);
        for cand in &c {
            prop_assert_eq!(cand.empty, cand.graph.v.is_empty() || cand.graph.w.is_empty());
            if cand.empty {
                prop_assert_eq!(cand.measure, 0.0);
            }
        }
    }

    #[test]
    fn model_solution_is_recounted(s in proptest::collection::btree_set(1u64..100_000, 1..40), b in 1u64..2000) {
        let s: Vec<u64> = s.into_iter().collect();
        let inst = GcdInstance::new(s.clone(), b, 0.5).unwrap();
        if let Some(sol) = model_problem_search(&inst).unwrap() {
            prop_assert!(sol.g >= b);
            prop_assert_eq!(sol.multiplicity, s.iter().filter(|&&x| x % sol.g == 0).count());
            prop_assert!(sol.multiplicity >= 1);
        } else {
            prop_assert!(s.iter().all(|&x| x < b));
        }
    }
}
