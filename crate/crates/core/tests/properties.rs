use std::collections::HashSet;

use num_bigint::BigUint;
use proptest::prelude::*;

use prodgrid::combinatorics::{
    binomle, count_traces, grid_ssp_bound, linear_vc_dimension, vc_dimension,
};
use prodgrid::distributions::{
    load_distribution, mixture_modulus, random_joint, random_product, save_distribution,
    tc_modulus, Distribution,
};
use prodgrid::estimators::{
    empirical_mean, phase1_size, phase2_size, sup_deviation, EmpiricalMean, EmpiricalProduct,
    Estimator, IndexMode, Method, ProductGridEstimator, SamplingPlan,
};
use prodgrid::family::{format_family, parse_family};
use prodgrid::info::{hellinger_sq, tv_distance};
use prodgrid::{
    build_grid, rng, symdiff_family, trace_of, Caps, Grid, Point, ProductDomain, SetFamily,
};

fn small_sizes() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

// At most 16 points, the exact VC search limit.
fn vc_sizes() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 1..=2)
}

fn pmf(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn random_grid(dom: &ProductDomain, picks: &[u8]) -> Grid {
    let axes = dom
        .sizes()
        .iter()
        .zip(picks.iter().cycle())
        .map(|(&s, &mask)| {
            let v: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
            if v.is_empty() {
                vec![0]
            } else {
                v
            }
        })
        .collect();
    Grid::from_axes(dom, axes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_matches_membership(sizes in small_sizes(), count in 1usize..6, seed: u64, picks in prop::collection::vec(any::<u8>(), 3)) {
        let dom = ProductDomain::with_sizes(&sizes).unwrap();
        let family = SetFamily::random(dom.clone(), count, seed).unwrap();
        let grid = random_grid(&dom, &picks);
        for m in family.members(&Caps::default()).unwrap() {
            let direct = trace_of(&grid, |p| family.contains(&m, p));
            prop_assert_eq!(family.trace(&m, &grid), direct);
        }
    }

    #[test]
    fn axis_lines_partition_domain(sizes in small_sizes()) {
        let dom = ProductDomain::with_sizes(&sizes).unwrap();
        for axis in 0..dom.width() {
            let mut seen = HashSet::new();
            for line in dom.axis_lines(axis).unwrap() {
                for p in line.points(&dom) {
                    prop_assert!(seen.insert(p));
                }
            }
            prop_assert_eq!(seen.len(), dom.len());
        }
    }

    #[test]
    fn symdiff_has_empty_set_and_bounded_dims(sizes in vc_sizes(), count in 1usize..6, seed: u64) {
        let dom = ProductDomain::with_sizes(&sizes).unwrap();
        let caps = Caps::default();
        let family = SetFamily::random(dom, count, seed).unwrap();
        let sym = symdiff_family(&family, &caps).unwrap();
        let members = sym.members(&caps).unwrap();
        prop_assert!(members.iter().any(|m| sym.encode(m).not_any()));
        let a = linear_vc_dimension(&family, &caps).unwrap().dimension;
        let b = vc_dimension(&family, &caps).unwrap().dimension;
        prop_assert!(a <= b);
        prop_assert!(vc_dimension(&sym, &caps).unwrap().dimension <= 20 * b);
    }

    #[test]
    fn traces_within_grid_ssp_bound(sizes in small_sizes(), count in 1usize..12, seed: u64, picks in prop::collection::vec(any::<u8>(), 3)) {
        let dom = ProductDomain::with_sizes(&sizes).unwrap();
        let caps = Caps::default();
        let family = SetFamily::random(dom.clone(), count, seed).unwrap();
        let grid = random_grid(&dom, &picks);
        let g = linear_vc_dimension(&family, &caps).unwrap().dimension;
        let traces = count_traces(&family, &grid, &caps).unwrap();
        let gs = grid.sizes();
        for axis in 0..gs.len() {
            prop_assert!(traces <= grid_ssp_bound(&gs, g, axis).unwrap());
        }
    }

    #[test]
    fn binomle_is_monotone(n in 0usize..40, g in 0usize..40) {
        prop_assert!(binomle(n, g) <= binomle(n + 1, g));
        prop_assert!(binomle(n, g) <= binomle(n, g + 1));
        prop_assert!(binomle(n, g) <= BigUint::from(1u8) << n);
    }

    #[test]
    fn moduli_are_monotone(a in 0.01f64..0.99, b in 0.01f64..0.99, k in 1usize..5, d in 1usize..4, c in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(mixture_modulus(k, d, lo).unwrap() <= mixture_modulus(k, d, hi).unwrap() + 1e-15);
        prop_assert!(tc_modulus(c, lo).unwrap() <= tc_modulus(c, hi).unwrap() + 1e-15);
    }

    #[test]
    fn tv_is_sup_over_events((p, q) in (1usize..=8).prop_flat_map(|n| (pmf(n), pmf(n)))) {
        let tv = tv_distance(&p, &q).unwrap();
        let mut best = 0.0f64;
        for mask in 0..1u32 << p.len() {
            let d: f64 = (0..p.len()).filter(|i| mask >> i & 1 == 1).map(|i| p[i] - q[i]).sum();
            best = best.max(d.abs());
        }
        prop_assert!((tv - best).abs() < 1e-12);
        prop_assert!(tv + 1e-12 >= 0.5 * hellinger_sq(&p, &q).unwrap());
    }

    #[test]
    fn planner_sizes_are_monotone(eps in 0.05f64..0.5, delta in 0.01f64..0.5, classes in 1u64..1_000_000) {
        let c = BigUint::from(classes);
        prop_assert!(phase2_size(eps, delta, &c).unwrap() <= phase2_size(eps, delta, &(c.clone() * 2u32)).unwrap());
        prop_assert!(phase2_size(eps, delta, &c).unwrap() >= phase2_size(eps * 1.5, delta, &c).unwrap());
        let plan = |e| SamplingPlan::new(e, delta, 1, 2, prodgrid::distributions::Modulus::Identity, 1.0).unwrap();
        prop_assert!(phase1_size(&plan(eps)).unwrap() >= phase1_size(&plan((eps * 1.5).min(0.99))).unwrap());
    }

    #[test]
    fn distribution_json_round_trip(sizes in prop::collection::vec(1usize..=4, 1..=3), seed: u64) {
        let d: Distribution = random_product(&sizes, &mut rng::seeded(seed)).into();
        let back = load_distribution(&save_distribution(&d).unwrap()).unwrap();
        for i in 0..d.to_table().probs().len() {
            prop_assert!((d.to_table().probs()[i] - back.to_table().probs()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn family_text_round_trip(sizes in small_sizes(), count in 1usize..6, seed: u64) {
        let dom = ProductDomain::with_sizes(&sizes).unwrap();
        let family = SetFamily::random(dom, count, seed).unwrap();
        let back = parse_family(&format_family(&family).unwrap()).unwrap();
        let caps = Caps::default();
        let enc = |f: &SetFamily| {
            let mut v: Vec<_> = f.members(&caps).unwrap().iter().map(|m| f.encode(m)).collect();
            v.sort();
            v
        };
        prop_assert_eq!(enc(&family), enc(&back));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // A full phase-1 grid makes the grid estimator an empirical mean over S⁽¹⁾.
    #[test]
    fn full_grid_estimator_is_phase2_mean(n in 2usize..=4, seed: u64) {
        let family = SetFamily::permutation_graphs(n).unwrap();
        let full: Vec<Point> = (0..n).map(|i| Point::new(vec![i, i])).collect();
        let truth: Distribution = random_joint(&[n, n], &mut rng::seeded(seed)).into();
        let s1 = truth.sample(25, seed).unwrap();
        let caps = Caps::default();
        let est = ProductGridEstimator::fit(&full, &s1, &family, &caps, IndexMode::Enumerate).unwrap();
        for m in family.members(&caps).unwrap() {
            let a = est.estimate(&family, &m).unwrap();
            let b = empirical_mean(&s1, &family, &m).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn assignment_equals_enumeration(n in 2usize..=5, m in 1usize..20, seed: u64) {
        let family = SetFamily::permutation_graphs(n).unwrap();
        let truth: Distribution = random_joint(&[n, n], &mut rng::seeded(seed)).into();
        let s = truth.sample(m, seed ^ 1).unwrap();
        let caps = Caps::default();
        let a = EmpiricalMean::new(s.clone()).unwrap();
        let b = EmpiricalProduct::new(&s, &[n, n]).unwrap();
        for est in [&a as &dyn Estimator, &b] {
            let x = sup_deviation(est, &family, &truth, Method::Enumerate, &caps).unwrap();
            let y = sup_deviation(est, &family, &truth, Method::Assignment, &caps).unwrap();
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    // Members whose symmetric difference misses the grid share a trace, so
    // the grid estimator gives them the same value.
    #[test]
    fn shared_trace_shares_estimate(n in 2usize..=4, m0 in 1usize..6, seed: u64) {
        let family = SetFamily::permutation_graphs(n).unwrap();
        let truth: Distribution = random_joint(&[n, n], &mut rng::seeded(seed)).into();
        let s = truth.sample(m0 + 20, seed).unwrap();
        let caps = Caps::default();
        let est = ProductGridEstimator::fit(&s[..m0], &s[m0..], &family, &caps, IndexMode::Auto).unwrap();
        let grid = build_grid(&s[..m0], family.domain()).unwrap();
        let members = family.members(&caps).unwrap();
        for x in &members {
            for y in &members {
                let dx = family.encode(x) ^ family.encode(y).as_bitslice();
                let hit = grid.cells().any(|c| dx[family.domain().index_of(c.coords())]);
                if !hit {
                    prop_assert!((est.estimate(&family, x).unwrap() - est.estimate(&family, y).unwrap()).abs() < 1e-12);
                }
            }
        }
    }
}
