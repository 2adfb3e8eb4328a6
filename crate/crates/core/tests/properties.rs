#![allow(clippy::needless_range_loop)]

use approx::assert_relative_eq;
use proptest::prelude::*;

use heatbound::generators::{random_connected, RandomGraphSpec};
use heatbound::graph::{apply_generator, inner_product, VertexFunction, WeightedGraph};
use heatbound::imp::{check_j_monotone, is_in_f, make_drift, make_lemma23, make_rho, RhoVariant};
use heatbound::kernel::{heat_kernel, heat_kernel_path, normalized_sq_sum, transition_matrix, Evolution};
use heatbound::metric::default_metric;
use heatbound::regularity::{fit_regularity, Interval, RegularityOptions, TableProfile};

fn graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..12, any::<u64>()).prop_map(|(n, seed)| random_connected(&RandomGraphSpec::new(n), seed).unwrap())
}

fn graph_and_vectors() -> impl Strategy<Value = (WeightedGraph, Vec<f64>, Vec<f64>)> {
    graph().prop_flat_map(|g| {
        let n = g.len();
        (
            Just(g),
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(-5.0..5.0f64, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_is_self_adjoint_and_non_positive((g, f, h) in graph_and_vectors()) {
        let f = VertexFunction(f);
        let h = VertexFunction(h);
        let lf = apply_generator(&g, &f).unwrap();
        let lh = apply_generator(&g, &h).unwrap();
        let a = inner_product(&g, &lf, &h).unwrap();
        let b = inner_product(&g, &f, &lh).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        let q = inner_product(&g, &lf, &f).unwrap();
        prop_assert!(q <= 1e-9 * (1.0 + q.abs()));
    }

    #[test]
    fn kernel_rows_sum_to_one_and_are_reversible(g in graph(), t in 0.01f64..20.0) {
        let p = transition_matrix(&g, t, 1e-12).unwrap();
        for x in 0..g.len() {
            let mass: f64 = p[x].iter().sum();
            prop_assert!((mass - 1.0).abs() < 1e-10);
            for y in 0..g.len() {
                let lhs = g.nu(x) * p[x][y];
                let rhs = g.nu(y) * p[y][x];
                prop_assert!((lhs - rhs).abs() <= 1e-10 * g.nu(x).max(g.nu(y)));
            }
        }
    }

    #[test]
    fn chapman_kolmogorov(g in graph(), s in 0.01f64..5.0, t in 0.01f64..5.0) {
        let ps = transition_matrix(&g, s, 1e-13).unwrap();
        let pt = transition_matrix(&g, t, 1e-13).unwrap();
        let pst = transition_matrix(&g, s + t, 1e-13).unwrap();
        let n = g.len();
        for x in 0..n {
            for y in 0..n {
                let composed: f64 = (0..n).map(|z| ps[x][z] * pt[z][y]).sum();
                prop_assert!((composed - pst[x][y]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn squared_norm_is_return_probability(g in graph(), t in 0.01f64..10.0) {
        let probs = heat_kernel(&g, 0, t, 1e-13).unwrap().probs;
        let norm = normalized_sq_sum(&g, 0, &probs, |_| 1.0);
        let ret = heat_kernel(&g, 0, 2.0 * t, 1e-13).unwrap().probs[0];
        prop_assert!((norm - ret).abs() < 1e-10);
    }

    #[test]
    fn metric_is_invariant_under_joint_scaling(g in graph(), c in 0.01f64..100.0) {
        let m = default_metric(&g);
        let ms = default_metric(&g.scaled(c).unwrap());
        for x in 0..g.len() {
            for y in 0..g.len() {
                assert_relative_eq!(m.dist(x, y), ms.dist(x, y), max_relative = 1e-12, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn regularity_constant_grows_with_the_interval(
        steps in prop::collection::vec(0.0f64..1.0, 20..60),
        cut in 0.2f64..0.8,
    ) {
        let ts: Vec<f64> = (0..steps.len()).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / steps.len() as f64)).collect();
        let mut acc = 1.0;
        let fs: Vec<f64> = steps.iter().map(|s| { acc += s * acc; acc }).collect();
        let table = TableProfile::new(ts.clone(), fs).unwrap();
        let hi = *ts.last().unwrap() * 1.0001;
        let outer = Interval::new(ts[0], hi).unwrap();
        let inner = Interval::new(ts[0] * (1.0 + cut), hi / (1.0 + cut)).unwrap();
        let opts = RegularityOptions::default();
        let a_out = fit_regularity(&table, 1.5, outer, &opts);
        let a_in = fit_regularity(&table, 1.5, inner, &opts);
        if let (Ok(a_out), Ok(a_in)) = (a_out, a_in) {
            prop_assert!(a_in.a <= a_out.a);
        }
    }

    #[test]
    fn analytic_time_derivative(g in graph(), tau in 0.05f64..20.0, a in 0.0f64..=0.25, t in 0.01f64..30.0) {
        let m = default_metric(&g);
        let rho = make_rho(&m, &g, 0, m.eccentricity(0), RhoVariant::CappedDist).unwrap();
        for h in [make_lemma23(tau, rho.clone()).unwrap(), make_drift(a, rho).unwrap()] {
            for x in 0..g.len() {
                let an = h.dlog_dt(t, x);
                let fd = h.finite_difference_dlog_dt(t, x, 1e-5);
                prop_assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-9), "{} {an} {fd}", h.label());
            }
        }
    }

    #[test]
    fn drift_is_admissible_and_j_decreases(g in graph(), a in 0.0f64..=0.25) {
        let m = default_metric(&g);
        let rho = make_rho(&m, &g, 0, m.eccentricity(0), RhoVariant::CappedDist).unwrap();
        let h = make_drift(a, rho).unwrap();
        let times: Vec<f64> = (0..41).map(|i| i as f64 * 0.1).collect();
        prop_assert!(is_in_f(&g, &m, &h, &times).unwrap().pass);
        let j = check_j_monotone(&g, &m, 0, &Evolution::Full, &h, &times, 1e-12).unwrap();
        prop_assert!(j.pass);
    }

    #[test]
    fn incremental_path_matches_direct(g in graph(), ts in prop::collection::vec(0.0f64..10.0, 1..6)) {
        let path = heat_kernel_path(&g, 0, &ts, 1e-12).unwrap();
        for (row, &t) in path.iter().zip(&ts) {
            let direct = heat_kernel(&g, 0, t, 1e-12).unwrap();
            for (p, q) in row.probs.iter().zip(&direct.probs) {
                prop_assert!((p - q).abs() <= 2e-12 + row.err_bound + direct.err_bound);
            }
        }
    }
}
