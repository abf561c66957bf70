use proptest::prelude::*;

use steinis::gram::GramMatrix;
use steinis::qp::{kkt_residual, project_simplex, solve, QpSettings, QpStatus};

fn gram_from_factor(n: usize, factor: &[f64]) -> GramMatrix {
    let rank = factor.len() / n;
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            e[i * n + j] = (0..rank)
                .map(|r| factor[r * n + i] * factor[r * n + j])
                .sum();
        }
    }
    GramMatrix::from_entries(n, e, "factor").unwrap()
}

fn psd() -> impl Strategy<Value = GramMatrix> {
    (1usize..12, 1usize..6).prop_flat_map(|(n, rank)| {
        prop::collection::vec(-3.0f64..3.0, n * rank).prop_map(move |f| gram_from_factor(n, &f))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_feasible_and_idempotent(v in prop::collection::vec(-50.0f64..50.0, 1..40)) {
        let p = project_simplex(&v).unwrap();
        let s: f64 = p.as_slice().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!(p.as_slice().iter().all(|&x| x >= 0.0));
        let again = project_simplex(p.as_slice()).unwrap();
        for (a, b) in again.as_slice().iter().zip(p.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_nearest_among_vertices(v in prop::collection::vec(-5.0f64..5.0, 2..10)) {
        let p = project_simplex(&v).unwrap();
        let dist = |w: &[f64]| w.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let dp = dist(p.as_slice());
        for k in 0..v.len() {
            let mut e = vec![0.0; v.len()];
            e[k] = 1.0;
            prop_assert!(dp <= dist(&e) + 1e-12);
        }
    }

    #[test]
    fn solution_is_feasible_optimal_and_dominant(k in psd(), probe in prop::collection::vec(0.0f64..1.0, 12)) {
        let s = solve(&k, &QpSettings::default()).unwrap();
        let w = s.weights.as_slice();
        prop_assert_eq!(w.len(), k.n());
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(s.status, QpStatus::Converged);
        prop_assert!(s.kkt_residual <= 1e-8);
        prop_assert_eq!(s.kkt_residual, kkt_residual(&k, w).unwrap());
        let uniform = vec![1.0 / k.n() as f64; k.n()];
        prop_assert!(s.objective <= k.quad_form(&uniform));
        // no random feasible point does better
        let total: f64 = probe[..k.n()].iter().sum::<f64>() + 1e-12;
        let q: Vec<f64> = probe[..k.n()].iter().map(|p| (p + 1e-12 / k.n() as f64) / total).collect();
        prop_assert!(s.objective <= k.quad_form(&q) + 1e-10);
    }

    #[test]
    fn trace_is_monotone(k in psd()) {
        let s = solve(&k, &QpSettings { record_trace: true, ..QpSettings::default() }).unwrap();
        prop_assert!(!s.trace.is_empty());
        for pair in s.trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 8.0 * f64::EPSILON * pair[0].abs().max(1.0), "{:?}", pair);
        }
    }
}

#[test]
fn solve_is_deterministic() {
    let f: Vec<f64> = (0..60)
        .map(|i| ((i * 37 % 23) as f64 - 11.0) / 7.0)
        .collect();
    let k = gram_from_factor(20, &f);
    let a = solve(&k, &QpSettings::default()).unwrap();
    let b = solve(&k, &QpSettings::default()).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn iteration_cap_reports_max_iter() {
    let f: Vec<f64> = (0..400)
        .map(|i| ((i * 53 % 31) as f64 - 15.0) / 9.0)
        .collect();
    let k = gram_from_factor(100, &f);
    let s = solve(
        &k,
        &QpSettings {
            max_iter: Some(1),
            ..QpSettings::default()
        },
    )
    .unwrap();
    assert!(s.iterations <= 1);
    let uniform = vec![0.01; 100];
    assert!(s.objective <= k.quad_form(&uniform));
}

#[test]
fn indefinite_matrix_is_a_numerical_error() {
    let k = GramMatrix::from_entries(2, vec![1.0, 0.0, 0.0, -1.0], "indefinite").unwrap();
    let err = solve(&k, &QpSettings::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn roundoff_indefiniteness_is_absorbed_by_jitter() {
    // rank-one matrix pushed slightly below zero along (1, -1)
    let eps = 1e-13;
    let k = GramMatrix::from_entries(
        2,
        vec![1.0 - eps, 1.0 + eps, 1.0 + eps, 1.0 - eps],
        "near-psd",
    )
    .unwrap();
    let s = solve(&k, &QpSettings::default()).unwrap();
    assert!((s.objective - 1.0).abs() < 1e-9);
    assert!(s.jitter < 1e-6);
}
