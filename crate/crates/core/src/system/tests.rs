use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::generators;

fn flat_problem(g: Vec<f64>, t: Vec<f64>) -> ProblemFile {
    ProblemFile {
        n: 2,
        g,
        t,
        r: CurvaturePath::Constant { matrix: vec![0.0; 4] },
        y: TimelikeSolution::Constant { vector: vec![1.0, 0.0] },
        label: None,
    }
}

#[test]
fn flat_system_passes_with_zero_residuals() {
    let report = validate(&flat_problem(vec![-1.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]), &Tolerances::default()).unwrap();
    assert!(report.passed);
    for c in &report.checks {
        if c.name != "Y timelike" {
            assert_eq!(c.residual, 0.0, "{}", c.name);
        }
    }
}

#[test]
fn index_zero_metric_is_rejected() {
    let err = validate(&flat_problem(vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]), &Tolerances::default()).unwrap_err();
    assert!(matches!(err, Error::MetricIndex(0)));
    assert!(err.to_string().contains("index != 1"));
}

#[test]
fn asymmetric_metric_and_singular_t_are_rejected() {
    let tol = Tolerances::default();
    let e = validate(&flat_problem(vec![-1.0, 0.5, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]), &tol).unwrap_err();
    assert!(matches!(e, Error::MetricNotSymmetric(_)));
    let e = validate(&flat_problem(vec![-1.0, 0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0, 1.0]), &tol).unwrap_err();
    assert!(matches!(e, Error::MonodromyNotInvertible));
}

#[test]
fn rotation_mixing_time_and_space_is_not_g_preserving() {
    let (s, c) = (PI / 3.0).sin_cos();
    let report = validate(&flat_problem(vec![-1.0, 0.0, 0.0, 1.0], vec![c, -s, s, c]), &Tolerances::default()).unwrap();
    assert!(!report.passed);
    let failed: Vec<_> = report.failures().iter().map(|c| c.name.clone()).collect();
    assert!(failed.contains(&"T g-preserving".to_string()));
}

#[test]
fn iterated_flat_and_rotation() {
    let flat = generators::flat(2, &[]).unwrap();
    for n in 1..4 {
        let p = iterated_data(&flat, n, 0.3).unwrap();
        assert_eq!(p.r.norm_max(), 0.0);
        assert_eq!(p.y, vec![1.0, 0.0]);
        assert_eq!(p.dy, vec![0.0, 0.0]);
    }
    let rot = generators::flat(3, &[0.7]).unwrap();
    let p = iterated_data(&rot, 2, 0.75).unwrap();
    assert!((p.y[0] - 1.0).abs() < 1e-15 && p.y[1].abs() < 1e-15 && p.y[2].abs() < 1e-15);
}

#[test]
fn iterated_boost_matches_extended_formula() {
    // Independent branch evaluation of R(t+k) = T^{-k} R(t) T^k, Y(t+k) = T^{-k} Y(t).
    let sys = generators::boosted(BoostProfile { rate: 0.6, sin: vec![0.2], ..Default::default() }, &[3.0]).unwrap();
    let n_iter = 3;
    let t = 0.8; // s = 2.4
    let p = iterated_data(&sys, n_iter, t).unwrap();
    let tinv = linalg::inverse(sys.t().matrix()).unwrap();
    let tinv2 = &tinv * &tinv;
    let t2 = sys.t().matrix() * sys.t().matrix();
    let base = sys.r_at(0.4);
    let expect_r = &tinv2 * &base * &t2;
    assert!(linalg::max_abs_diff(p.r.as_ref(), expect_r.as_ref()) < 1e-12);
    let (y, dy) = sys.y_at(0.4);
    let ey = linalg::mat_vec(tinv2.as_ref(), &y);
    let edy = linalg::mat_vec(tinv2.as_ref(), &dy);
    for i in 0..3 {
        assert!((p.y[i] - ey[i]).abs() < 1e-12);
        assert!((p.dy[i] - 3.0 * edy[i]).abs() < 1e-12);
    }
    // Y(s) = (cosh a(s), sinh a(s)) continues the closed form past the period.
    let (a, _, _) = BoostProfile { rate: 0.6, sin: vec![0.2], ..Default::default() }.eval(2.4);
    assert!((p.y[0] - a.cosh()).abs() < 1e-12 && (p.y[1] - a.sinh()).abs() < 1e-12);
}

#[test]
fn oscillator_iterate_matches_direct_evaluation() {
    let sys = generators::oscillator(&[9.0 * PI * PI]).unwrap();
    let p = iterated_data(&sys, 2, 0.75).unwrap();
    assert!(linalg::max_abs_diff(p.r.as_ref(), sys.r_at(0.5).as_ref()) == 0.0);
    assert_eq!(p.y, vec![1.0, 0.0]);
}

#[test]
fn shift_identity_on_grid_points() {
    let sys = generators::boosted(BoostProfile { rate: 0.4, cos: vec![0.1], ..Default::default() }, &[]).unwrap();
    let n_iter = 4;
    let it = sys.iterate(n_iter).unwrap();
    for i in 0..8 {
        let t = i as f64 / 32.0;
        for k in 1..n_iter {
            let a = it.eval(t + k as f64 / n_iter as f64);
            let b = it.eval(t);
            let shifted = linalg::mat_vec(it.t_inv_pow(k), &b.y);
            for j in 0..2 {
                assert!((a.y[j] - shifted[j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn singularity_examples() {
    let tilted = generators::tilted(BoostProfile { sin: vec![0.3], ..Default::default() }, &[]).unwrap();
    let s = is_singular(&tilted, 1e-9);
    assert!(!s.singular);
    // For Y = (cosh a, sinh a): g(Y,Y) = -1 and the defect reduces to |a'| |Y'|/|Y| ... evaluate directly.
    let t = s.witness.unwrap();
    let (a, da, _) = BoostProfile { sin: vec![0.3], ..Default::default() }.eval(t);
    let closed = (da * (a.sinh().powi(2) + a.cosh().powi(2)).sqrt()).abs() / (a.cosh().powi(2) + a.sinh().powi(2)).sqrt();
    assert!((s.max_defect - closed).abs() < 1e-12);

    // Y = e^{c(t)} v is singular.
    let v = [2.0, 0.5];
    let y = TimelikeSolution::Trig { c0: v.to_vec(), cos: vec![], sin: vec![] };
    let sys = MorseSturmSystem::new(
        linalg::diag(&[-1.0, 1.0]),
        RMat::identity(2, 2),
        CurvaturePath::Constant { matrix: vec![0.0; 4] },
        y,
        "",
    )
    .unwrap();
    assert!(is_singular(&sys, 1e-9).singular);
}

#[test]
fn positive_metric_examples() {
    let sys = generators::flat(2, &[]).unwrap();
    let m = positive_metric_matrix(&sys, 1, 0.2).unwrap();
    assert!(linalg::max_abs_diff(m.as_ref(), RMat::identity(2, 2).as_ref()) < 1e-15);
    let a = operator_a(&sys, 1, 0.2).unwrap();
    assert!(linalg::max_abs_diff(a.as_ref(), linalg::diag(&[-1.0, 1.0]).as_ref()) < 1e-15);

    let sys3 = MorseSturmSystem::new(
        linalg::diag(&[-1.0, 1.0, 1.0]),
        RMat::identity(3, 3),
        CurvaturePath::Constant { matrix: vec![0.0; 9] },
        TimelikeSolution::Constant { vector: vec![2.0, 0.0, 0.0] },
        "",
    )
    .unwrap();
    let m = positive_metric_matrix(&sys3, 2, 0.6).unwrap();
    assert!(linalg::max_abs_diff(m.as_ref(), RMat::identity(3, 3).as_ref()) < 1e-15);
    let a = operator_a(&sys3, 2, 0.6).unwrap();
    assert!(linalg::max_abs_diff(a.as_ref(), linalg::diag(&[-1.0, 1.0, 1.0]).as_ref()) < 1e-15);
}

#[test]
fn positive_metric_is_positive_on_random_system() {
    let sys = generators::random_tilted(11, 3).unwrap();
    for i in 0..10 {
        let t = (i as f64 * 0.61803).fract();
        let m = positive_metric_matrix(&sys, 2, t).unwrap();
        let eig = linalg::hermitian_eigenvalues(linalg::complexify(m.as_ref()).as_ref()).unwrap();
        assert!(eig.iter().all(|&x| x > 0.0), "{eig:?}");
    }
}

#[test]
fn json_roundtrip_preserves_problem() {
    let sys = generators::random_tilted(3, 3).unwrap();
    let text = sys.to_problem().to_json();
    let back = ProblemFile::from_json(&text).unwrap();
    assert_eq!(back, sys.to_problem());
    MorseSturmSystem::from_problem(&back, &Tolerances::default()).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn a_represents_g_through_positive_metric(seed in 0u64..1000, n_iter in 1usize..4, t in 0.0f64..1.0) {
        let sys = generators::random_tilted(seed, 3).unwrap();
        let a = operator_a(&sys, n_iter, t).unwrap();
        let m = positive_metric_matrix(&sys, n_iter, t).unwrap();
        // g(V, W) = g_t(A V, W) on a basis: G = A^T M.
        let lhs = a.transpose() * &m;
        prop_assert!(linalg::max_abs_diff(lhs.as_ref(), sys.g().matrix()) < 1e-12 * m.norm_max().max(1.0));
        let aa = &a * &a;
        prop_assert!(linalg::max_abs_diff(aa.as_ref(), RMat::identity(3, 3).as_ref()) < 1e-12 * a.norm_max().powi(2));
    }

    #[test]
    fn circle_point_is_reduced(theta in -10.0f64..10.0) {
        let p = CirclePoint::new(theta);
        prop_assert!((0.0..1.0).contains(&p.theta()));
        let d = (p.theta() - theta).rem_euclid(1.0);
        prop_assert!(d < 1e-12 || d > 1.0 - 1e-12);
    }
}
