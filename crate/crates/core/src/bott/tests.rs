use std::f64::consts::PI;

use faer::c64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::analysis::Analysis;
use crate::galerkin::{assemble, DiscreteField, Mesh};
use crate::generators;
use crate::linalg::CMat;
use crate::settings::Settings;
use crate::system::CirclePoint;

const K9: f64 = 9.0 * PI * PI;

fn analysis(sys: crate::MorseSturmSystem) -> Analysis {
    Analysis::new(sys, Settings::default()).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, m: usize, n_iter: usize) -> DiscreteField {
    let mut f = DiscreteField::zeros(n, m, n_iter, CirclePoint::ONE);
    for c in &mut f.coeffs {
        *c = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    f
}

fn form(h: &CMat, v: &DiscreteField, w: &DiscreteField) -> c64 {
    let mut s = c64::new(0.0, 0.0);
    for i in 0..h.nrows() {
        let mut row = c64::new(0.0, 0.0);
        for j in 0..h.ncols() {
            row += h[(i, j)] * v.coeffs[j];
        }
        s += w.coeffs[i].conj() * row;
    }
    s
}

fn apply(c: &CMat, v: &DiscreteField) -> Vec<c64> {
    (0..c.nrows()).map(|i| (0..c.ncols()).map(|j| c[(i, j)] * v.coeffs[j]).sum()).collect()
}

#[test]
fn psi_is_identity_for_one_period() {
    let sys = generators::random_tilted(0, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v = random_field(&mut rng, 2, 16, 1);
    let parts = psi_transform(&sys, &v).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].coeffs, v.coeffs);
}

#[test]
fn psi_rejects_indivisible_mesh() {
    let sys = generators::flat(2, &[]).unwrap();
    let v = DiscreteField::zeros(2, 17, 2, CirclePoint::ONE);
    assert!(psi_transform(&sys, &v).is_err());
}

#[test]
fn psi_maps_constraints_to_constraints() {
    // A field with constant pairing splits into H_0 components for k < N and an H_* component
    // for k = N; the rows of the components are images of the rows of the field.
    let sys = generators::random_tilted(2, 2).unwrap();
    let n_iter = 3;
    let m = 16;
    let asm_n = assemble(&sys, n_iter, CirclePoint::ONE, Mesh::new(m * n_iter).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v = random_field(&mut rng, 2, m * n_iter, n_iter);
    let cv = apply(&asm_n.pairing, &v);
    let parts = psi_transform(&sys, &v).unwrap();
    for (idx, vk) in parts.iter().enumerate() {
        let k = idx + 1;
        let asm_k = assemble(&sys, 1, vk.rho, Mesh::new(m).unwrap()).unwrap();
        let ck = apply(&asm_k.pairing, vk);
        for i in 0..m {
            let mut expect = c64::new(0.0, 0.0);
            for j in 0..n_iter {
                expect += cv[i + j * m] * CirclePoint::root_of_unity(k * j, n_iter).conj().rho();
            }
            // The integrand picks up 1/N^2 and the element length N.
            expect /= n_iter as f64;
            assert!((ck[i] - expect).norm() < 1e-10 * (1.0 + expect.norm()), "k {k} element {i}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn psi_upsilon_roundtrip(seed in 0u64..10_000, n_iter in 2usize..5) {
        let sys = generators::random_tilted(seed % 5, 2 + (seed % 2) as usize).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_field(&mut rng, sys.n(), 8 * n_iter, n_iter);
        let back = upsilon_transform(&sys, &psi_transform(&sys, &v).unwrap()).unwrap();
        let err = v.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn form_splits_over_roots_of_unity(seed in 0u64..10_000, n_iter in 2usize..5) {
        let sys = generators::random_tilted(seed % 5, 2).unwrap();
        let m = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_field(&mut rng, 2, m * n_iter, n_iter);
        let w = random_field(&mut rng, 2, m * n_iter, n_iter);
        let asm = assemble(&sys, n_iter, CirclePoint::ONE, Mesh::new(m * n_iter).unwrap()).unwrap();
        let lhs = form(&asm.h, &v, &w);
        let (vp, wp) = (psi_transform(&sys, &v).unwrap(), psi_transform(&sys, &w).unwrap());
        let mut rhs = c64::new(0.0, 0.0);
        for (vk, wk) in vp.iter().zip(&wp) {
            let hk = assemble(&sys, 1, vk.rho, Mesh::new(m).unwrap()).unwrap().h;
            rhs += form(&hk, vk, wk);
        }
        rhs *= (n_iter * n_iter) as f64;
        let scale = asm.scale * (m * n_iter) as f64 * v.norm() * w.norm();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale, "{} vs {}", lhs, rhs);
    }
}

#[test]
fn flat_profile_is_zero() {
    let a = analysis(generators::flat(2, &[]).unwrap());
    let p = scan_circle(&a, 32).unwrap();
    assert!(p.is_zero());
    assert_eq!(p.lambda_at(0.0), 0);
    assert_eq!(p.nullity_at(0.0), 2);
    assert!(p.singular);
    assert_eq!(p.epsilon, 0);
    assert!(jump_table(&p).unwrap().is_empty());
    let g = growth_stats(&p);
    assert!(g.is_constant);
    assert_eq!(g.mean_index, 0.0);
}

#[test]
fn oscillator_profile_and_iteration() {
    let a = analysis(generators::oscillator(&[K9]).unwrap());
    let p = scan_circle(&a, 64).unwrap();
    assert_eq!(p.spectral_angles, vec![0.0, 0.5]);
    assert_eq!(p.lambda_at(0.0), 3);
    assert_eq!(p.lambda_at(0.25), 3);
    assert_eq!(p.lambda_at(0.5), 2);
    assert_eq!(p.lambda_at(0.75), 3);
    assert_eq!(p.nullity_at(0.5), 2);
    assert!(p.symmetric);
    let jumps = jump_table(&p).unwrap();
    assert_eq!(jumps.len(), 1);
    assert_eq!((jumps[0].left, jumps[0].right, jumps[0].point), (3, 3, 2));

    let g = growth_stats(&p);
    assert_eq!(g.discontinuities, vec![0.5]);
    assert_eq!(g.mean_index, 3.0);
    assert_eq!(g.alpha, 3.0);
    assert_eq!(g.beta, -21.0);
    assert_eq!(g.a, vec![3, 0]);

    let it = iterate_indices(&a, &p, 6, 2, 64).unwrap();
    let mu0: Vec<usize> = it.rows.iter().map(|r| r.mu0).collect();
    assert_eq!(mu0, vec![3, 5, 9, 11, 15, 17]);
    assert!(it.epsilon_invariant);
    assert!(it.certificate_violations(5).is_empty());
    let csv = it.to_csv().unwrap();
    assert!(csv.starts_with("N,mu,mu0,nu_star,nu0,epsilon\n1,3,3,"));

    let f = fourier_check(&a, 2, 128).unwrap();
    assert_eq!(f.summary_zero(), "5 = 3 + 2 OK");
    assert!(f.holds());
}

#[test]
fn mean_index_matches_coefficient_formula() {
    let a = analysis(generators::oscillator(&[K9, 2.0 * PI * PI]).unwrap());
    let p = scan_circle(&a, 64).unwrap();
    let g = growth_stats(&p);
    let formula = g.a[0] as f64 + g.a[1..].iter().zip(&g.discontinuities).map(|(a, t)| *a as f64 * t).sum::<f64>();
    assert!((formula - g.mean_index).abs() < 1e-12, "{g:?}");
}

#[test]
fn tilted_fourier_identity() {
    let a = analysis(generators::random_tilted(0, 2).unwrap());
    assert!(!a.is_singular());
    for n in [2, 3] {
        let f = fourier_check(&a, n, 64 * n).unwrap();
        assert!(f.holds(), "{}", f.summary_star());
    }
}

#[test]
fn boosted_classification() {
    let profile = crate::system::BoostProfile { rate: 0.6, a0: 0.0, cos: vec![0.1], sin: vec![0.2] };
    let a = analysis(generators::boosted(profile, &[-2.0]).unwrap());
    let p = scan_circle(&a, 64).unwrap();
    let c = classify(&a, &p, 3, 64).unwrap();
    assert!(c.trivial_spectrum_only, "{:?}", a.poincare.unit_spectrum);
    assert!(c.hyperbolic_mod_y);
    assert!(c.constant_profile);
    assert!(c.identity_holds, "{:?}", c.identity_checks);
}

#[test]
fn flat_is_not_hyperbolic() {
    let a = analysis(generators::flat(2, &[]).unwrap());
    let p = scan_circle(&a, 32).unwrap();
    let c = classify(&a, &p, 2, 32).unwrap();
    assert!(c.trivial_spectrum_only);
    assert!(!c.hyperbolic_mod_y);
}

#[test]
fn profile_csv_has_expected_columns() {
    let a = analysis(generators::oscillator(&[K9]).unwrap());
    let p = scan_circle(&a, 64).unwrap();
    let csv = p.to_csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,lambda,nullity,kind"));
    assert!(csv.lines().any(|l| l.ends_with(",2,2,point")));
}
