//! End-to-end acceptance checks. Each criterion prints one `PASS`/`FAIL` line; the test fails
//! if any criterion does.

use std::f64::consts::PI;
use std::time::Instant;

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morse_sturm_index::bott::{
    classify, fourier_check, iterate_indices, jump_records, psi_transform, scan_circle, upsilon_transform, IndexProfile,
};
use morse_sturm_index::galerkin::{assemble, lambda_with_refinement, restricted_index, ConstraintKind, DiscreteField, Mesh, RefinedIndex};
use morse_sturm_index::linalg::CMat;
use morse_sturm_index::ode::{pairing_drift, solve_ivp};
use morse_sturm_index::settings::Settings;
use morse_sturm_index::system::{BoostProfile, CirclePoint};
use morse_sturm_index::{generators, Analysis, MorseSturmSystem};

const K1: f64 = PI * PI;
const K9: f64 = 9.0 * PI * PI;
const K25: f64 = 25.0 * PI * PI;

/// Negative eigenvalues of `-d^2/dt^2 - k` on `rho`-quasi-periodic functions, `rho = e^{2 pi i theta}`.
/// The eigenfunctions are `e^{2 pi i (j + theta) t}` with eigenvalues `4 pi^2 (j + theta)^2 - k`.
fn oracle_count(ks: &[f64], theta: f64) -> usize {
    let mut count = 0;
    for &k in ks {
        for j in -1000i64..=1000 {
            let ev = 4.0 * PI * PI * (j as f64 + theta).powi(2) - k;
            if ev < -1e-9 * k {
                count += 1;
            }
        }
    }
    count
}

struct Outcome {
    lines: Vec<String>,
    failed: Vec<String>,
    clock: Instant,
}

impl Outcome {
    fn record(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        let secs = self.clock.elapsed().as_secs_f64();
        self.clock = Instant::now();
        let line = format!("[{}] criterion {id:>2} {name} ({secs:.0}s): {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        if !ok {
            self.failed.push(line.clone());
        }
        self.lines.push(line);
    }
}

struct Entry {
    analysis: Analysis,
    profile: IndexProfile,
}

fn suite_systems() -> Vec<MorseSturmSystem> {
    let mut out = vec![
        generators::oscillator(&[K9]).unwrap(),
        generators::oscillator(&[K1, 2.0 * PI * PI]).unwrap(),
        generators::flat(2, &[]).unwrap(),
        generators::flat(3, &[0.25]).unwrap(),
        generators::static_product(&[5.0]).unwrap(),
        generators::boosted(BoostProfile { rate: 0.6, a0: 0.0, cos: vec![0.1], sin: vec![0.2] }, &[-2.0]).unwrap(),
    ];
    for seed in 0..5 {
        for n in [2, 3] {
            out.push(generators::random_tilted(seed, n).unwrap());
        }
    }
    out
}

fn tilted_fourier_systems() -> Vec<MorseSturmSystem> {
    (0..5).map(|seed| generators::random_tilted(seed, 2 + (seed % 2) as usize).unwrap()).collect()
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

fn fourier_criterion(out: &mut Outcome, nullity_log: &mut Vec<String>) {
    let start = Instant::now();
    let mut systems = vec![generators::oscillator(&[K9]).unwrap()];
    systems.extend(tilted_fourier_systems());
    let mut failures = Vec::new();
    let mut checks = 0;
    for sys in systems {
        let label = sys.label().to_string();
        let a = Analysis::new(sys, Settings::default()).unwrap();
        for n in 2..=5 {
            checks += 1;
            match fourier_check(&a, n, 64 * n) {
                Ok(f) => {
                    if !f.holds() {
                        failures.push(format!("{label} N={n}: {} / {}", f.summary_zero(), f.summary_star()));
                    }
                    if !f.nullities_match {
                        nullity_log.push(format!("fourier {label} N={n} meshes {:?}", f.meshes_tried));
                    }
                }
                Err(e) => failures.push(format!("{label} N={n}: {e}")),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs < 300.0;
    out.record(1, "Fourier identities", ok, format!("{checks} checks, {} failures, {secs:.1}s {failures:?}", failures.len()));
}

fn oracle_criterion(out: &mut Outcome, evaluations: &mut Vec<(String, RefinedIndex)>) {
    let mut mismatches = Vec::new();
    let mut too_many = 0;
    let mut checks = 0;
    for k in [K1, K9, K25] {
        let a = Analysis::new(generators::oscillator(&[k]).unwrap(), Settings::default()).unwrap();
        for j in 0..32 {
            let theta = j as f64 / 32.0;
            let expect = oracle_count(&[k], theta);
            assert_eq!(expect, generators::oracle_lambda_oscillator(&[k], theta));
            let r = lambda_with_refinement(&a, 1, CirclePoint::new(theta), ConstraintKind::Zero, 64).unwrap();
            checks += 1;
            if r.meshes.len() > 3 {
                too_many += 1;
            }
            if r.lambda != expect {
                mismatches.push(format!("k={:.0}pi2 theta={theta}: {} vs {expect}", k / K1, r.lambda));
            }
            evaluations.push((format!("oscillator k={:.0}pi2", k / K1), r));
        }
    }
    let ok = mismatches.is_empty() && too_many == 0;
    out.record(
        2,
        "oscillator oracle",
        ok,
        format!("{checks} angles, {} mismatches, {too_many} needing > 2 refinements {mismatches:?}", mismatches.len()),
    );
}

fn nullity_criterion(out: &mut Outcome, evaluations: &[(String, RefinedIndex)], extra: &[String]) {
    let mut bad: Vec<String> = evaluations
        .iter()
        .filter(|(_, r)| r.discrete_nullity() != r.ode_nullity)
        .map(|(l, r)| format!("{l} theta={} N={} {:?}: {} vs {}", r.theta, r.n_iter, r.kind, r.discrete_nullity(), r.ode_nullity))
        .collect();
    bad.extend(extra.iter().cloned());
    out.record(3, "nullity agreement", bad.is_empty(), format!("{} evaluations, {} disagreements {bad:?}", evaluations.len(), bad.len()));
}

fn epsilon_criterion(out: &mut Outcome, suite: &[Entry], evaluations: &mut Vec<(String, RefinedIndex)>) {
    let mut bad = Vec::new();
    for e in suite {
        let p = &e.profile;
        if p.epsilon > 1 || (p.singular && p.epsilon != 0) {
            bad.push(format!("{}: epsilon {} singular {}", p.label, p.epsilon, p.singular));
        }
        for n in 1..=5 {
            match morse_sturm_index::galerkin::epsilon(&e.analysis, n, 64 * n) {
                Ok(r) => {
                    if r.epsilon != p.epsilon {
                        bad.push(format!("{} N={n}: {} vs {}", p.label, r.epsilon, p.epsilon));
                    }
                    evaluations.push((p.label.clone(), r.lambda_star));
                    evaluations.push((p.label.clone(), r.lambda_zero));
                }
                Err(err) => bad.push(format!("{} N={n}: {err}", p.label)),
            }
        }
    }
    out.record(4, "epsilon invariance", bad.is_empty(), format!("{} systems, N <= 5 {bad:?}", suite.len()));
}

fn jump_criterion(out: &mut Outcome, suite: &[Entry]) {
    let mut bad = Vec::new();
    let mut jumps = 0;
    for e in suite {
        let spectral = e.analysis.poincare.spectral_angles();
        for r in jump_records(&e.profile) {
            jumps += 1;
            let on_spectrum = spectral.iter().any(|t| (t - r.theta).abs() < 1e-9);
            if !on_spectrum || !r.bound_ok || !r.semicontinuity_ok {
                bad.push(format!("{} {r:?}", e.profile.label));
            }
        }
    }
    out.record(5, "jump control", bad.is_empty(), format!("{jumps} jumps on {} systems, {} violations {bad:?}", suite.len(), bad.len()));
}

fn fourier_maps_criterion(out: &mut Outcome) {
    let mut worst_round = 0.0f64;
    let mut worst_split = 0.0f64;
    let mut pairs = 0;
    let m = 8;
    for n_iter in [2, 3, 4] {
        for s in 0..100u64 {
            let sys = generators::random_tilted(s % 5, 2 + (s % 2) as usize).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * n_iter as u64 + s);
            let v = random_field(&mut rng, sys.n(), m * n_iter, n_iter);
            let w = random_field(&mut rng, sys.n(), m * n_iter, n_iter);
            let (vp, wp) = (psi_transform(&sys, &v).unwrap(), psi_transform(&sys, &w).unwrap());
            let back = upsilon_transform(&sys, &vp).unwrap();
            let err = v.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst_round = worst_round.max(err);

            let asm = assemble(&sys, n_iter, CirclePoint::ONE, Mesh::new(m * n_iter).unwrap()).unwrap();
            let lhs = form(&asm.h, &v, &w);
            let mut rhs = c64::new(0.0, 0.0);
            for (vk, wk) in vp.iter().zip(&wp) {
                let hk = assemble(&sys, 1, vk.rho, Mesh::new(m).unwrap()).unwrap().h;
                rhs += form(&hk, vk, wk);
            }
            rhs *= (n_iter * n_iter) as f64;
            let scale = asm.scale * (m * n_iter) as f64 * v.norm() * w.norm();
            worst_split = worst_split.max((lhs - rhs).norm() / scale);
            pairs += 1;
        }
    }
    let ok = worst_round <= 1e-12 && worst_split <= 1e-10;
    out.record(6, "Psi/Upsilon", ok, format!("{pairs} pairs, roundtrip {worst_round:.2e}, splitting {worst_split:.2e} (relative)"));
}

fn drift_criterion(out: &mut Outcome, suite: &[Entry]) {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_ratio = f64::INFINITY;
    let mut probed = 0;
    for (idx, e) in suite.iter().enumerate() {
        let sys = &e.analysis.system;
        let n = sys.n();
        let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
        let mut vec = || (0..n).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect::<Vec<_>>();
        let (v1, w1, v2, w2) = (vec(), vec(), vec(), vec());
        for n_iter in 1..=3 {
            let drift_at = |steps: usize| {
                let a = solve_ivp(sys, n_iter, &v1, &w1, steps).unwrap();
                let b = solve_ivp(sys, n_iter, &v2, &w2, steps).unwrap();
                let size = a.j.iter().chain(&a.dj).chain(&b.j).chain(&b.dj).flatten().map(|z| z.norm()).fold(1.0, f64::max);
                (pairing_drift(sys, &a, &b), size)
            };
            let steps = 1000 * n_iter;
            let (d, size) = drift_at(steps);
            worst = worst.max(d);
            if d > 1e-8 {
                bad.push(format!("{} N={n_iter}: drift {d:.2e}", e.profile.label));
            }
            // The order is only observable above round-off; below it, probe a coarser pair.
            let (d2, _) = drift_at(2 * steps);
            let roundoff = 1e-12 * size * size;
            let (coarse, fine) = if d > 100.0 * roundoff {
                (d, d2)
            } else {
                probed += 1;
                let base = 40 * n_iter;
                (drift_at(base).0, drift_at(2 * base).0)
            };
            if coarse > 100.0 * roundoff {
                let ratio = coarse / fine.max(f64::MIN_POSITIVE);
                worst_ratio = worst_ratio.min(ratio);
                if ratio < 8.0 {
                    bad.push(format!("{} N={n_iter}: ratio {ratio:.2}", e.profile.label));
                }
            }
        }
    }
    out.record(
        7,
        "conserved pairing",
        bad.is_empty(),
        format!("max drift {worst:.2e}, min doubling ratio {worst_ratio:.1} ({probed} probed on coarse grids) {bad:?}"),
    );
}

fn monotonicity_criterion(out: &mut Outcome, suite: &[Entry]) {
    let mut bad = Vec::new();
    let mut count = 0;
    for e in suite {
        let a = &e.analysis;
        let mut angles: Vec<(f64, ConstraintKind)> = e.profile.evaluations().map(|r| (r.theta, r.kind)).collect();
        angles.push((0.0, ConstraintKind::Star));
        for (theta, kind) in angles {
            let rho = CirclePoint::new(theta);
            let nu = a.nullity(rho, 1, kind).unwrap().dim;
            let counts: Vec<usize> = [32, 64, 128]
                .iter()
                .map(|&m| restricted_index(&a.system, 1, rho, Mesh::new(m).unwrap(), kind, nu, &a.settings.tol).unwrap().lambda)
                .collect();
            count += 1;
            if counts[0] > counts[1] || counts[1] != counts[2] {
                bad.push(format!("{} theta={theta} {kind:?}: {counts:?}", e.profile.label));
            }
        }
    }
    out.record(8, "Galerkin monotonicity", bad.is_empty(), format!("{count} evaluations, {} violations {bad:?}", bad.len()));
}

fn growth_criterion(out: &mut Outcome) {
    let a = Analysis::new(generators::oscillator(&[K9]).unwrap(), Settings::default()).unwrap();
    let p = scan_circle(&a, 64).unwrap();
    let it = iterate_indices(&a, &p, 24, 2, 64).unwrap();
    let g = &it.growth;
    let mut bad = Vec::new();
    // Direct count on the iterate: modes e^{2 pi i j t} with (2 pi j)^2 < 9 pi^2 N^2.
    for row in &it.rows {
        let direct = oracle_count(&[K9 * (row.n * row.n) as f64], 0.0);
        if row.mu0 != direct {
            bad.push(format!("N={}: mu0 {} vs direct {direct}", row.n, row.mu0));
        }
    }
    let mu24 = it.rows.iter().find(|r| r.n == 24).map(|r| r.mu0).unwrap_or(0) as f64;
    let dev = (mu24 / 24.0 - g.mean_index).abs();
    let bound = g.max_lambda as f64 / 24.0;
    if g.mean_index != 3.0 || dev > bound {
        bad.push(format!("mean {} dev {dev} bound {bound}", g.mean_index));
    }
    let violations = it.certificate_violations(12);
    if !violations.is_empty() {
        bad.push(format!("certificate violations {violations:?}"));
    }
    out.record(
        9,
        "growth",
        bad.is_empty(),
        format!("mu0(24) = {mu24}, mean {}, alpha {}, beta {} {bad:?}", g.mean_index, g.alpha, g.beta),
    );
}

fn hyperbolic_criterion(out: &mut Outcome, evaluations: &mut Vec<(String, RefinedIndex)>) {
    let systems = [
        generators::boosted(BoostProfile { rate: 0.6, a0: 0.0, cos: vec![0.1], sin: vec![0.2] }, &[-2.0]).unwrap(),
        generators::boosted(BoostProfile { rate: 0.3, a0: 0.1, cos: vec![], sin: vec![0.15] }, &[-1.0, -4.0]).unwrap(),
    ];
    let mut bad = Vec::new();
    let mut checks = 0;
    for sys in systems {
        let a = Analysis::new(sys, Settings::default()).unwrap();
        let p = scan_circle(&a, 64).unwrap();
        evaluations.extend(p.evaluations().map(|r| (p.label.clone(), r.clone())));
        let c = classify(&a, &p, 6, 64).unwrap();
        if !c.constant_profile || !c.hyperbolic_mod_y {
            bad.push(format!("{}: constant {} hyperbolic {}", c.label, c.constant_profile, c.hyperbolic_mod_y));
        }
        for h in &c.identity_checks {
            checks += 1;
            if h.mu_direct != h.predicted {
                bad.push(format!("{} N={}: {} vs {}", c.label, h.n, h.mu_direct, h.predicted));
            }
        }
    }
    let ok = bad.is_empty() && checks == 12;
    out.record(10, "hyperbolic identity", ok, format!("{checks} checks {bad:?}"));
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut out = Outcome { lines: Vec::new(), failed: Vec::new(), clock: Instant::now() };
    let mut evaluations: Vec<(String, RefinedIndex)> = Vec::new();
    let mut nullity_log = Vec::new();

    let suite: Vec<Entry> = suite_systems()
        .into_iter()
        .map(|sys| {
            let analysis = Analysis::new(sys, Settings::default()).unwrap();
            let profile = scan_circle(&analysis, 64).unwrap();
            Entry { analysis, profile }
        })
        .collect();
    for e in &suite {
        evaluations.extend(e.profile.evaluations().map(|r| (e.profile.label.clone(), r.clone())));
    }
    println!("suite of {} systems scanned in {:.0}s", suite.len(), start.elapsed().as_secs_f64());
    out.clock = Instant::now();

    fourier_criterion(&mut out, &mut nullity_log);
    oracle_criterion(&mut out, &mut evaluations);
    epsilon_criterion(&mut out, &suite, &mut evaluations);
    jump_criterion(&mut out, &suite);
    fourier_maps_criterion(&mut out);
    drift_criterion(&mut out, &suite);
    monotonicity_criterion(&mut out, &suite);
    growth_criterion(&mut out);
    hyperbolic_criterion(&mut out, &mut evaluations);
    nullity_criterion(&mut out, &evaluations, &nullity_log);

    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    assert!(out.failed.is_empty(), "failed criteria:\n{}", out.failed.join("\n"));
}
