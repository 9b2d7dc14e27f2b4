//! RK4 integration of `J'' = N^2 R_N J`, the linear Poincaré map and exact nullities.

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cx, CMat, KernelDim, RMat};
use crate::settings::Tolerances;
use crate::system::{CirclePoint, MorseSturmSystem};

/// Eigenvalues closer than this are treated as one cluster (Jordan blocks split like `eps^(1/k)`).
pub const CLUSTER_RADIUS: f64 = 1e-4;

/// Fixed-step RK4 for `X' = [[0, I], [A(t), 0]] X` with `X` of shape `2n x k`.
/// Calls `visit(i, X_i)` at every node when given.
fn rk4(
    coef: &dyn Fn(f64) -> RMat,
    x0: RMat,
    steps: usize,
    mut visit: Option<&mut dyn FnMut(usize, MatRef<'_, f64>)>,
) -> RMat {
    let n = x0.nrows() / 2;
    let k = x0.ncols();
    let h = 1.0 / steps as f64;
    let deriv = |a: &RMat, x: &RMat| -> RMat {
        let top = x.get(..n, ..);
        let bottom = x.get(n.., ..);
        let ab = a * top;
        Mat::from_fn(2 * n, k, |i, j| if i < n { bottom[(i, j)] } else { ab[(i - n, j)] })
    };
    let mut x = x0;
    let mut a0 = coef(0.0);
    if let Some(v) = visit.as_mut() {
        v(0, x.as_ref());
    }
    for i in 0..steps {
        let t = i as f64 * h;
        let am = coef(t + 0.5 * h);
        let a1 = coef(if i + 1 == steps { 1.0 } else { t + h });
        let k1 = deriv(&a0, &x);
        let x2 = &x + &k1 * (0.5 * h);
        let k2 = deriv(&am, &x2);
        let x3 = &x + &k2 * (0.5 * h);
        let k3 = deriv(&am, &x3);
        let x4 = &x + &k3 * h;
        let k4 = deriv(&a1, &x4);
        x = &x + (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0);
        a0 = a1;
        if let Some(v) = visit.as_mut() {
            v(i + 1, x.as_ref());
        }
    }
    x
}

fn coefficient<'a>(system: &'a MorseSturmSystem, n_iter: usize) -> Result<impl Fn(f64) -> RMat + 'a> {
    let it = system.iterate(n_iter)?;
    let scale = (n_iter * n_iter) as f64;
    Ok(move |t: f64| it.eval(t).r * scale)
}

/// Solution of one initial value problem on the uniform grid `t_i = i/steps`.
#[derive(Clone, Debug)]
pub struct SolutionPath {
    pub times: Vec<f64>,
    pub j: Vec<Vec<c64>>,
    pub dj: Vec<Vec<c64>>,
}

/// Solves `J'' = N^2 R_N J`, `J(0) = v`, `J'(0) = w`.
pub fn solve_ivp(system: &MorseSturmSystem, n_iter: usize, v: &[c64], w: &[c64], steps: usize) -> Result<SolutionPath> {
    let n = system.n();
    if v.len() != n || w.len() != n {
        return Err(Error::Shape("initial data must have length n".into()));
    }
    if steps < 32 {
        return Err(Error::InvalidArgument("at least 32 steps are required".into()));
    }
    let coef = coefficient(system, n_iter)?;
    // Real and imaginary parts integrate independently.
    let x0 = Mat::from_fn(2 * n, 2, |i, c| {
        let z = if i < n { v[i] } else { w[i - n] };
        if c == 0 { z.re } else { z.im }
    });
    let mut path = SolutionPath { times: Vec::with_capacity(steps + 1), j: Vec::new(), dj: Vec::new() };
    let mut visit = |i: usize, x: MatRef<'_, f64>| {
        path.times.push(i as f64 / steps as f64);
        path.j.push((0..n).map(|r| c64::new(x[(r, 0)], x[(r, 1)])).collect());
        path.dj.push((0..n).map(|r| c64::new(x[(n + r, 0)], x[(n + r, 1)])).collect());
    };
    rk4(&coef, x0, steps, Some(&mut visit));
    Ok(path)
}

/// Fundamental matrix `Phi(1)` of the iterated system: `(v, w) -> (J(1), J'(1))`.
pub fn fundamental_matrix(system: &MorseSturmSystem, n_iter: usize, steps: usize) -> Result<RMat> {
    let n = system.n();
    let coef = coefficient(system, n_iter)?;
    Ok(rk4(&coef, RMat::identity(2 * n, 2 * n), steps, None))
}

/// Monodromy of the iterated system obtained by direct integration: `(v, w) -> (T^N J(1), T^N J'(1))`.
pub fn iterated_monodromy(system: &MorseSturmSystem, n_iter: usize, steps: usize) -> Result<RMat> {
    let n = system.n();
    let phi = fundamental_matrix(system, n_iter, steps)?;
    let tn = linalg::mat_pow(system.t().matrix(), n_iter);
    let big = Mat::from_fn(2 * n, 2 * n, |i, j| {
        if i < n && j < n {
            tn[(i, j)]
        } else if i >= n && j >= n {
            tn[(i - n, j - n)]
        } else {
            0.0
        }
    });
    Ok(&big * &phi)
}

/// Maximal deviation of the re-integrated `Y` from its closed form, relative to the size of `Y`.
pub fn solution_residual(system: &MorseSturmSystem, steps: usize) -> f64 {
    let n = system.n();
    let coef = match coefficient(system, 1) {
        Ok(c) => c,
        Err(_) => return f64::INFINITY,
    };
    let (y0, dy0) = system.y_at(0.0);
    let x0 = Mat::from_fn(2 * n, 1, |i, _| if i < n { y0[i] } else { dy0[i - n] });
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    let mut visit = |i: usize, x: MatRef<'_, f64>| {
        let (y, dy) = system.y_at(i as f64 / steps as f64);
        for r in 0..n {
            scale = scale.max(y[r].abs()).max(dy[r].abs());
            worst = worst.max((x[(r, 0)] - y[r]).abs()).max((x[(n + r, 0)] - dy[r]).abs());
        }
    };
    rk4(&coef, x0, steps, Some(&mut visit));
    worst / scale
}

/// Maximal drift of the conserved pairing `g(J1', J2) - g(J1, J2')` along two solutions.
pub fn pairing_drift(system: &MorseSturmSystem, a: &SolutionPath, b: &SolutionPath) -> f64 {
    let g = system.g();
    let w = |i: usize| g.eval_c(&a.dj[i], &b.j[i]) - g.eval_c(&a.j[i], &b.dj[i]);
    let w0 = w(0);
    (0..a.j.len()).map(|i| (w(i) - w0).norm()).fold(0.0, f64::max)
}

/// A unit-circle eigenvalue cluster of the Poincaré map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralAngle {
    pub theta: f64,
    pub re: f64,
    pub im: f64,
    /// Number of computed eigenvalues in the cluster.
    pub algebraic: usize,
    /// `dim Ker(P - rho)`.
    pub geometric: usize,
    /// `dim Ker(P_0 - rho)`.
    pub geometric_restricted: usize,
}

/// Linear Poincaré map, its restriction to the invariant hyperplane and the unit-circle spectrum.
#[derive(Clone, Debug)]
pub struct PoincareData {
    pub n: usize,
    pub steps: usize,
    pub p: RMat,
    pub p0: RMat,
    /// Orthonormal columns spanning `{(v, w): g(w, Y(0)) - g(v, Y'(0)) = 0}`.
    pub basis_j0: RMat,
    /// Unit-norm coefficients of the functional defining the hyperplane.
    pub functional: Vec<f64>,
    /// `(Y(0), Y'(0))`.
    pub y0: Vec<f64>,
    pub eigenvalues: Vec<c64>,
    pub unit_spectrum: Vec<SpectralAngle>,
    /// `|P (Y(0), Y'(0)) - (Y(0), Y'(0))|`, relative.
    pub fixed_defect: f64,
    /// Component of `P basis_j0` outside the hyperplane, relative to `|P|`.
    pub invariance_defect: f64,
}

/// Serializable view of [`PoincareData`], matrices row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub n: usize,
    pub steps: usize,
    pub p: Vec<f64>,
    pub p0: Vec<f64>,
    pub basis_j0: Vec<f64>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub unit_spectrum: Vec<SpectralAngle>,
    pub fixed_defect: f64,
    pub invariance_defect: f64,
}

/// Builds the Poincaré map; reruns once with doubled steps when the invariance or fixed-point
/// defect exceeds `tol.ode`.
pub fn poincare(system: &MorseSturmSystem, steps: usize, tol: &Tolerances) -> Result<PoincareData> {
    let first = poincare_once(system, steps, tol)?;
    if first.fixed_defect <= tol.ode && first.invariance_defect <= tol.ode {
        return Ok(first);
    }
    let second = poincare_once(system, 2 * steps, tol)?;
    if second.fixed_defect <= tol.ode && second.invariance_defect <= tol.ode {
        return Ok(second);
    }
    Err(Error::IntegratorAccuracy(format!(
        "hyperplane invariance defect {:.3e}, fixed-point defect {:.3e} at {} steps",
        second.invariance_defect,
        second.fixed_defect,
        2 * steps
    )))
}

fn poincare_once(system: &MorseSturmSystem, steps: usize, tol: &Tolerances) -> Result<PoincareData> {
    let n = system.n();
    let p = iterated_monodromy(system, 1, steps)?;
    let (y0, dy0) = system.y_at(0.0);
    let g = system.g().matrix();
    let gy = linalg::mat_vec(g, &y0);
    let gdy = linalg::mat_vec(g, &dy0);
    let mut functional: Vec<f64> = gdy.iter().map(|x| -x).chain(gy.iter().copied()).collect();
    let fnorm = linalg::norm(&functional);
    functional.iter_mut().for_each(|x| *x /= fnorm);

    let row = Mat::from_fn(1, 2 * n, |_, j| cx(functional[j]));
    let (basis_c, _) = linalg::null_space(row.as_ref(), 1e-14);
    // The functional is real, so the real part of the complex basis spans the hyperplane;
    // re-orthonormalize to be safe.
    let basis_r = Mat::from_fn(2 * n, 2 * n - 1, |i, j| basis_c[(i, j)].re);
    let basis_j0 = basis_r.qr().compute_thin_Q();
    let p0 = basis_j0.transpose() * &p * &basis_j0;

    let pb = &p * &basis_j0;
    let proj = &basis_j0 * (basis_j0.transpose() * &pb);
    let pscale = p.norm_l2().max(1.0);
    let invariance_defect = (&pb - &proj).norm_l2() / pscale;

    let ystack: Vec<f64> = y0.iter().chain(&dy0).copied().collect();
    let py = linalg::mat_vec(p.as_ref(), &ystack);
    let fixed_defect = linalg::norm(&py.iter().zip(&ystack).map(|(a, b)| a - b).collect::<Vec<_>>()) / linalg::norm(&ystack);

    let eigenvalues = linalg::eigenvalues_real(p.as_ref())?;
    let unit_spectrum = unit_spectrum(&p, &p0, &eigenvalues, tol)?;
    Ok(PoincareData {
        n,
        steps,
        p,
        p0,
        basis_j0,
        functional,
        y0: ystack,
        eigenvalues,
        unit_spectrum,
        fixed_defect,
        invariance_defect,
    })
}

fn cluster(eigs: &[c64]) -> Vec<Vec<c64>> {
    let mut clusters: Vec<Vec<c64>> = Vec::new();
    let mut assigned = vec![false; eigs.len()];
    for i in 0..eigs.len() {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let mut members = vec![eigs[i]];
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..eigs.len() {
                if !assigned[j] && members.iter().any(|m| (*m - eigs[j]).norm() <= CLUSTER_RADIUS) {
                    assigned[j] = true;
                    members.push(eigs[j]);
                    grew = true;
                }
            }
        }
        clusters.push(members);
    }
    clusters
}

fn shifted(a: &RMat, rho: c64) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| cx(a[(i, j)]) - if i == j { rho } else { c64::new(0.0, 0.0) })
}

fn unit_spectrum(p: &RMat, p0: &RMat, eigs: &[c64], tol: &Tolerances) -> Result<Vec<SpectralAngle>> {
    let mut out = Vec::new();
    for members in cluster(eigs) {
        let mean = members.iter().copied().sum::<c64>() / members.len() as f64;
        if (mean.norm() - 1.0).abs() > tol.spectral {
            continue;
        }
        let mut theta = (mean.im.atan2(mean.re) / std::f64::consts::TAU).rem_euclid(1.0);
        if theta < 1e-9 || theta > 1.0 - 1e-9 {
            theta = 0.0;
        }
        let rho = CirclePoint::new(theta).rho();
        let geometric = linalg::kernel_dim(shifted(p, rho).as_ref(), tol.rank)?.dim;
        let geometric_restricted = linalg::kernel_dim(shifted(p0, rho).as_ref(), tol.rank)?.dim;
        out.push(SpectralAngle { theta, re: rho.re, im: rho.im, algebraic: members.len(), geometric, geometric_restricted });
    }
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    Ok(out)
}

impl PoincareData {
    pub fn report(&self) -> PoincareReport {
        PoincareReport {
            n: self.n,
            steps: self.steps,
            p: linalg::to_row_major(self.p.as_ref()),
            p0: linalg::to_row_major(self.p0.as_ref()),
            basis_j0: linalg::to_row_major(self.basis_j0.as_ref()),
            eigenvalues: self.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            unit_spectrum: self.unit_spectrum.clone(),
            fixed_defect: self.fixed_defect,
            invariance_defect: self.invariance_defect,
        }
    }

    /// Sorted angles of the unit-circle spectrum.
    pub fn spectral_angles(&self) -> Vec<f64> {
        self.unit_spectrum.iter().map(|s| s.theta).collect()
    }

    /// Kernel of `P^N - rho^N` as the direct sum of `Ker(P - rho omega^k)` over the `N`-th roots
    /// of unity `omega^k`. Each factor has the norm of `P`, so the rank decision does not degrade
    /// with `|P^N|` the way it would on the power itself.
    fn power_kernel(&self, rho: CirclePoint, n_iter: usize, tol: &Tolerances) -> Result<(Vec<CMat>, bool)> {
        let mut blocks = Vec::new();
        let mut borderline = false;
        for k in 0..n_iter {
            let z = rho.rho() * CirclePoint::root_of_unity(k, n_iter).rho();
            let (basis, kd) = linalg::kernel_basis(shifted(&self.p, z).as_ref(), tol.rank)?;
            borderline |= kd.borderline;
            if kd.dim > 0 {
                blocks.push(basis);
            }
        }
        Ok((blocks, borderline))
    }

    /// `nu_*(rho, N) = dim Ker(P^N - rho^N)`.
    pub fn nullity_star(&self, rho: CirclePoint, n_iter: usize, tol: &Tolerances) -> Result<KernelDim> {
        let (blocks, borderline) = self.power_kernel(rho, n_iter, tol)?;
        Ok(KernelDim { dim: blocks.iter().map(|b| b.ncols()).sum(), borderline })
    }

    /// `nu_0(rho, N)`: equal to `nu_*` unless `rho^N = 1`, where the kernel is intersected
    /// with the hyperplane of vanishing pairing with `Y`.
    pub fn nullity_zero(&self, rho: CirclePoint, n_iter: usize, tol: &Tolerances) -> Result<KernelDim> {
        if !rho.pow(n_iter).is_one() {
            return self.nullity_star(rho, n_iter, tol);
        }
        let (blocks, mut borderline) = self.power_kernel(rho, n_iter, tol)?;
        let dim: usize = blocks.iter().map(|b| b.ncols()).sum();
        let fnorm = linalg::norm(&self.functional);
        if dim == 0 || fnorm == 0.0 {
            return Ok(KernelDim { dim, borderline });
        }
        // The eigenspaces are independent; the functional vanishes on their sum iff it
        // vanishes on each orthonormal block.
        let mut size = 0.0f64;
        for b in &blocks {
            for c in 0..b.ncols() {
                let fv: c64 = (0..b.nrows()).map(|i| b[(i, c)] * self.functional[i]).sum();
                size = size.max(fv.norm() / fnorm);
            }
        }
        let thr = tol.rank;
        borderline |= size > thr / 10.0 && size < thr * 10.0;
        Ok(KernelDim { dim: if size > thr { dim - 1 } else { dim }, borderline })
    }

    /// Eigenspace of `P` at 1 is exactly the line through `(Y(0), Y'(0))`.
    pub fn fixed_space_is_y(&self, tol: &Tolerances) -> Result<bool> {
        let dim = linalg::kernel_dim(shifted(&self.p, cx(1.0)).as_ref(), tol.rank)?.dim;
        Ok(dim == 1 && self.fixed_defect <= tol.ode)
    }
}

/// Operator-norm distance between `D P^N D^{-1}`, `D = diag(I, N I)`, and the directly
/// integrated monodromy of the iterated system, relative to the latter.
pub fn iteration_consistency(system: &MorseSturmSystem, data: &PoincareData, n_iter: usize, steps: usize) -> Result<f64> {
    let n = system.n();
    let direct = iterated_monodromy(system, n_iter, steps)?;
    let pn = linalg::mat_pow(data.p.as_ref(), n_iter);
    let nf = n_iter as f64;
    let conj = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let left = if i < n { 1.0 } else { nf };
        let right = if j < n { 1.0 } else { 1.0 / nf };
        left * pn[(i, j)] * right
    });
    Ok((&direct - &conj).norm_l2() / direct.norm_l2().max(1.0))
}
