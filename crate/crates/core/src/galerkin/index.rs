use faer::c64;
use serde::{Deserialize, Serialize};

use super::{assemble, ConstrainedForm, ConstraintKind, DiscreteField, Mesh};
use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::linalg::{self, cx};
use crate::settings::Tolerances;
use crate::system::{CirclePoint, MorseSturmSystem};

/// Inertia count of a reduced form on one mesh. Eigenvalues are reported in continuum units
/// (multiplied by `m`, the inverse of the nodal mass scale).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub lambda: usize,
    /// Eigenvalues within the kernel threshold.
    pub discrete_nullity: usize,
    pub ode_nullity: usize,
    pub m: usize,
    pub reduced_dim: usize,
    pub threshold: f64,
    /// Round-off level of the reduced eigenvalues.
    pub roundoff: f64,
    /// Number of negative eigenvalues before kernel adjudication.
    pub negative: usize,
    /// Eigenvalues within the threshold, by increasing modulus.
    pub near_zero: Vec<f64>,
    pub rank_deficient: bool,
}

impl IndexResult {
    /// Near-zero eigenvalues that behave like kernel approximants relative to the coarser
    /// result `prev` on half the mesh width: at round-off level, or shrinking by at least
    /// [`KERNEL_DECAY`]. Eigenvalues matched by rank in modulus.
    pub fn kernel_like(&self, prev: &IndexResult) -> usize {
        self.near_zero
            .iter()
            .enumerate()
            .filter(|(i, x)| {
                x.abs() <= self.roundoff || prev.near_zero.get(*i).is_some_and(|p| x.abs() * KERNEL_DECAY <= p.abs())
            })
            .count()
    }
}

/// Minimal shrink factor per mesh halving for an `O(h^2)` kernel approximant.
pub const KERNEL_DECAY: f64 = 2.5;

/// Kernel threshold in continuum units: the `O(h^2)` error `S^2 h^2 / 4` of kernel approximants.
fn kernel_threshold(cf: &ConstrainedForm, tol: &Tolerances) -> f64 {
    if let Some(t) = tol.eig {
        return t;
    }
    let m = cf.m as f64;
    cf.scale * cf.scale / (4.0 * m * m)
}

/// Eigenvalues below this (continuum units) are zero up to round-off.
fn roundoff_floor(cf: &ConstrainedForm, eig: &[f64]) -> f64 {
    let hnorm = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    1e-12 * hnorm * cf.m as f64
}

fn count(cf: &ConstrainedForm, ode_nullity: usize, tol: &Tolerances) -> Result<IndexResult> {
    let eig = linalg::hermitian_eigenvalues(cf.h_reduced.as_ref())?;
    let m = cf.m as f64;
    let scaled: Vec<f64> = eig.iter().map(|x| x * m).collect();
    let threshold = kernel_threshold(cf, tol);
    let roundoff = roundoff_floor(cf, &eig);
    let mut near: Vec<usize> = (0..scaled.len()).filter(|&i| scaled[i].abs() <= threshold).collect();
    near.sort_by(|&a, &b| scaled[a].abs().total_cmp(&scaled[b].abs()));
    let kernel: Vec<usize> = near.iter().take(ode_nullity).copied().collect();
    let lambda = (0..scaled.len()).filter(|i| scaled[*i] < 0.0 && !kernel.contains(i)).count();
    Ok(IndexResult {
        lambda,
        discrete_nullity: near.len(),
        ode_nullity,
        m: cf.m,
        reduced_dim: scaled.len(),
        threshold,
        roundoff,
        negative: scaled.iter().filter(|&&x| x < 0.0).count(),
        near_zero: near.iter().map(|&i| scaled[i]).collect(),
        rank_deficient: cf.rank_deficient,
    })
}

/// Index and discrete nullity of `I_N` on the discrete `H_*^rho(N)` or `H_0^rho(N)`.
/// Near-zero eigenvalues are attributed to the kernel only up to `ode_nullity`.
pub fn restricted_index(
    system: &MorseSturmSystem,
    n_iter: usize,
    rho: CirclePoint,
    mesh: Mesh,
    kind: ConstraintKind,
    ode_nullity: usize,
    tol: &Tolerances,
) -> Result<IndexResult> {
    let cf = ConstrainedForm::build(system, n_iter, rho, mesh, kind)?;
    count(&cf, ode_nullity, tol)
}

/// Counts for an already reduced form; used to check invariance under a change of basis.
#[cfg(test)]
pub(crate) fn count_reduced(cf: &ConstrainedForm, ode_nullity: usize, tol: &Tolerances) -> Result<IndexResult> {
    count(cf, ode_nullity, tol)
}

/// Sequence of inertia counts along dyadic refinement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinedIndex {
    pub theta: f64,
    pub n_iter: usize,
    pub kind: ConstraintKind,
    pub lambda: usize,
    pub ode_nullity: usize,
    pub ode_resolution_warning: bool,
    pub meshes: Vec<usize>,
    pub lambdas: Vec<usize>,
    /// Eigenvalues within the kernel threshold on each mesh.
    pub candidates: Vec<usize>,
    /// Candidates that converge to zero (see [`IndexResult::kernel_like`]); the first mesh has
    /// no predecessor and repeats its candidate count.
    pub discrete_nullities: Vec<usize>,
    /// The `lambdas` sequence is nondecreasing.
    pub monotone: bool,
}

impl RefinedIndex {
    /// Discrete nullity on the final mesh.
    pub fn discrete_nullity(&self) -> usize {
        self.discrete_nullities.last().copied().unwrap_or(0)
    }
}

/// Refinement stops before the dense form would exceed this dimension.
pub const MAX_DENSE_DIM: usize = 6144;

/// Refines from `mesh0` until two successive counts agree and the discrete nullity equals the
/// ODE nullity.

pub fn lambda_with_refinement(
    analysis: &Analysis,
    n_iter: usize,
    rho: CirclePoint,
    kind: ConstraintKind,
    mesh0: usize,
) -> Result<RefinedIndex> {
    let nu = analysis.nullity(rho, n_iter, kind)?;
    let tol = analysis.settings.tol;
    let mut mesh = Mesh::new(mesh0)?;
    let mut out = RefinedIndex {
        theta: rho.theta(),
        n_iter,
        kind,
        lambda: 0,
        ode_nullity: nu.dim,
        ode_resolution_warning: nu.resolution_warning,
        meshes: Vec::new(),
        lambdas: Vec::new(),
        candidates: Vec::new(),
        discrete_nullities: Vec::new(),
        monotone: true,
    };
    let mut prev: Option<IndexResult> = None;
    for _ in 0..=analysis.settings.max_refinements {
        let res = restricted_index(&analysis.system, n_iter, rho, mesh, kind, nu.dim, &tol)?;
        let nullity = prev.as_ref().map_or(res.discrete_nullity, |p| res.kernel_like(p));
        if let Some(&last) = out.lambdas.last() {
            out.monotone &= last <= res.lambda;
        }
        let stable = out.lambdas.last() == Some(&res.lambda) && nullity == nu.dim;
        out.meshes.push(mesh.m());
        out.lambdas.push(res.lambda);
        out.candidates.push(res.discrete_nullity);
        out.discrete_nullities.push(nullity);
        if stable {
            out.lambda = res.lambda;
            return Ok(out);
        }
        prev = Some(res);
        mesh = mesh.refine();
        if analysis.system.n() * mesh.m() > MAX_DENSE_DIM {
            break;
        }
    }
    Err(Error::Nonconvergent(format!(
        "lambda_{kind}(theta={}, N={n_iter}): counts {:?}, discrete nullities {:?} vs ODE nullity {} on meshes {:?}",
        rho.theta(),
        out.lambdas,
        out.discrete_nullities,
        nu.dim,
        out.meshes
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub epsilon: usize,
    pub lambda_star: RefinedIndex,
    pub lambda_zero: RefinedIndex,
}

/// `lambda_*(1, N) - lambda_0(1, N)` for the `N`-th iterate, which must lie in `{0, 1}`.
pub fn epsilon(analysis: &Analysis, n_iter: usize, mesh0: usize) -> Result<EpsilonResult> {
    let star = lambda_with_refinement(analysis, n_iter, CirclePoint::ONE, ConstraintKind::Star, mesh0)?;
    let zero = lambda_with_refinement(analysis, n_iter, CirclePoint::ONE, ConstraintKind::Zero, mesh0)?;
    if zero.lambda > star.lambda || star.lambda > zero.lambda + 1 {
        return Err(Error::Consistency(format!(
            "lambda_* = {} and lambda_0 = {} differ by more than one (N = {n_iter})",
            star.lambda, zero.lambda
        )));
    }
    Ok(EpsilonResult { epsilon: star.lambda - zero.lambda, lambda_star: star, lambda_zero: zero })
}

/// Eigenvectors of the reduced form for the `count` eigenvalues of smallest modulus.
pub fn kernel_fields(
    system: &MorseSturmSystem,
    n_iter: usize,
    rho: CirclePoint,
    mesh: Mesh,
    kind: ConstraintKind,
    count: usize,
) -> Result<Vec<(f64, DiscreteField)>> {
    let cf = ConstrainedForm::new(&assemble(system, n_iter, rho, mesh)?, kind);
    let (vals, vecs) = linalg::hermitian_eigen(cf.h_reduced.as_ref())?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()));
    let full = &cf.z * &vecs;
    Ok(order
        .into_iter()
        .take(count)
        .map(|c| {
            let coeffs = (0..full.nrows()).map(|i| full[(i, c)]).collect();
            (vals[c] * mesh.m() as f64, DiscreteField { n: system.n(), m: mesh.m(), n_iter, rho, coeffs })
        })
        .collect())
}

/// Residuals of a kernel candidate against the ODE and the boundary conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelResidual {
    /// `|V'' - N^2 R_N V|` in the nodal `L^2` norm, relative to `|V|`.
    pub interior: f64,
    /// `|T^N V(1) - rho^N V(0)|`, relative.
    pub boundary_value: f64,
    /// `|T^N V'(1) - rho^N V'(0)|` from one-sided second-order differences, relative to `max |V'|`.
    pub boundary_derivative: f64,
}

pub fn kernel_residual_check(system: &MorseSturmSystem, field: &DiscreteField) -> Result<KernelResidual> {
    let n = field.n;
    let m = field.m;
    let h = 1.0 / m as f64;
    let it = system.iterate(field.n_iter)?;
    let b = it.boundary_map(field.rho);
    let binv = {
        let ti = it.t_pow(field.n_iter);
        let z = field.rho.pow(field.n_iter).rho().conj();
        faer::Mat::from_fn(n, n, |i, j| z * ti[(i, j)])
    };
    let apply = |a: &faer::Mat<c64>, v: &[c64]| -> Vec<c64> { (0..n).map(|i| (0..n).map(|j| a[(i, j)] * v[j]).sum()).collect() };
    let node = |i: isize| -> Vec<c64> {
        if i < 0 {
            apply(&binv, field.node((i + m as isize) as usize))
        } else if i as usize >= m {
            apply(&b, field.node(i as usize - m))
        } else {
            field.node(i as usize).to_vec()
        }
    };
    let nn = (field.n_iter * field.n_iter) as f64;
    let mut res2 = 0.0;
    for i in 0..m as isize {
        let (vm, v0, vp) = (node(i - 1), node(i), node(i + 1));
        let r = it.eval(i as f64 * h).r * nn;
        let rv = linalg::mat_vec_c(r.as_ref(), &v0);
        for k in 0..n {
            let d2 = (vp[k] - v0[k] * 2.0 + vm[k]) / (h * h);
            res2 += (d2 - rv[k]).norm_sqr();
        }
    }
    let vnorm = field.norm().max(f64::MIN_POSITIVE);
    let interior = res2.sqrt() / vnorm;

    let tn = it.t_pow(field.n_iter);
    let zn = field.rho.pow(field.n_iter).rho();
    let tn_c = faer::Mat::from_fn(n, n, |i, j| cx(tn[(i, j)]));
    let v_end = node(m as isize);
    let tv = apply(&tn_c, &v_end);
    let v0 = node(0);
    let bv: f64 = (0..n).map(|k| (tv[k] - v0[k] * zn).norm_sqr()).sum::<f64>().sqrt();
    let scale0 = crate::linalg::norm_c(&v0).max(f64::MIN_POSITIVE);

    let d_end: Vec<c64> = {
        let (a, bb, c) = (node(m as isize), node(m as isize - 1), node(m as isize - 2));
        (0..n).map(|k| (a[k] * 3.0 - bb[k] * 4.0 + c[k]) / (2.0 * h)).collect()
    };
    let d_start: Vec<c64> = {
        let (a, bb, c) = (node(0), node(1), node(2));
        (0..n).map(|k| (a[k] * -3.0 + bb[k] * 4.0 - c[k]) / (2.0 * h)).collect()
    };
    let td = apply(&tn_c, &d_end);
    let bd: f64 = (0..n).map(|k| (td[k] - d_start[k] * zn).norm_sqr()).sum::<f64>().sqrt();
    let dmax = (0..m as isize)
        .map(|i| {
            let (a, c) = (node(i), node(i + 1));
            (0..n).map(|k| ((c[k] - a[k]) / h).norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    Ok(KernelResidual { interior, boundary_value: bv / scale0, boundary_derivative: bd / dmax.max(scale0) })
}
