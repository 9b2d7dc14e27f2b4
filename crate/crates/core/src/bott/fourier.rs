use faer::c64;
use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::galerkin::{restricted_index, MAX_DENSE_DIM, ConstraintKind, DiscreteField, IndexResult, Mesh};
use crate::system::{CirclePoint, MorseSturmSystem};

fn apply(a: faer::MatRef<'_, f64>, v: &[c64]) -> Vec<c64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| v[j] * a[(i, j)]).sum()).collect()
}

/// Splits a field of `H^1(N)` on a mesh of `mN` elements into `N` fields on `m` elements,
/// `V_k(t) = (1/N) sum_j omega^{-kj} T^j V((t + j)/N)`, with `V_k` in `H^{omega^k}(1)`, `k = 1..N`.
pub fn psi_transform(system: &MorseSturmSystem, field: &DiscreteField) -> Result<Vec<DiscreteField>> {
    let n_iter = field.n_iter;
    if field.m % n_iter != 0 {
        return Err(Error::InvalidArgument(format!("mesh {} is not divisible by N = {n_iter}", field.m)));
    }
    if !field.rho.is_one() {
        return Err(Error::InvalidArgument("psi_transform acts on fields with rho = 1".into()));
    }
    let it = system.iterate(n_iter)?;
    let m = field.m / n_iter;
    let n = field.n;
    let mut out = Vec::with_capacity(n_iter);
    for k in 1..=n_iter {
        let mut vk = DiscreteField::zeros(n, m, 1, CirclePoint::root_of_unity(k, n_iter));
        for j in 0..n_iter {
            let w = CirclePoint::root_of_unity(k * j, n_iter).conj().rho() / n_iter as f64;
            for i in 0..m {
                let tv = apply(it.t_pow(j), field.node(i + j * m));
                for (dst, src) in vk.node_mut(i).iter_mut().zip(&tv) {
                    *dst += *src * w;
                }
            }
        }
        out.push(vk);
    }
    Ok(out)
}

/// Inverse of [`psi_transform`]: `V(s) = sum_k V_k(sN)` using `V_k(t + j) = omega^{kj} T^{-j} V_k(t)`.
pub fn upsilon_transform(system: &MorseSturmSystem, parts: &[DiscreteField]) -> Result<DiscreteField> {
    let n_iter = parts.len();
    if n_iter == 0 {
        return Err(Error::InvalidArgument("upsilon_transform needs at least one component".into()));
    }
    let it = system.iterate(n_iter)?;
    let (n, m) = (parts[0].n, parts[0].m);
    let mut v = DiscreteField::zeros(n, m * n_iter, n_iter, CirclePoint::ONE);
    for (idx, vk) in parts.iter().enumerate() {
        let k = idx + 1;
        if vk.m != m || vk.n != n {
            return Err(Error::Shape("components must share n and m".into()));
        }
        for j in 0..n_iter {
            let w = CirclePoint::root_of_unity(k * j, n_iter).rho();
            for i in 0..m {
                let tv = apply(it.t_inv_pow(j), vk.node(i));
                for (dst, src) in v.node_mut(i + j * m).iter_mut().zip(&tv) {
                    *dst += *src * w;
                }
            }
        }
    }
    Ok(v)
}

/// Both sides of the Fourier identities on matching meshes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierReport {
    pub n_iter: usize,
    /// Mesh of the iterated system; the base system uses `m / N`.
    pub m: usize,
    pub lambda_zero_iterated: usize,
    pub lambda_star_iterated: usize,
    /// `lambda_0(omega^k, 1)` for `k = 1..N`.
    pub terms: Vec<usize>,
    pub lambda_star_one: usize,
    pub rhs_zero: usize,
    pub rhs_star: usize,
    pub zero_holds: bool,
    pub star_holds: bool,
    /// Discrete nullities agree with the ODE nullities on every evaluation of the final mesh.
    pub nullities_match: bool,
    pub meshes_tried: Vec<usize>,
}

impl FourierReport {
    pub fn holds(&self) -> bool {
        self.zero_holds && self.star_holds
    }

    /// `"5 = 3 + 2 OK"` style summary of the `H_0` identity, terms listed from `rho = 1`.
    pub fn summary_zero(&self) -> String {
        let n = self.terms.len();
        let terms: Vec<String> = (0..n).map(|i| self.terms[(i + n - 1) % n].to_string()).collect();
        format!("{} = {} {}", self.lambda_zero_iterated, terms.join(" + "), if self.zero_holds { "OK" } else { "FAIL" })
    }

    pub fn summary_star(&self) -> String {
        let mut terms = vec![self.lambda_star_one.to_string()];
        terms.extend(self.terms[..self.terms.len() - 1].iter().map(|t| t.to_string()));
        format!("{} = {} {}", self.lambda_star_iterated, terms.join(" + "), if self.star_holds { "OK" } else { "FAIL" })
    }
}

fn evaluate(analysis: &Analysis, n_iter: usize, m: usize) -> Result<(FourierReport, Vec<IndexResult>)> {
    let tol = analysis.settings.tol;
    let sys = &analysis.system;
    let one = CirclePoint::ONE;
    let mut all: Vec<IndexResult> = Vec::new();
    let mut run = |n: usize, rho: CirclePoint, mesh: usize, kind: ConstraintKind| -> Result<usize> {
        let nu = analysis.nullity(rho, n, kind)?.dim;
        let r = restricted_index(sys, n, rho, Mesh::new(mesh)?, kind, nu, &tol)?;
        let l = r.lambda;
        all.push(r);
        Ok(l)
    };
    let lz = run(n_iter, one, m, ConstraintKind::Zero)?;
    let ls = run(n_iter, one, m, ConstraintKind::Star)?;
    let base = m / n_iter;
    let terms = (1..=n_iter)
        .map(|k| run(1, CirclePoint::root_of_unity(k, n_iter), base, ConstraintKind::Zero))
        .collect::<Result<Vec<_>>>()?;
    let star_one = run(1, one, base, ConstraintKind::Star)?;
    let rhs_zero: usize = terms.iter().sum();
    let rhs_star = star_one + terms[..n_iter - 1].iter().sum::<usize>();
    let report = FourierReport {
        n_iter,
        m,
        lambda_zero_iterated: lz,
        lambda_star_iterated: ls,
        terms,
        lambda_star_one: star_one,
        rhs_zero,
        rhs_star,
        zero_holds: lz == rhs_zero,
        star_holds: ls == rhs_star,
        nullities_match: false,
        meshes_tried: Vec::new(),
    };
    Ok((report, all))
}

/// Compares `lambda_0(1, N)`, `lambda_*(1, N)` computed on the iterated system with the sums over
/// `N`-th roots of unity on the base system. Both sides are refined together (at most twice)
/// while some discrete nullity disagrees with the ODE; an integer mismatch on the final mesh is
/// an identity violation.
pub fn fourier_check(analysis: &Analysis, n_iter: usize, m: usize) -> Result<FourierReport> {
    if n_iter == 0 || m % n_iter != 0 {
        return Err(Error::InvalidArgument(format!("mesh {m} must be divisible by N = {n_iter}")));
    }
    Mesh::new(m / n_iter)?;
    let mut mesh = m;
    let mut tried = Vec::new();
    let mut prev: Option<Vec<IndexResult>> = None;
    loop {
        tried.push(mesh);
        let (mut report, results) = evaluate(analysis, n_iter, mesh)?;
        let resolved = match &prev {
            None => results.iter().all(|r| r.discrete_nullity == r.ode_nullity),
            Some(p) => results.iter().zip(p).all(|(r, q)| r.kernel_like(q) == r.ode_nullity),
        };
        report.nullities_match = resolved;
        report.meshes_tried = tried.clone();
        let capped = analysis.system.n() * 2 * mesh > MAX_DENSE_DIM;
        if resolved || capped || tried.len() > analysis.settings.max_refinements.min(2) {
            if !report.holds() {
                return Err(Error::IdentityViolation(format!(
                    "N = {n_iter}, m = {mesh}: {} / {}",
                    report.summary_zero(),
                    report.summary_star()
                )));
            }
            return Ok(report);
        }
        prev = Some(results);
        mesh *= 2;
    }
}
