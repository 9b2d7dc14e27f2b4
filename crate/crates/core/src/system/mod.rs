//! Morse–Sturm problem data: validation, iterated data, singularity test and the
//! auxiliary positive metric.

mod io;
pub mod path;

use std::f64::consts::TAU;

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

pub use io::ProblemFile;
pub use path::{BoostProfile, CurvaturePath, TimelikeSolution};

use crate::error::{Error, Result};
use crate::linalg::{self, cx, RMat};
use crate::settings::Tolerances;

/// Real symmetric nondegenerate form of index 1.
#[derive(Clone, Debug)]
pub struct MetricForm {
    matrix: RMat,
}

impl MetricForm {
    pub fn new(matrix: RMat) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || n == 0 {
            return Err(Error::Shape(format!("g must be square and nonempty, got {}x{}", n, matrix.ncols())));
        }
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (matrix[(i, j)] - matrix[(j, i)]).abs())
            .fold(0.0, f64::max);
        if asym > 0.0 {
            return Err(Error::MetricNotSymmetric(asym));
        }
        let eig = linalg::hermitian_eigenvalues(linalg::complexify(matrix.as_ref()).as_ref())?;
        let scale = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if scale == 0.0 || eig.iter().any(|&x| x.abs() <= 1e-12 * scale) {
            return Err(Error::MetricDegenerate);
        }
        let neg = eig.iter().filter(|&&x| x < 0.0).count();
        if neg != 1 {
            return Err(Error::MetricIndex(neg));
        }
        Ok(Self { matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    /// `g(v, w)` for real vectors.
    pub fn eval(&self, v: &[f64], w: &[f64]) -> f64 {
        linalg::dot(w, &linalg::mat_vec(self.matrix(), v))
    }

    /// Sesquilinear extension `g(v, w) = w^H G v`.
    pub fn eval_c(&self, v: &[c64], w: &[c64]) -> c64 {
        let gv = linalg::mat_vec_c(self.matrix(), v);
        w.iter().zip(&gv).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Invertible linear map `T` (g-preservation is checked by [`validate`]).
#[derive(Clone, Debug)]
pub struct MonodromyMap {
    matrix: RMat,
    inverse: RMat,
}

impl MonodromyMap {
    pub fn new(matrix: RMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Shape("T must be square".into()));
        }
        let inverse = linalg::inverse(matrix.as_ref())?;
        Ok(Self { matrix, inverse })
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    pub fn inverse(&self) -> MatRef<'_, f64> {
        self.inverse.as_ref()
    }
}

/// Point `rho = exp(2 pi i theta)` of the unit circle, `theta` reduced to `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CirclePoint {
    theta: f64,
}

impl CirclePoint {
    pub fn new(theta: f64) -> Self {
        let mut t = theta.rem_euclid(1.0);
        if t >= 1.0 {
            t = 0.0;
        }
        Self { theta: t }
    }

    pub const ONE: Self = Self { theta: 0.0 };

    /// `k`-th power of the primitive root `exp(2 pi i / n)`.
    pub fn root_of_unity(k: usize, n: usize) -> Self {
        Self::new((k % n) as f64 / n as f64)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho(&self) -> c64 {
        let (s, c) = (TAU * self.theta).sin_cos();
        c64::new(c, s)
    }

    /// The point `rho^n`.
    pub fn pow(&self, n: usize) -> Self {
        Self::new((self.theta * n as f64).rem_euclid(1.0))
    }

    pub fn conj(&self) -> Self {
        Self::new(1.0 - self.theta)
    }

    /// True when `rho = 1` up to `1e-12` in angle.
    pub fn is_one(&self) -> bool {
        self.theta < 1e-12 || self.theta > 1.0 - 1e-12
    }
}

/// One row of a [`ValidationReport`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ValidationReport {
    pub label: String,
    pub n: usize,
    pub checks: Vec<Check>,
    /// The curvature is only available through interpolated samples.
    pub reduced_accuracy: bool,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Validated Morse–Sturm system `(n, g, T, R, Y)`.
#[derive(Clone, Debug)]
pub struct MorseSturmSystem {
    g: MetricForm,
    t: MonodromyMap,
    r: CurvaturePath,
    y: TimelikeSolution,
    label: String,
    report: Option<ValidationReport>,
}

const VALIDATION_GRID: usize = 256;

impl MorseSturmSystem {
    /// Builds and validates a system; fails with [`Error::Validation`] when any invariant fails.
    pub fn new(g: RMat, t: RMat, r: CurvaturePath, y: TimelikeSolution, label: impl Into<String>) -> Result<Self> {
        Self::with_tolerances(g, t, r, y, label, &Tolerances::default())
    }

    pub fn with_tolerances(
        g: RMat,
        t: RMat,
        r: CurvaturePath,
        y: TimelikeSolution,
        label: impl Into<String>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut sys = Self::unchecked(g, t, r, y, label.into())?;
        let report = sys.run_checks(tol);
        if !report.passed {
            let msg = report
                .failures()
                .iter()
                .map(|c| format!("{} (residual {:.3e} > {:.1e})", c.name, c.residual, c.tolerance))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Validation(msg));
        }
        sys.report = Some(report);
        Ok(sys)
    }

    pub fn from_problem(p: &ProblemFile, tol: &Tolerances) -> Result<Self> {
        let n = p.n;
        if p.g.len() != n * n || p.t.len() != n * n {
            return Err(Error::Shape(format!("g and T need {} entries", n * n)));
        }
        Self::with_tolerances(
            linalg::from_rows(n, &p.g),
            linalg::from_rows(n, &p.t),
            p.r.clone(),
            p.y.clone(),
            p.label.clone().unwrap_or_default(),
            tol,
        )
    }

    fn unchecked(g: RMat, t: RMat, r: CurvaturePath, y: TimelikeSolution, label: String) -> Result<Self> {
        let g = MetricForm::new(g)?;
        let n = g.n();
        if t.nrows() != n {
            return Err(Error::Shape(format!("T is {}x{}, expected {n}x{n}", t.nrows(), t.ncols())));
        }
        let t = MonodromyMap::new(t)?;
        r.check_shape(n).map_err(Error::Shape)?;
        y.check_shape(n).map_err(Error::Shape)?;
        Ok(Self { g, t, r, y, label, report: None })
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn g(&self) -> &MetricForm {
        &self.g
    }

    pub fn t(&self) -> &MonodromyMap {
        &self.t
    }

    pub fn curvature(&self) -> &CurvaturePath {
        &self.r
    }

    pub fn solution(&self) -> &TimelikeSolution {
        &self.y
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
        if let Some(r) = self.report.as_mut() {
            r.label = self.label.clone();
        }
    }

    pub fn validation_report(&self) -> Option<&ValidationReport> {
        self.report.as_ref()
    }

    /// `R(t)` on the base period.
    pub fn r_at(&self, t: f64) -> RMat {
        self.r.eval(self.n(), t)
    }

    /// `(Y(t), Y'(t))` on the base period.
    pub fn y_at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        self.y.eval(self.n(), t)
    }

    pub fn to_problem(&self) -> ProblemFile {
        ProblemFile {
            n: self.n(),
            g: linalg::to_row_major(self.g.matrix()),
            t: linalg::to_row_major(self.t.matrix()),
            r: self.r.clone(),
            y: self.y.clone(),
            label: if self.label.is_empty() { None } else { Some(self.label.clone()) },
        }
    }

    /// Iterated data for `gamma^N`.
    pub fn iterate(&self, n_iter: usize) -> Result<Iterated<'_>> {
        Iterated::new(self, n_iter)
    }

    fn run_checks(&self, tol: &Tolerances) -> ValidationReport {
        let n = self.n();
        let gm = self.g.matrix();
        let tm = self.t.matrix();
        let mut checks = Vec::new();
        let mut push = |name: &str, residual: f64, tolerance: f64| {
            checks.push(Check { name: name.into(), residual, tolerance, passed: residual.is_finite() && residual <= tolerance });
        };

        let gscale = gm.norm_max().max(1.0);
        let tgt = tm.transpose() * gm * tm;
        push("T g-preserving", linalg::max_abs_diff(tgt.as_ref(), gm) / (gscale * tm.norm_max().powi(2).max(1.0)), tol.structural);

        let grid: Vec<f64> = (0..=VALIDATION_GRID).map(|i| i as f64 / VALIDATION_GRID as f64).collect();
        let mut sym = 0.0f64;
        let mut timelike = f64::NEG_INFINITY;
        for &s in &grid {
            let r = self.r_at(s);
            let gr = gm * &r;
            let scale = gr.norm_max().max(1.0);
            sym = sym.max(linalg::max_abs_diff(gr.as_ref(), gr.transpose()) / scale);
            let (y, _) = self.y_at(s);
            timelike = timelike.max(self.g.eval(&y, &y) / linalg::dot(&y, &y).max(f64::MIN_POSITIVE));
        }
        push("R g-symmetric", sym, tol.structural);

        let r0 = self.r_at(0.0);
        let r1 = self.r_at(1.0);
        let compat = (&r0 * tm) - (tm * &r1);
        let cscale = (r0.norm_max() * tm.norm_max()).max(1.0);
        push("R(0)T = TR(1)", compat.norm_max() / cscale, tol.structural);

        let timelike_check = Check { name: "Y timelike".into(), residual: timelike, tolerance: 0.0, passed: timelike < 0.0 };

        let (y0, dy0) = self.y_at(0.0);
        let (y1, dy1) = self.y_at(1.0);
        let ty1 = linalg::mat_vec(tm, &y1);
        let tdy1 = linalg::mat_vec(tm, &dy1);
        let yscale = linalg::norm(&y0).max(1.0);
        let b0 = ty1.iter().zip(&y0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / yscale;
        let b1 = tdy1.iter().zip(&dy0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / yscale.max(linalg::norm(&dy0));
        push("TY(1) = Y(0)", b0, tol.structural);
        push("TY'(1) = Y'(0)", b1, tol.structural);

        let residual = crate::ode::solution_residual(self, crate::settings::Settings::default().ode_steps);
        push("Y solves V'' = RV", residual, tol.ode);
        checks.insert(3, timelike_check);

        let passed = checks.iter().all(|c| c.passed);
        ValidationReport { label: self.label.clone(), n, checks, reduced_accuracy: self.r.is_interpolated(), passed }
    }
}

/// Validates raw problem data. Structural defects of `g` and `T` (asymmetry, wrong index,
/// degeneracy, singular `T`, shapes) are errors; all other invariants are reported.
pub fn validate(problem: &ProblemFile, tol: &Tolerances) -> Result<ValidationReport> {
    let n = problem.n;
    if n == 0 || problem.g.len() != n * n || problem.t.len() != n * n {
        return Err(Error::Shape(format!("g and T need n*n = {} entries", n * n)));
    }
    let sys = MorseSturmSystem::unchecked(
        linalg::from_rows(n, &problem.g),
        linalg::from_rows(n, &problem.t),
        problem.r.clone(),
        problem.y.clone(),
        problem.label.clone().unwrap_or_default(),
    )?;
    Ok(sys.run_checks(tol))
}

/// Values of the iterated data at one time.
#[derive(Clone, Debug)]
pub struct IterPoint {
    /// `R_N(t) = R(tN)`, without the `N^2` factor.
    pub r: RMat,
    /// `Y_N(t) = Y(tN)`.
    pub y: Vec<f64>,
    /// `Y_N'(t) = N Y'(tN)`.
    pub dy: Vec<f64>,
}

/// Iterated data `R_N`, `Y_N` with cached powers of `T`.
#[derive(Clone, Debug)]
pub struct Iterated<'a> {
    system: &'a MorseSturmSystem,
    n_iter: usize,
    pow: Vec<RMat>,
    inv_pow: Vec<RMat>,
}

impl<'a> Iterated<'a> {
    pub fn new(system: &'a MorseSturmSystem, n_iter: usize) -> Result<Self> {
        if n_iter < 1 {
            return Err(Error::InvalidArgument("N must be >= 1".into()));
        }
        let n = system.n();
        let mut pow = vec![RMat::identity(n, n)];
        let mut inv_pow = vec![RMat::identity(n, n)];
        for k in 0..n_iter {
            pow.push(system.t.matrix() * &pow[k]);
            inv_pow.push(system.t.inverse() * &inv_pow[k]);
        }
        Ok(Self { system, n_iter, pow, inv_pow })
    }

    pub fn system(&self) -> &'a MorseSturmSystem {
        self.system
    }

    pub fn n_iter(&self) -> usize {
        self.n_iter
    }

    /// `T^k` for `0 <= k <= N`.
    pub fn t_pow(&self, k: usize) -> MatRef<'_, f64> {
        self.pow[k].as_ref()
    }

    /// `T^{-k}` for `0 <= k <= N`.
    pub fn t_inv_pow(&self, k: usize) -> MatRef<'_, f64> {
        self.inv_pow[k].as_ref()
    }

    /// Evaluates at `s = k + u` on the extended line, `0 <= k < N`, `u` in `[0, 1]`.
    pub fn eval_split(&self, k: usize, u: f64) -> IterPoint {
        let sys = self.system;
        let r = sys.r_at(u);
        let (y, dy) = sys.y_at(u);
        let nf = self.n_iter as f64;
        if k == 0 {
            return IterPoint { r, y, dy: dy.iter().map(|x| x * nf).collect() };
        }
        let ti = self.t_inv_pow(k);
        let r = ti * &r * self.t_pow(k);
        let y = linalg::mat_vec(ti, &y);
        let dy = linalg::mat_vec(ti, &dy).into_iter().map(|x| x * nf).collect();
        IterPoint { r, y, dy }
    }

    /// Evaluates at `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> IterPoint {
        let s = t.clamp(0.0, 1.0) * self.n_iter as f64;
        let k = (s.floor() as usize).min(self.n_iter - 1);
        self.eval_split(k, s - k as f64)
    }

    /// `B = rho^N T^{-N}`, so that discrete fields satisfy `V(1) = B V(0)`.
    pub fn boundary_map(&self, rho: CirclePoint) -> Mat<c64> {
        let z = rho.pow(self.n_iter).rho();
        let ti = self.t_inv_pow(self.n_iter);
        Mat::from_fn(ti.nrows(), ti.ncols(), |i, j| z * ti[(i, j)])
    }
}

/// `(R_N(t), Y_N(t), Y_N'(t))`.
pub fn iterated_data(system: &MorseSturmSystem, n_iter: usize, t: f64) -> Result<IterPoint> {
    Ok(system.iterate(n_iter)?.eval(t))
}

/// Outcome of the singularity test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub singular: bool,
    /// Maximal normalized defect over the grid.
    pub max_defect: f64,
    /// A time attaining the maximal defect, when the system is not singular.
    pub witness: Option<f64>,
}

const SINGULAR_GRID: usize = 1000;

/// Tests whether `Y'` is pointwise a multiple of `Y`.
pub fn is_singular(system: &MorseSturmSystem, tau_sing: f64) -> Singularity {
    let g = system.g();
    let mut best = (0.0f64, 0.0f64);
    for i in 0..=SINGULAR_GRID {
        let t = i as f64 / SINGULAR_GRID as f64;
        let (y, dy) = system.y_at(t);
        let gyy = g.eval(&y, &y);
        let gdy = g.eval(&dy, &y);
        let defect: Vec<f64> = dy.iter().zip(&y).map(|(d, v)| gyy * d - gdy * v).collect();
        let d = linalg::norm(&defect) / (linalg::norm(&y) * gyy.abs());
        if d > best.0 {
            best = (d, t);
        }
    }
    let singular = best.0 <= tau_sing;
    Singularity { singular, max_defect: best.0, witness: if singular { None } else { Some(best.1) } }
}

/// Matrix of the positive definite form `g_t^N = g - 2 (G y)(G y)^T / g(y, y)` with `y = Y_N(t)`.
pub fn positive_metric_matrix(system: &MorseSturmSystem, n_iter: usize, t: f64) -> Result<RMat> {
    let p = iterated_data(system, n_iter, t)?;
    let gm = system.g().matrix();
    let gy = linalg::mat_vec(gm, &p.y);
    let gyy = linalg::dot(&gy, &p.y);
    Ok(Mat::from_fn(gm.nrows(), gm.ncols(), |i, j| gm[(i, j)] - 2.0 * gy[i] * gy[j] / gyy))
}

/// `g_t^N(V, W)`, linear in `V` and conjugate linear in `W`.
pub fn positive_metric(system: &MorseSturmSystem, n_iter: usize, t: f64, v: &[c64], w: &[c64]) -> Result<c64> {
    let m = positive_metric_matrix(system, n_iter, t)?;
    let mv = linalg::mat_vec_c(m.as_ref(), v);
    Ok(w.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum())
}

/// `A(t, N) = I - 2 y y^T G / g(y, y)`, characterized by `g(V, W) = g_t^N(A V, W)`.
pub fn operator_a(system: &MorseSturmSystem, n_iter: usize, t: f64) -> Result<RMat> {
    let p = iterated_data(system, n_iter, t)?;
    let gm = system.g().matrix();
    let gy = linalg::mat_vec(gm, &p.y);
    let gyy = linalg::dot(&gy, &p.y);
    let n = gm.nrows();
    Ok(Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * p.y[i] * gy[j] / gyy))
}

/// Complex matrix `G` of the sesquilinear form.
pub fn metric_c(system: &MorseSturmSystem) -> Mat<c64> {
    let g = system.g().matrix();
    Mat::from_fn(g.nrows(), g.ncols(), |i, j| cx(g[(i, j)]))
}

#[cfg(test)]
mod tests;
