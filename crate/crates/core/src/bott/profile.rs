use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::galerkin::{epsilon, lambda_with_refinement, ConstraintKind, RefinedIndex};
use crate::report;
use crate::system::CirclePoint;

/// Angles closer than this are identified when reading the profile.
const ANGLE_MATCH: f64 = 1e-9;

/// Value of the index function on the open arc `(start, end)`; the last arc ends at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcValue {
    pub start: f64,
    pub end: f64,
    pub lambda: usize,
    pub samples: Vec<RefinedIndex>,
}

/// Values at a breakpoint (a spectral angle, or `theta = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub theta: f64,
    pub lambda: usize,
    /// `nu_0(rho, 1)`.
    pub nullity: usize,
    /// `nu_*(rho, 1)`.
    pub nullity_star: usize,
    pub spectral: bool,
    pub detail: RefinedIndex,
}

/// Arc-wise constant index function `Lambda(rho) = lambda_0(rho, 1)` and its point values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexProfile {
    pub label: String,
    pub spectral_angles: Vec<f64>,
    pub arcs: Vec<ArcValue>,
    pub points: Vec<PointValue>,
    pub singular: bool,
    pub epsilon: usize,
    /// `lambda_*(1, 1)`.
    pub lambda_star_one: usize,
    /// Values agree under `theta -> 1 - theta`.
    pub symmetric: bool,
}

fn same_angle(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(1.0);
    d < ANGLE_MATCH || d > 1.0 - ANGLE_MATCH
}

impl IndexProfile {
    /// `Lambda` at `theta`, read from the point or arc values.
    pub fn lambda_at(&self, theta: f64) -> usize {
        let th = CirclePoint::new(theta).theta();
        if let Some(p) = self.points.iter().find(|p| same_angle(p.theta, th)) {
            return p.lambda;
        }
        self.arcs
            .iter()
            .find(|a| a.start < th && th < a.end)
            .map(|a| a.lambda)
            .expect("arcs cover the circle away from breakpoints")
    }

    /// Nullity `N(theta) = nu_0(rho, 1)`; zero inside arcs.
    pub fn nullity_at(&self, theta: f64) -> usize {
        let th = CirclePoint::new(theta).theta();
        self.points.iter().find(|p| same_angle(p.theta, th)).map_or(0, |p| p.nullity)
    }

    pub fn max_lambda(&self) -> usize {
        self.arcs.iter().map(|a| a.lambda).chain(self.points.iter().map(|p| p.lambda)).max().unwrap_or(0)
    }

    /// True when `Lambda` vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.max_lambda() == 0
    }

    /// True when `Lambda` takes a single value on the whole circle.
    pub fn is_constant(&self) -> bool {
        let v = self.points[0].lambda;
        self.arcs.iter().all(|a| a.lambda == v) && self.points.iter().all(|p| p.lambda == v)
    }

    /// All refined evaluations made while building the profile.
    pub fn evaluations(&self) -> impl Iterator<Item = &RefinedIndex> {
        self.arcs.iter().flat_map(|a| a.samples.iter()).chain(self.points.iter().map(|p| &p.detail))
    }

    /// CSV with columns `theta,lambda,nullity,kind`.
    pub fn to_csv(&self) -> Result<String> {
        let mut rows: Vec<(f64, Vec<String>)> = Vec::new();
        for a in &self.arcs {
            for s in &a.samples {
                rows.push((s.theta, vec![report::fmt_f64(s.theta), s.lambda.to_string(), "0".into(), "arc".into()]));
            }
        }
        for p in &self.points {
            rows.push((p.theta, vec![report::fmt_f64(p.theta), p.lambda.to_string(), p.nullity.to_string(), "point".into()]));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        report::to_csv(&["theta", "lambda", "nullity", "kind"], &rows.into_iter().map(|r| r.1).collect::<Vec<_>>())
    }
}

/// Builds the profile from two interior samples per arc and one evaluation per breakpoint.
pub fn scan_circle(analysis: &Analysis, mesh0: usize) -> Result<IndexProfile> {
    let spectral = analysis.poincare.spectral_angles();
    let mut breaks = spectral.clone();
    breaks.push(0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| same_angle(*a, *b));

    let arcs: Vec<(f64, f64)> = (0..breaks.len())
        .map(|j| (breaks[j], if j + 1 < breaks.len() { breaks[j + 1] } else { 1.0 }))
        .collect();
    let mut tasks: Vec<f64> = Vec::new();
    for &(a, b) in &arcs {
        tasks.push(a + (b - a) / 3.0);
        tasks.push(a + 2.0 * (b - a) / 3.0);
    }
    let interior: Vec<Result<RefinedIndex>> = tasks
        .par_iter()
        .map(|&th| lambda_with_refinement(analysis, 1, CirclePoint::new(th), ConstraintKind::Zero, mesh0))
        .collect();
    let interior = interior.into_iter().collect::<Result<Vec<_>>>()?;

    let point_tasks: Vec<f64> = breaks.iter().copied().filter(|&b| b != 0.0).collect();
    let point_evals: Vec<Result<RefinedIndex>> = point_tasks
        .par_iter()
        .map(|&th| lambda_with_refinement(analysis, 1, CirclePoint::new(th), ConstraintKind::Zero, mesh0))
        .collect();
    let point_evals = point_evals.into_iter().collect::<Result<Vec<_>>>()?;
    let eps = epsilon(analysis, 1, mesh0)?;

    let mut arc_values = Vec::new();
    for (j, &(start, end)) in arcs.iter().enumerate() {
        let samples = vec![interior[2 * j].clone(), interior[2 * j + 1].clone()];
        if samples[0].lambda != samples[1].lambda {
            return Err(Error::Consistency(format!(
                "arc constancy violated on ({start}, {end}): {} vs {}",
                samples[0].lambda, samples[1].lambda
            )));
        }
        arc_values.push(ArcValue { start, end, lambda: samples[0].lambda, samples });
    }

    let mut points = Vec::new();
    let mut detail_iter = point_evals.into_iter();
    for &b in &breaks {
        let detail = if b == 0.0 { eps.lambda_zero.clone() } else { detail_iter.next().expect("one evaluation per breakpoint") };
        let rho = CirclePoint::new(b);
        points.push(PointValue {
            theta: b,
            lambda: detail.lambda,
            nullity: analysis.nullity_zero(rho, 1)?.dim,
            nullity_star: analysis.nullity_star(rho, 1)?.dim,
            spectral: spectral.iter().any(|&s| same_angle(s, b)),
            detail,
        });
    }

    let mut profile = IndexProfile {
        label: analysis.system.label().to_string(),
        spectral_angles: spectral,
        arcs: arc_values,
        points,
        singular: analysis.is_singular(),
        epsilon: eps.epsilon,
        lambda_star_one: eps.lambda_star.lambda,
        symmetric: true,
    };
    let symmetric = profile.evaluations().all(|e| profile.lambda_at(1.0 - e.theta) == e.lambda);
    profile.symmetric = symmetric;
    Ok(profile)
}

/// Side values of `Lambda` at a breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub theta: f64,
    pub left: usize,
    pub right: usize,
    pub point: usize,
    pub nullity: usize,
    pub spectral: bool,
    /// Semicontinuity is not asserted at `theta = 0` for singular systems.
    pub exempt: bool,
    pub bound_ok: bool,
    pub semicontinuity_ok: bool,
}

/// Records every breakpoint where `Lambda` is discontinuous.
pub fn jump_records(profile: &IndexProfile) -> Vec<JumpRecord> {
    let k = profile.points.len();
    let mut out = Vec::new();
    for (j, p) in profile.points.iter().enumerate() {
        let left = profile.arcs[(j + k - 1) % k].lambda;
        let right = profile.arcs[j].lambda;
        if left == right && p.lambda == left {
            continue;
        }
        let exempt = profile.singular && p.theta == 0.0;
        out.push(JumpRecord {
            theta: p.theta,
            left,
            right,
            point: p.lambda,
            nullity: p.nullity,
            spectral: p.spectral,
            exempt,
            bound_ok: left.abs_diff(right) <= p.nullity,
            semicontinuity_ok: exempt || p.lambda <= left.min(right),
        });
    }
    out
}

/// Jump records, failing when a jump exceeds the nullity, sits off the spectrum, or violates
/// lower semicontinuity at a non-exempt angle.
pub fn jump_table(profile: &IndexProfile) -> Result<Vec<JumpRecord>> {
    let records = jump_records(profile);
    for r in &records {
        if !r.spectral || !r.bound_ok || !r.semicontinuity_ok {
            return Err(Error::IdentityViolation(format!(
                "jump at theta = {}: left {}, right {}, point {}, nullity {}, spectral {}",
                r.theta, r.left, r.right, r.point, r.nullity, r.spectral
            )));
        }
    }
    Ok(records)
}
