use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::profile::IndexProfile;
use crate::analysis::Analysis;
use crate::error::Result;
use crate::galerkin::{epsilon, lambda_with_refinement, ConstraintKind};
use crate::report;
use crate::system::CirclePoint;

/// Roots of unity this close to a breakpoint, without matching it, are recomputed directly.
const NEAR_BREAKPOINT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub n: usize,
    /// `mu(gamma^N) = epsilon + mu_0(gamma^N)`.
    pub mu: usize,
    /// `mu_0(gamma^N) = sum_k Lambda(omega^k)`.
    pub mu0: usize,
    /// `nu_*(1, N)`.
    pub nu_star: usize,
    /// `nu_0(1, N)`.
    pub nu0: usize,
    pub epsilon: usize,
    /// `lambda_*(1, N) - lambda_0(1, N)` from a direct Galerkin computation on the iterate.
    pub epsilon_direct: Option<usize>,
    /// Roots of unity whose value was recomputed instead of read from the profile.
    pub recomputed: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub label: String,
    pub epsilon: usize,
    pub rows: Vec<IterationRow>,
    /// Every directly computed `epsilon_N` equals `epsilon`.
    pub epsilon_invariant: bool,
    pub growth: GrowthStats,
}

impl IterationReport {
    pub fn mu(&self, n: usize) -> Option<usize> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.mu)
    }

    /// Columns `N,mu,mu0,nu_star,nu0,epsilon`.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let eps = r.epsilon_direct.unwrap_or(r.epsilon);
                vec![r.n.to_string(), r.mu.to_string(), r.mu0.to_string(), r.nu_star.to_string(), r.nu0.to_string(), eps.to_string()]
            })
            .collect();
        report::to_csv(&["N", "mu", "mu0", "nu_star", "nu0", "epsilon"], &rows)
    }

    /// Pairs `(N, s)` with `N + s <= N_max`, `s <= s_max` that violate
    /// `mu(gamma^{N+s}) - mu(gamma^N) >= alpha s + beta`.
    pub fn certificate_violations(&self, s_max: usize) -> Vec<(usize, usize)> {
        let (alpha, beta) = (self.growth.alpha, self.growth.beta);
        let mut out = Vec::new();
        for r in &self.rows {
            for s in 1..=s_max {
                if let Some(later) = self.mu(r.n + s) {
                    if (later as f64 - r.mu as f64) < alpha * s as f64 + beta {
                        out.push((r.n, s));
                    }
                }
            }
        }
        out
    }
}

fn lambda_at_root(analysis: &Analysis, profile: &IndexProfile, theta: f64, mesh0: usize) -> Result<(usize, bool)> {
    let direct = profile.points.iter().any(|p| {
        let d = (p.theta - theta).rem_euclid(1.0).min((theta - p.theta).rem_euclid(1.0));
        d < NEAR_BREAKPOINT && d > 1e-9
    });
    if direct {
        let r = lambda_with_refinement(analysis, 1, CirclePoint::new(theta), ConstraintKind::Zero, mesh0)?;
        return Ok((r.lambda, true));
    }
    Ok((profile.lambda_at(theta), false))
}

/// Iteration table for `N = 1..n_max` read from the profile. For `N <= verify_upto` the
/// iterate's `epsilon_N` is also computed directly on a mesh of `mesh0 * N` elements.
pub fn iterate_indices(
    analysis: &Analysis,
    profile: &IndexProfile,
    n_max: usize,
    verify_upto: usize,
    mesh0: usize,
) -> Result<IterationReport> {
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| -> Result<IterationRow> {
            let mut mu0 = 0;
            let mut recomputed = Vec::new();
            for k in 1..=n {
                let theta = CirclePoint::root_of_unity(k, n).theta();
                let (l, again) = lambda_at_root(analysis, profile, theta, mesh0)?;
                mu0 += l;
                if again {
                    recomputed.push(theta);
                }
            }
            let epsilon_direct =
                if n <= verify_upto { Some(epsilon(analysis, n, mesh0 * n)?.epsilon) } else { None };
            Ok(IterationRow {
                n,
                mu: profile.epsilon + mu0,
                mu0,
                nu_star: analysis.nullity_star(CirclePoint::ONE, n)?.dim,
                nu0: analysis.nullity_zero(CirclePoint::ONE, n)?.dim,
                epsilon: profile.epsilon,
                epsilon_direct,
                recomputed,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let epsilon_invariant = rows.iter().all(|r| r.epsilon_direct.is_none_or(|e| e == profile.epsilon));
    Ok(IterationReport {
        label: profile.label.clone(),
        epsilon: profile.epsilon,
        rows,
        epsilon_invariant,
        growth: growth_stats(profile),
    })
}

/// Average index and the constants of the linear lower bound on index growth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthStats {
    /// Integral of `Lambda` over the circle, the limit of `mu_0(gamma^N) / N`.
    pub mean_index: f64,
    /// Discontinuity points `theta_1 < ... < theta_K`; `[0]` when `Lambda` is constant.
    pub discontinuities: Vec<f64>,
    /// Right limits `beta_j` of `Lambda` at the discontinuity points.
    pub beta_values: Vec<usize>,
    /// `a_0 = beta_K`, `a_1 = beta_K - beta_1`, `a_j = beta_{j-1} - beta_j`.
    pub a: Vec<i64>,
    pub alpha: f64,
    pub beta: f64,
    /// `Lambda` vanishes identically.
    pub is_constant: bool,
    pub max_lambda: usize,
}

pub fn growth_stats(profile: &IndexProfile) -> GrowthStats {
    let k = profile.points.len();
    let mut thetas = Vec::new();
    let mut betas = Vec::new();
    for (j, p) in profile.points.iter().enumerate() {
        let left = profile.arcs[(j + k - 1) % k].lambda;
        let right = profile.arcs[j].lambda;
        if left != right || p.lambda != right {
            thetas.push(p.theta);
            betas.push(right);
        }
    }
    if thetas.is_empty() {
        thetas.push(0.0);
        betas.push(profile.arcs[0].lambda);
    }
    let kk = thetas.len();
    let next = |j: usize| if j + 1 < kk { thetas[j + 1] } else { thetas[0] + 1.0 };
    let widths: Vec<f64> = (0..kk).map(|j| next(j) - thetas[j]).collect();
    let mean_index = (0..kk).map(|j| widths[j] * betas[j] as f64).sum();

    let mut a = vec![betas[kk - 1] as i64, betas[kk - 1] as i64 - betas[0] as i64];
    for j in 1..kk {
        a.push(betas[j - 1] as i64 - betas[j] as i64);
    }
    let j0 = (0..kk).max_by(|&x, &y| (widths[x] * betas[x] as f64).total_cmp(&(widths[y] * betas[y] as f64))).unwrap_or(0);
    let max_lambda = profile.max_lambda();
    GrowthStats {
        mean_index,
        alpha: widths[j0] * betas[j0] as f64,
        beta: -(betas[j0] as f64) - 3.0 * (kk as f64 + 1.0) * max_lambda as f64,
        discontinuities: thetas,
        beta_values: betas,
        a,
        is_constant: profile.is_zero(),
        max_lambda,
    }
}
