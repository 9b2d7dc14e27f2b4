use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::profile::IndexProfile;
use crate::analysis::Analysis;
use crate::error::Result;
use crate::galerkin::{lambda_with_refinement, ConstraintKind};
use crate::system::CirclePoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCheck {
    pub n: usize,
    /// `mu(gamma^N) = lambda_*(1, N)` computed on the iterated system.
    pub mu_direct: usize,
    /// `epsilon + N mu_0(gamma)`.
    pub predicted: usize,
}

/// Spectral type of the Poincaré map. Since `(Y(0), Y'(0))` is always fixed, hyperbolicity is
/// read modulo that direction: the only unit-circle eigenvalue is 1 and its eigenspace is the
/// line through `(Y(0), Y'(0))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: String,
    /// The unit-circle spectrum is `{1}`.
    pub trivial_spectrum_only: bool,
    pub hyperbolic_mod_y: bool,
    /// Hyperbolic modulo `Y` with `epsilon = 0`.
    pub strongly_hyperbolic_mod_y: bool,
    pub singular: bool,
    pub epsilon: usize,
    /// `Lambda` takes one value on the whole circle.
    pub constant_profile: bool,
    /// Present only for constant profiles.
    pub identity_checks: Vec<HyperbolicCheck>,
    pub identity_holds: bool,
}

/// Classifies the system and, for a constant profile, checks `mu(gamma^N) = epsilon + N mu_0(gamma)`
/// against direct computations for `N = 1..=n_check`.
pub fn classify(analysis: &Analysis, profile: &IndexProfile, n_check: usize, mesh0: usize) -> Result<Classification> {
    let spec = &analysis.poincare.unit_spectrum;
    let trivial = spec.len() == 1 && spec[0].theta == 0.0;
    let hyperbolic = trivial && analysis.poincare.fixed_space_is_y(&analysis.settings.tol)?;
    let constant = profile.is_constant();
    let identity_checks = if constant {
        let mu0 = profile.points[0].lambda;
        (1..=n_check)
            .into_par_iter()
            .map(|n| -> Result<HyperbolicCheck> {
                let star = lambda_with_refinement(analysis, n, CirclePoint::ONE, ConstraintKind::Star, mesh0 * n)?;
                Ok(HyperbolicCheck { n, mu_direct: star.lambda, predicted: profile.epsilon + n * mu0 })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(Classification {
        label: profile.label.clone(),
        trivial_spectrum_only: trivial,
        hyperbolic_mod_y: hyperbolic,
        strongly_hyperbolic_mod_y: hyperbolic && profile.epsilon == 0,
        singular: profile.singular,
        epsilon: profile.epsilon,
        constant_profile: constant,
        identity_holds: identity_checks.iter().all(|c| c.mu_direct == c.predicted),
        identity_checks,
    })
}
