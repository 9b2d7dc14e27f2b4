//! A validated system together with its Poincaré data and run settings.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::galerkin::ConstraintKind;
use crate::ode::{self, PoincareData};
use crate::settings::Settings;
use crate::system::{is_singular, CirclePoint, MorseSturmSystem, Singularity};

/// Exact nullity from the Poincaré map, with the resolution flag of the rank decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeNullity {
    pub dim: usize,
    /// Still within a factor 10 of the rank threshold after doubling the ODE steps.
    pub resolution_warning: bool,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub system: MorseSturmSystem,
    pub settings: Settings,
    pub poincare: PoincareData,
    pub singularity: Singularity,
}

impl Analysis {
    pub fn new(system: MorseSturmSystem, settings: Settings) -> Result<Self> {
        let poincare = ode::poincare(&system, settings.ode_steps, &settings.tol)?;
        let singularity = is_singular(&system, settings.tol.singular);
        Ok(Self { system, settings, poincare, singularity })
    }

    pub fn is_singular(&self) -> bool {
        self.singularity.singular
    }

    fn decide(
        &self,
        rho: CirclePoint,
        n_iter: usize,
        f: impl Fn(&PoincareData, CirclePoint, usize) -> Result<crate::linalg::KernelDim>,
    ) -> Result<OdeNullity> {
        let first = f(&self.poincare, rho, n_iter)?;
        if !first.borderline {
            return Ok(OdeNullity { dim: first.dim, resolution_warning: false });
        }
        let fine = ode::poincare(&self.system, 2 * self.poincare.steps, &self.settings.tol)?;
        let second = f(&fine, rho, n_iter)?;
        Ok(OdeNullity { dim: second.dim, resolution_warning: second.borderline })
    }

    /// `nu_*(rho, N)`.
    pub fn nullity_star(&self, rho: CirclePoint, n_iter: usize) -> Result<OdeNullity> {
        let tol = self.settings.tol;
        self.decide(rho, n_iter, |d, r, n| d.nullity_star(r, n, &tol))
    }

    /// `nu_0(rho, N)`.
    pub fn nullity_zero(&self, rho: CirclePoint, n_iter: usize) -> Result<OdeNullity> {
        let tol = self.settings.tol;
        self.decide(rho, n_iter, |d, r, n| d.nullity_zero(r, n, &tol))
    }

    pub fn nullity(&self, rho: CirclePoint, n_iter: usize, kind: ConstraintKind) -> Result<OdeNullity> {
        match kind {
            ConstraintKind::Star => self.nullity_star(rho, n_iter),
            ConstraintKind::Zero => self.nullity_zero(rho, n_iter),
        }
    }
}
