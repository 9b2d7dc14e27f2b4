use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by all modules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Algebraic identities (symmetry, g-preservation, boundary conditions), relative.
    pub structural: f64,
    /// Integrator-level identities such as the `Y` residual.
    pub ode: f64,
    /// Distance of `|lambda|` from 1 for unit-circle eigenvalues.
    pub spectral: f64,
    /// Relative singular value threshold for kernel dimensions.
    pub rank: f64,
    /// Threshold of the normalized singularity defect.
    pub singular: f64,
    /// Overrides the mesh-dependent kernel threshold of reduced index forms (continuum units).
    pub eig: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { structural: 1e-10, ode: 1e-7, spectral: 1e-7, rank: 1e-6, singular: 1e-9, eig: None }
    }
}

/// Resolution and tolerance settings for an analysis run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// RK4 steps per period of the base system; iterates use `steps * N`.
    pub ode_steps: usize,
    /// Coarsest Galerkin mesh per period.
    pub mesh: usize,
    pub max_refinements: usize,
    pub tol: Tolerances,
}

impl Default for Settings {
    fn default() -> Self {
        Self { ode_steps: 1000, mesh: 64, max_refinements: 4, tol: Tolerances::default() }
    }
}
