//! Piecewise-linear discretization of the quasi-periodic field spaces, assembly of the index
//! form and the pairing constraints, and inertia counting on the constrained reduction.

mod assemble;
mod index;

use faer::c64;
use serde::{Deserialize, Serialize};

pub use assemble::{assemble, assemble_constraints, assemble_form, Assembled, ConstrainedForm};
pub use index::{
    epsilon, kernel_fields, kernel_residual_check, lambda_with_refinement, restricted_index, EpsilonResult, IndexResult, KERNEL_DECAY, MAX_DENSE_DIM,
    KernelResidual, RefinedIndex,
};

use crate::error::{Error, Result};
use crate::system::CirclePoint;

/// Which constrained subspace: constant pairing with `Y` (`H_*`) or vanishing pairing (`H_0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Star,
    Zero,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Star => "star",
            Self::Zero => "zero",
        })
    }
}

impl std::str::FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Self::Star),
            "zero" => Ok(Self::Zero),
            _ => Err(Error::InvalidArgument(format!("unknown constraint kind '{s}'"))),
        }
    }
}

/// Uniform mesh with `m` elements on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh {
    m: usize,
}

impl Mesh {
    pub fn new(m: usize) -> Result<Self> {
        if m < 8 {
            return Err(Error::InvalidArgument(format!("mesh needs at least 8 elements, got {m}")));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn refine(&self) -> Self {
        Self { m: 2 * self.m }
    }
}

/// Nodal values `V_0, ..., V_{m-1}` (node-major); `V_m = rho^N T^{-N} V_0` is implied.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    pub n: usize,
    pub m: usize,
    pub n_iter: usize,
    pub rho: CirclePoint,
    pub coeffs: Vec<c64>,
}

impl DiscreteField {
    pub fn zeros(n: usize, m: usize, n_iter: usize, rho: CirclePoint) -> Self {
        Self { n, m, n_iter, rho, coeffs: vec![c64::new(0.0, 0.0); n * m] }
    }

    pub fn node(&self, i: usize) -> &[c64] {
        &self.coeffs[i * self.n..(i + 1) * self.n]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [c64] {
        &mut self.coeffs[i * self.n..(i + 1) * self.n]
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        crate::linalg::norm_c(&self.coeffs)
    }
}

/// Three-point Gauss rule on `[0, 1]`.
pub(crate) const GAUSS: [(f64, f64); 3] = [
    (0.5 - 0.387_298_334_620_741_7, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.5 + 0.387_298_334_620_741_7, 5.0 / 18.0),
];
