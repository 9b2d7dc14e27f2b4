//! Morse indices, nullities and Bott-type iteration data for complex Morse–Sturm systems
//! `V'' = R V` whose coefficient is symmetric for a form `g` of index 1.

pub mod analysis;
pub mod bott;
pub mod cli;
pub mod error;
pub mod galerkin;
pub mod generators;
pub mod linalg;
pub mod ode;
pub mod report;
pub mod settings;
pub mod system;

pub use analysis::Analysis;
pub use error::{Error, Result};
pub use settings::{Settings, Tolerances};
pub use system::{CirclePoint, MorseSturmSystem};
