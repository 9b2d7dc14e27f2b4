//! The index function on the unit circle and the iteration identities built from it.

mod classify;
mod fourier;
mod growth;
mod profile;

pub use classify::{classify, Classification, HyperbolicCheck};
pub use fourier::{fourier_check, psi_transform, upsilon_transform, FourierReport};
pub use growth::{growth_stats, iterate_indices, GrowthStats, IterationReport, IterationRow};
pub use profile::{jump_records, jump_table, scan_circle, ArcValue, IndexProfile, JumpRecord, PointValue};

#[cfg(test)]
mod tests;
