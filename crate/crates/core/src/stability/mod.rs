//! Transversality, regular-manifold checks, flux perturbations and the
//! structural-stability and genericity experiments.

mod bump;
mod experiment;
mod genericity;
mod regular;
mod tangency;
mod transversality;

pub use bump::{bump_perturbation, BumpPerturbation, Perturbed};
pub use experiment::{structural_stability_experiment, StabilityReport, StabilityRow, DEFAULT_EPS_LADDER};
pub use genericity::{genericity_sample, sample_pair, write_failures_csv, GenericityFailure, GenericityStats};
pub use regular::regular_manifold_check;
pub use tangency::{near_tangency_search, TangencySearch};
pub use transversality::{
    objective_row, report_from_rows, transversality_report, transversality_report_with, ObjectiveKind,
    TransversalityReport, TAU_TRANS,
};
