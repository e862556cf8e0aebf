//! Concrete flux models: the p-system of gas dynamics and the particle-laden
//! thin-film model derived from an equilibrium profile.

mod plf;
mod psystem;

pub use plf::{
    fit_flux_table, PlfFit,
    build_flux_table, plf_fg, plf_model, plf_profile, profile_simpson, PlfFluxTable, PlfModel, PlfParams, PlfProfile,
    ProfileOptions,
};
pub use psystem::{psystem_model, PSystem, Pressure};
