//! Shock loci, rarefaction curves and the admissible wave curves built from
//! them.

mod curve;
mod hugoniot;
mod rarefaction;

pub use curve::{wave_curve, write_curves_csv, CurveRow, WaveCurve, WaveRole};
pub use hugoniot::{
    classify_shock, hugoniot_gradient, hugoniot_objective, shock_speed, trace_hugoniot, trace_hugoniot_family,
    HugoniotBranch, ShockClass,
};
pub use rarefaction::{
    curve_sensitivity, full_rarefaction, integrate_rarefaction, rarefaction_objective, rarefaction_sensitivity, xi_v_derivative,
    CurveHalf, RarefactionCurve,
};

use crate::flux::Tolerances;
use serde::{Deserialize, Serialize};

/// Which half of a locus or integral curve through a given state: `Plus`
/// carries characteristic speeds above the given state's, `Minus` below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchSign {
    Minus,
    Plus,
}

impl BranchSign {
    pub fn sign(self) -> f64 {
        match self {
            BranchSign::Minus => -1.0,
            BranchSign::Plus => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BranchSign::Minus => "-",
            BranchSign::Plus => "+",
        }
    }
}

/// Whether the given state is the left or the right state of a jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    FromLeft,
    FromRight,
}

/// Lax classification of a jump from a given state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchLabel {
    #[serde(rename = "1-")]
    OneMinus,
    #[serde(rename = "1+")]
    OnePlus,
    #[serde(rename = "2-")]
    TwoMinus,
    #[serde(rename = "2+")]
    TwoPlus,
    #[serde(rename = "inadmissible")]
    Inadmissible,
}

impl BranchLabel {
    pub fn of(family: crate::flux::Family, sign: BranchSign) -> Self {
        use crate::flux::Family::*;
        match (family, sign) {
            (One, BranchSign::Minus) => BranchLabel::OneMinus,
            (One, BranchSign::Plus) => BranchLabel::OnePlus,
            (Two, BranchSign::Minus) => BranchLabel::TwoMinus,
            (Two, BranchSign::Plus) => BranchLabel::TwoPlus,
        }
    }
}

/// Numerical controls shared by curve construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveOptions {
    /// Continuation step for shock loci; `None` means window diameter / 400.
    pub step: Option<f64>,
    /// Largest change of the characteristic speed per rarefaction step,
    /// relative to its range over the window.
    pub dlambda_frac: f64,
    /// Strict margin in the Lax inequalities.
    pub tau_lax: f64,
    pub max_points: usize,
    pub tolerances: Tolerances,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { step: None, dlambda_frac: 1e-3, tau_lax: 1e-10, max_points: 200_000, tolerances: Tolerances::default() }
    }
}

impl CurveOptions {
    pub fn step_for(&self, window: &crate::state::StateWindow) -> f64 {
        self.step.unwrap_or(window.diameter() / 400.0)
    }
}
