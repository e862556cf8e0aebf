use crate::flux::{eigen_with, Family, FluxModel, Tolerances};
use crate::state::State;
use crate::wave::hugoniot_gradient;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Default threshold on the normalized determinant.
pub const TAU_TRANS: f64 = 1e-8;

/// Which objective a wave curve is the zero set of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Shock locus, objective `H(s; given)`.
    Hugoniot,
    /// Rarefaction curve, objective `v - v_k(u; given)`.
    Rarefaction,
}

impl ObjectiveKind {
    pub fn letter(self) -> char {
        match self {
            ObjectiveKind::Hugoniot => 'h',
            ObjectiveKind::Rarefaction => 'r',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub point: State,
    /// Gradient of the left objective, then of the right objective.
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
    pub normalized_det: f64,
    /// Cross product of the two level-set tangents `(-W_v, W_u)`.
    pub tangent_cross: f64,
    pub pass: bool,
}

/// Gradient of one objective at `point`. Rarefaction rows use the
/// eigenvector slope at the point itself.
pub fn objective_row<M: FluxModel + ?Sized>(
    model: &M,
    kind: ObjectiveKind,
    family: Family,
    point: State,
    given: State,
) -> Result<State> {
    match kind {
        ObjectiveKind::Hugoniot => hugoniot_gradient(model, point, given),
        ObjectiveKind::Rarefaction => {
            let tol = Tolerances { discriminant: 0.0, graph: 0.0, gnl: 0.0 };
            let xi = eigen_with(model, point, &tol)?.r(family).v;
            Ok(State::new(-xi, 1.0))
        }
    }
}

/// Report from two explicit gradient rows.
pub fn report_from_rows(point: State, a: State, b: State, tau: f64) -> TransversalityReport {
    let det = a.u * b.v - a.v * b.u;
    let scale = a.norm() * b.norm();
    let normalized_det = if scale > 0.0 { det / scale } else { 0.0 };
    let ta = State::new(-a.v, a.u);
    let tb = State::new(-b.v, b.u);
    TransversalityReport {
        point,
        matrix: [[a.u, a.v], [b.u, b.v]],
        det,
        normalized_det,
        tangent_cross: ta.cross(tb),
        pass: normalized_det.abs() > tau,
    }
}

/// Transversality of the family-1 curve of `left` and the family-2 curve of
/// `right` at a common point, at threshold [`TAU_TRANS`].
pub fn transversality_report<M: FluxModel + ?Sized>(
    model: &M,
    left_kind: ObjectiveKind,
    right_kind: ObjectiveKind,
    point: State,
    left: State,
    right: State,
) -> Result<TransversalityReport> {
    transversality_report_with(model, left_kind, right_kind, point, left, right, TAU_TRANS)
}

pub fn transversality_report_with<M: FluxModel + ?Sized>(
    model: &M,
    left_kind: ObjectiveKind,
    right_kind: ObjectiveKind,
    point: State,
    left: State,
    right: State,
    tau: f64,
) -> Result<TransversalityReport> {
    let a = objective_row(model, left_kind, Family::One, point, left)?;
    let b = objective_row(model, right_kind, Family::Two, point, right)?;
    Ok(report_from_rows(point, a, b, tau))
}
