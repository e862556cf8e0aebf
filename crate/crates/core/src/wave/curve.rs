use super::{integrate_rarefaction, trace_hugoniot_family, BranchSign, CurveOptions, HugoniotBranch, RarefactionCurve};
use crate::flux::{Family, FluxModel};
use crate::io::fmt_f64;
use crate::state::{State, StateWindow};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveRole {
    /// States reachable from a left state by a 1-wave: `R+_1` and `H-_1`.
    Forward1,
    /// States that reach a right state by a 2-wave: `R-_2` and `H+_2`.
    Backward2,
}

impl WaveRole {
    pub fn family(self) -> Family {
        match self {
            WaveRole::Forward1 => Family::One,
            WaveRole::Backward2 => Family::Two,
        }
    }

    fn parts(self) -> (BranchSign, BranchSign) {
        // (rarefaction direction, shock branch)
        match self {
            WaveRole::Forward1 => (BranchSign::Plus, BranchSign::Minus),
            WaveRole::Backward2 => (BranchSign::Minus, BranchSign::Plus),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveCurve {
    pub role: WaveRole,
    pub given: State,
    /// Admissible prefix of the shock branch, starting at `given`.
    pub shock_part: HugoniotBranch,
    /// Rarefaction half, starting at `given`.
    pub rare_part: RarefactionCurve,
    /// The rarefaction stopped early because genuine nonlinearity failed.
    pub gnl_breach: Option<State>,
}

impl WaveCurve {
    /// Both parts as one polyline ordered from the far end of the shock part,
    /// through `given`, to the far end of the rarefaction part.
    pub fn polyline(&self) -> Vec<State> {
        let mut pts: Vec<State> = self.shock_part.points.iter().rev().copied().collect();
        pts.extend(self.rare_part.points.iter().skip(1));
        pts
    }
}

/// Forward 1-wave curve or backward 2-wave curve through `given`.
pub fn wave_curve<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    role: WaveRole,
    window: &StateWindow,
    opts: &CurveOptions,
) -> Result<WaveCurve> {
    let family = role.family();
    let (rare_dir, shock_sign) = role.parts();
    let [minus, plus] = trace_hugoniot_family(model, given, family, window, opts.step_for(window), opts.tau_lax, opts.max_points)?;
    let branch = if shock_sign == BranchSign::Minus { minus } else { plus };
    let (rare_part, gnl_breach) = match integrate_rarefaction(model, given, family, rare_dir, window, opts) {
        Ok(c) => (c, None),
        Err(Error::GnlBreach { at, partial }) => (*partial, Some(at)),
        Err(e) => return Err(e),
    };
    Ok(WaveCurve { role, given, shock_part: branch.admissible_part(), rare_part, gnl_breach })
}

/// One exported curve node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub kind: String,
    pub family: u8,
    pub sign: String,
    pub u: f64,
    pub v: f64,
    pub lambda_or_speed: f64,
    pub admissible: bool,
}

impl CurveRow {
    pub fn from_branch(b: &HugoniotBranch) -> Vec<CurveRow> {
        (0..b.points.len())
            .map(|i| CurveRow {
                kind: "shock".into(),
                family: b.family.index(),
                sign: b.sign.symbol().into(),
                u: b.points[i].u,
                v: b.points[i].v,
                lambda_or_speed: b.speeds[i],
                admissible: b.admissible[i],
            })
            .collect()
    }

    pub fn from_rarefaction(c: &RarefactionCurve, sign: BranchSign) -> Vec<CurveRow> {
        (0..c.points.len())
            .map(|i| CurveRow {
                kind: "rarefaction".into(),
                family: c.family.index(),
                sign: sign.symbol().into(),
                u: c.points[i].u,
                v: c.points[i].v,
                lambda_or_speed: c.lambda[i],
                admissible: true,
            })
            .collect()
    }

    pub fn from_wave_curve(w: &WaveCurve) -> Vec<CurveRow> {
        let mut rows = CurveRow::from_branch(&w.shock_part);
        rows.extend(CurveRow::from_rarefaction(&w.rare_part, w.role.parts().0));
        rows
    }
}

/// Writes rows as CSV with a header line.
pub fn write_curves_csv<W: Write>(out: W, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Invalid(e.to_string());
    w.write_record(["kind", "family", "sign", "u", "v", "lambda_or_speed", "admissible"]).map_err(err)?;
    for r in rows {
        w.write_record([
            r.kind.clone(),
            r.family.to_string(),
            r.sign.clone(),
            fmt_f64(r.u),
            fmt_f64(r.v),
            fmt_f64(r.lambda_or_speed),
            r.admissible.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
