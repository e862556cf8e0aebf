use super::solve::{RiemannSolution, Wave};
use crate::state::State;
use crate::io::fmt_f64;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Self-similar solution at `xi = x / t`.
pub fn evaluate_fan(solution: &RiemannSolution, xi: f64) -> State {
    let mut state = solution.left;
    for w in &solution.waves {
        match w {
            Wave::Shock { speed, right, .. } => {
                if xi < *speed {
                    return state;
                }
                state = *right;
            }
            Wave::Rarefaction { curve, .. } => {
                let n = curve.points.len();
                let (lo, hi) = (curve.lambda[0], curve.lambda[n - 1]);
                if xi <= lo {
                    return curve.points[0];
                }
                if xi < hi {
                    if let Some(s) = curve.u_for_lambda(xi).and_then(|u| curve.state_at(u).ok()) {
                        return s;
                    }
                }
                state = curve.points[n - 1];
            }
        }
    }
    if solution.waves.is_empty() {
        return solution.left;
    }
    solution.right
}

/// Writes `xi,u,v` rows for the given similarity values.
pub fn write_fan_csv<W: Write>(out: W, solution: &RiemannSolution, xis: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["xi", "u", "v"]).map_err(csv_err)?;
    for &xi in xis {
        let s = evaluate_fan(solution, xi);
        w.write_record([fmt_f64(xi), fmt_f64(s.u), fmt_f64(s.v)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Invalid(e.to_string())
}

/// Similarity values spanning the fan with a margin on both sides.
pub fn fan_samples(solution: &RiemannSolution, n: usize) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in &solution.waves {
        let (a, b) = w.speed_range();
        lo = lo.min(a);
        hi = hi.max(b);
    }
    if !lo.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    let pad = 0.25 * (hi - lo).max(1e-3);
    let (a, b) = (lo - pad, hi + pad);
    let n = n.max(2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Compact description of one wave for export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveRecord {
    pub kind: String,
    pub family: u8,
    pub speed_or_lambda_range: [f64; 2],
    pub endpoints: [State; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(rename = "type")]
    pub kind: String,
    pub intermediate: Option<State>,
    pub waves: Vec<WaveRecord>,
    pub residuals: Vec<f64>,
    pub normalized_det: Option<f64>,
}

impl RiemannSolution {
    pub fn to_record(&self) -> SolutionRecord {
        SolutionRecord {
            kind: self.kind.name().into(),
            intermediate: self.intermediate,
            waves: self
                .waves
                .iter()
                .map(|w| {
                    let (a, b) = w.speed_range();
                    WaveRecord {
                        kind: match w {
                            Wave::Shock { .. } => "shock".into(),
                            Wave::Rarefaction { .. } => "rarefaction".into(),
                        },
                        family: w.family().index(),
                        speed_or_lambda_range: [a, b],
                        endpoints: [w.left_state(), w.right_state()],
                    }
                })
                .collect(),
            residuals: self.residuals.clone(),
            normalized_det: self.transversality.map(|t| t.normalized_det),
        }
    }
}
