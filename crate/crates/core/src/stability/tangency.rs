use crate::flux::FluxModel;
use crate::riemann::{solve_riemann, RiemannProblem, SolutionType, SolveOptions};
use crate::state::{State, StateWindow};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome of a search for right states whose wave curves nearly touch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencySearch {
    /// Right state with the smallest |normalized det| seen.
    pub right: State,
    pub kind: SolutionType,
    pub normalized_det: f64,
    /// A sign change of the determinant within one solution type was found
    /// and bisected.
    pub bracketed: bool,
    pub samples: usize,
}

fn signed_det<M: FluxModel + Clone>(
    model: &M,
    left: State,
    right: State,
    window: &StateWindow,
    opts: &SolveOptions,
) -> Option<(SolutionType, f64)> {
    let p = RiemannProblem::new(model.clone(), left, right, *window).ok()?;
    let sol = solve_riemann(&p, opts).ok()?;
    Some((sol.kind, sol.transversality?.normalized_det))
}

/// Scans right states along the segment `from -> to`, then bisects any
/// determinant sign change that happens without a change of solution type.
/// Such a change can only come from the two wave curves passing through a
/// tangency. With no bracket the best sample is returned as is.
pub fn near_tangency_search<M: FluxModel + Clone>(
    model: &M,
    left: State,
    from: State,
    to: State,
    window: &StateWindow,
    samples: usize,
    opts: &SolveOptions,
) -> Result<TangencySearch> {
    if samples < 2 {
        return Err(Error::Invalid("tangency search needs at least two samples".into()));
    }
    let at = |t: f64| from + t * (to - from);
    let scan: Vec<(f64, Option<(SolutionType, f64)>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (samples - 1) as f64;
            (t, signed_det(model, left, at(t), window, opts))
        })
        .collect();
    let mut best: Option<(f64, SolutionType, f64)> = None;
    let keep = |t: f64, kind: SolutionType, det: f64, best: &mut Option<(f64, SolutionType, f64)>| {
        if best.is_none_or(|b| det.abs() < b.2.abs()) {
            *best = Some((t, kind, det));
        }
    };
    let mut bracketed = false;
    for pair in scan.windows(2) {
        let ((ta, Some((ka, da))), (tb, Some((kb, db)))) = (pair[0], pair[1]) else { continue };
        keep(ta, ka, da, &mut best);
        keep(tb, kb, db, &mut best);
        if ka != kb || da.signum() == db.signum() {
            continue;
        }
        bracketed = true;
        let (mut lo, mut hi, mut dlo) = (ta, tb, da);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match signed_det(model, left, at(mid), window, opts) {
                Some((k, d)) if k == ka => {
                    keep(mid, k, d, &mut best);
                    if d.signum() == dlo.signum() {
                        lo = mid;
                        dlo = d;
                    } else {
                        hi = mid;
                    }
                }
                // lost the solution inside the bracket; stop refining
                _ => break,
            }
        }
    }
    let (t, kind, det) = best.ok_or_else(|| Error::Invalid("no sample along the segment was solvable".into()))?;
    Ok(TangencySearch { right: at(t), kind, normalized_det: det, bracketed, samples })
}
