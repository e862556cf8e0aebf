use super::bump::{BumpPerturbation, Perturbed};
use crate::flux::{check_assumptions, FluxModel, Tolerances};
use crate::numerics::slope_through_origin;
use crate::riemann::{solve_riemann, uniqueness_scan, RiemannProblem, RiemannSolution, SolutionType, SolveOptions};
use crate::state::State;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default ladder of combined perturbation sizes.
pub const DEFAULT_EPS_LADDER: [f64; 6] = [0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub eps: f64,
    pub kind: Option<SolutionType>,
    pub intermediate: Option<State>,
    /// Euclidean distance of the intermediate state from the unperturbed one.
    pub shift: Option<f64>,
    pub normalized_det: Option<f64>,
    /// Admissible intersections other than the one used by the solution.
    pub spurious: usize,
    pub assumptions_pass: bool,
    pub preserved: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub base_kind: SolutionType,
    pub base_intermediate: Option<State>,
    pub base_normalized_det: Option<f64>,
    pub epsilons: Vec<f64>,
    pub rows: Vec<StabilityRow>,
    /// Largest rung such that it and every smaller rung keep the type with
    /// no spurious admissible intersection.
    pub largest_preserving_eps: Option<f64>,
    /// Least-squares slope of shift against eps over the preserved prefix.
    pub shift_slope: Option<f64>,
}

fn spurious_count<M: FluxModel>(problem: &RiemannProblem<M>, sol: &RiemannSolution, opts: &SolveOptions) -> Result<usize> {
    let tol = 1e-8 * problem.window.diameter();
    let records = if sol.kind.is_single() {
        uniqueness_scan(&problem.model, problem.left, problem.right, &problem.window, &opts.curves)?
    } else {
        sol.records.clone()
    };
    Ok(records
        .iter()
        .filter(|r| r.admissible && sol.intermediate.is_none_or(|p| p.dist(r.point) > tol))
        .count())
}

fn row_for<M: FluxModel>(
    problem: &RiemannProblem<M>,
    base: &RiemannSolution,
    bump: &BumpPerturbation,
    deltas: [f64; 4],
    eps: f64,
    opts: &SolveOptions,
) -> StabilityRow {
    let model = Perturbed { base: &problem.model, delta: bump.scaled(eps) };
    let left = State::new(problem.left.u + eps * deltas[0], problem.left.v + eps * deltas[1]);
    let right = State::new(problem.right.u + eps * deltas[2], problem.right.v + eps * deltas[3]);
    let assumptions_pass = check_assumptions(&model, &problem.window, 21, &Tolerances::default())
        .map(|r| r.all_pass())
        .unwrap_or(false);
    let mut row = StabilityRow {
        eps,
        kind: None,
        intermediate: None,
        shift: None,
        normalized_det: None,
        spurious: 0,
        assumptions_pass,
        preserved: false,
        error: None,
    };
    let p = match RiemannProblem::new(model, left, right, problem.window) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match solve_riemann(&p, opts) {
        Ok(sol) => {
            row.kind = Some(sol.kind);
            row.intermediate = sol.intermediate;
            row.shift = match (sol.intermediate, base.intermediate) {
                (Some(a), Some(b)) => Some(a.dist(b)),
                (None, None) => Some(0.0),
                _ => None,
            };
            row.normalized_det = sol.transversality.map(|t| t.normalized_det);
            match spurious_count(&p, &sol, opts) {
                Ok(n) => row.spurious = n,
                Err(e) => row.error = Some(e.to_string()),
            }
            row.preserved = sol.kind == base.kind && row.spurious == 0 && row.error.is_none();
        }
        Err(Error::NonUniqueSolution(recs)) => {
            row.spurious = recs.len().saturating_sub(1);
            row.error = Some(format!("{} admissible intermediate states", recs.len()));
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Re-solves the problem under the flux perturbation and end-state shifts
/// scaled by every `eps` of the ladder. Failures are recorded per rung.
pub fn structural_stability_experiment<M: FluxModel>(
    problem: &RiemannProblem<M>,
    flux_spec: &BumpPerturbation,
    state_deltas: [f64; 4],
    eps_ladder: &[f64],
    opts: &SolveOptions,
) -> Result<StabilityReport> {
    flux_spec.validate()?;
    if eps_ladder.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::Invalid("perturbation sizes must be finite and nonnegative".into()));
    }
    let base = solve_riemann(problem, opts)?;
    let mut epsilons = eps_ladder.to_vec();
    epsilons.sort_by(|a, b| a.total_cmp(b));
    let rows: Vec<StabilityRow> =
        epsilons.par_iter().map(|&eps| row_for(problem, &base, flux_spec, state_deltas, eps, opts)).collect();
    let prefix: Vec<&StabilityRow> = rows.iter().take_while(|r| r.preserved).collect();
    let largest_preserving_eps = prefix.last().map(|r| r.eps);
    let (x, y): (Vec<f64>, Vec<f64>) =
        prefix.iter().filter(|r| r.eps > 0.0).filter_map(|r| r.shift.map(|s| (r.eps, s))).unzip();
    let shift_slope = (!x.is_empty()).then(|| slope_through_origin(&x, &y));
    Ok(StabilityReport {
        base_kind: base.kind,
        base_intermediate: base.intermediate,
        base_normalized_det: base.transversality.map(|t| t.normalized_det),
        epsilons,
        rows,
        largest_preserving_eps,
        shift_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{PSystem, Pressure};
    use crate::state::StateWindow;

    #[test]
    fn zero_rung_reproduces_base() {
        let m = PSystem::new(Pressure::Power { coef: 1.0, exponent: -2.0 });
        let w = StateWindow::new(-2.0, 2.0, 0.3, 3.0).unwrap();
        let p = RiemannProblem::new(m, State::new(0.8, 1.0), State::new(-0.8, 1.0), w).unwrap();
        let bump = BumpPerturbation { center: State::new(0.0, 0.7), radius: 0.5, amplitude_f: 1.0, amplitude_g: 0.5 };
        let rep = structural_stability_experiment(&p, &bump, [1.0, -1.0, 0.5, 1.0], &[0.0, 1e-3], &SolveOptions::default()).unwrap();
        assert_eq!(rep.base_kind, SolutionType::DoubleShock);
        let r0 = &rep.rows[0];
        assert_eq!(r0.kind, Some(rep.base_kind));
        assert_eq!(r0.intermediate, rep.base_intermediate);
        assert_eq!(r0.shift, Some(0.0));
        assert!(r0.preserved && r0.assumptions_pass);
        assert!(rep.rows[1].preserved);
        assert_eq!(rep.largest_preserving_eps, Some(1e-3));
        assert!(rep.shift_slope.unwrap().is_finite());
    }
}
