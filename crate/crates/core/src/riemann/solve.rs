use super::intersect::{curve_set, scan_sets, IntersectionRecord, PairKind};
use crate::flux::{lambda, Family, FluxModel};
use crate::stability::{report_from_rows, TransversalityReport, TAU_TRANS};
use crate::state::{State, StateWindow};
use crate::wave::{
    classify_shock, hugoniot_gradient, hugoniot_objective, integrate_rarefaction, shock_speed, BranchLabel, BranchSign,
    CurveOptions, RarefactionCurve, Role,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Riemann data on a compact window.
#[derive(Debug, Clone)]
pub struct RiemannProblem<M> {
    pub model: M,
    pub left: State,
    pub right: State,
    pub window: StateWindow,
}

impl<M: FluxModel> RiemannProblem<M> {
    pub fn new(model: M, left: State, right: State, window: StateWindow) -> Result<Self> {
        window.validate()?;
        for (name, s) in [("left", left), ("right", right)] {
            if !window.in_interior(s) {
                return Err(Error::Invalid(format!("{name} state ({}, {}) is not inside the window interior", s.u, s.v)));
            }
            if !model.contains(s) {
                return Err(Error::Domain(s));
            }
        }
        Ok(RiemannProblem { model, left, right, window })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub curves: CurveOptions,
    /// Distance, relative to the window diameter, under which an end state
    /// counts as lying on the other state's wave curve.
    pub membership_tol: f64,
    pub tau_trans: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { curves: CurveOptions::default(), membership_tol: 1e-8, tau_trans: TAU_TRANS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionType {
    SingleShock1,
    SingleRarefaction1,
    SingleShock2,
    SingleRarefaction2,
    DoubleShock,
    ShockRarefaction,
    RarefactionShock,
    DoubleRarefaction,
}

impl SolutionType {
    pub fn is_single(self) -> bool {
        matches!(
            self,
            SolutionType::SingleShock1
                | SolutionType::SingleRarefaction1
                | SolutionType::SingleShock2
                | SolutionType::SingleRarefaction2
        )
    }

    pub fn of_pair(pair: PairKind) -> Self {
        match pair {
            PairKind::Hh => SolutionType::DoubleShock,
            PairKind::Hr => SolutionType::ShockRarefaction,
            PairKind::Rh => SolutionType::RarefactionShock,
            PairKind::Rr => SolutionType::DoubleRarefaction,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolutionType::SingleShock1 => "SingleShock1",
            SolutionType::SingleRarefaction1 => "SingleRarefaction1",
            SolutionType::SingleShock2 => "SingleShock2",
            SolutionType::SingleRarefaction2 => "SingleRarefaction2",
            SolutionType::DoubleShock => "DoubleShock",
            SolutionType::ShockRarefaction => "ShockRarefaction",
            SolutionType::RarefactionShock => "RarefactionShock",
            SolutionType::DoubleRarefaction => "DoubleRarefaction",
        }
    }
}

impl std::fmt::Display for SolutionType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One elementary wave of the fan, oriented from its left state to its
/// right state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Wave {
    Shock { family: Family, speed: f64, left: State, right: State },
    /// Curve nodes run from the wave's left state to its right state with
    /// increasing characteristic speed.
    Rarefaction { family: Family, curve: RarefactionCurve },
}

impl Wave {
    pub fn family(&self) -> Family {
        match self {
            Wave::Shock { family, .. } | Wave::Rarefaction { family, .. } => *family,
        }
    }

    pub fn left_state(&self) -> State {
        match self {
            Wave::Shock { left, .. } => *left,
            Wave::Rarefaction { curve, .. } => curve.points[0],
        }
    }

    pub fn right_state(&self) -> State {
        match self {
            Wave::Shock { right, .. } => *right,
            Wave::Rarefaction { curve, .. } => curve.points[curve.points.len() - 1],
        }
    }

    /// Slowest and fastest speed carried by the wave.
    pub fn speed_range(&self) -> (f64, f64) {
        match self {
            Wave::Shock { speed, .. } => (*speed, *speed),
            Wave::Rarefaction { curve, .. } => (curve.lambda[0], curve.lambda[curve.lambda.len() - 1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannSolution {
    pub kind: SolutionType,
    pub left: State,
    pub right: State,
    pub intermediate: Option<State>,
    pub waves: Vec<Wave>,
    /// Objective values at the intermediate state (empty for single waves).
    pub residuals: Vec<f64>,
    pub transversality: Option<TransversalityReport>,
    /// Every intersection found while solving, admissible or not.
    pub records: Vec<IntersectionRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearestApproach {
    pub forward: State,
    pub backward: State,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSolutionReport {
    pub records: Vec<IntersectionRecord>,
    /// Closest pair of nodes between the admissible forward 1-curve of the
    /// left state and the admissible backward 2-curve of the right state.
    pub nearest: Option<NearestApproach>,
}

/// Rarefaction half that tolerates a breach of genuine nonlinearity.
fn half_curve<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    family: Family,
    dir: BranchSign,
    window: &StateWindow,
    opts: &CurveOptions,
) -> Result<RarefactionCurve> {
    match integrate_rarefaction(model, given, family, dir, window, opts) {
        Ok(c) => Ok(c),
        Err(Error::GnlBreach { partial, .. }) => Ok(*partial),
        Err(e) => Err(e),
    }
}

/// Distance from `s` to the rarefaction curve, or `None` when `s.u` is
/// outside its range.
fn distance_to_curve(c: &RarefactionCurve, s: State) -> Option<f64> {
    let v = c.v_at(s.u).ok()?;
    let slope = c.slope_at(s.u).ok()?;
    Some((s.v - v).abs() / (1.0 + slope * slope).sqrt())
}

fn on_shock<M: FluxModel + ?Sized>(model: &M, given: State, s: State, role: Role, want: BranchLabel, tol: f64, tau: f64) -> Result<bool> {
    let h = hugoniot_objective(model, s, given)?;
    let g = hugoniot_gradient(model, s, given)?.norm();
    if !(g > 0.0) || h.abs() > tol * g {
        return Ok(false);
    }
    Ok(classify_shock(model, given, s, role, tau)?.label == want)
}

fn single_wave<M: FluxModel>(p: &RiemannProblem<M>, opts: &SolveOptions) -> Result<Option<RiemannSolution>> {
    let m = &p.model;
    let (l, r, w) = (p.left, p.right, &p.window);
    let tol = opts.membership_tol * w.diameter();
    let tau = opts.curves.tau_lax;
    let done = |kind, wave: Wave| RiemannSolution {
        kind,
        left: l,
        right: r,
        intermediate: None,
        waves: vec![wave],
        residuals: vec![],
        transversality: None,
        records: vec![],
    };
    if l.dist(r) <= tol {
        let lam = lambda(m, l, Family::One)?;
        let curve = RarefactionCurve {
            given: l,
            family: Family::One,
            half: crate::wave::CurveHalf::Plus,
            points: vec![l],
            slopes: vec![crate::flux::xi(m, l, Family::One).unwrap_or(0.0)],
            lambda: vec![lam],
            dlambda: vec![0.0],
            gnl_sign: 1.0,
        };
        let mut sol = done(SolutionType::SingleRarefaction1, Wave::Rarefaction { family: Family::One, curve });
        sol.right = l;
        return Ok(Some(sol));
    }
    if on_shock(m, l, r, Role::FromLeft, BranchLabel::OneMinus, tol, tau)? {
        let speed = shock_speed(m, l, r)?;
        return Ok(Some(done(SolutionType::SingleShock1, Wave::Shock { family: Family::One, speed, left: l, right: r })));
    }
    let r1 = half_curve(m, l, Family::One, BranchSign::Plus, w, &opts.curves)?;
    if distance_to_curve(&r1, r).is_some_and(|d| d <= tol) && lambda(m, r, Family::One)? > lambda(m, l, Family::One)? {
        let curve = r1.truncated(m, r)?;
        return Ok(Some(done(SolutionType::SingleRarefaction1, Wave::Rarefaction { family: Family::One, curve })));
    }
    if on_shock(m, r, l, Role::FromRight, BranchLabel::TwoPlus, tol, tau)? {
        let speed = shock_speed(m, l, r)?;
        return Ok(Some(done(SolutionType::SingleShock2, Wave::Shock { family: Family::Two, speed, left: l, right: r })));
    }
    let r2 = half_curve(m, r, Family::Two, BranchSign::Minus, w, &opts.curves)?;
    if distance_to_curve(&r2, l).is_some_and(|d| d <= tol) && lambda(m, l, Family::Two)? < lambda(m, r, Family::Two)? {
        let curve = r2.truncated(m, l)?.reversed();
        return Ok(Some(done(SolutionType::SingleRarefaction2, Wave::Rarefaction { family: Family::Two, curve })));
    }
    Ok(None)
}

fn nearest_approach(a: &[State], b: &[State]) -> Option<NearestApproach> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    // thin both lists so the all-pairs search stays bounded
    let stride = |n: usize| (n / 2000).max(1);
    let (sa, sb) = (stride(a.len()), stride(b.len()));
    let mut best: Option<NearestApproach> = None;
    for &p in a.iter().step_by(sa) {
        for &q in b.iter().step_by(sb) {
            let d = p.dist(q);
            if best.is_none_or(|n| d < n.distance) {
                best = Some(NearestApproach { forward: p, backward: q, distance: d });
            }
        }
    }
    best
}

/// Solves the Riemann problem by single-wave membership tests followed by
/// the intersection search over all four curve pairs.
pub fn solve_riemann<M: FluxModel>(problem: &RiemannProblem<M>, opts: &SolveOptions) -> Result<RiemannSolution> {
    if let Some(sol) = single_wave(problem, opts)? {
        return Ok(sol);
    }
    let m = &problem.model;
    let (l, r, w) = (problem.left, problem.right, &problem.window);
    let lset = curve_set(m, l, Family::One, w, &opts.curves)?;
    let rset = curve_set(m, r, Family::Two, w, &opts.curves)?;
    let records = scan_sets(m, &lset, &rset, w, opts.curves.tau_lax, opts.tau_trans)?;
    let admissible: Vec<&IntersectionRecord> = records.iter().filter(|r| r.admissible).collect();
    match admissible.len() {
        0 => {
            let fwd_r = half_curve(m, l, Family::One, BranchSign::Plus, w, &opts.curves)?;
            let bwd_r = half_curve(m, r, Family::Two, BranchSign::Minus, w, &opts.curves)?;
            let mut fwd: Vec<State> = lset.shocks[0].admissible_part().points;
            fwd.extend(fwd_r.points);
            let mut bwd: Vec<State> = rset.shocks[1].admissible_part().points;
            bwd.extend(bwd_r.points);
            Err(Error::NoSolutionInWindow(Box::new(NoSolutionReport { records, nearest: nearest_approach(&fwd, &bwd) })))
        }
        1 => {
            let rec = admissible[0].clone();
            build_double(problem, rec, records, opts)
        }
        _ => Err(Error::NonUniqueSolution(admissible.into_iter().cloned().collect())),
    }
}

fn build_double<M: FluxModel>(
    problem: &RiemannProblem<M>,
    rec: IntersectionRecord,
    records: Vec<IntersectionRecord>,
    opts: &SolveOptions,
) -> Result<RiemannSolution> {
    let m = &problem.model;
    let (l, r, w) = (problem.left, problem.right, &problem.window);
    let p = rec.point;
    let (lk, rk) = rec.pair.kinds();
    use crate::stability::ObjectiveKind::*;
    let wave1 = match lk {
        Hugoniot => Wave::Shock { family: Family::One, speed: shock_speed(m, l, p)?, left: l, right: p },
        Rarefaction => {
            let c = half_curve(m, l, Family::One, BranchSign::Plus, w, &opts.curves)?;
            Wave::Rarefaction { family: Family::One, curve: c.truncated(m, p)? }
        }
    };
    let wave2 = match rk {
        Hugoniot => Wave::Shock { family: Family::Two, speed: shock_speed(m, p, r)?, left: p, right: r },
        Rarefaction => {
            let c = half_curve(m, r, Family::Two, BranchSign::Minus, w, &opts.curves)?;
            Wave::Rarefaction { family: Family::Two, curve: c.truncated(m, p)?.reversed() }
        }
    };
    let max1 = wave1.speed_range().1;
    let min2 = wave2.speed_range().0;
    if !(max1 + opts.curves.tau_lax < min2) {
        return Err(Error::SpeedOrdering { max1, min2 });
    }
    let transversality = Some(report_from_rows(
        p,
        State::new(rec.transversality.matrix[0][0], rec.transversality.matrix[0][1]),
        State::new(rec.transversality.matrix[1][0], rec.transversality.matrix[1][1]),
        opts.tau_trans,
    ));
    Ok(RiemannSolution {
        kind: SolutionType::of_pair(rec.pair),
        left: l,
        right: r,
        intermediate: Some(p),
        waves: vec![wave1, wave2],
        residuals: rec.residual.to_vec(),
        transversality,
        records,
    })
}
