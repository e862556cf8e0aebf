use crate::flux::{lambda, Family, FluxModel};
use crate::stability::{report_from_rows, ObjectiveKind, TransversalityReport};
use crate::state::{State, StateWindow};
use crate::wave::{
    classify_shock, full_rarefaction, hugoniot_gradient, hugoniot_objective, trace_hugoniot_family, BranchLabel,
    BranchSign, CurveOptions, HugoniotBranch, RarefactionCurve, Role,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Which pair of objectives an intermediate state zeroes: the first letter
/// is the curve from the left state, the second the curve from the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Hh,
    Hr,
    Rh,
    Rr,
}

impl PairKind {
    pub const ALL: [PairKind; 4] = [PairKind::Hh, PairKind::Hr, PairKind::Rh, PairKind::Rr];

    pub fn kinds(self) -> (ObjectiveKind, ObjectiveKind) {
        use ObjectiveKind::*;
        match self {
            PairKind::Hh => (Hugoniot, Hugoniot),
            PairKind::Hr => (Hugoniot, Rarefaction),
            PairKind::Rh => (Rarefaction, Hugoniot),
            PairKind::Rr => (Rarefaction, Rarefaction),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PairKind::Hh => "hh",
            PairKind::Hr => "hr",
            PairKind::Rh => "rh",
            PairKind::Rr => "rr",
        }
    }
}

impl std::str::FromStr for PairKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hh" => Ok(PairKind::Hh),
            "hr" => Ok(PairKind::Hr),
            "rh" => Ok(PairKind::Rh),
            "rr" => Ok(PairKind::Rr),
            _ => Err(Error::Invalid(format!("unknown curve pair {s:?}"))),
        }
    }
}

/// Where an intermediate state sits relative to one end state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartLabel {
    Shock(BranchLabel),
    Rarefaction { family: Family, sign: BranchSign },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRecord {
    pub point: State,
    pub pair: PairKind,
    /// Objective values (left curve, right curve) at `point`.
    pub residual: [f64; 2],
    pub refined: bool,
    pub iterations: usize,
    pub admissible: bool,
    pub left_label: PartLabel,
    pub right_label: PartLabel,
    /// Some admissibility inequality holds only within the Lax margin.
    pub marginal: bool,
    pub transversality: TransversalityReport,
}

/// Shock loci and rarefaction curve of one family through one state.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub given: State,
    pub family: Family,
    pub shocks: Vec<HugoniotBranch>,
    pub rarefaction: RarefactionCurve,
    /// Genuine nonlinearity failed along the rarefaction; the curve is partial.
    pub gnl_breach: Option<State>,
}

pub fn curve_set<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    family: Family,
    window: &StateWindow,
    opts: &CurveOptions,
) -> Result<CurveSet> {
    let shocks = trace_hugoniot_family(model, given, family, window, opts.step_for(window), opts.tau_lax, opts.max_points)?;
    let (rarefaction, gnl_breach) = match full_rarefaction(model, given, family, window, opts) {
        Ok(c) => (c, None),
        Err(Error::GnlBreach { at, partial }) => (*partial, Some(at)),
        Err(e) => return Err(e),
    };
    Ok(CurveSet { given, family, shocks: shocks.to_vec(), rarefaction, gnl_breach })
}

#[derive(Clone, Copy)]
pub(crate) enum Objective<'a> {
    Shock(State),
    Rare(&'a RarefactionCurve),
}

impl Objective<'_> {
    pub(crate) fn value_grad<M: FluxModel + ?Sized>(&self, model: &M, s: State) -> Result<(f64, State)> {
        match self {
            Objective::Shock(g) => Ok((hugoniot_objective(model, s, *g)?, hugoniot_gradient(model, s, *g)?)),
            Objective::Rare(c) => Ok((c.objective(s)?, State::new(-c.slope_at(s.u)?, 1.0))),
        }
    }

    fn scale<M: FluxModel + ?Sized>(&self, model: &M, diam: f64) -> f64 {
        match self {
            Objective::Shock(g) => model.flux_scale(*g) * (1.0 + diam),
            Objective::Rare(_) => 1.0 + diam,
        }
    }
}

/// Uniform hash grid over the segments of a polyline.
struct SegmentGrid {
    cell: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
}

impl SegmentGrid {
    fn new(pts: &[State], floor: f64) -> Self {
        let longest = pts.windows(2).map(|w| w[0].dist(w[1])).fold(0.0f64, f64::max);
        let cell = longest.max(floor);
        let mut g = SegmentGrid { cell, map: HashMap::new() };
        for j in 0..pts.len().saturating_sub(1) {
            for key in g.cells(pts[j], pts[j + 1]) {
                g.map.entry(key).or_default().push(j);
            }
        }
        g
    }

    fn cells(&self, a: State, b: State) -> Vec<(i64, i64)> {
        let c = |x: f64| (x / self.cell).floor() as i64;
        let (i0, i1) = (c(a.u.min(b.u)), c(a.u.max(b.u)));
        let (j0, j1) = (c(a.v.min(b.v)), c(a.v.max(b.v)));
        let mut out = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                out.push((i, j));
            }
        }
        out
    }

    fn candidates(&self, a: State, b: State) -> Vec<usize> {
        let mut out: Vec<usize> = self.cells(a, b).iter().filter_map(|k| self.map.get(k)).flatten().copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Crossing point of segments `ab` and `cd`, counting a vertex on the
/// other segment's line on one side only so that every sign change of the
/// cross product is seen once.
fn segment_crossing(a: State, b: State, c: State, d: State) -> Option<State> {
    let d1 = (d - c).cross(a - c);
    let d2 = (d - c).cross(b - c);
    let d3 = (b - a).cross(c - a);
    let d4 = (b - a).cross(d - a);
    if (d1 >= 0.0) == (d2 >= 0.0) || (d3 >= 0.0) == (d4 >= 0.0) {
        return None;
    }
    let t = d1 / (d1 - d2);
    Some(a + t * (b - a))
}

/// Raw crossings of two polylines before refinement.
pub fn polyline_crossings(a: &[State], b: &[State]) -> Vec<State> {
    if a.len() < 2 || b.len() < 2 {
        return vec![];
    }
    let span = a.iter().chain(b).fold(0.0f64, |m, p| m.max(p.u.abs()).max(p.v.abs()));
    let grid = SegmentGrid::new(b, 1e-9 * (1.0 + span));
    let mut out = Vec::new();
    for i in 0..a.len() - 1 {
        for j in grid.candidates(a[i], a[i + 1]) {
            if let Some(p) = segment_crossing(a[i], a[i + 1], b[j], b[j + 1]) {
                out.push(p);
            }
        }
    }
    out
}

struct Refined {
    point: State,
    residual: [f64; 2],
    converged: bool,
    iterations: usize,
}

fn newton<M: FluxModel + ?Sized>(model: &M, left: Objective, right: Objective, start: State, diam: f64) -> Refined {
    let (tl, tr) = (1e-12 * left.scale(model, diam), 1e-12 * right.scale(model, diam));
    let eval = |s: State| -> Option<((f64, State), (f64, State))> {
        if !model.contains(s) {
            return None;
        }
        Some((left.value_grad(model, s).ok()?, right.value_grad(model, s).ok()?))
    };
    let mut s = start;
    let mut best = Refined { point: start, residual: [f64::NAN; 2], converged: false, iterations: 0 };
    // once inside tolerance keep polishing while the Newton step shrinks,
    // so that weak waves get their end state to full precision
    let mut last_step = f64::INFINITY;
    for it in 0..=30 {
        let Some(((wl, gl), (wr, gr))) = eval(s) else { break };
        let inside = wl.abs() <= tl && wr.abs() <= tr;
        if best.converged && !inside {
            break;
        }
        best = Refined { point: s, residual: [wl, wr], converged: inside, iterations: it };
        if it == 30 || (wl == 0.0 && wr == 0.0) {
            break;
        }
        let det = gl.u * gr.v - gl.v * gr.u;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let du = (-wl * gr.v + wr * gl.v) / det;
        let dv = (-gl.u * wr + gr.u * wl) / det;
        let step = du.hypot(dv);
        if inside && (step >= 0.5 * last_step || step <= 1e-16 * (1.0 + s.norm())) {
            break;
        }
        last_step = step;
        s = State::new(s.u + du, s.v + dv);
    }
    best
}

fn left_label<M: FluxModel + ?Sized>(model: &M, kind: ObjectiveKind, left: State, p: State, tau: f64) -> Result<(PartLabel, bool, bool)> {
    match kind {
        ObjectiveKind::Hugoniot => {
            let c = classify_shock(model, left, p, Role::FromLeft, tau)?;
            Ok((PartLabel::Shock(c.label), c.label == BranchLabel::OneMinus, c.marginal))
        }
        ObjectiveKind::Rarefaction => {
            let d = lambda(model, p, Family::One)? - lambda(model, left, Family::One)?;
            let sign = if d > 0.0 { BranchSign::Plus } else { BranchSign::Minus };
            Ok((PartLabel::Rarefaction { family: Family::One, sign }, d > tau, d.abs() <= tau))
        }
    }
}

fn right_label<M: FluxModel + ?Sized>(model: &M, kind: ObjectiveKind, right: State, p: State, tau: f64) -> Result<(PartLabel, bool, bool)> {
    match kind {
        ObjectiveKind::Hugoniot => {
            let c = classify_shock(model, right, p, Role::FromRight, tau)?;
            Ok((PartLabel::Shock(c.label), c.label == BranchLabel::TwoPlus, c.marginal))
        }
        ObjectiveKind::Rarefaction => {
            let d = lambda(model, right, Family::Two)? - lambda(model, p, Family::Two)?;
            let sign = if d > 0.0 { BranchSign::Minus } else { BranchSign::Plus };
            Ok((PartLabel::Rarefaction { family: Family::Two, sign }, d > tau, d.abs() <= tau))
        }
    }
}

/// Intersections of one curve pair between prepared curve sets.
pub(crate) fn intersect_sets<M: FluxModel + ?Sized>(
    model: &M,
    lset: &CurveSet,
    rset: &CurveSet,
    pair: PairKind,
    window: &StateWindow,
    tau_lax: f64,
    tau_trans: f64,
) -> Result<Vec<IntersectionRecord>> {
    let (lk, rk) = pair.kinds();
    let (left, right) = (lset.given, rset.given);
    fn polys(set: &CurveSet, kind: ObjectiveKind) -> Vec<(Vec<State>, Objective<'_>)> {
        match kind {
            ObjectiveKind::Hugoniot => set.shocks.iter().map(|b| (b.points.clone(), Objective::Shock(set.given))).collect(),
            ObjectiveKind::Rarefaction => vec![(set.rarefaction.points.clone(), Objective::Rare(&set.rarefaction))],
        }
    }
    let diam = window.diameter();
    let dedup = 1e-8 * diam;
    let mut out: Vec<IntersectionRecord> = Vec::new();
    for (lp, lo) in polys(lset, lk) {
        for (rp, ro) in polys(rset, rk) {
            for start in polyline_crossings(&lp, &rp) {
                let r = newton(model, lo, ro, start, diam);
                let p = r.point;
                if p.dist(left) <= dedup || p.dist(right) <= dedup || !window.contains(p) {
                    continue;
                }
                if out.iter().any(|q| q.point.dist(p) <= dedup) {
                    continue;
                }
                let (la, ladm, lmarg) = left_label(model, lk, left, p, tau_lax)?;
                let (ra, radm, rmarg) = right_label(model, rk, right, p, tau_lax)?;
                let (_, gl) = lo.value_grad(model, p)?;
                let (_, gr) = ro.value_grad(model, p)?;
                out.push(IntersectionRecord {
                    point: p,
                    pair,
                    residual: r.residual,
                    refined: r.converged,
                    iterations: r.iterations,
                    admissible: ladm && radm,
                    left_label: la,
                    right_label: ra,
                    marginal: lmarg || rmarg,
                    transversality: report_from_rows(p, gl, gr, tau_trans),
                });
            }
        }
    }
    Ok(out)
}

/// Intersections of the family-1 curves of `left` with the family-2 curves
/// of `right` for one objective pair.
pub fn intersect_curves<M: FluxModel + ?Sized>(
    model: &M,
    left: State,
    right: State,
    pair: PairKind,
    window: &StateWindow,
    opts: &CurveOptions,
) -> Result<Vec<IntersectionRecord>> {
    let lset = curve_set(model, left, Family::One, window, opts)?;
    let rset = curve_set(model, right, Family::Two, window, opts)?;
    intersect_sets(model, &lset, &rset, pair, window, opts.tau_lax, crate::stability::TAU_TRANS)
}

/// All intersections over the four pairs, admissible or not.
pub fn uniqueness_scan<M: FluxModel + ?Sized>(
    model: &M,
    left: State,
    right: State,
    window: &StateWindow,
    opts: &CurveOptions,
) -> Result<Vec<IntersectionRecord>> {
    if left.dist(right) <= 1e-8 * window.diameter() {
        return Ok(vec![]);
    }
    let lset = curve_set(model, left, Family::One, window, opts)?;
    let rset = curve_set(model, right, Family::Two, window, opts)?;
    scan_sets(model, &lset, &rset, window, opts.tau_lax, crate::stability::TAU_TRANS)
}

pub(crate) fn scan_sets<M: FluxModel + ?Sized>(
    model: &M,
    lset: &CurveSet,
    rset: &CurveSet,
    window: &StateWindow,
    tau_lax: f64,
    tau_trans: f64,
) -> Result<Vec<IntersectionRecord>> {
    let mut all = Vec::new();
    for pair in PairKind::ALL {
        all.extend(intersect_sets(model, lset, rset, pair, window, tau_lax, tau_trans)?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{PSystem, Pressure};

    fn setup() -> (PSystem, StateWindow) {
        (PSystem::new(Pressure::Power { coef: 1.0, exponent: -2.0 }), StateWindow::new(-2.0, 2.0, 0.3, 3.0).unwrap())
    }

    #[test]
    fn crossing_count_matches_sign_changes() {
        // two graphs v = a(u) and v = b(u) sampled on different grids
        let a: Vec<State> = (0..=200).map(|i| {
            let u = -1.0 + 0.01 * i as f64;
            State::new(u, (3.0 * u).sin())
        }).collect();
        let b: Vec<State> = (0..=77).map(|i| {
            let u = -1.0 + 2.0 * i as f64 / 77.0;
            State::new(u, 0.3 * u)
        }).collect();
        let crossings = polyline_crossings(&a, &b);
        let mut changes = 0;
        let diff = |u: f64| (3.0 * u).sin() - 0.3 * u;
        for i in 0..2000 {
            let (u0, u1) = (-1.0 + 0.001 * i as f64, -1.0 + 0.001 * (i + 1) as f64);
            if (diff(u0) >= 0.0) != (diff(u1) >= 0.0) {
                changes += 1;
            }
        }
        assert_eq!(crossings.len(), changes);
        assert_eq!(changes, 3);
    }

    #[test]
    fn symmetric_double_shock_at_zero_velocity() {
        let (m, w) = setup();
        let (l, r) = (State::new(1.0, 0.6), State::new(-1.0, 0.6));
        let recs = intersect_curves(&m, l, r, PairKind::Hh, &w, &CurveOptions::default()).unwrap();
        let adm: Vec<_> = recs.iter().filter(|r| r.admissible).collect();
        assert_eq!(adm.len(), 1);
        assert!(adm[0].point.u.abs() < 1e-10, "{:?}", adm[0].point);
        assert!(adm[0].point.v < 0.6);
        assert!(adm[0].refined && adm[0].transversality.pass);
        assert_eq!(adm[0].left_label, PartLabel::Shock(BranchLabel::OneMinus));
        assert_eq!(adm[0].right_label, PartLabel::Shock(BranchLabel::TwoPlus));
    }

    #[test]
    fn separated_curves_do_not_meet() {
        let (m, _) = setup();
        // a narrow window that holds both states but none of the connecting curves
        let w = StateWindow::new(-0.1, 1.1, 0.9, 1.1).unwrap();
        let recs = intersect_curves(&m, State::new(0.0, 1.0), State::new(1.0, 1.0), PairKind::Hh, &w, &CurveOptions::default()).unwrap();
        assert!(recs.is_empty(), "{recs:?}");
    }

    #[test]
    fn coincident_states_scan_empty() {
        let (m, w) = setup();
        let s = State::new(0.2, 1.0);
        assert!(uniqueness_scan(&m, s, s, &w, &CurveOptions::default()).unwrap().is_empty());
    }
}
