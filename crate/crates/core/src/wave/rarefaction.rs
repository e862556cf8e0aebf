use super::{BranchSign, CurveOptions};
use crate::flux::{eigen_with, gnl_margin, Family, FluxModel, Tolerances};
use crate::numerics::{hermite, hermite_slope};
use crate::state::{State, StateWindow};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveHalf {
    Plus,
    Minus,
    /// Both halves joined; points sorted by increasing `u`.
    Full,
}

impl From<BranchSign> for CurveHalf {
    fn from(s: BranchSign) -> Self {
        match s {
            BranchSign::Plus => CurveHalf::Plus,
            BranchSign::Minus => CurveHalf::Minus,
        }
    }
}

/// Integral curve `dv/du = Xi_k(u, v)` through a given state, stored with
/// the slope, characteristic speed and `d lambda_k / du` at every node so
/// that it can be evaluated between nodes by cubic Hermite interpolation.
///
/// Half curves are stored in marching order starting at the given state;
/// the full curve is stored in increasing `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RarefactionCurve {
    pub given: State,
    pub family: Family,
    pub half: CurveHalf,
    pub points: Vec<State>,
    pub slopes: Vec<f64>,
    pub lambda: Vec<f64>,
    pub dlambda: Vec<f64>,
    /// Sign of `grad lambda_k . r_k` at the given state.
    pub gnl_sign: f64,
}

fn tol_none() -> Tolerances {
    Tolerances { discriminant: 0.0, graph: 0.0, gnl: 0.0 }
}

impl RarefactionCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `u` range covered by the nodes.
    pub fn u_range(&self) -> (f64, f64) {
        let a = self.points[0].u;
        let b = self.points[self.points.len() - 1].u;
        (a.min(b), a.max(b))
    }

    fn increasing(&self) -> bool {
        self.points.len() < 2 || self.points[self.points.len() - 1].u >= self.points[0].u
    }

    /// Index `i` with `u` between nodes `i` and `i + 1`.
    fn segment(&self, u: f64) -> Result<usize> {
        let (lo, hi) = self.u_range();
        if !(u >= lo && u <= hi) || self.points.len() < 2 {
            if self.points.len() == 1 && u == self.points[0].u {
                return Ok(0);
            }
            return Err(Error::Range(u));
        }
        let inc = self.increasing();
        let key = |i: usize| if inc { self.points[i].u } else { -self.points[i].u };
        let target = if inc { u } else { -u };
        // first node with key > target
        let mut a = 0usize;
        let mut b = self.points.len() - 1;
        while b - a > 1 {
            let m = (a + b) / 2;
            if key(m) <= target {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(a)
    }

    fn node_interp(&self, i: usize, u: f64, values: &[f64], slopes: &[f64]) -> f64 {
        if self.points.len() == 1 {
            return values[0];
        }
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        hermite(p0.u, p1.u, values[i], values[i + 1], slopes[i], slopes[i + 1], u)
    }

    /// `v` on the curve at `u`.
    pub fn v_at(&self, u: f64) -> Result<f64> {
        let i = self.segment(u)?;
        if self.points.len() == 1 {
            return Ok(self.points[0].v);
        }
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        Ok(hermite(p0.u, p1.u, p0.v, p1.v, self.slopes[i], self.slopes[i + 1], u))
    }

    /// `dv/du` of the interpolant at `u`.
    pub fn slope_at(&self, u: f64) -> Result<f64> {
        let i = self.segment(u)?;
        if self.points.len() == 1 {
            return Ok(self.slopes[0]);
        }
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        Ok(hermite_slope(p0.u, p1.u, p0.v, p1.v, self.slopes[i], self.slopes[i + 1], u))
    }

    /// `lambda_k` along the curve at `u`, Hermite in `u` with `d lambda/du`.
    pub fn lambda_at(&self, u: f64) -> Result<f64> {
        let i = self.segment(u)?;
        Ok(self.node_interp(i, u, &self.lambda, &self.dlambda))
    }

    pub fn state_at(&self, u: f64) -> Result<State> {
        Ok(State::new(u, self.v_at(u)?))
    }

    /// Signed vertical distance `v - v_k(u)` from the curve.
    pub fn objective(&self, s: State) -> Result<f64> {
        Ok(s.v - self.v_at(s.u)?)
    }

    /// `u` at which the interpolated speed equals `target`, by bisection on
    /// the node table followed by bisection on the Hermite arc.
    pub fn u_for_lambda(&self, target: f64) -> Option<f64> {
        let n = self.points.len();
        if n < 2 {
            return None;
        }
        let inc = self.lambda[n - 1] >= self.lambda[0];
        let key = |i: usize| if inc { self.lambda[i] } else { -self.lambda[i] };
        let t = if inc { target } else { -target };
        if t < key(0) || t > key(n - 1) {
            return None;
        }
        let (mut a, mut b) = (0usize, n - 1);
        while b - a > 1 {
            let m = (a + b) / 2;
            if key(m) <= t {
                a = m;
            } else {
                b = m;
            }
        }
        let (mut ua, mut ub) = (self.points[a].u, self.points[b].u);
        let f = |u: f64| {
            let l = self.node_interp(a, u, &self.lambda, &self.dlambda);
            if inc { l - target } else { target - l }
        };
        if f(ua) >= 0.0 {
            return Some(ua);
        }
        if f(ub) <= 0.0 {
            return Some(ub);
        }
        for _ in 0..80 {
            let m = 0.5 * (ua + ub);
            if f(m) < 0.0 {
                ua = m;
            } else {
                ub = m;
            }
        }
        Some(0.5 * (ua + ub))
    }

    /// Nodes from the start up to `u_end`, with the final node placed at
    /// `end` exactly.
    pub fn truncated<M: FluxModel + ?Sized>(&self, model: &M, end: State) -> Result<RarefactionCurve> {
        let i = self.segment(end.u)?;
        let mut c = self.clone();
        c.points.truncate(i + 1);
        c.slopes.truncate(i + 1);
        c.lambda.truncate(i + 1);
        c.dlambda.truncate(i + 1);
        if c.points[c.points.len() - 1].dist(end) > 0.0 {
            let node = node_at(model, end, self.family, self.gnl_sign, 1e-5)?;
            c.push(node);
        }
        Ok(c)
    }

    fn push(&mut self, n: Node) {
        self.points.push(n.s);
        self.slopes.push(n.slope);
        self.lambda.push(n.lambda);
        self.dlambda.push(n.dlambda);
    }

    /// Same nodes in the opposite order.
    pub fn reversed(&self) -> RarefactionCurve {
        let mut c = self.clone();
        c.points.reverse();
        c.slopes.reverse();
        c.lambda.reverse();
        c.dlambda.reverse();
        c
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    s: State,
    slope: f64,
    lambda: f64,
    dlambda: f64,
}

fn node_at<M: FluxModel + ?Sized>(model: &M, s: State, k: Family, _sign: f64, h: f64) -> Result<Node> {
    let e = eigen_with(model, s, &tol_none())?;
    let g = gnl_margin(model, s, k, h)?;
    Ok(Node { s, slope: e.r(k).v, lambda: e.lambda(k), dlambda: g })
}

fn xi_at<M: FluxModel + ?Sized>(model: &M, s: State, k: Family) -> Result<f64> {
    Ok(eigen_with(model, s, &tol_none())?.r(k).v)
}

fn rk4_step<M: FluxModel + ?Sized>(model: &M, s: State, k: Family, du: f64) -> Result<State> {
    let f = |p: State| xi_at(model, p, k);
    let k1 = f(s)?;
    let k2 = f(State::new(s.u + 0.5 * du, s.v + 0.5 * du * k1))?;
    let k3 = f(State::new(s.u + 0.5 * du, s.v + 0.5 * du * k2))?;
    let k4 = f(State::new(s.u + du, s.v + du * k3))?;
    Ok(State::new(s.u + du, s.v + du / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)))
}

/// Range of `lambda_k` over an 11 x 11 lattice of the window.
fn lambda_range<M: FluxModel + ?Sized>(model: &M, window: &StateWindow, k: Family) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in window.lattice(11) {
        if let Ok(l) = crate::flux::lambda(model, s, k) {
            lo = lo.min(l);
            hi = hi.max(l);
        }
    }
    if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

/// Integrates one half of the `family` rarefaction curve through `given`.
///
/// The marching direction in `u` is the one along which `lambda_k`
/// increases (`Plus`) or decreases (`Minus`), read off the sign of
/// `grad lambda_k . r_k` at the given state. Stops on the window boundary;
/// a sign change of `grad lambda_k . r_k` aborts with the curve traced so
/// far attached to the error.
pub fn integrate_rarefaction<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    family: Family,
    direction: BranchSign,
    window: &StateWindow,
    opts: &CurveOptions,
) -> Result<RarefactionCurve> {
    if !window.contains(given) {
        return Err(Error::Invalid(format!("given state ({}, {}) is outside the window", given.u, given.v)));
    }
    let h_fd = window.diameter() * 1e-5;
    let first = node_at(model, given, family, 0.0, h_fd)?;
    let gnl_sign = first.dlambda.signum();
    if first.dlambda.abs() <= opts.tolerances.gnl {
        return Err(Error::GnlBreach {
            at: given,
            partial: Box::new(RarefactionCurve {
                given,
                family,
                half: direction.into(),
                points: vec![given],
                slopes: vec![first.slope],
                lambda: vec![first.lambda],
                dlambda: vec![first.dlambda],
                gnl_sign,
            }),
        });
    }
    let du_sign = direction.sign() * gnl_sign;
    let dlam_max = opts.dlambda_frac * lambda_range(model, window, family);
    let du_max = window.width() / 100.0;
    let mut curve = RarefactionCurve {
        given,
        family,
        half: direction.into(),
        points: vec![],
        slopes: vec![],
        lambda: vec![],
        dlambda: vec![],
        gnl_sign,
    };
    curve.push(first);
    let inside = |s: State| s.is_finite() && window.contains(s) && model.contains(s);
    let mut cur = first;
    while curve.len() < opts.max_points {
        let mut du = (dlam_max / cur.dlambda.abs()).min(du_max);
        // stop exactly on a vertical window edge
        let edge = if du_sign > 0.0 { window.u_max } else { window.u_min };
        let to_edge = (edge - cur.s.u).abs();
        let mut last = false;
        if to_edge <= du {
            du = to_edge;
            last = true;
        }
        if du <= 1e-14 * (1.0 + window.width()) {
            break;
        }
        let step = |du: f64| -> Option<State> {
            let s = rk4_step(model, cur.s, family, du_sign * du).ok()?;
            inside(s).then_some(s)
        };
        let next_state = match step(du) {
            Some(s) => s,
            None => {
                // leaves through a horizontal edge or the model domain
                let (mut lo, mut hi) = (0.0, du);
                let mut best = None;
                for _ in 0..60 {
                    let m = 0.5 * (lo + hi);
                    match step(m) {
                        Some(s) => {
                            lo = m;
                            best = Some(s);
                        }
                        None => hi = m,
                    }
                }
                last = true;
                match best {
                    Some(s) if lo > 1e-14 * (1.0 + window.width()) => s,
                    _ => break,
                }
            }
        };
        let node = node_at(model, next_state, family, gnl_sign, h_fd)?;
        if node.dlambda * gnl_sign <= opts.tolerances.gnl || (node.lambda - cur.lambda) * direction.sign() <= 0.0 {
            return Err(Error::GnlBreach { at: next_state, partial: Box::new(curve) });
        }
        curve.push(node);
        cur = node;
        if last {
            break;
        }
    }
    Ok(curve)
}

/// Both halves joined into one curve sorted by `u`. A breach of genuine
/// nonlinearity in either half is reported with the joined partial curve.
pub fn full_rarefaction<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    family: Family,
    window: &StateWindow,
    opts: &CurveOptions,
) -> Result<RarefactionCurve> {
    let mut breach = None;
    let mut halves = Vec::new();
    for d in [BranchSign::Minus, BranchSign::Plus] {
        match integrate_rarefaction(model, given, family, d, window, opts) {
            Ok(c) => halves.push(c),
            Err(Error::GnlBreach { at, partial }) => {
                breach.get_or_insert(at);
                halves.push(*partial);
            }
            Err(e) => return Err(e),
        }
    }
    let plus = halves.pop().unwrap();
    let minus = halves.pop().unwrap();
    let (low, high) = if plus.len() > 1 && plus.points[1].u > given.u { (minus, plus) } else { (plus, minus) };
    let mut full = low.reversed();
    full.half = CurveHalf::Full;
    for i in 1..high.len() {
        full.points.push(high.points[i]);
        full.slopes.push(high.slopes[i]);
        full.lambda.push(high.lambda[i]);
        full.dlambda.push(high.dlambda[i]);
    }
    match breach {
        Some(at) => Err(Error::GnlBreach { at, partial: Box::new(full) }),
        None => Ok(full),
    }
}

/// `v - v_k(u; given)` using the full curve through `given`.
pub fn rarefaction_objective<M: FluxModel + ?Sized>(
    model: &M,
    s: State,
    given: State,
    family: Family,
    window: &StateWindow,
) -> Result<f64> {
    full_rarefaction(model, given, family, window, &CurveOptions::default())?.objective(s)
}

/// `d Xi_k / d v` by central differences with step `1e-6 * max(1, |v|)`.
pub fn xi_v_derivative<M: FluxModel + ?Sized>(model: &M, s: State, k: Family) -> Result<f64> {
    let h = 1e-6 * s.v.abs().max(1.0);
    let up = State::new(s.u, s.v + h);
    let dn = State::new(s.u, s.v - h);
    match (xi_at(model, up, k), xi_at(model, dn, k)) {
        (Ok(a), Ok(b)) => Ok((a - b) / (2.0 * h)),
        (Ok(a), Err(_)) => Ok((a - xi_at(model, s, k)?) / h),
        (Err(_), Ok(b)) => Ok((xi_at(model, s, k)? - b) / h),
        (Err(e), Err(_)) => Err(e),
    }
}

/// `d v_k(u) / d v_g` for the curve through `given`; see [`curve_sensitivity`].
pub fn rarefaction_sensitivity<M: FluxModel + ?Sized>(
    model: &M,
    u: f64,
    given: State,
    family: Family,
    window: &StateWindow,
) -> Result<f64> {
    let curve = full_rarefaction(model, given, family, window, &CurveOptions::default())?;
    curve_sensitivity(model, &curve, u)
}

/// `d v_k(u) / d v_g = exp(int_{u_g}^{u} dXi_k/dv du')` along the stored
/// curve, by Simpson's rule on each node interval with the midpoint taken
/// from the Hermite interpolant.
pub fn curve_sensitivity<M: FluxModel + ?Sized>(model: &M, curve: &RarefactionCurve, u: f64) -> Result<f64> {
    let ug = curve.given.u;
    let (lo, hi) = curve.u_range();
    if !(u >= lo && u <= hi) {
        return Err(Error::Range(u));
    }
    if u == ug {
        return Ok(1.0);
    }
    let q = |x: f64| -> Result<f64> { xi_v_derivative(model, State::new(x, curve.v_at(x)?), curve.family) };
    // node abscissae strictly between u_g and u, in integration order
    let mut knots: Vec<f64> = curve.points.iter().map(|p| p.u).filter(|&x| (x - ug) * (u - x) > 0.0).collect();
    knots.sort_by(|a, b| a.total_cmp(b));
    if u < ug {
        knots.reverse();
    }
    knots.insert(0, ug);
    knots.push(u);
    let mut integral = 0.0;
    let mut qa = q(knots[0])?;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let qm = q(0.5 * (a + b))?;
        let qb = q(b)?;
        integral += (b - a) / 6.0 * (qa + 4.0 * qm + qb);
        qa = qb;
    }
    Ok(integral.exp())
}
