use super::{BranchLabel, BranchSign, Role};
use crate::flux::{eigen_with, gnl_margin, lambda, Family, FluxModel, Tolerances};
use crate::state::{State, StateWindow};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// `(F(s) - F(g))(v - v_g) - (G(s) - G(g))(u - u_g)`; zero exactly on the
/// shock locus through `given`.
pub fn hugoniot_objective<M: FluxModel + ?Sized>(model: &M, s: State, given: State) -> Result<f64> {
    let (f, g) = model.flux(s)?;
    let (fg, gg) = model.flux(given)?;
    Ok((f - fg) * (s.v - given.v) - (g - gg) * (s.u - given.u))
}

/// Gradient of [`hugoniot_objective`] with respect to `s`.
pub fn hugoniot_gradient<M: FluxModel + ?Sized>(model: &M, s: State, given: State) -> Result<State> {
    let d = model.eval(s)?;
    let (fg, gg) = model.flux(given)?;
    let du = s.u - given.u;
    let dv = s.v - given.v;
    Ok(State::new(d.f_u * dv - d.g_u * du - (d.g - gg), d.f_v * dv - d.g_v * du + (d.f - fg)))
}

/// Rankine-Hugoniot speed from the component with the larger jump.
pub fn shock_speed<M: FluxModel + ?Sized>(model: &M, left: State, right: State) -> Result<f64> {
    let (fl, gl) = model.flux(left)?;
    let (fr, gr) = model.flux(right)?;
    let du = right.u - left.u;
    let dv = right.v - left.v;
    if du == 0.0 && dv == 0.0 {
        return Err(Error::DegenerateJump);
    }
    let df = fr - fl;
    let dg = gr - gl;
    // the two quotients agree exactly when the objective vanishes
    let objective = df * dv - dg * du;
    // relative test, with a floor at the continuation tolerance for jumps
    // where both flux differences nearly vanish
    let size = (df.abs() + dg.abs() + 1e-6 * model.flux_scale(left)) * (du.abs() + dv.abs());
    if objective.abs() > 1e-6 * size {
        return Err(Error::InconsistentJump { from_u: df / du, from_v: dg / dv });
    }
    Ok(if du.abs() >= dv.abs() { df / du } else { dg / dv })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockClass {
    pub label: BranchLabel,
    pub speed: f64,
    /// Some Lax inequality holds only within the margin.
    pub marginal: bool,
}

/// Slack of the 1-shock and 2-shock inequalities; each entry must be
/// positive for the inequality to hold.
fn lax_slack(lam_l: (f64, f64), lam_r: (f64, f64), s: f64) -> ([f64; 3], [f64; 3]) {
    let one = [lam_l.0 - s, s - lam_r.0, lam_r.1 - s];
    let two = [lam_l.1 - s, s - lam_r.1, s - lam_l.0];
    (one, two)
}

/// Lax classification with strict margin `tau_lax`.
///
/// With `given` as the left state an admissible 1-shock is labelled `1-`
/// and a 2-shock `2-`; with `given` as the right state they are `1+` and
/// `2+`.
pub fn classify_shock<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    cand: State,
    role: Role,
    tau_lax: f64,
) -> Result<ShockClass> {
    let (left, right) = match role {
        Role::FromLeft => (given, cand),
        Role::FromRight => (cand, given),
    };
    let speed = shock_speed(model, left, right)?;
    let lam = |s: State| -> Result<(f64, f64)> { Ok((lambda(model, s, Family::One)?, lambda(model, s, Family::Two)?)) };
    let (one, two) = lax_slack(lam(left)?, lam(right)?, speed);
    let strict = |c: &[f64; 3]| c.iter().all(|&x| x > tau_lax);
    let loose = |c: &[f64; 3]| c.iter().all(|&x| x > -tau_lax);
    let sign = match role {
        Role::FromLeft => BranchSign::Minus,
        Role::FromRight => BranchSign::Plus,
    };
    let label = if strict(&one) {
        BranchLabel::of(Family::One, sign)
    } else if strict(&two) {
        BranchLabel::of(Family::Two, sign)
    } else {
        BranchLabel::Inadmissible
    };
    let marginal = label == BranchLabel::Inadmissible && (loose(&one) || loose(&two));
    Ok(ShockClass { label, speed, marginal })
}

/// One half of the shock locus of a family through `given`.
///
/// `points[0]` is the given state itself, carrying the characteristic
/// speed; every later point carries its Rankine-Hugoniot speed and Lax
/// flags. The given state acts as the left state on `Minus` branches and
/// as the right state on `Plus` branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HugoniotBranch {
    pub given: State,
    pub family: Family,
    pub sign: BranchSign,
    pub points: Vec<State>,
    pub speeds: Vec<f64>,
    pub admissible: Vec<bool>,
    pub marginal: Vec<bool>,
    /// Largest `|H|` over the traced points.
    pub max_residual: f64,
    /// Smallest `|grad H|` over the points after the seed.
    pub min_gradient: f64,
    /// The branch returned to the given state (closed locus).
    pub closed: bool,
}

impl HugoniotBranch {
    pub fn role(&self) -> Role {
        match self.sign {
            BranchSign::Minus => Role::FromLeft,
            BranchSign::Plus => Role::FromRight,
        }
    }

    /// Number of leading points (including the given state) that are admissible.
    pub fn admissible_prefix(&self) -> usize {
        1 + self.admissible.iter().skip(1).take_while(|&&a| a).count()
    }

    /// The branch cut to its admissible prefix.
    pub fn admissible_part(&self) -> HugoniotBranch {
        let n = self.admissible_prefix();
        let mut b = self.clone();
        b.points.truncate(n);
        b.speeds.truncate(n);
        b.admissible.truncate(n);
        b.marginal.truncate(n);
        b
    }
}

struct Tracer<'a, M: ?Sized> {
    model: &'a M,
    given: State,
    window: &'a StateWindow,
    tol: f64,
}

enum Correct {
    Converged(State, usize),
    Outside,
    Failed,
}

impl<M: FluxModel + ?Sized> Tracer<'_, M> {
    fn inside(&self, s: State) -> bool {
        s.is_finite() && self.window.contains(s) && self.model.contains(s)
    }

    /// Newton for `H = 0` along the fixed direction `n` from `p`.
    fn correct(&self, p: State, n: State) -> Correct {
        let mut q = p;
        for it in 0..25 {
            if !self.inside(q) {
                return Correct::Outside;
            }
            let (h, grad) = match (hugoniot_objective(self.model, q, self.given), hugoniot_gradient(self.model, q, self.given)) {
                (Ok(h), Ok(g)) => (h, g),
                _ => return Correct::Outside,
            };
            if h.abs() <= self.tol {
                return Correct::Converged(q, it);
            }
            let slope = grad.dot(n);
            if slope == 0.0 || !slope.is_finite() {
                return Correct::Failed;
            }
            q = q - (h / slope) * n;
        }
        match hugoniot_objective(self.model, q, self.given) {
            Ok(h) if h.abs() <= self.tol && self.inside(q) => Correct::Converged(q, 25),
            _ => Correct::Failed,
        }
    }
}

/// Traces the two halves of the `family` locus through `given`.
pub fn trace_hugoniot_family<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    family: Family,
    window: &StateWindow,
    step: f64,
    tau_lax: f64,
    max_points: usize,
) -> Result<[HugoniotBranch; 2]> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!("continuation step must be positive, got {step}")));
    }
    if !window.contains(given) {
        return Err(Error::Invalid(format!("given state ({}, {}) is outside the window", given.u, given.v)));
    }
    let tol_set = Tolerances { discriminant: 0.0, graph: 0.0, gnl: 0.0 };
    let e = eigen_with(model, given, &tol_set)?;
    let r = e.r(family).normalized();
    let gnl = gnl_margin(model, given, family, window.diameter() * 1e-5)?;
    let scale = model.flux_scale(given) * (1.0 + window.diameter());
    let tracer = Tracer { model, given, window, tol: 1e-13 * scale };
    let mut out = Vec::with_capacity(2);
    for dir in [1.0, -1.0] {
        let sign = if dir * gnl < 0.0 { BranchSign::Minus } else { BranchSign::Plus };
        let pts = trace_half(&tracer, dir * r, step, max_points)?;
        out.push(annotate(model, given, family, sign, pts.0, pts.1, tau_lax, scale)?);
    }
    out.sort_by_key(|b| b.sign == BranchSign::Plus);
    let plus = out.pop().unwrap();
    let minus = out.pop().unwrap();
    Ok([minus, plus])
}

/// All four half-branches through `given`: family 1 minus/plus, then family 2.
pub fn trace_hugoniot<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    window: &StateWindow,
    step: f64,
) -> Result<Vec<HugoniotBranch>> {
    let mut all = Vec::with_capacity(4);
    for k in [Family::One, Family::Two] {
        all.extend(trace_hugoniot_family(model, given, k, window, step, 1e-10, 200_000)?);
    }
    Ok(all)
}

fn trace_half<M: FluxModel + ?Sized>(t: &Tracer<'_, M>, dir: State, step: f64, max_points: usize) -> Result<(Vec<State>, bool)> {
    let given = t.given;
    let mut pts = vec![given];
    // seed along the eigenvector, then polish across it
    let mut seed_len = 10.0 * step;
    let normal = dir.perp();
    let first = loop {
        if seed_len < 1e-6 * step {
            return Ok((pts, false));
        }
        let p = given + seed_len * dir;
        if !t.inside(p) {
            seed_len *= 0.5;
            continue;
        }
        match t.correct(p, normal) {
            Correct::Converged(q, _) if q.dist(p) < 0.5 * seed_len => break q,
            _ => seed_len *= 0.5,
        }
    };
    pts.push(first);
    let mut prev_dir = (first - given).normalized();
    let mut h = step;
    let mut easy = 0;
    let mut closed = false;
    let min_h = 1e-9 * step;
    while pts.len() < max_points {
        let p = *pts.last().unwrap();
        let grad = hugoniot_gradient(t.model, p, given)?;
        let gnorm = grad.norm();
        if gnorm < 1e-10 {
            return Err(Error::RegularManifold { state: p, norm: gnorm });
        }
        let mut tangent = grad.perp().normalized();
        if tangent.dot(prev_dir) < 0.0 {
            tangent = -1.0 * tangent;
        }
        let attempt = |h: f64| -> Correct {
            let pred = p + h * tangent;
            if !t.inside(pred) {
                return Correct::Outside;
            }
            let n = match hugoniot_gradient(t.model, pred, given) {
                Ok(g) if g.norm() > 0.0 => g.normalized(),
                Ok(_) => return Correct::Failed,
                Err(_) => return Correct::Outside,
            };
            match t.correct(pred, n) {
                Correct::Converged(q, it) => {
                    let d = q - p;
                    if d.norm() > 1.5 * h || d.norm() < 0.5 * h || d.dot(tangent) <= 0.0 {
                        Correct::Failed
                    } else {
                        Correct::Converged(q, it)
                    }
                }
                other => other,
            }
        };
        match attempt(h) {
            Correct::Converged(q, it) => {
                prev_dir = (q - p).normalized();
                pts.push(q);
                if it <= 3 {
                    easy += 1;
                    if easy >= 4 {
                        h = (2.0 * h).min(step);
                        easy = 0;
                    }
                } else {
                    easy = 0;
                }
                if pts.len() > 12 && q.dist(given) < 1.5 * step {
                    closed = true;
                    break;
                }
            }
            Correct::Outside => {
                // land on the boundary
                let (mut lo, mut hi) = (0.0, h);
                let mut best: Option<State> = None;
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    match attempt_relaxed(t, p, tangent, mid) {
                        Some(q) => {
                            lo = mid;
                            best = Some(q);
                        }
                        None => hi = mid,
                    }
                }
                if let Some(q) = best {
                    if q.dist(p) > 1e-12 * step {
                        pts.push(q);
                    }
                }
                break;
            }
            Correct::Failed => {
                h *= 0.5;
                easy = 0;
                if h < min_h {
                    return Err(Error::Continuation(format!(
                        "corrector failed at ({}, {}) with step {h:e}",
                        p.u, p.v
                    )));
                }
            }
        }
    }
    Ok((pts, closed))
}

/// Predictor-corrector without the step-length acceptance test, used
/// while bisecting onto the boundary.
fn attempt_relaxed<M: FluxModel + ?Sized>(t: &Tracer<'_, M>, p: State, tangent: State, h: f64) -> Option<State> {
    let pred = p + h * tangent;
    if !t.inside(pred) {
        return None;
    }
    let n = hugoniot_gradient(t.model, pred, t.given).ok()?;
    if n.norm() == 0.0 {
        return None;
    }
    match t.correct(pred, n.normalized()) {
        Correct::Converged(q, _) if (q - p).dot(tangent) > 0.0 && q.dist(p) < 2.0 * h + 1e-15 => Some(q),
        _ => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn annotate<M: FluxModel + ?Sized>(
    model: &M,
    given: State,
    family: Family,
    sign: BranchSign,
    points: Vec<State>,
    closed: bool,
    tau_lax: f64,
    _scale: f64,
) -> Result<HugoniotBranch> {
    let role = match sign {
        BranchSign::Minus => Role::FromLeft,
        BranchSign::Plus => Role::FromRight,
    };
    let want = BranchLabel::of(family, sign);
    let mut speeds = vec![lambda(model, given, family)?];
    let mut admissible = vec![true];
    let mut marginal = vec![true];
    let mut max_residual = 0.0f64;
    let mut min_gradient = f64::INFINITY;
    for &p in &points[1..] {
        max_residual = max_residual.max(hugoniot_objective(model, p, given)?.abs());
        min_gradient = min_gradient.min(hugoniot_gradient(model, p, given)?.norm());
        // a point where the jump quotients disagree carries no usable speed
        match classify_shock(model, given, p, role, tau_lax) {
            Ok(c) => {
                speeds.push(c.speed);
                admissible.push(c.label == want);
                marginal.push(c.marginal);
            }
            Err(Error::InconsistentJump { .. }) => {
                speeds.push(f64::NAN);
                admissible.push(false);
                marginal.push(false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(HugoniotBranch { given, family, sign, points, speeds, admissible, marginal, max_residual, min_gradient, closed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{PSystem, Pressure};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inv_v() -> PSystem {
        PSystem::new(Pressure::Power { coef: 1.0, exponent: -1.0 })
    }

    fn gamma2() -> PSystem {
        PSystem::new(Pressure::Power { coef: 1.0, exponent: -2.0 })
    }

    #[test]
    fn objective_examples() {
        let m = inv_v();
        let g = State::new(0.0, 1.0);
        assert_eq!(hugoniot_objective(&m, g, g).unwrap(), 0.0);
        assert!((hugoniot_objective(&m, State::new(1.0, 2.0), g).unwrap() - 0.5).abs() < 1e-15);
        let grad = hugoniot_gradient(&m, State::new(1.0, 2.0), g).unwrap();
        assert!((grad.u - 2.0).abs() < 1e-15 && (grad.v + 0.75).abs() < 1e-15);
        assert_eq!(hugoniot_gradient(&m, g, g).unwrap(), State::new(0.0, 0.0));
    }

    #[test]
    fn objective_symmetric() {
        let m = gamma2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = State::new(rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0));
            let b = State::new(rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0));
            assert_eq!(hugoniot_objective(&m, a, b).unwrap(), hugoniot_objective(&m, b, a).unwrap());
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = gamma2();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let g = State::new(rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0));
            let s = State::new(rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0));
            let h = 1e-6;
            let grad = hugoniot_gradient(&m, s, g).unwrap();
            let fd_u = (hugoniot_objective(&m, s + State::new(h, 0.0), g).unwrap()
                - hugoniot_objective(&m, s - State::new(h, 0.0), g).unwrap())
                / (2.0 * h);
            let fd_v = (hugoniot_objective(&m, s + State::new(0.0, h), g).unwrap()
                - hugoniot_objective(&m, s - State::new(0.0, h), g).unwrap())
                / (2.0 * h);
            let scale = grad.norm().max(1.0);
            assert!((fd_u - grad.u).abs() <= 1e-6 * scale && (fd_v - grad.v).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn shock_speed_examples() {
        let m = inv_v();
        let l = State::new(0.0, 1.0);
        // on the locus: u - u_l = +-sqrt(-(p_r - p_l)(v_r - v_l)) = +-sqrt(1/2)
        let r = State::new(0.5f64.sqrt(), 2.0);
        let s = shock_speed(&m, l, r).unwrap();
        assert!((s.abs() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(shock_speed(&m, l, l), Err(Error::DegenerateJump)));
        assert!(matches!(shock_speed(&m, l, State::new(1.0, 3.0)), Err(Error::InconsistentJump { .. })));
    }

    /// Point on the p-system locus through `g` at volume `v`, on the side `su` of `u_g`.
    fn locus_point(m: &PSystem, g: State, v: f64, su: f64) -> State {
        let p = |x: f64| m.pressure.eval(x).unwrap().0;
        State::new(g.u + su * (-(p(v) - p(g.v)) * (v - g.v)).sqrt(), v)
    }

    #[test]
    fn classification_examples() {
        let m = gamma2();
        let g = State::new(0.0, 1.0);
        // 1-shock from the left: lower volume, lower velocity
        let c = locus_point(&m, g, 0.8, -1.0);
        let k = classify_shock(&m, g, c, Role::FromLeft, 1e-10).unwrap();
        assert_eq!(k.label, BranchLabel::OneMinus);
        assert!(k.speed < 0.0);
        // mirror in u with the given state on the right
        let mirror = State::new(-c.u, c.v);
        let k2 = classify_shock(&m, g, mirror, Role::FromRight, 1e-10).unwrap();
        assert_eq!(k2.label, BranchLabel::TwoPlus);
        assert!((k2.speed + k.speed).abs() < 1e-14);
        // expansion shock: higher volume on the 1-branch
        let bad = locus_point(&m, g, 1.2, 1.0);
        assert_eq!(classify_shock(&m, g, bad, Role::FromLeft, 1e-10).unwrap().label, BranchLabel::Inadmissible);
    }

    #[test]
    fn traced_points_on_closed_form_locus() {
        let m = gamma2();
        let w = StateWindow::new(-2.0, 2.0, 0.4, 3.0).unwrap();
        let g = State::new(0.1, 1.1);
        let branches = trace_hugoniot(&m, g, &w, 0.01).unwrap();
        assert_eq!(branches.len(), 4);
        for b in &branches {
            assert!(b.points.len() > 20);
            for &p in &b.points {
                assert!(w.contains(p));
                assert!(m.hugoniot_closed_form(p, g).unwrap().abs() <= 1e-9);
            }
            assert!(b.min_gradient > 0.0);
        }
        // geometry of the admissible halves
        let h1m = &branches[0];
        assert_eq!((h1m.family, h1m.sign), (Family::One, BranchSign::Minus));
        assert!(h1m.points[5].v < g.v && h1m.points[5].u < g.u);
        assert!(h1m.admissible[1..].iter().all(|&a| a));
        let h2p = &branches[3];
        assert_eq!((h2p.family, h2p.sign), (Family::Two, BranchSign::Plus));
        assert!(h2p.points[5].v < g.v && h2p.points[5].u > g.u);
        assert!(h2p.admissible[1..].iter().all(|&a| a));
        // the plus half read with the given state on the left is an expansion shock
        let h1p = &branches[1];
        assert!(h1p.admissible[1..].iter().all(|&a| a));
        for &p in &h1p.points[1..] {
            let c = classify_shock(&m, g, p, Role::FromLeft, 1e-10).unwrap();
            assert_eq!(c.label, BranchLabel::Inadmissible);
        }
    }

    #[test]
    fn locus_reflection_symmetry() {
        let m = gamma2();
        let w = StateWindow::new(-2.0, 2.2, 0.4, 3.0).unwrap();
        let g = State::new(0.1, 1.1);
        for b in trace_hugoniot(&m, g, &w, 0.02).unwrap() {
            for &p in &b.points {
                let mirrored = State::new(2.0 * g.u - p.u, p.v);
                assert!(m.hugoniot_closed_form(mirrored, g).unwrap().abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn truncated_at_window_corner() {
        let m = gamma2();
        let w = StateWindow::new(-1.0, 1.0, 0.5, 2.0).unwrap();
        let g = State::new(0.99, 0.51);
        let branches = trace_hugoniot(&m, g, &w, 0.01).unwrap();
        for b in &branches {
            assert!(b.points.iter().all(|&p| w.contains(p)));
        }
    }
}
