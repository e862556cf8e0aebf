//! Gravity-driven particle-laden thin film: the equilibrium profile across
//! the film, the depth-integrated fluxes `f(phi0)`, `g(phi0)` and the
//! conserved-variable flux model in `(h, n = h phi0)`.

use crate::approx::{fit_piecewise_poly, FitAnchors, FitConfig, FitDiagnostics, FluxClosure, GhostRule, PiecewisePolyFlux, SamplePlan, SplineFlux};
use crate::flux::{FluxDerivs, FluxModel};
use crate::numerics::{brent, hermite, simpson};
use crate::state::{State, StateWindow};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Constants of the diffusive-flux closure. None of them has a default:
/// `rho_s` and `b1` in particular must be supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlfParams {
    pub mu_l: f64,
    pub rho_s: f64,
    pub b1: f64,
    pub b2: f64,
    pub phi_c: f64,
    pub phi_m: f64,
    /// Incline angle in degrees; informational only.
    #[serde(default)]
    pub alpha_deg: Option<f64>,
}

impl PlfParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.mu_l, self.rho_s, self.b1, self.b2, self.phi_c, self.phi_m];
        if all.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Invalid(format!("thin-film constants must be positive and finite: {self:?}")));
        }
        if self.phi_c >= self.phi_m {
            return Err(Error::Invalid(format!("need phi_c < phi_m, got {} >= {}", self.phi_c, self.phi_m)));
        }
        Ok(())
    }

    /// Numerator factor of the particle-fraction equation; it vanishes at
    /// the settled/ridged transition.
    pub fn transition_poly(&self, phi: f64) -> f64 {
        -self.b2 + (self.b2 + 1.0) * phi + self.rho_s * phi * phi
    }

    fn denominator(&self, phi: f64) -> f64 {
        self.phi_m + (self.b1 - 1.0) * phi
    }

    /// Positive root of [`PlfParams::transition_poly`]; equals `phi_c` when
    /// the constants are mutually consistent.
    pub fn critical_fraction(&self) -> f64 {
        let b = self.b2 + 1.0;
        let disc = b * b + 4.0 * self.rho_s * self.b2;
        2.0 * self.b2 / (b + disc.sqrt())
    }

    /// Closed-form flux at the transition, where the profile is uniform.
    pub fn f_at_phi_c(&self) -> f64 {
        self.mu_l / 3.0 * (1.0 + self.rho_s * self.phi_c) * (1.0 - self.phi_c / self.phi_m).powi(2)
    }

    pub fn g_at_phi_c(&self) -> f64 {
        self.phi_c * self.f_at_phi_c()
    }

    pub fn f_at_zero(&self) -> f64 {
        self.mu_l / 3.0
    }

    pub fn f_anchors(&self) -> FitAnchors {
        FitAnchors {
            phi_c: self.phi_c,
            phi_m: self.phi_m,
            at_zero: self.f_at_zero(),
            at_phi_c: self.f_at_phi_c(),
            at_phi_m: 0.0,
            slope_at_phi_m: 0.0,
        }
    }

    pub fn g_anchors(&self) -> FitAnchors {
        FitAnchors { at_zero: 0.0, at_phi_c: self.g_at_phi_c(), ..self.f_anchors() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileOptions {
    /// Number of uniform nodes on `[0, 1]` in the returned profile.
    pub n_nodes: usize,
    /// Target for `|sigma(1)|`.
    pub shoot_tol: f64,
    /// Local error tolerance of the integrator.
    pub step_tol: f64,
    /// Largest accepted change of `phi` per step, relative to `phi_m`.
    pub max_dphi: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { n_nodes: 401, shoot_tol: 1e-10, step_tol: 1e-12, max_dphi: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlfProfile {
    pub phi0: f64,
    /// Particle fraction at the substrate found by shooting.
    pub phi_base: f64,
    pub s_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub sigma: Vec<f64>,
    pub u_vel: Vec<f64>,
    pub sigma_at_one: f64,
    /// `int_0^1 phi ds`, accumulated along the trajectory.
    pub mean_phi: f64,
    /// `int_0^1 u ds` and `int_0^1 u phi ds`, accumulated along the trajectory.
    pub f: f64,
    pub g: f64,
    pub shooting_iterations: usize,
    pub steps: usize,
}

// state layout along the trajectory
const PHI: usize = 0;
const S: usize = 1;
const U: usize = 2;
const FI: usize = 3;
const GI: usize = 4;
const MI: usize = 5;
type Y = [f64; 6];

/// Right-hand side in `eta = -ln sigma`, which removes the singularity of
/// the particle-fraction equation at the free surface.
fn rhs(p: &PlfParams, eta: f64, y: &Y) -> Y {
    let sigma = (-eta).exp();
    let phi = y[PHI];
    let phic = phi.clamp(0.0, p.phi_m);
    let w = 1.0 + p.rho_s * phic;
    let ds = sigma / w;
    let dphi = if phi <= 0.0 || phi >= p.phi_m {
        0.0
    } else {
        p.transition_poly(phi) * (p.phi_m - phi) / (p.denominator(phi) * w)
    };
    let mob = (1.0 - phic / p.phi_m).powi(2);
    let du = p.mu_l * sigma * mob * ds;
    [dphi, ds, du, y[U] * ds, y[U] * phic * ds, phic * ds]
}

fn rk4(p: &PlfParams, eta: f64, y: &Y, h: f64) -> Y {
    let add = |a: &Y, k: &Y, c: f64| -> Y { std::array::from_fn(|i| a[i] + c * k[i]) };
    let k1 = rhs(p, eta, y);
    let k2 = rhs(p, eta + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = rhs(p, eta + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = rhs(p, eta + h, &add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

struct Trajectory {
    eta: Vec<f64>,
    y: Vec<Y>,
    sigma_at_one: f64,
    steps: usize,
}

const SIGMA_FLOOR: f64 = 1e-14;
const STEP_FLOOR: f64 = 1e-12;

/// Integrates from the substrate with `phi(0) = phi_base` until `s = 1` or
/// the stress vanishes. When the stress vanishes first, at `s_end < 1`, the
/// returned `sigma(1)` is the linear continuation `-(1 - s_end)(1 + rho_s phi)`.
fn integrate(p: &PlfParams, phi0: f64, phi_base: f64, opt: &ProfileOptions, keep: bool) -> Result<Trajectory> {
    let sigma0 = 1.0 + p.rho_s * phi0;
    let mut eta = -sigma0.ln();
    let eta_end = -SIGMA_FLOOR.ln();
    let mut y: Y = [phi_base.clamp(0.0, p.phi_m), 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut h: f64 = 1e-3;
    let mut traj = Trajectory { eta: vec![], y: vec![], sigma_at_one: f64::NAN, steps: 0 };
    if keep {
        traj.eta.push(eta);
        traj.y.push(y);
    }
    let dphi_max = opt.max_dphi * p.phi_m;
    loop {
        if eta >= eta_end {
            let w = 1.0 + p.rho_s * y[PHI].clamp(0.0, p.phi_m);
            traj.sigma_at_one = -(1.0 - y[S]) * w;
            return Ok(traj);
        }
        h = h.min(eta_end - eta);
        if h < STEP_FLOOR {
            return Err(Error::Stiffness(y[S]));
        }
        let full = rk4(p, eta, &y, h);
        let half = rk4(p, eta, &y, 0.5 * h);
        let two = rk4(p, eta + 0.5 * h, &half, 0.5 * h);
        let err = (0..6).map(|i| (two[i] - full[i]).abs()).fold(0.0, f64::max) / 15.0;
        if err > opt.step_tol || (two[PHI] - y[PHI]).abs() > dphi_max {
            h *= if err > opt.step_tol { (0.9 * (opt.step_tol / err).powf(0.2)).clamp(0.1, 0.5) } else { 0.5 };
            continue;
        }
        let mut next = two;
        let mut step = h;
        let mut done = false;
        if next[S] >= 1.0 || next[PHI] < 0.0 {
            // land exactly on the first event inside the step
            let hit = |c: &Y| c[S] >= 1.0 || c[PHI] < 0.0;
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if hit(&rk4(p, eta, &y, mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            step = hi;
            next = rk4(p, eta, &y, step);
            if next[S] >= 1.0 {
                next[S] = 1.0;
                done = true;
            }
            if next[PHI] < 0.0 || next[PHI].abs() < 1e-13 {
                next[PHI] = 0.0;
            }
        }
        next[PHI] = next[PHI].clamp(0.0, p.phi_m);
        eta += step;
        y = next;
        traj.steps += 1;
        if keep {
            traj.eta.push(eta);
            traj.y.push(y);
        }
        if done {
            traj.sigma_at_one = (-eta).exp();
            return Ok(traj);
        }
        let grow = if err > 0.0 { (0.9 * (opt.step_tol / err).powf(0.2)).clamp(1.0, 4.0) } else { 4.0 };
        h = (h * grow).min(0.5);
    }
}

/// Solves the across-film equilibrium for a depth-averaged fraction `phi0`
/// by shooting on the substrate fraction.
pub fn plf_profile(params: &PlfParams, phi0: f64, opt: &ProfileOptions) -> Result<PlfProfile> {
    params.validate()?;
    if !(phi0 > 0.0 && phi0 < params.phi_m) {
        return Err(Error::Invalid(format!("phi0 = {phi0} is not in (0, phi_m)")));
    }
    if opt.n_nodes < 3 {
        return Err(Error::Invalid("profile needs at least 3 nodes".into()));
    }
    let mut failure: Option<Error> = None;
    let mut count = 0usize;
    let mut target = |b: f64| -> f64 {
        count += 1;
        match integrate(params, phi0, b, opt, false) {
            Ok(t) => t.sigma_at_one,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let lo = 0.0;
    let hi = params.phi_m;
    let f_lo = target(lo);
    let f_hi = target(hi);
    if !(f_lo * f_hi < 0.0) {
        return Err(failure
            .unwrap_or_else(|| Error::Shooting(format!("sigma(1) does not change sign: {f_lo:e}, {f_hi:e}"))));
    }
    let (root, resid, _) = brent(&mut target, lo, hi, f_lo, f_hi, 1e-16, opt.shoot_tol, 200);
    if let Some(e) = failure {
        return Err(e);
    }
    if !(resid.abs() <= opt.shoot_tol.max(1e-8)) {
        return Err(Error::Shooting(format!("residual {resid:e} after bracketing collapsed at phi(0) = {root}")));
    }
    let traj = integrate(params, phi0, root, opt, true)?;
    Ok(sample_profile(params, phi0, root, &traj, opt.n_nodes, count))
}

fn sample_profile(p: &PlfParams, phi0: f64, root: f64, traj: &Trajectory, n: usize, iters: usize) -> PlfProfile {
    let last = traj.y[traj.y.len() - 1];
    let slopes: Vec<Y> = traj.eta.iter().zip(&traj.y).map(|(e, y)| rhs(p, *e, y)).collect();
    let mut s_grid = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut u_vel = Vec::with_capacity(n);
    let mut k = 0usize;
    for j in 0..n {
        let s = j as f64 / (n - 1) as f64;
        s_grid.push(s);
        if s >= last[S] {
            phi.push(last[PHI]);
            sigma.push(((-traj.eta[traj.eta.len() - 1]).exp()).max(0.0) * if j == n - 1 { 0.0 } else { 1.0 });
            u_vel.push(last[U]);
            continue;
        }
        while k + 1 < traj.y.len() && traj.y[k + 1][S] < s {
            k += 1;
        }
        let (e0, e1) = (traj.eta[k], traj.eta[k + 1]);
        let (y0, y1) = (&traj.y[k], &traj.y[k + 1]);
        let (d0, d1) = (&slopes[k], &slopes[k + 1]);
        let interp = |i: usize, e: f64| hermite(e0, e1, y0[i], y1[i], d0[i], d1[i], e);
        // s is increasing in eta: invert by bisection on the Hermite arc
        let (mut a, mut b) = (e0, e1);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if interp(S, m) < s {
                a = m;
            } else {
                b = m;
            }
        }
        let e = 0.5 * (a + b);
        phi.push(interp(PHI, e).clamp(0.0, p.phi_m));
        sigma.push((-e).exp());
        u_vel.push(interp(U, e));
    }
    sigma[0] = 1.0 + p.rho_s * phi0;
    phi[0] = traj.y[0][PHI];
    u_vel[0] = traj.y[0][U];
    let tail = 1.0 - last[S];
    PlfProfile {
        phi0,
        phi_base: root,
        s_grid,
        phi,
        sigma,
        u_vel,
        sigma_at_one: traj.sigma_at_one,
        mean_phi: last[MI] + tail * last[PHI],
        f: last[FI] + tail * last[U],
        g: last[GI] + tail * last[U] * last[PHI],
        shooting_iterations: iters,
        steps: traj.steps,
    }
}

/// `(f, g)` for one depth-averaged fraction.
pub fn plf_fg(params: &PlfParams, phi0: f64, opt: &ProfileOptions) -> Result<(f64, f64)> {
    let prof = plf_profile(params, phi0, opt)?;
    Ok((prof.f, prof.g))
}

/// `(f, g)` by composite Simpson over the profile nodes; a cross-check of
/// the values accumulated during integration.
pub fn profile_simpson(prof: &PlfProfile) -> (f64, f64) {
    let h = 1.0 / (prof.s_grid.len() - 1) as f64;
    let ug: Vec<f64> = prof.u_vel.iter().zip(&prof.phi).map(|(u, p)| u * p).collect();
    (simpson(&prof.u_vel, h), simpson(&ug, h))
}

/// Fluxes on a uniform grid of `[0, phi_m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlfFluxTable {
    pub phi0: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// Grid indices whose solve failed and were filled by interpolation.
    pub flagged: Vec<usize>,
}

impl PlfFluxTable {
    pub fn phi_m(&self) -> f64 {
        self.phi0[self.phi0.len() - 1]
    }
}

/// Solves the profile at every interior node of an `n_cells`-cell grid in
/// parallel; the end nodes take the analytic limits.
pub fn build_flux_table(params: &PlfParams, n_cells: usize, opt: &ProfileOptions) -> Result<PlfFluxTable> {
    params.validate()?;
    if n_cells < 4 {
        return Err(Error::Invalid(format!("flux table needs at least 4 cells, got {n_cells}")));
    }
    let dphi = params.phi_m / n_cells as f64;
    let phi0: Vec<f64> =
        (0..=n_cells).map(|i| if i == n_cells { params.phi_m } else { i as f64 * dphi }).collect();
    let solved: Vec<Option<(f64, f64)>> = phi0[1..n_cells].par_iter().map(|&x| plf_fg(params, x, opt).ok()).collect();
    let mut f = vec![params.f_at_zero()];
    let mut g = vec![0.0];
    let mut flagged = Vec::new();
    for (i, s) in solved.iter().enumerate() {
        let (a, b) = s.unwrap_or((f64::NAN, f64::NAN));
        if s.is_none() {
            flagged.push(i + 1);
        }
        f.push(a);
        g.push(b);
    }
    f.push(0.0);
    g.push(0.0);
    for &i in &flagged {
        let l = (0..i).rev().find(|&j| f[j].is_finite()).unwrap_or(0);
        let r = (i + 1..=n_cells).find(|&j| f[j].is_finite()).unwrap_or(n_cells);
        let w = (i - l) as f64 / (r - l) as f64;
        f[i] = f[l] + w * (f[r] - f[l]);
        g[i] = g[l] + w * (g[r] - g[l]);
    }
    Ok(PlfFluxTable { phi0, f, g, flagged })
}

impl PlfFluxTable {
    /// Spline closures for `f` and `g` over the table grid.
    pub fn splines(&self, rule: GhostRule) -> Result<(SplineFlux, SplineFlux)> {
        let hi = self.phi_m();
        Ok((SplineFlux::new(0.0, hi, self.f.clone(), rule)?, SplineFlux::new(0.0, hi, self.g.clone(), rule)?))
    }
}

/// Piecewise-polynomial fits of both fluxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlfFit {
    pub f: PiecewisePolyFlux,
    pub g: PiecewisePolyFlux,
    pub f_diagnostics: FitDiagnostics,
    pub g_diagnostics: FitDiagnostics,
}

/// Fits `f` and `g` to the table, read through its spline at the plan
/// points, with slopes from the plan's centred differences.
pub fn fit_flux_table(table: &PlfFluxTable, params: &PlfParams, plan: &SamplePlan, config: &FitConfig) -> Result<PlfFit> {
    params.validate()?;
    let (fs, gs) = table.splines(GhostRule::default())?;
    let fv: Vec<f64> = plan.points.iter().map(|&x| FluxClosure::eval(&fs, x).0).collect();
    let gv: Vec<f64> = plan.points.iter().map(|&x| FluxClosure::eval(&gs, x).0).collect();
    let (f, f_diagnostics) = fit_piecewise_poly(&plan.samples(&fv), &plan.derivative_data(&fv), config, &params.f_anchors())?;
    let (g, g_diagnostics) = fit_piecewise_poly(&plan.samples(&gv), &plan.derivative_data(&gv), config, &params.g_anchors())?;
    Ok(PlfFit { f, g, f_diagnostics, g_diagnostics })
}

/// Conserved-variable thin-film flux `F = h^3 f(n/h)`, `G = h^3 g(n/h)`.
#[derive(Debug, Clone)]
pub struct PlfModel<Fc, Gc> {
    pub f: Fc,
    pub g: Gc,
    pub phi_m: f64,
    /// Optional further restriction of the domain.
    pub window: Option<StateWindow>,
}

impl<Fc: FluxClosure, Gc: FluxClosure> PlfModel<Fc, Gc> {
    pub fn new(f: Fc, g: Gc) -> Self {
        let phi_m = f.domain().1.min(g.domain().1);
        PlfModel { f, g, phi_m, window: None }
    }

    pub fn with_window(mut self, w: StateWindow) -> Self {
        self.window = Some(w);
        self
    }
}

/// Flux model from the two scalar closures on `[0, phi_m]`.
pub fn plf_model<Fc: FluxClosure, Gc: FluxClosure>(f: Fc, g: Gc) -> PlfModel<Fc, Gc> {
    PlfModel::new(f, g)
}

/// Chain rule for `h^3 c(n/h)` from `(c, c', c'')`.
fn homogeneous(h: f64, phi: f64, c: (f64, f64, f64)) -> [f64; 6] {
    let (v, d1, d2) = c;
    let h2 = h * h;
    [
        h2 * h * v,
        h2 * (3.0 * v - phi * d1),
        h2 * d1,
        h * (6.0 * v - 4.0 * phi * d1 + phi * phi * d2),
        h * (2.0 * d1 - phi * d2),
        h * d2,
    ]
}

impl<Fc: FluxClosure, Gc: FluxClosure> FluxModel for PlfModel<Fc, Gc> {
    fn contains(&self, s: State) -> bool {
        let inside = s.u > 0.0 && s.v > 0.0 && s.v < self.phi_m * s.u;
        inside && self.window.map_or(true, |w| w.contains(s))
    }

    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        let phi = s.v / s.u;
        let a = homogeneous(s.u, phi, self.f.eval(phi));
        let b = homogeneous(s.u, phi, self.g.eval(phi));
        FluxDerivs {
            f: a[0],
            f_u: a[1],
            f_v: a[2],
            f_uu: a[3],
            f_uv: a[4],
            f_vv: a[5],
            g: b[0],
            g_u: b[1],
            g_v: b[2],
            g_uu: b[3],
            g_uv: b[4],
            g_vv: b[5],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::FnClosure;
    use crate::flux::{eigen, FiniteDifferenceModel};

    pub(crate) fn params() -> PlfParams {
        PlfParams { mu_l: 0.971, rho_s: 1.549, b1: 3.0244, b2: 1.80036, phi_c: 0.50297, phi_m: 0.61, alpha_deg: Some(25.0) }
    }

    #[test]
    fn sourced_constants_place_the_transition_at_phi_c() {
        let p = params();
        assert!((p.critical_fraction() - p.phi_c).abs() < 1e-5, "{}", p.critical_fraction());
    }

    #[test]
    fn profile_boundary_rows_and_mean() {
        let p = params();
        for phi0 in [0.05, 0.2, 0.4, 0.485, 0.55, 0.6] {
            let prof = plf_profile(&p, phi0, &ProfileOptions::default()).unwrap();
            assert_eq!(prof.sigma[0], 1.0 + p.rho_s * phi0);
            assert!(prof.sigma_at_one.abs() <= 1e-8, "phi0 {phi0}: {:e}", prof.sigma_at_one);
            assert!((prof.mean_phi - phi0).abs() <= 1e-6, "phi0 {phi0}: mean {}", prof.mean_phi);
            assert_eq!(prof.u_vel[0], 0.0);
            // u is nondecreasing while the stress is positive
            for w in prof.u_vel.windows(2) {
                assert!(w[1] >= w[0] - 1e-14);
            }
            assert!(prof.phi.iter().all(|&x| (0.0..=p.phi_m).contains(&x)));
            assert!(prof.sigma.windows(2).all(|w| w[1] < w[0]));
            assert!(prof.g >= 0.0 && prof.g <= p.phi_m * prof.f);
        }
    }

    #[test]
    fn uniform_profile_at_transition() {
        let p = params();
        let crit = p.critical_fraction();
        let prof = plf_profile(&p, crit, &ProfileOptions::default()).unwrap();
        let f_exact = p.mu_l / 3.0 * (1.0 + p.rho_s * crit) * (1.0 - crit / p.phi_m).powi(2);
        assert!((prof.f - f_exact).abs() < 1e-9, "{} vs {f_exact}", prof.f);
        assert!((prof.g - crit * f_exact).abs() < 1e-9);
    }

    #[test]
    fn simpson_agrees_with_accumulated_quadrature() {
        let p = params();
        let prof = plf_profile(&p, 0.3, &ProfileOptions::default()).unwrap();
        let (fs, gs) = profile_simpson(&prof);
        assert!((fs - prof.f).abs() < 1e-6 && (gs - prof.g).abs() < 1e-6, "{fs} {} {gs} {}", prof.f, prof.g);
    }

    #[test]
    fn limits_at_the_ends() {
        let p = params();
        let opt = ProfileOptions::default();
        let (f_lo, g_lo) = plf_fg(&p, 1e-4, &opt).unwrap();
        assert!((f_lo - p.mu_l / 3.0).abs() < 1e-3 && g_lo.abs() < 1e-3);
        let (f_hi, g_hi) = plf_fg(&p, p.phi_m - 1e-4, &opt).unwrap();
        assert!(f_hi.abs() < 1e-3 && g_hi.abs() < 1e-3, "{f_hi} {g_hi}");
    }

    #[test]
    fn node_count_refinement() {
        let p = params();
        let a = plf_fg(&p, 0.45, &ProfileOptions::default()).unwrap();
        let b = plf_fg(&p, 0.45, &ProfileOptions { n_nodes: 801, step_tol: 1e-13, ..Default::default() }).unwrap();
        assert!((a.0 - b.0).abs() <= 1e-5 * a.0.abs() && (a.1 - b.1).abs() <= 1e-5 * a.1.abs());
    }

    #[test]
    fn table_endpoints() {
        let p = params();
        let t = build_flux_table(&p, 20, &ProfileOptions::default()).unwrap();
        assert_eq!(t.f[0], p.mu_l / 3.0);
        assert_eq!(t.g[0], 0.0);
        assert_eq!(t.f[20], 0.0);
        assert_eq!(t.g[20], 0.0);
        assert!(t.flagged.is_empty());
        assert_eq!(t.phi0[20], p.phi_m);
    }

    fn smooth_closures() -> (impl FluxClosure, impl FluxClosure) {
        let f = FnClosure { lo: 0.0, hi: 0.61, f: |x: f64| (0.3 - 0.2 * x * x + 0.1 * x.powi(3), -0.4 * x + 0.3 * x * x, -0.4 + 0.6 * x) };
        let g = FnClosure { lo: 0.0, hi: 0.61, f: |x: f64| (x * (0.3 - 0.3 * x), 0.3 - 0.6 * x, -0.6) };
        (f, g)
    }

    #[test]
    fn chain_rule_matches_finite_differences() {
        let (f, g) = smooth_closures();
        let m = plf_model(f, g);
        let (f2, g2) = smooth_closures();
        let fd = FiniteDifferenceModel::new(
            move |s: State| {
                let phi = s.v / s.u;
                (s.u.powi(3) * f2.eval(phi).0, s.u.powi(3) * g2.eval(phi).0)
            },
            |s: State| s.u > 0.0,
            1.0,
        );
        let s = State::new(1.0, 0.4);
        let a = m.eval(s).unwrap().as_array();
        let b = fd.eval(s).unwrap().as_array();
        for i in 0..12 {
            assert!((a[i] - b[i]).abs() <= 1e-6 * (1.0 + a[i].abs()), "component {i}: {} vs {}", a[i], b[i]);
        }
    }

    #[test]
    fn homogeneous_of_degree_three() {
        let (f, g) = smooth_closures();
        let m = plf_model(f, g);
        let s = State::new(0.7, 0.21);
        let a = m.flux(s).unwrap();
        let b = m.flux(2.5 * s).unwrap();
        assert!((b.0 - 2.5f64.powi(3) * a.0).abs() < 1e-14 && (b.1 - 2.5f64.powi(3) * a.1).abs() < 1e-14);
    }

    #[test]
    fn triangle_domain() {
        let (f, g) = smooth_closures();
        let m = plf_model(f, g);
        assert!(m.contains(State::new(1.0, 0.3)));
        assert!(!m.contains(State::new(1.0, 0.62)));
        assert!(!m.contains(State::new(-1.0, -0.3)));
        assert!(matches!(m.eval(State::new(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_closures_are_degenerate() {
        let c1 = 0.25;
        let f = FnClosure { lo: 0.0, hi: 0.61, f: move |_| (c1, 0.0, 0.0) };
        let g = FnClosure { lo: 0.0, hi: 0.61, f: |_| (0.1, 0.0, 0.0) };
        let m = plf_model(f, g);
        let h: f64 = 0.8;
        let d = m.eval(State::new(h, 0.3)).unwrap();
        // Jacobian [[3 c1 h^2, 0], [3 c2 h^2, 0]]: speeds 0 and 3 c1 h^2, F_n = 0
        assert_eq!(d.eigenvalues(), Some((0.0, 3.0 * c1 * h * h)));
        assert!(matches!(eigen(&m, State::new(h, 0.3)), Err(Error::GraphCondition { .. })));
        let zero = plf_model(FnClosure { lo: 0.0, hi: 0.61, f: |_| (0.0, 0.0, 0.0) }, FnClosure { lo: 0.0, hi: 0.61, f: |_| (0.1, 0.0, 0.0) });
        assert!(matches!(eigen(&zero, State::new(h, 0.3)), Err(Error::Hyperbolicity { .. })));
    }
}
