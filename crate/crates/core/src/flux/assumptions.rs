use super::{Family, FluxDerivs, FluxModel, Tolerances};
use crate::state::{State, StateWindow};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphOrientation {
    /// `F_v != 0`: wave curves are graphs `v(u)`.
    Standard,
    /// Only `G_u != 0`: the roles of `u` and `v` must be exchanged.
    Swapped,
    Neither,
}

/// Worst-case margins of the structural assumptions over a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub grid_n: usize,
    pub points_checked: usize,
    pub points_outside_domain: usize,
    pub min_discriminant: f64,
    pub min_abs_gnl_1: f64,
    pub min_abs_gnl_2: f64,
    pub min_abs_fv: f64,
    pub min_abs_gu: f64,
    /// Sign of `grad lambda_k . r_k` is the same at every lattice point.
    pub gnl_sign_consistent_1: bool,
    pub gnl_sign_consistent_2: bool,
    pub hyperbolic: bool,
    pub gnl_1: bool,
    pub gnl_2: bool,
    pub graph: bool,
    pub orientation: GraphOrientation,
    pub tolerances: Tolerances,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.hyperbolic && self.gnl_1 && self.gnl_2 && self.graph
    }
}

fn lambdas(d: &FluxDerivs) -> Option<(f64, f64)> {
    d.eigenvalues()
}

/// `grad lambda_k . r_k` at `s`, with the gradient from central differences of
/// `lambda_k` at step `h` (one-sided where the stencil leaves the domain).
pub fn gnl_margin<M: FluxModel + ?Sized>(model: &M, s: State, k: Family, h: f64) -> Result<f64> {
    let d = model.eval(s)?;
    let e = super::EigenStructure::from_derivs(&d, s, &Tolerances { discriminant: 0.0, graph: 0.0, gnl: 0.0 })?;
    let lam = |p: State| -> Option<f64> {
        if !model.contains(p) {
            return None;
        }
        let dp = model.eval(p).ok()?;
        let (l1, l2) = lambdas(&dp)?;
        Some(match k {
            Family::One => l1,
            Family::Two => l2,
        })
    };
    let l0 = e.lambda(k);
    let partial = |dir: State| -> Result<f64> {
        let plus = lam(s + h * dir);
        let minus = lam(s - h * dir);
        match (plus, minus) {
            (Some(p), Some(m)) => Ok((p - m) / (2.0 * h)),
            (Some(p), None) => Ok((p - l0) / h),
            (None, Some(m)) => Ok((l0 - m) / h),
            (None, None) => Err(Error::Domain(s)),
        }
    };
    let du = partial(State::new(1.0, 0.0))?;
    let dv = partial(State::new(0.0, 1.0))?;
    let r = e.r(k);
    Ok(du * r.u + dv * r.v)
}

/// Evaluates strict hyperbolicity, genuine nonlinearity of both families and
/// the graph condition on a `grid_n x grid_n` lattice over `window`.
/// Lattice points outside the model domain are skipped and counted.
pub fn check_assumptions<M: FluxModel + ?Sized>(
    model: &M,
    window: &StateWindow,
    grid_n: usize,
    tol: &Tolerances,
) -> Result<AssumptionReport> {
    if grid_n < 2 {
        return Err(Error::Invalid("grid_n must be at least 2".into()));
    }
    let h = window.diameter() * 1e-5;
    let mut rep = AssumptionReport {
        grid_n,
        points_checked: 0,
        points_outside_domain: 0,
        min_discriminant: f64::INFINITY,
        min_abs_gnl_1: f64::INFINITY,
        min_abs_gnl_2: f64::INFINITY,
        min_abs_fv: f64::INFINITY,
        min_abs_gu: f64::INFINITY,
        gnl_sign_consistent_1: true,
        gnl_sign_consistent_2: true,
        hyperbolic: false,
        gnl_1: false,
        gnl_2: false,
        graph: false,
        orientation: GraphOrientation::Neither,
        tolerances: *tol,
    };
    let mut sign1 = 0.0f64;
    let mut sign2 = 0.0f64;
    for s in window.lattice(grid_n) {
        let d = match model.eval(s) {
            Ok(d) => d,
            Err(_) => {
                rep.points_outside_domain += 1;
                continue;
            }
        };
        rep.points_checked += 1;
        let disc = d.discriminant();
        rep.min_discriminant = rep.min_discriminant.min(disc);
        rep.min_abs_fv = rep.min_abs_fv.min(d.f_v.abs());
        rep.min_abs_gu = rep.min_abs_gu.min(d.g_u.abs());
        if disc <= 0.0 || d.f_v == 0.0 {
            rep.min_abs_gnl_1 = 0.0;
            rep.min_abs_gnl_2 = 0.0;
            continue;
        }
        for (k, min, sign, consistent) in [
            (Family::One, &mut rep.min_abs_gnl_1, &mut sign1, &mut rep.gnl_sign_consistent_1),
            (Family::Two, &mut rep.min_abs_gnl_2, &mut sign2, &mut rep.gnl_sign_consistent_2),
        ] {
            match gnl_margin(model, s, k, h) {
                Ok(g) => {
                    *min = min.min(g.abs());
                    if g != 0.0 {
                        if *sign == 0.0 {
                            *sign = g.signum();
                        } else if *sign != g.signum() {
                            *consistent = false;
                        }
                    }
                }
                Err(_) => *min = 0.0,
            }
        }
    }
    if rep.points_checked == 0 {
        return Err(Error::Invalid("no lattice point lies in the model domain".into()));
    }
    rep.hyperbolic = rep.min_discriminant > tol.discriminant;
    rep.gnl_1 = rep.min_abs_gnl_1 > tol.gnl && rep.gnl_sign_consistent_1;
    rep.gnl_2 = rep.min_abs_gnl_2 > tol.gnl && rep.gnl_sign_consistent_2;
    rep.orientation = if rep.min_abs_fv > tol.graph {
        GraphOrientation::Standard
    } else if rep.min_abs_gu > tol.graph {
        GraphOrientation::Swapped
    } else {
        GraphOrientation::Neither
    };
    rep.graph = rep.orientation != GraphOrientation::Neither;
    Ok(rep)
}

/// Lattice surrogate of `||F_a - F_b||_{C^2(K)} + ||G_a - G_b||_{C^2(K)}`,
/// where each `C^2` norm is the sum of the sup-norms of the value and the five
/// first and second partials.
pub fn c2_distance<A, B>(a: &A, b: &B, window: &StateWindow, grid_n: usize) -> Result<f64>
where
    A: FluxModel + ?Sized,
    B: FluxModel + ?Sized,
{
    if grid_n < 2 {
        return Err(Error::Invalid("grid_n must be at least 2".into()));
    }
    let mut sup = [0.0f64; 12];
    for s in window.lattice(grid_n) {
        let da = a.eval(s)?.as_array();
        let db = b.eval(s)?.as_array();
        for i in 0..12 {
            sup[i] = sup[i].max((da[i] - db[i]).abs());
        }
    }
    Ok(sup.iter().sum())
}
