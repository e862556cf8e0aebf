//! Flux models for `u_t + F(u,v)_x = 0, v_t + G(u,v)_x = 0` and the pointwise
//! structure derived from them: Jacobian, characteristic speeds, right
//! eigenvectors and the rarefaction slope field.

mod adapters;
mod assumptions;

pub use adapters::{FiniteDifferenceModel, Swapped};
pub use assumptions::{c2_distance, check_assumptions, gnl_margin, AssumptionReport, GraphOrientation};

use crate::state::State;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Flux values and all partial derivatives through second order at a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxDerivs {
    pub f: f64,
    pub g: f64,
    pub f_u: f64,
    pub f_v: f64,
    pub g_u: f64,
    pub g_v: f64,
    pub f_uu: f64,
    pub f_uv: f64,
    pub f_vv: f64,
    pub g_uu: f64,
    pub g_uv: f64,
    pub g_vv: f64,
}

impl FluxDerivs {
    pub fn as_array(&self) -> [f64; 12] {
        [
            self.f, self.g, self.f_u, self.f_v, self.g_u, self.g_v, self.f_uu, self.f_uv, self.f_vv,
            self.g_uu, self.g_uv, self.g_vv,
        ]
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        FluxDerivs {
            f: a[0],
            g: a[1],
            f_u: a[2],
            f_v: a[3],
            g_u: a[4],
            g_v: a[5],
            f_uu: a[6],
            f_uv: a[7],
            f_vv: a[8],
            g_uu: a[9],
            g_uv: a[10],
            g_vv: a[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    /// Component-wise `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &FluxDerivs) -> FluxDerivs {
        let a = self.as_array();
        let b = other.as_array();
        FluxDerivs::from_array(std::array::from_fn(|i| a[i] + c * b[i]))
    }

    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        [[self.f_u, self.f_v], [self.g_u, self.g_v]]
    }

    /// `(F_u - G_v)^2 + 4 F_v G_u`.
    pub fn discriminant(&self) -> f64 {
        let d = self.f_u - self.g_v;
        d * d + 4.0 * self.f_v * self.g_u
    }

    /// Ordered characteristic speeds, or `None` when the eigenvalues are complex.
    pub fn eigenvalues(&self) -> Option<(f64, f64)> {
        let disc = self.discriminant();
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let tr = self.f_u + self.g_v;
        Some((0.5 * (tr - sq), 0.5 * (tr + sq)))
    }
}

/// A pair of `C^2` flux functions on an open domain.
///
/// Evaluation is pure; implementors must be shareable across threads.
pub trait FluxModel: Send + Sync {
    fn contains(&self, s: State) -> bool;

    /// Evaluates without the domain check. Callers are expected to have
    /// checked [`FluxModel::contains`].
    fn eval_unchecked(&self, s: State) -> FluxDerivs;

    fn eval(&self, s: State) -> Result<FluxDerivs> {
        if !s.is_finite() || !self.contains(s) {
            return Err(Error::Domain(s));
        }
        let d = self.eval_unchecked(s);
        if !d.is_finite() {
            return Err(Error::Domain(s));
        }
        Ok(d)
    }

    fn flux(&self, s: State) -> Result<(f64, f64)> {
        self.eval(s).map(|d| (d.f, d.g))
    }

    /// Characteristic scale of the flux values, used to make residual
    /// tolerances dimensionless.
    fn flux_scale(&self, s: State) -> f64 {
        self.eval(s).map(|d| 1.0 + d.f.abs() + d.g.abs()).unwrap_or(1.0)
    }
}

impl<M: FluxModel + ?Sized> FluxModel for &M {
    fn contains(&self, s: State) -> bool {
        (**self).contains(s)
    }
    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        (**self).eval_unchecked(s)
    }
}

impl<M: FluxModel + ?Sized> FluxModel for Arc<M> {
    fn contains(&self, s: State) -> bool {
        (**self).contains(s)
    }
    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        (**self).eval_unchecked(s)
    }
}

impl<M: FluxModel + ?Sized> FluxModel for Box<M> {
    fn contains(&self, s: State) -> bool {
        (**self).contains(s)
    }
    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        (**self).eval_unchecked(s)
    }
}

/// Characteristic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Family {
    One,
    Two,
}

impl Family {
    /// `2k - 3`: -1 for the slow family, +1 for the fast one.
    pub fn sign(self) -> f64 {
        match self {
            Family::One => -1.0,
            Family::Two => 1.0,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Family::One => 1,
            Family::Two => 2,
        }
    }
}

impl From<Family> for u8 {
    fn from(f: Family) -> u8 {
        f.index()
    }
}

impl TryFrom<u8> for Family {
    type Error = String;
    fn try_from(k: u8) -> std::result::Result<Self, String> {
        match k {
            1 => Ok(Family::One),
            2 => Ok(Family::Two),
            _ => Err(format!("family must be 1 or 2, got {k}")),
        }
    }
}

/// Thresholds that turn the open conditions on the flux into testable ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub discriminant: f64,
    pub graph: f64,
    pub gnl: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { discriminant: 1e-8, graph: 1e-8, gnl: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenStructure {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Right eigenvectors with first component 1.
    pub r1: State,
    pub r2: State,
    pub discriminant: f64,
}

impl EigenStructure {
    pub fn from_derivs(d: &FluxDerivs, s: State, tol: &Tolerances) -> Result<Self> {
        let disc = d.discriminant();
        if !(disc > tol.discriminant) {
            return Err(Error::Hyperbolicity { state: s, disc });
        }
        if !(d.f_v.abs() > tol.graph) {
            return Err(Error::GraphCondition { state: s, value: d.f_v.abs() });
        }
        let sq = disc.sqrt();
        let tr = d.f_u + d.g_v;
        let lambda1 = 0.5 * (tr - sq);
        let lambda2 = 0.5 * (tr + sq);
        Ok(EigenStructure {
            lambda1,
            lambda2,
            r1: State::new(1.0, xi_from_derivs(d, sq, Family::One)),
            r2: State::new(1.0, xi_from_derivs(d, sq, Family::Two)),
            discriminant: disc,
        })
    }

    pub fn lambda(&self, k: Family) -> f64 {
        match k {
            Family::One => self.lambda1,
            Family::Two => self.lambda2,
        }
    }

    pub fn r(&self, k: Family) -> State {
        match k {
            Family::One => self.r1,
            Family::Two => self.r2,
        }
    }
}

/// `-(F_u - lambda_k) / F_v` with `lambda_k - F_u` formed without cancellation
/// against the trace.
fn xi_from_derivs(d: &FluxDerivs, sqrt_disc: f64, k: Family) -> f64 {
    let lam_minus_fu = 0.5 * ((d.g_v - d.f_u) + k.sign() * sqrt_disc);
    lam_minus_fu / d.f_v
}

pub fn jacobian<M: FluxModel + ?Sized>(model: &M, s: State) -> Result<[[f64; 2]; 2]> {
    Ok(model.eval(s)?.jacobian())
}

pub fn eigen<M: FluxModel + ?Sized>(model: &M, s: State) -> Result<EigenStructure> {
    eigen_with(model, s, &Tolerances::default())
}

pub fn eigen_with<M: FluxModel + ?Sized>(model: &M, s: State, tol: &Tolerances) -> Result<EigenStructure> {
    let d = model.eval(s)?;
    EigenStructure::from_derivs(&d, s, tol)
}

/// Slope `dv/du` of the `k`-rarefaction curve through `s`.
pub fn xi<M: FluxModel + ?Sized>(model: &M, s: State, k: Family) -> Result<f64> {
    Ok(eigen(model, s)?.r(k).v)
}

/// `lambda_k` only; no graph condition required.
pub fn lambda<M: FluxModel + ?Sized>(model: &M, s: State, k: Family) -> Result<f64> {
    let d = model.eval(s)?;
    let (l1, l2) = d.eigenvalues().ok_or(Error::Hyperbolicity { state: s, disc: d.discriminant() })?;
    Ok(match k {
        Family::One => l1,
        Family::Two => l2,
    })
}
