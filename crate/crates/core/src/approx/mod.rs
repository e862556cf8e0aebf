//! Scalar closures `f(phi)` used to build conserved-variable flux models:
//! the four-point interpolating spline and the constrained piecewise
//! polynomial fit.

mod plan;
mod polyfit;
mod spline;

pub use plan::{default_sample_plan, sample_plan, SamplePlan};
pub use polyfit::{fit_piecewise_poly, FitAnchors, FitConfig, FitDiagnostics, PiecewisePolyFlux};
pub use spline::{weights, weights_d1, weights_d2, GhostRule, SplineFlux};

use serde::Serialize;
use std::sync::Arc;

/// A scalar function on a closed interval with two derivatives.
pub trait FluxClosure: Send + Sync {
    /// Value, first and second derivative. Arguments outside
    /// [`FluxClosure::domain`] are clamped to it.
    fn eval(&self, x: f64) -> (f64, f64, f64);
    fn domain(&self) -> (f64, f64);
}

impl<C: FluxClosure + ?Sized> FluxClosure for &C {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        (**self).eval(x)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
}

impl<C: FluxClosure + ?Sized> FluxClosure for Arc<C> {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        (**self).eval(x)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
}

impl<C: FluxClosure + ?Sized> FluxClosure for Box<C> {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        (**self).eval(x)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
}

/// A closure given by plain functions, handy for references in tests.
pub struct FnClosure<F> {
    pub lo: f64,
    pub hi: f64,
    pub f: F,
}

impl<F: Fn(f64) -> (f64, f64, f64) + Send + Sync> FluxClosure for FnClosure<F> {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        (self.f)(x.clamp(self.lo, self.hi))
    }
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct C2Error {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl C2Error {
    pub fn total(&self) -> f64 {
        self.value + self.d1 + self.d2
    }
}

/// Sup-norm differences of value, first and second derivative over
/// `grid_n + 1` uniform points of `a`'s domain.
pub fn approx_error_c2<A, B>(a: &A, b: &B, grid_n: usize) -> C2Error
where
    A: FluxClosure + ?Sized,
    B: FluxClosure + ?Sized,
{
    let (lo, hi) = a.domain();
    let n = grid_n.max(1);
    let mut e = C2Error::default();
    for i in 0..=n {
        let x = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
        let (p, p1, p2) = a.eval(x);
        let (q, q1, q2) = b.eval(x);
        e.value = e.value.max((p - q).abs());
        e.d1 = e.d1.max((p1 - q1).abs());
        e.d2 = e.d2.max((p2 - q2).abs());
    }
    e
}
