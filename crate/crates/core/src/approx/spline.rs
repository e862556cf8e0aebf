use super::FluxClosure;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// How the two ghost values outside the node range are manufactured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhostRule {
    /// Quadratic extrapolation on both ends:
    /// `f[-1] = 3 f[0] - 3 f[1] + f[2]`, `f[N+1] = f[N-2] - 3 f[N-1] + 3 f[N]`.
    #[default]
    QuadraticExtrapolation,
    /// `f[-1] = f[0] - 3 f[1] + 3 f[2]` on the left, the quadratic rule on the
    /// right. The left formula is not consistent for linear data, so the
    /// first cell does not converge under refinement.
    AsPrinted,
}

impl GhostRule {
    pub fn ghosts(self, f: &[f64]) -> (f64, f64) {
        let n = f.len() - 1;
        let hi = f[n - 2] - 3.0 * f[n - 1] + 3.0 * f[n];
        let lo = match self {
            GhostRule::QuadraticExtrapolation => 3.0 * f[0] - 3.0 * f[1] + f[2],
            GhostRule::AsPrinted => f[0] - 3.0 * f[1] + 3.0 * f[2],
        };
        (lo, hi)
    }
}

/// Four-point cubic interpolant on a uniform grid `x0 < x0 + dx < ... < x1`.
///
/// On cell `[x_i, x_{i+1})` the value is the cubic through
/// `f[i-1], f[i], f[i+1], f[i+2]`; the ghost values stand in for the
/// missing neighbours of the first and last cells. The second derivative is
/// continuous across nodes; the first derivative jumps by a fourth difference
/// of the data, which vanishes for cubic data.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFlux {
    x0: f64,
    x1: f64,
    dx: f64,
    values: Vec<f64>,
    ghost_lo: f64,
    ghost_hi: f64,
    rule: GhostRule,
}

/// Interpolation weights `(alpha, beta, gamma, xi)` at cell fraction `w`.
pub fn weights(w: f64) -> [f64; 4] {
    let w2 = w * w;
    let w3 = w2 * w;
    [
        (-2.0 * w + 3.0 * w2 - w3) / 6.0,
        (2.0 - w - 2.0 * w2 + w3) / 2.0,
        (2.0 * w + w2 - w3) / 2.0,
        (-w + w3) / 6.0,
    ]
}

/// Derivatives of [`weights`] with respect to `w`.
pub fn weights_d1(w: f64) -> [f64; 4] {
    let w2 = w * w;
    [
        (-2.0 + 6.0 * w - 3.0 * w2) / 6.0,
        (-1.0 - 4.0 * w + 3.0 * w2) / 2.0,
        (2.0 + 2.0 * w - 3.0 * w2) / 2.0,
        (-1.0 + 3.0 * w2) / 6.0,
    ]
}

pub fn weights_d2(w: f64) -> [f64; 4] {
    [1.0 - w, -2.0 + 3.0 * w, 1.0 - 3.0 * w, w]
}

impl SplineFlux {
    pub fn new(x0: f64, x1: f64, values: Vec<f64>, rule: GhostRule) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Invalid("spline needs at least 3 nodes".into()));
        }
        if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
            return Err(Error::Invalid(format!("bad spline interval [{x0}, {x1}]")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite spline value".into()));
        }
        let (ghost_lo, ghost_hi) = rule.ghosts(&values);
        let dx = (x1 - x0) / (values.len() - 1) as f64;
        Ok(SplineFlux { x0, x1, dx, values, ghost_lo, ghost_hi, rule })
    }

    /// Interpolates `f` sampled at `n_cells + 1` uniform nodes on `[x0, x1]`.
    pub fn sample<F: Fn(f64) -> f64>(x0: f64, x1: f64, n_cells: usize, f: F, rule: GhostRule) -> Result<Self> {
        let dx = (x1 - x0) / n_cells as f64;
        let values = (0..=n_cells).map(|i| f(if i == n_cells { x1 } else { x0 + i as f64 * dx })).collect();
        SplineFlux::new(x0, x1, values, rule)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ghosts(&self) -> (f64, f64) {
        (self.ghost_lo, self.ghost_hi)
    }

    pub fn rule(&self) -> GhostRule {
        self.rule
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.dx
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells() {
            self.x1
        } else {
            self.x0 + i as f64 * self.dx
        }
    }

    /// Extended value array with `f[-1]` at index 0 and `f[N+1]` last.
    fn at(&self, i: isize) -> f64 {
        let n = self.n_cells() as isize;
        if i < 0 {
            self.ghost_lo
        } else if i > n {
            self.ghost_hi
        } else {
            self.values[i as usize]
        }
    }

    /// Cell index and fraction; the right end belongs to the last cell.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.n_cells();
        let t = (x - self.x0) / self.dx;
        // nodes map to w = 0 exactly
        let r = t.round().clamp(0.0, n as f64) as usize;
        if self.node(r) == x {
            return if r == n { (n - 1, 1.0) } else { (r, 0.0) };
        }
        let i = (t.floor().max(0.0) as usize).min(n - 1);
        (i, t - i as f64)
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        if !(x >= self.x0 && x <= self.x1) {
            return Err(Error::Range(x));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> (f64, f64, f64) {
        let (i, w) = self.locate(x);
        let i = i as isize;
        let f = [self.at(i - 1), self.at(i), self.at(i + 1), self.at(i + 2)];
        let dot = |c: [f64; 4]| c[0] * f[0] + c[1] * f[1] + c[2] * f[2] + c[3] * f[3];
        (
            dot(weights(w)),
            dot(weights_d1(w)) / self.dx,
            dot(weights_d2(w)) / (self.dx * self.dx),
        )
    }
}

impl FluxClosure for SplineFlux {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        self.eval_unchecked(x.clamp(self.x0, self.x1))
    }

    fn domain(&self) -> (f64, f64) {
        (self.x0, self.x1)
    }
}
