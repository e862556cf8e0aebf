//! Points of the state space and rectangular working windows.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u: f64,
    pub v: f64,
}

impl State {
    pub const fn new(u: f64, v: f64) -> Self {
        State { u, v }
    }

    pub fn is_finite(self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn dot(self, o: State) -> f64 {
        self.u * o.u + self.v * o.v
    }

    pub fn norm(self) -> f64 {
        self.u.hypot(self.v)
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> State {
        State::new(-self.v, self.u)
    }

    pub fn cross(self, o: State) -> f64 {
        self.u * o.v - self.v * o.u
    }

    pub fn normalized(self) -> State {
        let n = self.norm();
        State::new(self.u / n, self.v / n)
    }

    pub fn dist(self, o: State) -> f64 {
        (self - o).norm()
    }

    pub fn swapped(self) -> State {
        State::new(self.v, self.u)
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.u + o.u, self.v + o.v)
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.u - o.u, self.v - o.v)
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, s: State) -> State {
        State::new(self * s.u, self * s.v)
    }
}

/// Closed rectangle `[u_min, u_max] x [v_min, v_max]` standing in for the
/// compact set on which fluxes are compared and curves are traced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateWindow {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Relative interior margin used by [`StateWindow::in_interior`].
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    1e-3
}

impl StateWindow {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> crate::Result<Self> {
        let w = StateWindow { u_min, u_max, v_min, v_max, margin: default_margin() };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let finite = [self.u_min, self.u_max, self.v_min, self.v_max, self.margin]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.u_min >= self.u_max || self.v_min >= self.v_max {
            return Err(crate::Error::Invalid(format!("degenerate window {self:?}")));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(crate::Error::Invalid(format!("window margin {} not in [0, 0.5)", self.margin)));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.u_max - self.u_min
    }

    pub fn height(&self) -> f64 {
        self.v_max - self.v_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> State {
        State::new(0.5 * (self.u_min + self.u_max), 0.5 * (self.v_min + self.v_max))
    }

    pub fn contains(&self, s: State) -> bool {
        s.u >= self.u_min && s.u <= self.u_max && s.v >= self.v_min && s.v <= self.v_max
    }

    /// Inside the window with the relative margin removed from every side.
    pub fn in_interior(&self, s: State) -> bool {
        let du = self.margin * self.width();
        let dv = self.margin * self.height();
        s.u > self.u_min + du && s.u < self.u_max - du && s.v > self.v_min + dv && s.v < self.v_max - dv
    }

    /// `n x n` lattice including the corners, row-major in `v`.
    pub fn lattice(&self, n: usize) -> impl Iterator<Item = State> + '_ {
        let n = n.max(2);
        let du = self.width() / (n - 1) as f64;
        let dv = self.height() / (n - 1) as f64;
        (0..n).flat_map(move |j| {
            (0..n).map(move |i| State::new(self.u_min + i as f64 * du, self.v_min + j as f64 * dv))
        })
    }

    pub fn swapped(&self) -> StateWindow {
        StateWindow {
            u_min: self.v_min,
            u_max: self.v_max,
            v_min: self.u_min,
            v_max: self.u_max,
            margin: self.margin,
        }
    }
}
