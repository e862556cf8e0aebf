use crate::approx::{FluxClosure, SplineFlux};
use crate::flux::{FluxDerivs, FluxModel};
use crate::state::{State, StateWindow};
use crate::{Error, Result};

/// Pressure law as a function of specific volume.
#[derive(Debug, Clone, PartialEq)]
pub enum Pressure {
    /// `coef * v^exponent`.
    Power { coef: f64, exponent: f64 },
    /// Tabulated pressure, interpolated by the four-point spline.
    Table(SplineFlux),
}

impl Pressure {
    /// `(p, p', p'')` at `v`; `None` outside where the law is defined.
    pub fn eval(&self, v: f64) -> Option<(f64, f64, f64)> {
        if !(v > 0.0) {
            return None;
        }
        match self {
            Pressure::Power { coef, exponent } => {
                let e = *exponent;
                let p = coef * v.powf(e);
                Some((p, e * p / v, e * (e - 1.0) * p / (v * v)))
            }
            Pressure::Table(s) => {
                let (lo, hi) = s.domain();
                if v < lo || v > hi {
                    None
                } else {
                    Some(s.eval(v).ok()?)
                }
            }
        }
    }
}

/// `u_t + p(v)_x = 0, v_t - u_x = 0`: velocity `u`, specific volume `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PSystem {
    pub pressure: Pressure,
}

impl PSystem {
    pub fn new(pressure: Pressure) -> Self {
        PSystem { pressure }
    }

    /// `(u - u_g)^2 + (p(v) - p(v_g)) (v - v_g)`.
    pub fn hugoniot_closed_form(&self, s: State, given: State) -> Result<f64> {
        let (p, ..) = self.pressure.eval(s.v).ok_or(Error::Domain(s))?;
        let (pg, ..) = self.pressure.eval(given.v).ok_or(Error::Domain(given))?;
        Ok((s.u - given.u).powi(2) + (p - pg) * (s.v - given.v))
    }

    /// Checks `p' < 0` and `p'' > 0` at `grid_n` volumes across the window.
    pub fn verify(&self, window: &StateWindow, grid_n: usize) -> Result<()> {
        if window.v_min <= 0.0 {
            return Err(Error::Invalid(format!("p-system window needs v > 0, got v_min = {}", window.v_min)));
        }
        let n = grid_n.max(2);
        for i in 0..n {
            let v = window.v_min + window.height() * i as f64 / (n - 1) as f64;
            let s = State::new(window.center().u, v);
            let (_, d1, d2) = self.pressure.eval(v).ok_or(Error::Domain(s))?;
            if !(d1 < 0.0) {
                return Err(Error::Hyperbolicity { state: s, disc: -4.0 * d1 });
            }
            if !(d2 > 0.0) {
                return Err(Error::Invalid(format!("p'' = {d2} is not positive at v = {v}")));
            }
        }
        Ok(())
    }
}

impl FluxModel for PSystem {
    fn contains(&self, s: State) -> bool {
        self.pressure.eval(s.v).is_some()
    }

    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        let (p, d1, d2) = self.pressure.eval(s.v).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        FluxDerivs { f: p, g: -s.u, f_v: d1, f_vv: d2, g_u: -1.0, ..Default::default() }
    }
}

/// The p-system flux model for a pressure law.
pub fn psystem_model(pressure: Pressure) -> PSystem {
    PSystem::new(pressure)
}
