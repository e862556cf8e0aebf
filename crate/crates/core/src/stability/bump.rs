use crate::flux::{FluxDerivs, FluxModel};
use crate::state::{State, StateWindow};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Compactly supported C2 bump `a * (1 - r^2/R^2)^3` added to each flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpPerturbation {
    pub center: State,
    pub radius: f64,
    pub amplitude_f: f64,
    pub amplitude_g: f64,
}

impl BumpPerturbation {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Invalid(format!("bump radius must be positive, got {}", self.radius)));
        }
        if !(self.center.is_finite() && self.amplitude_f.is_finite() && self.amplitude_g.is_finite()) {
            return Err(Error::Invalid("bump parameters must be finite".into()));
        }
        Ok(())
    }

    /// Support disc lies inside the window.
    pub fn supported_in(&self, window: &StateWindow) -> bool {
        let c = self.center;
        c.u - self.radius >= window.u_min
            && c.u + self.radius <= window.u_max
            && c.v - self.radius >= window.v_min
            && c.v + self.radius <= window.v_max
    }

    /// Both amplitudes multiplied by `eps`.
    pub fn scaled(&self, eps: f64) -> BumpPerturbation {
        BumpPerturbation { amplitude_f: eps * self.amplitude_f, amplitude_g: eps * self.amplitude_g, ..*self }
    }

    /// Shape `q`, its gradient and Hessian `(q_uu, q_uv, q_vv)`.
    fn shape(&self, s: State) -> (f64, [f64; 2], [f64; 3]) {
        let r2 = self.radius * self.radius;
        let (du, dv) = (s.u - self.center.u, s.v - self.center.v);
        let t = (du * du + dv * dv) / r2;
        if t >= 1.0 {
            return (0.0, [0.0; 2], [0.0; 3]);
        }
        let w = 1.0 - t;
        let (q, q1, q2) = (w * w * w, -3.0 * w * w, 6.0 * w);
        let (tu, tv) = (2.0 * du / r2, 2.0 * dv / r2);
        let tuu = 2.0 / r2;
        (q, [q1 * tu, q1 * tv], [q2 * tu * tu + q1 * tuu, q2 * tu * tv, q2 * tv * tv + q1 * tuu])
    }
}

/// The perturbation alone, defined on the whole plane.
impl FluxModel for BumpPerturbation {
    fn contains(&self, _: State) -> bool {
        true
    }

    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        let (q, g, h) = self.shape(s);
        let (a, b) = (self.amplitude_f, self.amplitude_g);
        FluxDerivs {
            f: a * q,
            g: b * q,
            f_u: a * g[0],
            f_v: a * g[1],
            g_u: b * g[0],
            g_v: b * g[1],
            f_uu: a * h[0],
            f_uv: a * h[1],
            f_vv: a * h[2],
            g_uu: b * h[0],
            g_uv: b * h[1],
            g_vv: b * h[2],
        }
    }
}

/// Validated perturbation usable as a flux model.
pub fn bump_perturbation(spec: BumpPerturbation) -> Result<BumpPerturbation> {
    spec.validate()?;
    Ok(spec)
}

/// `base + delta`.
#[derive(Debug, Clone)]
pub struct Perturbed<M> {
    pub base: M,
    pub delta: BumpPerturbation,
}

impl<M: FluxModel> FluxModel for Perturbed<M> {
    fn contains(&self, s: State) -> bool {
        self.base.contains(s)
    }

    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        self.base.eval_unchecked(s).add_scaled(1.0, &self.delta.eval_unchecked(s))
    }

    fn flux_scale(&self, s: State) -> f64 {
        self.base.flux_scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::c2_distance;

    struct Zero;
    impl FluxModel for Zero {
        fn contains(&self, _: State) -> bool {
            true
        }
        fn eval_unchecked(&self, _: State) -> FluxDerivs {
            FluxDerivs::default()
        }
    }

    fn spec(a: f64) -> BumpPerturbation {
        BumpPerturbation { center: State::new(0.1, 1.0), radius: 0.4, amplitude_f: a, amplitude_g: -0.5 * a }
    }

    fn window() -> StateWindow {
        StateWindow::new(-1.0, 1.0, 0.5, 1.5).unwrap()
    }

    #[test]
    fn zero_amplitude_is_zero() {
        let b = bump_perturbation(spec(0.0)).unwrap();
        assert_eq!(c2_distance(&b, &Zero, &window(), 41).unwrap(), 0.0);
        assert_eq!(b.eval(State::new(0.1, 1.0)).unwrap(), FluxDerivs::default());
    }

    #[test]
    fn c2_norm_linear_in_amplitude() {
        let d: Vec<f64> = [1e-3, 1e-2, 1e-1].iter().map(|&a| c2_distance(&spec(a), &Zero, &window(), 41).unwrap()).collect();
        assert!((d[1] / d[0] - 10.0).abs() <= 1e-10 * 10.0);
        assert!((d[2] / d[1] - 10.0).abs() <= 1e-10 * 10.0);
    }

    #[test]
    fn outside_support_is_exactly_zero() {
        let b = spec(1.0);
        let d = b.eval(State::new(0.1 + 0.41, 1.0)).unwrap();
        assert_eq!(d, FluxDerivs::default());
        assert!(b.supported_in(&window()));
        assert!(bump_perturbation(BumpPerturbation { radius: 0.0, ..b }).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let b = spec(0.7);
        let s = State::new(0.25, 0.9);
        let d = b.eval(s).unwrap();
        let h = 1e-6;
        let e = |p: State| b.eval(p).unwrap();
        let du = |f: fn(&FluxDerivs) -> f64| (f(&e(s + h * State::new(1.0, 0.0))) - f(&e(s - h * State::new(1.0, 0.0)))) / (2.0 * h);
        let dv = |f: fn(&FluxDerivs) -> f64| (f(&e(s + h * State::new(0.0, 1.0))) - f(&e(s - h * State::new(0.0, 1.0)))) / (2.0 * h);
        assert!((du(|d| d.f) - d.f_u).abs() < 1e-8);
        assert!((dv(|d| d.g) - d.g_v).abs() < 1e-8);
        assert!((du(|d| d.f_u) - d.f_uu).abs() < 1e-6);
        assert!((dv(|d| d.f_u) - d.f_uv).abs() < 1e-6);
        assert!((dv(|d| d.g_v) - d.g_vv).abs() < 1e-6);
    }
}
