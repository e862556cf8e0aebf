use super::{FluxDerivs, FluxModel};
use crate::state::State;

/// Supplies derivatives by central differences for flux pairs known only
/// through their values.
///
/// First derivatives use `h = 1e-6 * scale`; second derivatives use
/// `1e-4 * scale`, where the truncation and rounding errors of the
/// three-point formula balance.
pub struct FiniteDifferenceModel<P, D> {
    flux: P,
    domain: D,
    scale: f64,
}

impl<P, D> FiniteDifferenceModel<P, D>
where
    P: Fn(State) -> (f64, f64) + Send + Sync,
    D: Fn(State) -> bool + Send + Sync,
{
    pub fn new(flux: P, domain: D, scale: f64) -> Self {
        FiniteDifferenceModel { flux, domain, scale }
    }

    pub fn first_step(&self) -> f64 {
        1e-6 * self.scale
    }

    pub fn second_step(&self) -> f64 {
        1e-4 * self.scale
    }
}

impl<P, D> FluxModel for FiniteDifferenceModel<P, D>
where
    P: Fn(State) -> (f64, f64) + Send + Sync,
    D: Fn(State) -> bool + Send + Sync,
{
    fn contains(&self, s: State) -> bool {
        (self.domain)(s)
    }

    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        let fl = &self.flux;
        let (f, g) = fl(s);
        let h = self.first_step();
        let eu = State::new(1.0, 0.0);
        let ev = State::new(0.0, 1.0);
        let d1 = |dir: State, h: f64| {
            let (fp, gp) = fl(s + h * dir);
            let (fm, gm) = fl(s - h * dir);
            ((fp - fm) / (2.0 * h), (gp - gm) / (2.0 * h))
        };
        let (f_u, g_u) = d1(eu, h);
        let (f_v, g_v) = d1(ev, h);
        let k = self.second_step();
        let d2 = |dir: State| {
            let (fp, gp) = fl(s + k * dir);
            let (fm, gm) = fl(s - k * dir);
            ((fp - 2.0 * f + fm) / (k * k), (gp - 2.0 * g + gm) / (k * k))
        };
        let (f_uu, g_uu) = d2(eu);
        let (f_vv, g_vv) = d2(ev);
        let (fpp, gpp) = fl(s + k * eu + k * ev);
        let (fpm, gpm) = fl(s + k * eu - k * ev);
        let (fmp, gmp) = fl(s - k * eu + k * ev);
        let (fmm, gmm) = fl(s - k * eu - k * ev);
        let f_uv = (fpp - fpm - fmp + fmm) / (4.0 * k * k);
        let g_uv = (gpp - gpm - gmp + gmm) / (4.0 * k * k);
        FluxDerivs { f, g, f_u, f_v, g_u, g_v, f_uu, f_uv, f_vv, g_uu, g_uv, g_vv }
    }
}

/// The same system with the roles of `u` and `v` exchanged: state `(v, u)`,
/// fluxes `(G, F)`. A model with `G_u != 0` but `F_v = 0` satisfies the
/// standard graph condition once swapped.
pub struct Swapped<M>(pub M);

impl<M: FluxModel> FluxModel for Swapped<M> {
    fn contains(&self, s: State) -> bool {
        self.0.contains(s.swapped())
    }

    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        let d = self.0.eval_unchecked(s.swapped());
        FluxDerivs {
            f: d.g,
            g: d.f,
            f_u: d.g_v,
            f_v: d.g_u,
            g_u: d.f_v,
            g_v: d.f_u,
            f_uu: d.g_vv,
            f_uv: d.g_uv,
            f_vv: d.g_uu,
            g_uu: d.f_vv,
            g_uv: d.f_uv,
            g_vv: d.f_uu,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::eigen;
    use crate::models::{PSystem, Pressure};

    #[test]
    fn finite_difference_matches_analytic_psystem() {
        let exact = PSystem::new(Pressure::Power { coef: 1.0, exponent: -2.0 });
        let fd = FiniteDifferenceModel::new(|s: State| (s.v.powi(-2), -s.u), |s: State| s.v > 0.0, 1.0);
        let s = State::new(0.3, 1.2);
        let a = exact.eval(s).unwrap().as_array();
        let b = fd.eval(s).unwrap().as_array();
        for i in 0..12 {
            assert!((a[i] - b[i]).abs() <= 1e-6 * (1.0 + a[i].abs()), "component {i}: {} vs {}", a[i], b[i]);
        }
    }

    #[test]
    fn swapping_preserves_eigenvalues() {
        let m = PSystem::new(Pressure::Power { coef: 1.0, exponent: -2.0 });
        let s = State::new(0.2, 0.8);
        let a = eigen(&m, s).unwrap();
        let b = eigen(&Swapped(&m), s.swapped()).unwrap();
        assert!((a.lambda1 - b.lambda1).abs() < 1e-13);
        assert!((a.lambda2 - b.lambda2).abs() < 1e-13);
    }
}
