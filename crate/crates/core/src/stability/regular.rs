use crate::flux::FluxModel;
use crate::state::{State, StateWindow};
use crate::wave::trace_hugoniot;
use crate::Result;

/// Smallest `|grad H|` over the points of all four traced half-branches,
/// the given state itself excluded.
pub fn regular_manifold_check<M: FluxModel + ?Sized>(model: &M, given: State, window: &StateWindow, step: f64) -> Result<f64> {
    let branches = trace_hugoniot(model, given, window, step)?;
    Ok(branches.iter().map(|b| b.min_gradient).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{FluxDerivs, FluxModel};
    use crate::models::{PSystem, Pressure};
    use crate::wave::hugoniot_gradient;
    use crate::Error;

    #[test]
    fn psystem_gradient_stays_away_from_zero() {
        let m = PSystem::new(Pressure::Power { coef: 1.0, exponent: -2.0 });
        let w = StateWindow::new(-2.0, 2.0, 0.4, 3.0).unwrap();
        let g = State::new(0.1, 1.2);
        assert!(regular_manifold_check(&m, g, &w, w.diameter() / 400.0).unwrap() > 0.0);
        assert_eq!(hugoniot_gradient(&m, g, g).unwrap(), State::new(0.0, 0.0));
    }

    /// `F = G = (u^2 + v^2) / 2`: the locus contains the line through the
    /// given state of slope one and the circle through it, and the gradient
    /// vanishes where they meet again.
    struct EqualFluxes;
    impl FluxModel for EqualFluxes {
        fn contains(&self, _: State) -> bool {
            true
        }
        fn eval_unchecked(&self, s: State) -> FluxDerivs {
            let f = 0.5 * (s.u * s.u + s.v * s.v);
            FluxDerivs {
                f,
                g: f,
                f_u: s.u,
                f_v: s.v,
                g_u: s.u,
                g_v: s.v,
                f_uu: 1.0,
                f_vv: 1.0,
                g_uu: 1.0,
                g_vv: 1.0,
                ..Default::default()
            }
        }
    }

    #[test]
    fn equal_fluxes_break_the_manifold() {
        let w = StateWindow::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let g = State::new(0.3, 1.0);
        match regular_manifold_check(&EqualFluxes, g, &w, w.diameter() / 400.0) {
            Err(Error::RegularManifold { .. }) | Err(Error::Continuation(_)) => {}
            Ok(min) => assert!(min < 1e-2, "{min}"),
            Err(e) => panic!("{e}"),
        }
        // the crossing point itself
        assert!(hugoniot_gradient(&EqualFluxes, State::new(-1.0, -0.3), g).unwrap().norm() < 1e-14);
    }
}
