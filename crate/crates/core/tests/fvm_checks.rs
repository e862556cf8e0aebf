//! Finite-volume runs checked against exact fans.

use hyperstab::flux::FluxDerivs;
use hyperstab::fvm::{compare_profiles, run_simulation, FluxScheme, SimConfig};
use hyperstab::models::{PSystem, Pressure};
use hyperstab::numerics::fitted_slope;
use hyperstab::riemann::{solve_riemann, RiemannProblem, RiemannSolution, SolutionType, SolveOptions};
use hyperstab::wave::{shock_speed, trace_hugoniot_family};
use hyperstab::{Family, FluxModel, State, StateWindow};

fn gamma2() -> PSystem {
    PSystem::new(Pressure::Power { coef: 1.0, exponent: -2.0 })
}

fn window() -> StateWindow {
    StateWindow::new(-2.0, 2.0, 0.3, 3.0).unwrap()
}

fn solve<M: FluxModel + Clone>(m: &M, l: State, r: State, w: StateWindow) -> RiemannSolution {
    solve_riemann(&RiemannProblem::new(m.clone(), l, r, w).unwrap(), &SolveOptions::default()).unwrap()
}

fn config(dx: f64, t: f64, scheme: FluxScheme) -> SimConfig {
    SimConfig { x_min: -4.0, x_max: 4.0, dx, dt: 0.2 * dx, t_final: t, flux_scheme: scheme, ..Default::default() }
}

#[test]
fn single_shock_travels_at_rankine_hugoniot_speed() {
    let m = gamma2();
    let l = State::new(0.2, 1.0);
    let [minus, _] = trace_hugoniot_family(&m, l, Family::One, &window(), 1e-2, 1e-10, 100_000).unwrap();
    let r = minus.points[25];
    let s = shock_speed(&m, l, r).unwrap();
    let (dx, t) = (0.005, 1.0);
    let snap = &run_simulation(&m, l, r, &config(dx, t, FluxScheme::Rusanov)).unwrap()[0];
    // position where v crosses the mid value between the two states
    let mid = 0.5 * (l.v + r.v);
    let i = (1..snap.cells.len()).find(|&i| (snap.cells[i - 1].v - mid) * (snap.cells[i].v - mid) <= 0.0).unwrap();
    let (a, b) = (snap.cells[i - 1].v, snap.cells[i].v);
    let x = snap.center(i - 1) + dx * (mid - a) / (b - a);
    assert!((x - s * t).abs() <= 4.0 * dx, "front {x} vs {}", s * t);
}

#[test]
fn first_order_convergence_on_double_rarefaction() {
    let m = gamma2();
    let (l, r) = (State::new(-0.3, 1.0), State::new(0.3, 1.0));
    let sol = solve(&m, l, r, window());
    assert_eq!(sol.kind, SolutionType::DoubleRarefaction);
    let dxs = [0.02, 0.01, 0.005, 0.0025];
    let errs: Vec<f64> = dxs
        .iter()
        .map(|&dx| compare_profiles(&run_simulation(&m, l, r, &config(dx, 1.0, FluxScheme::Rusanov)).unwrap()[0], &sol, 1.0))
        .collect();
    assert!(errs.windows(2).all(|p| p[1] < p[0]), "{errs:?}");
    let lx: Vec<f64> = dxs.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let rate = fitted_slope(&lx, &ly);
    assert!(rate >= 0.6, "rate {rate}, errors {errs:?}");
}

#[test]
fn shock_errors_shrink_under_refinement() {
    let m = gamma2();
    let (l, r) = (State::new(0.8, 1.0), State::new(-0.8, 1.0));
    let sol = solve(&m, l, r, window());
    let e: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&dx| compare_profiles(&run_simulation(&m, l, r, &config(dx, 1.0, FluxScheme::Rusanov)).unwrap()[0], &sol, 1.0))
        .collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
}

/// p-system advected at a constant rate: `F = p(v) + a u`, `G = -u + a v`,
/// eigenvalues `a -+ sqrt(-p')`, both positive for `v >= 1` and `a = 3`.
#[derive(Clone)]
struct Drifting {
    base: PSystem,
    rate: f64,
}

impl FluxModel for Drifting {
    fn contains(&self, s: State) -> bool {
        self.base.contains(s)
    }
    fn eval_unchecked(&self, s: State) -> FluxDerivs {
        let mut d = self.base.eval_unchecked(s);
        d.f += self.rate * s.u;
        d.g += self.rate * s.v;
        d.f_u += self.rate;
        d.g_v += self.rate;
        d
    }
}

#[test]
fn upwind_and_rusanov_agree_on_positive_speeds() {
    let m = Drifting { base: gamma2(), rate: 3.0 };
    let (l, r) = (State::new(0.2, 1.4), State::new(0.0, 1.1));
    let cfg = |dx: f64, scheme| SimConfig { x_min: -1.0, x_max: 7.0, dx, dt: 0.15 * dx, t_final: 1.0, flux_scheme: scheme, ..Default::default() };
    let mut gaps = Vec::new();
    for dx in [0.02, 0.01, 0.005] {
        let a = &run_simulation(&m, l, r, &cfg(dx, FluxScheme::Upwind)).unwrap()[0];
        let b = &run_simulation(&m, l, r, &cfg(dx, FluxScheme::Rusanov)).unwrap()[0];
        let gap: f64 = a.cells.iter().zip(&b.cells).map(|(x, y)| (x.u - y.u).abs() + (x.v - y.v).abs()).sum::<f64>() * dx;
        gaps.push(gap);
    }
    // the two first-order schemes differ by O(dx) in L1
    assert!(gaps[1] < 0.75 * gaps[0] && gaps[2] < 0.75 * gaps[1], "{gaps:?}");
    let sol = solve(&m, l, r, StateWindow::new(-1.0, 1.0, 1.0, 2.0).unwrap());
    let up = &run_simulation(&m, l, r, &cfg(0.005, FluxScheme::Upwind)).unwrap()[0];
    assert!(compare_profiles(up, &sol, 1.0) < 0.01);
}
