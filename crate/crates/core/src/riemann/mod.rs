//! Riemann solutions from intersections of wave curves.

mod fan;
mod intersect;
mod solve;

pub use fan::{evaluate_fan, fan_samples, write_fan_csv, SolutionRecord, WaveRecord};
pub use intersect::{
    curve_set, intersect_curves, polyline_crossings, uniqueness_scan, CurveSet, IntersectionRecord, PairKind, PartLabel,
};
pub use solve::{
    solve_riemann, NearestApproach, NoSolutionReport, RiemannProblem, RiemannSolution, SolutionType, SolveOptions, Wave,
};
