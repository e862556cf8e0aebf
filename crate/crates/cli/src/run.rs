//! Command dispatch. Every command writes its files into the configured
//! output directory and returns their paths.

use crate::config::{ExperimentConfig, ModelConfig, PlfConfig, PlfFlux};
use crate::error::{CliError, Result};
use hyperstab::approx::{approx_error_c2, sample_plan, C2Error, FitConfig, GhostRule};
use hyperstab::flux::{check_assumptions, AssumptionReport};
use hyperstab::fvm::{compare_profiles, run_simulation, write_snapshot_csv, SimConfig};
use hyperstab::io::{read_flux_table_csv, write_flux_table_csv, write_json};
use hyperstab::models::{build_flux_table, fit_flux_table, plf_model, PSystem, PlfFit, PlfFluxTable, Pressure};
use hyperstab::riemann::{fan_samples, solve_riemann, write_fan_csv, RiemannProblem, SolutionRecord};
use hyperstab::stability::{genericity_sample, structural_stability_experiment, write_failures_csv};
use hyperstab::wave::{trace_hugoniot, wave_curve, write_curves_csv, CurveRow, WaveRole};
use hyperstab::{FluxModel, State, StateWindow};
use serde::Serialize;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Check,
    Trace,
    Solve,
    Stability,
    Genericity,
    PlfTable,
    Fit,
    Simulate,
    Compare,
}

pub type DynModel = Arc<dyn FluxModel>;

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let w = self.create(name)?;
        write_json(w, value)?;
        Ok(())
    }
}

fn read_table(path: &Path) -> Result<PlfFluxTable> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(read_flux_table_csv(f)?)
}

fn plf_table(p: &PlfConfig) -> Result<PlfFluxTable> {
    match &p.table {
        Some(path) => read_table(path),
        None => Ok(build_flux_table(&p.params, p.n_grid, &p.profile)?),
    }
}

fn plf_fit(p: &PlfConfig, table: &PlfFluxTable, cfg: &ExperimentConfig) -> Result<PlfFit> {
    let plan = sample_plan(p.params.phi_c, p.params.phi_m, cfg.fit.window_frac, cfg.fit.triplet_frac)?;
    Ok(fit_flux_table(table, &p.params, &plan, &FitConfig { lambda: cfg.fit.lambda })?)
}

pub fn build_model(cfg: &ExperimentConfig) -> Result<DynModel> {
    match &cfg.model {
        ModelConfig::Psystem(p) => Ok(Arc::new(PSystem::new(Pressure::Power { coef: p.coef, exponent: p.exponent }))),
        ModelConfig::Plf(p) => {
            let table = plf_table(p)?;
            match p.flux {
                PlfFlux::Spline => {
                    let (f, g) = table.splines(GhostRule::default())?;
                    Ok(Arc::new(plf_model(f, g)))
                }
                PlfFlux::Poly => {
                    let fit = plf_fit(p, &table, cfg)?;
                    Ok(Arc::new(plf_model(fit.f, fit.g)))
                }
            }
        }
        ModelConfig::Table(t) => {
            let (f, g) = read_table(&t.path)?.splines(GhostRule::default())?;
            Ok(Arc::new(plf_model(f, g)))
        }
    }
}

fn plf_only(cfg: &ExperimentConfig) -> Result<&PlfConfig> {
    match &cfg.model {
        ModelConfig::Plf(p) => Ok(p),
        _ => Err(CliError::Config("this command needs model.kind = \"plf\"".into())),
    }
}

fn problem(cfg: &ExperimentConfig, model: &DynModel) -> Result<RiemannProblem<DynModel>> {
    let (l, r) = cfg.riemann_states()?;
    Ok(RiemannProblem::new(model.clone(), l, r, cfg.window)?)
}

#[derive(Serialize)]
struct CheckReport<'a> {
    all_pass: bool,
    #[serde(flatten)]
    report: &'a AssumptionReport,
}

#[derive(Serialize)]
struct SolveReport {
    left: State,
    right: State,
    #[serde(flatten)]
    record: SolutionRecord,
}

#[derive(Serialize)]
struct FitReport<'a> {
    lambda: f64,
    f: &'a hyperstab::approx::PiecewisePolyFlux,
    g: &'a hyperstab::approx::PiecewisePolyFlux,
    f_diagnostics: &'a hyperstab::approx::FitDiagnostics,
    g_diagnostics: &'a hyperstab::approx::FitDiagnostics,
    max_constraint_residual: f64,
    /// Sup-norm differences from the table spline.
    f_error: C2Error,
    g_error: C2Error,
}

#[derive(Serialize)]
struct SnapshotIndex {
    times: Vec<f64>,
    files: Vec<String>,
    dx: f64,
    cells: usize,
}

#[derive(Serialize)]
struct CompareReport {
    #[serde(rename = "type")]
    kind: String,
    t: f64,
    dx: f64,
    relative_l1: f64,
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    let mut out = Output { dir: cfg.output_dir.clone(), files: Vec::new() };
    match command {
        Command::Check => {
            let model = build_model(cfg)?;
            let report = check_assumptions(&model, &cfg.window, cfg.check.grid_n, &cfg.check.tolerances)?;
            out.json("assumptions.json", &CheckReport { all_pass: report.all_pass(), report: &report })?;
        }
        Command::Trace => {
            let model = build_model(cfg)?;
            let (l, r) = cfg.riemann_states()?;
            let mut rows = Vec::new();
            for (given, role) in [(l, WaveRole::Forward1), (r, WaveRole::Backward2)] {
                rows.extend(CurveRow::from_wave_curve(&wave_curve(&model, given, role, &cfg.window, &cfg.solve.curves)?));
            }
            write_curves_csv(out.create("curves.csv")?, &rows)?;
            if cfg.trace.full_loci {
                let step = cfg.solve.curves.step_for(&cfg.window);
                let mut loci = Vec::new();
                for given in [l, r] {
                    for b in trace_hugoniot(&model, given, &cfg.window, step)? {
                        loci.extend(CurveRow::from_branch(&b));
                    }
                }
                write_curves_csv(out.create("loci.csv")?, &loci)?;
            }
        }
        Command::Solve => {
            let model = build_model(cfg)?;
            let p = problem(cfg, &model)?;
            let sol = solve_riemann(&p, &cfg.solve)?;
            out.json("solution.json", &SolveReport { left: sol.left, right: sol.right, record: sol.to_record() })?;
            write_fan_csv(out.create("fan.csv")?, &sol, &fan_samples(&sol, 401))?;
        }
        Command::Stability => {
            let st = cfg.stability.as_ref().ok_or_else(|| CliError::Config("stability needs a [stability] block".into()))?;
            let model = build_model(cfg)?;
            let p = problem(cfg, &model)?;
            let report = structural_stability_experiment(&p, &st.bump, st.state_deltas, &st.eps, &cfg.solve)?;
            out.json("stability.json", &report)?;
        }
        Command::Genericity => {
            let model = build_model(cfg)?;
            let window = StateWindow { margin: cfg.genericity.margin.unwrap_or(cfg.window.margin), ..cfg.window };
            let stats = genericity_sample(&model, &window, cfg.genericity.samples, cfg.seed, &cfg.solve)?;
            out.json("genericity.json", &stats)?;
            write_failures_csv(out.create("failures.csv")?, &stats)?;
        }
        Command::PlfTable => {
            let table = plf_table(plf_only(cfg)?)?;
            write_flux_table_csv(out.create("flux_table.csv")?, &table)?;
        }
        Command::Fit => {
            let p = plf_only(cfg)?;
            let table = plf_table(p)?;
            let fit = plf_fit(p, &table, cfg)?;
            let (fs, gs) = table.splines(GhostRule::default())?;
            let report = FitReport {
                lambda: cfg.fit.lambda,
                f: &fit.f,
                g: &fit.g,
                f_diagnostics: &fit.f_diagnostics,
                g_diagnostics: &fit.g_diagnostics,
                max_constraint_residual: fit.f_diagnostics.max_constraint_residual().max(fit.g_diagnostics.max_constraint_residual()),
                f_error: approx_error_c2(&fit.f, &fs, 2000),
                g_error: approx_error_c2(&fit.g, &gs, 2000),
            };
            out.json("fit.json", &report)?;
        }
        Command::Simulate => {
            let model = build_model(cfg)?;
            let (l, r) = cfg.riemann_states()?;
            let snaps = run_simulation(&model, l, r, &cfg.simulate)?;
            let mut index = SnapshotIndex { times: Vec::new(), files: Vec::new(), dx: 0.0, cells: 0 };
            for (i, s) in snaps.iter().enumerate() {
                let name = format!("snapshot_{i:03}.csv");
                write_snapshot_csv(out.create(&name)?, s)?;
                index.times.push(s.t);
                index.files.push(name);
                index.dx = s.dx;
                index.cells = s.cells.len();
            }
            out.json("snapshots.json", &index)?;
        }
        Command::Compare => {
            let model = build_model(cfg)?;
            let p = problem(cfg, &model)?;
            let sol = solve_riemann(&p, &cfg.solve)?;
            let snaps = run_simulation(&model, p.left, p.right, &SimConfig { snapshots: Vec::new(), ..cfg.simulate.clone() })?;
            let last = &snaps[snaps.len() - 1];
            out.json(
                "compare.json",
                &CompareReport {
                    kind: sol.kind.to_string(),
                    t: last.t,
                    dx: last.dx,
                    relative_l1: compare_profiles(last, &sol, last.t),
                },
            )?;
        }
    }
    Ok(out.files)
}

/// Loads the config, applies overrides and the full-scale switch, then
/// runs the command.
pub fn run_from_path(command: Command, path: &Path, overrides: &[String], full_scale: bool) -> Result<Vec<PathBuf>> {
    let mut cfg = ExperimentConfig::from_path(path, overrides)?;
    if full_scale {
        let p = SimConfig::full_scale();
        cfg.simulate = SimConfig { x_min: p.x_min, x_max: p.x_max, dx: p.dx, dt: p.dt, t_final: p.t_final, ..cfg.simulate };
        cfg.simulate.validate()?;
    }
    run(command, &cfg)
}
