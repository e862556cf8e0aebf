//! Experiment configuration: one TOML file per experiment, with dotted
//! `key=value` overrides applied before validation.

use crate::error::{CliError, Result};
use hyperstab::approx::FitConfig;
use hyperstab::flux::Tolerances;
use hyperstab::fvm::SimConfig;
use hyperstab::models::{PlfParams, ProfileOptions};
use hyperstab::riemann::SolveOptions;
use hyperstab::stability::{BumpPerturbation, DEFAULT_EPS_LADDER};
use hyperstab::{State, StateWindow};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub model: ModelConfig,
    pub window: StateWindow,
    #[serde(default)]
    pub riemann: Option<RiemannData>,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub trace: TraceConfig,
    #[serde(default)]
    pub stability: Option<StabilityConfig>,
    #[serde(default)]
    pub genericity: GenericityConfig,
    #[serde(default)]
    pub fit: FitBlock,
    #[serde(default)]
    pub simulate: SimConfig,
}

fn default_seed() -> u64 {
    2024
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Psystem(PsystemConfig),
    Plf(PlfConfig),
    Table(TableConfig),
}

/// Spline closure of a bare `(phi0, f, g)` table, with no film parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub path: PathBuf,
}

/// `p(v) = coef * v^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsystemConfig {
    #[serde(default = "one")]
    pub coef: f64,
    #[serde(default = "minus_two")]
    pub exponent: f64,
}

fn one() -> f64 {
    1.0
}

fn minus_two() -> f64 {
    -2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlfFlux {
    #[default]
    Spline,
    Poly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlfConfig {
    pub params: PlfParams,
    #[serde(default)]
    pub flux: PlfFlux,
    /// Flux-table CSV to read instead of building one; relative paths are
    /// taken from the config file's directory.
    #[serde(default)]
    pub table: Option<PathBuf>,
    /// Number of grid cells on `[0, phi_m]` when the table is built.
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
    #[serde(default)]
    pub profile: ProfileOptions,
}

fn default_n_grid() -> usize {
    610
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannData {
    pub left: [f64; 2],
    pub right: [f64; 2],
}

impl RiemannData {
    pub fn states(&self) -> (State, State) {
        (State::new(self.left[0], self.left[1]), State::new(self.right[0], self.right[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub grid_n: usize,
    pub tolerances: Tolerances,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { grid_n: 25, tolerances: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceConfig {
    /// Also write all four Hugoniot half-branches of both states,
    /// inadmissible parts included.
    pub full_loci: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub bump: BumpPerturbation,
    /// Shifts `(du_l, dv_l, du_r, dv_r)` of the end states per unit eps.
    #[serde(default)]
    pub state_deltas: [f64; 4],
    #[serde(default = "default_ladder")]
    pub eps: Vec<f64>,
}

fn default_ladder() -> Vec<f64> {
    DEFAULT_EPS_LADDER.to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenericityConfig {
    pub samples: usize,
    /// Replaces the window margin for sampling when set.
    pub margin: Option<f64>,
}

impl Default for GenericityConfig {
    fn default() -> Self {
        GenericityConfig { samples: 500, margin: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitBlock {
    pub lambda: f64,
    pub window_frac: f64,
    pub triplet_frac: f64,
}

impl Default for FitBlock {
    fn default() -> Self {
        FitBlock { lambda: FitConfig::default().lambda, window_frac: 0.05, triplet_frac: 0.1 }
    }
}

impl ExperimentConfig {
    /// Parses TOML text, applies overrides in order, then validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        for o in overrides {
            let (path, v) = crate::overrides::parse_override(o)?;
            crate::overrides::apply(&mut value, &path, v)?;
        }
        let cfg: ExperimentConfig =
            toml::Value::Table(value).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        match &mut cfg.model {
            ModelConfig::Plf(PlfConfig { table: Some(t), .. }) | ModelConfig::Table(TableConfig { path: t }) if t.is_relative() => {
                *t = base.join(&*t);
            }
            _ => {}
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        match &self.model {
            ModelConfig::Psystem(p) => {
                if !(p.coef > 0.0 && p.coef.is_finite() && p.exponent < 0.0 && p.exponent.is_finite()) {
                    return Err(CliError::Config("p-system needs coef > 0 and exponent < 0".into()));
                }
            }
            ModelConfig::Plf(p) => {
                p.params.validate()?;
                if p.n_grid < 4 {
                    return Err(CliError::Config("model.n_grid must be at least 4".into()));
                }
            }
            ModelConfig::Table(_) => {}
        }
        if let Some(r) = &self.riemann {
            if r.left.iter().chain(&r.right).any(|x| !x.is_finite()) {
                return Err(CliError::Config("riemann states must be finite".into()));
            }
        }
        if let Some(s) = &self.stability {
            s.bump.validate()?;
            if s.eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(CliError::Config("stability.eps entries must be finite and nonnegative".into()));
            }
        }
        if let Some(m) = self.genericity.margin {
            if !(0.0..0.5).contains(&m) {
                return Err(CliError::Config(format!("genericity.margin must lie in [0, 0.5), got {m}")));
            }
        }
        if !(self.fit.lambda >= 0.0 && self.fit.lambda.is_finite()) {
            return Err(CliError::Config("fit.lambda must be finite and nonnegative".into()));
        }
        self.simulate.validate()?;
        Ok(())
    }

    pub fn riemann_states(&self) -> Result<(State, State)> {
        self.riemann.map(|r| r.states()).ok_or_else(|| CliError::Config("this command needs a [riemann] block".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[model]\nkind = \"psystem\"\n[window]\nu_min = -1.0\nu_max = 1.0\nv_min = 0.5\nv_max = 2.0\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.seed, 2024);
        assert_eq!(cfg.model, ModelConfig::Psystem(PsystemConfig { coef: 1.0, exponent: -2.0 }));
        assert!(cfg.riemann.is_none() && cfg.stability.is_none());
        assert!(cfg.riemann_states().is_err());
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        for extra in ["bogus = 1\n", "[model.extra]\nx = 1\n", "[check]\ngrid = 3\n", "[simulate]\nsteps = 3\n"] {
            let text = if extra.starts_with('[') { format!("{MINIMAL}{extra}") } else { format!("{extra}{MINIMAL}") };
            assert!(ExperimentConfig::from_toml_str(&text, &[]).is_err(), "{extra}");
        }
        let err = ExperimentConfig::from_toml_str(MINIMAL, &["model.gamma=1.4".into()]).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn plf_params_are_mandatory() {
        let text = MINIMAL.replace("psystem", "plf");
        assert!(ExperimentConfig::from_toml_str(&text, &[]).is_err());
    }

    #[test]
    fn overrides_change_values_and_revalidate() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL, &["seed=7".into(), "riemann.left=[0.1, 1.0]".into(), "riemann.right=[0.2, 1.0]".into()]).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.riemann_states().unwrap().1, State::new(0.2, 1.0));
        assert!(ExperimentConfig::from_toml_str(MINIMAL, &["model.exponent=0.5".into()]).is_err());
        assert!(ExperimentConfig::from_toml_str(MINIMAL, &["genericity.margin=0.7".into()]).is_err());
    }

    #[test]
    fn shipped_recipes_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut n = 0;
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.extension().is_some_and(|x| x == "toml") {
                ExperimentConfig::from_path(&path, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                n += 1;
            }
        }
        assert!(n >= 6);
    }
}
