use std::fmt;
use std::path::{Path, PathBuf};

use disperse_core::constants::{ELECTRON_MASS, ELEMENTARY_CHARGE};
use disperse_core::{
    BohmTerm, BranchId, DerivedScales, InitShape, OracleConfig, SolverConfig, SpeciesParams,
    Statistics,
};
use serde::{Deserialize, Serialize};

/// Config or validation failure; the message names the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(field: &str, reason: impl fmt::Display) -> Result<T, ConfigError> {
    Err(ConfigError(format!("{field}: {reason}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "si", or "reduced": k in Ω_p/v_ch, ω and η in Ω_p.
    #[serde(default = "default_units")]
    pub units: String,
    pub branches: Vec<String>,
    pub species: SpeciesSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub hooks: HooksSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Statistics table of a summary file; ignored on input.
    #[serde(default, skip_serializing)]
    pub summary: Option<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_charge")]
    pub charge: f64,
    #[serde(default = "default_gamma")]
    pub spin_degeneracy: u32,
    pub density: f64,
    pub temperature: f64,
    #[serde(default = "default_statistics")]
    pub statistics: String,
    #[serde(default)]
    pub degenerate_limit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub k_min: f64,
    pub k_max: f64,
    pub n_points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// "continuation" follows one root along k; "dominant" reports the
    /// least-damped root from every seed at each k.
    pub mode: String,
    pub abs_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub continuation: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            mode: "continuation".into(),
            abs_tol: d.abs_tol,
            max_iter: d.max_iter,
            fd_step: d.fd_step,
            continuation: d.continuation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub enabled: bool,
    /// Run the oracle at every Nth k of the sweep.
    pub subsample: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    pub n_v: usize,
    pub dt: f64,
    pub t_end: f64,
    pub init_shape: String,
    pub amplitude: f64,
    pub edge_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_guess: Option<f64>,
}

impl Default for OracleSection {
    fn default() -> Self {
        let d = OracleConfig::default();
        Self {
            enabled: false,
            subsample: 1,
            v_max: d.v_max,
            n_v: d.n_v,
            dt: d.dt,
            t_end: d.t_end,
            init_shape: "uniform_density_kick".into(),
            amplitude: d.amplitude,
            edge_width: d.edge_width,
            omega_guess: d.omega_guess,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HooksSection {
    pub bohm_term: String,
}

impl Default for HooksSection {
    fn default() -> Self {
        Self { bohm_term: "on".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: PathBuf,
    /// Significant digits of every number in the CSV.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { path: PathBuf::from("disperse_out"), precision: 17 }
    }
}

fn default_units() -> String {
    "si".into()
}
fn default_mass() -> f64 {
    ELECTRON_MASS
}
fn default_charge() -> f64 {
    -ELEMENTARY_CHARGE
}
fn default_gamma() -> u32 {
    2
}
fn default_statistics() -> String {
    "fermi".into()
}
fn default_spacing() -> String {
    "linear".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Si,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Continuation,
    Dominant,
}

/// Everything a run needs, checked and in SI units.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: RunConfig,
    pub scales: DerivedScales,
    pub units: Units,
    pub k_grid: Vec<f64>,
    pub branches: Vec<BranchId>,
    pub solver: SolverConfig,
    pub mode: SolveMode,
    pub oracle: Option<OracleConfig>,
    pub subsample: usize,
    pub output_dir: PathBuf,
    pub precision: usize,
}

impl Plan {
    /// k unit: Ω_p/v_ch in reduced units.
    pub fn k_unit(&self) -> f64 {
        match self.units {
            Units::Si => 1.0,
            Units::Reduced => self.scales.omega_p / self.scales.v_ch,
        }
    }

    pub fn omega_unit(&self) -> f64 {
        match self.units {
            Units::Si => 1.0,
            Units::Reduced => self.scales.omega_p,
        }
    }

    pub fn velocity_unit(&self) -> f64 {
        match self.units {
            Units::Si => 1.0,
            Units::Reduced => self.scales.v_ch,
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => lo,
            i if i == n - 1 => hi,
            _ => x.exp(),
        })
        .collect()
}

/// Check `config` and resolve it; `output_dir` overrides `output.path` and
/// is written back so the resolved config reproduces the run.
pub fn resolve(mut config: RunConfig, output_dir: Option<&Path>) -> Result<Plan, ConfigError> {
    if let Some(dir) = output_dir {
        config.output.path = dir.to_path_buf();
    }
    config.summary = None;

    let units = match config.units.as_str() {
        "si" => Units::Si,
        "reduced" => Units::Reduced,
        other => return fail("units", format!("unknown units `{other}` (expected si or reduced)")),
    };

    let sp = &config.species;
    let statistics = match sp.statistics.as_str() {
        "fermi" => Statistics::Fermi,
        "bose" => Statistics::Bose,
        other => {
            return fail("species.statistics", format!("unknown statistics `{other}` (expected fermi or bose)"))
        }
    };
    let bohm = match config.hooks.bohm_term.as_str() {
        "on" => BohmTerm::On,
        "off" => BohmTerm::Off,
        other => return fail("hooks.bohm_term", format!("unknown setting `{other}` (expected on or off)")),
    };
    let species = SpeciesParams::new(sp.mass, sp.charge, sp.spin_degeneracy, sp.density, sp.temperature, statistics)
        .and_then(|s| s.with_degenerate_limit(sp.degenerate_limit))
        .map_err(|e| ConfigError(format!("species: {e}")))?;
    let scales = DerivedScales::with_bohm(&species, bohm).map_err(|e| ConfigError(format!("species: {e}")))?;
    if units == Units::Reduced && !(scales.omega_p > 0.0) {
        return fail("units", "reduced units need a charged species (Ω_p > 0)");
    }

    let sw = &config.sweep;
    let spacing = sw.spacing.as_str();
    if spacing != "linear" && spacing != "log" {
        return fail("sweep.spacing", format!("unknown spacing `{spacing}` (expected linear or log)"));
    }
    if sw.n_points < 2 {
        return fail("sweep.n_points", format!("need at least 2 points, got {}", sw.n_points));
    }
    if !(sw.k_min > 0.0) || !sw.k_max.is_finite() {
        return fail("sweep.k_min", "need 0 < k_min and a finite k_max");
    }
    if !(sw.k_min < sw.k_max) {
        return fail("sweep.k_max", format!("need k_min < k_max, got {} >= {}", sw.k_min, sw.k_max));
    }
    let k_unit = match units {
        Units::Si => 1.0,
        Units::Reduced => scales.omega_p / scales.v_ch,
    };
    let (lo, hi) = (sw.k_min * k_unit, sw.k_max * k_unit);
    let k_grid = if spacing == "log" {
        logspace(lo, hi, sw.n_points)
    } else {
        linspace(lo, hi, sw.n_points)
    };
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return fail("sweep", "k grid is not strictly increasing at double precision");
    }

    if config.branches.is_empty() {
        return fail("branches", "at least one branch is required");
    }
    let mut branches = Vec::new();
    for name in &config.branches {
        let Some(b) = BranchId::from_name(name) else {
            let known: Vec<_> = BranchId::ALL.iter().map(|b| b.name()).collect();
            return fail("branches", format!("unknown branch `{name}` (expected one of {})", known.join(", ")));
        };
        if branches.contains(&b) {
            return fail("branches", format!("branch `{name}` listed twice"));
        }
        b.check_compatible(&scales).map_err(|e| ConfigError(format!("branches: {e}")))?;
        branches.push(b);
    }

    let so = &config.solver;
    let mode = match so.mode.as_str() {
        "continuation" => SolveMode::Continuation,
        "dominant" => SolveMode::Dominant,
        other => return fail("solver.mode", format!("unknown mode `{other}` (expected continuation or dominant)")),
    };
    let solver = SolverConfig {
        abs_tol: so.abs_tol,
        max_iter: so.max_iter,
        fd_step: so.fd_step,
        continuation: so.continuation,
    };
    solver.validate().map_err(|e| ConfigError(format!("solver: {e}")))?;

    let or = &config.oracle;
    if or.subsample < 1 {
        return fail("oracle.subsample", "must be at least 1");
    }
    let init_shape = match or.init_shape.as_str() {
        "uniform_density_kick" => InitShape::UniformDensityKick,
        "maxwellian_shaped" => InitShape::MaxwellianShaped,
        other => {
            return fail(
                "oracle.init_shape",
                format!("unknown shape `{other}` (expected uniform_density_kick or maxwellian_shaped)"),
            )
        }
    };
    let omega_unit = match units {
        Units::Si => 1.0,
        Units::Reduced => scales.omega_p,
    };
    let oracle_config = OracleConfig {
        v_max: or.v_max,
        n_v: or.n_v,
        dt: or.dt,
        t_end: or.t_end,
        init_shape,
        amplitude: or.amplitude,
        edge_width: or.edge_width,
        omega_guess: or.omega_guess.map(|w| w * omega_unit),
    };
    oracle_config.validate().map_err(|e| ConfigError(format!("oracle: {e}")))?;
    let oracle = or.enabled.then_some(oracle_config);

    let precision = config.output.precision;
    if !(1..=17).contains(&precision) {
        return fail("output.precision", format!("need 1 to 17 digits, got {precision}"));
    }

    Ok(Plan {
        output_dir: config.output.path.clone(),
        subsample: or.subsample,
        config,
        scales,
        units,
        k_grid,
        branches,
        solver,
        mode,
        oracle,
        precision,
    })
}
