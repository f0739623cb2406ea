//! Scenario configuration: flat `key = value` text with `[section]` headers,
//! merged with command-line overrides. Unknown keys are rejected before any
//! computation starts, as is any value that would violate a module
//! precondition.

use std::fmt;
use std::path::PathBuf;

use pilotwave::eigen::eigen_energy;
use pilotwave::grid::{GridMapping, MIN_POINT_COUNT};
use pilotwave::kepler::turning_points;
use pilotwave::packet::{gaussian_coefficients, PulseModel, WeightMode};
use pilotwave::pilot::IntegratorConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "io failure: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseMode {
    PostPulse,
    TurnOn,
}

/// Fully resolved scenario parameters; one instance drives every subcommand.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub n0: u32,
    pub delta_n: f64,
    pub l: u32,
    pub weight_mode: WeightMode,
    pub pulse_mode: PulseMode,
    pub tau_p: f64,
    pub seed: u64,
    pub r_max: f64,
    pub points: usize,
    pub mapping: GridMapping,
    pub integrator: IntegratorConfig,
    pub t_start_tcl: f64,
    pub t_end_tcl: f64,
    pub samples: usize,
    pub out_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "custom".to_string(),
            n0: 40,
            delta_n: 0.75,
            l: 1,
            weight_mode: WeightMode::Uniform,
            pulse_mode: PulseMode::PostPulse,
            tau_p: 1000.0,
            seed: 42,
            r_max: 8000.0,
            points: 24000,
            mapping: GridMapping::SqrtR,
            integrator: IntegratorConfig::default(),
            t_start_tcl: 0.0,
            t_end_tcl: 1.0,
            samples: 401,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ScenarioConfig {
    pub fn pulse(&self) -> CliResult<PulseModel> {
        match self.pulse_mode {
            PulseMode::PostPulse => Ok(PulseModel::PostPulse),
            PulseMode::TurnOn => {
                PulseModel::turn_on(self.tau_p).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    /// Apply one `section.key = value` assignment.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> CliResult<()> {
        let full = format!("{section}.{key}");
        let bad = |what: &str| CliError::Config(format!("invalid {what} for key {full}: {value}"));
        match full.as_str() {
            "scenario.name" => self.name = value.to_string(),
            "scenario.n0" => self.n0 = value.parse().map_err(|_| bad("integer"))?,
            "scenario.delta_n" => self.delta_n = value.parse().map_err(|_| bad("number"))?,
            "scenario.l" => self.l = value.parse().map_err(|_| bad("integer"))?,
            "scenario.weight_mode" => {
                self.weight_mode = match value {
                    "uniform" => WeightMode::Uniform,
                    "dipole" => WeightMode::DipoleScaling,
                    _ => return Err(bad("weight mode (uniform|dipole)")),
                }
            }
            "scenario.pulse_mode" => {
                self.pulse_mode = match value {
                    "post-pulse" => PulseMode::PostPulse,
                    "turn-on" => PulseMode::TurnOn,
                    _ => return Err(bad("pulse mode (post-pulse|turn-on)")),
                }
            }
            "scenario.tau_p" => self.tau_p = value.parse().map_err(|_| bad("number"))?,
            "scenario.seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            "grid.r_max" => self.r_max = value.parse().map_err(|_| bad("number"))?,
            "grid.points" => self.points = value.parse().map_err(|_| bad("integer"))?,
            "grid.mapping" => {
                self.mapping = match value {
                    "sqrt" => GridMapping::SqrtR,
                    "uniform" => GridMapping::UniformR,
                    _ => return Err(bad("mapping (sqrt|uniform)")),
                }
            }
            "integrator.rel_tol" => {
                self.integrator.rel_tol = value.parse().map_err(|_| bad("number"))?
            }
            "integrator.abs_tol" => {
                self.integrator.abs_tol = value.parse().map_err(|_| bad("number"))?
            }
            "integrator.max_step" => {
                self.integrator.max_step = value.parse().map_err(|_| bad("number"))?
            }
            "integrator.max_step_near_node" => {
                self.integrator.max_step_near_node = value.parse().map_err(|_| bad("number"))?
            }
            "integrator.density_floor" => {
                self.integrator.density_floor = value.parse().map_err(|_| bad("number"))?
            }
            "time.t_start_tcl" => self.t_start_tcl = value.parse().map_err(|_| bad("number"))?,
            "time.t_end_tcl" => self.t_end_tcl = value.parse().map_err(|_| bad("number"))?,
            "time.samples" => self.samples = value.parse().map_err(|_| bad("integer"))?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(CliError::Config(format!("unknown config key: {full}"))),
        }
        Ok(())
    }

    /// Merge a config file in `[section]` / `key = value` form.
    pub fn merge_file(&mut self, text: &str) -> CliResult<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected key = value, got: {line}",
                    lineno + 1
                )));
            };
            if section.is_empty() {
                return Err(CliError::Config(format!(
                    "line {}: key outside any [section]",
                    lineno + 1
                )));
            }
            self.set(&section, key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Check every module precondition before any computation starts.
    pub fn validate(&self) -> CliResult<()> {
        let err = |m: String| Err(CliError::Config(m));
        if self.n0 < 2 {
            return err(format!("scenario.n0 must be >= 2, got {}", self.n0));
        }
        if !(self.delta_n > 0.0) {
            return err(format!(
                "scenario.delta_n must be positive, got {}",
                self.delta_n
            ));
        }
        if self.n0 < self.l + 1 {
            return err(format!(
                "scenario.n0 = {} is below l + 1 = {}",
                self.n0,
                self.l + 1
            ));
        }
        if self.pulse_mode == PulseMode::TurnOn && !(self.tau_p > 0.0) {
            return err(format!(
                "scenario.tau_p must be positive in turn-on mode, got {}",
                self.tau_p
            ));
        }
        if !(self.r_max > 0.0) {
            return err(format!("grid.r_max must be positive, got {}", self.r_max));
        }
        if self.points < MIN_POINT_COUNT {
            return err(format!(
                "grid.points = {} is below the minimum of {MIN_POINT_COUNT}",
                self.points
            ));
        }
        let coeffs = gaussian_coefficients(self.n0, self.delta_n, self.weight_mode, self.l)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let (_, n_hi) = coeffs.window();
        let e_top = eigen_energy(n_hi).map_err(|e| CliError::Config(e.to_string()))?;
        let l2 = (self.l * (self.l + 1)) as f64;
        let (_, r_tp) = turning_points(e_top, l2).map_err(|e| CliError::Config(e.to_string()))?;
        if self.r_max < 1.05 * r_tp {
            return err(format!(
                "grid.r_max = {} does not clear the outer turning point {:.0} of the window top \
                 state n = {n_hi}; need at least {:.0}",
                self.r_max,
                r_tp,
                1.05 * r_tp
            ));
        }
        self.integrator
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.t_end_tcl > self.t_start_tcl) {
            return err(format!(
                "time window is empty: [{}, {}] T_cl",
                self.t_start_tcl, self.t_end_tcl
            ));
        }
        if self.samples < 2 {
            return err(format!("time.samples must be >= 2, got {}", self.samples));
        }
        Ok(())
    }

    /// Resolved key/value pairs, for CSV headers and manifests.
    pub fn describe(&self) -> Vec<(String, String)> {
        let g = |v: f64| format!("{v}");
        vec![
            ("scenario.name".into(), self.name.clone()),
            ("scenario.n0".into(), self.n0.to_string()),
            ("scenario.delta_n".into(), g(self.delta_n)),
            ("scenario.l".into(), self.l.to_string()),
            (
                "scenario.weight_mode".into(),
                match self.weight_mode {
                    WeightMode::Uniform => "uniform".into(),
                    WeightMode::DipoleScaling => "dipole".into(),
                },
            ),
            (
                "scenario.pulse_mode".into(),
                match self.pulse_mode {
                    PulseMode::PostPulse => "post-pulse".into(),
                    PulseMode::TurnOn => "turn-on".into(),
                },
            ),
            ("scenario.tau_p".into(), g(self.tau_p)),
            ("scenario.seed".into(), self.seed.to_string()),
            ("grid.r_max".into(), g(self.r_max)),
            ("grid.points".into(), self.points.to_string()),
            (
                "grid.mapping".into(),
                match self.mapping {
                    GridMapping::SqrtR => "sqrt".into(),
                    GridMapping::UniformR => "uniform".into(),
                },
            ),
            ("integrator.rel_tol".into(), g(self.integrator.rel_tol)),
            ("integrator.abs_tol".into(), g(self.integrator.abs_tol)),
            ("integrator.max_step".into(), g(self.integrator.max_step)),
            (
                "integrator.max_step_near_node".into(),
                g(self.integrator.max_step_near_node),
            ),
            (
                "integrator.density_floor".into(),
                g(self.integrator.density_floor),
            ),
            ("time.t_start_tcl".into(), g(self.t_start_tcl)),
            ("time.t_end_tcl".into(), g(self.t_end_tcl)),
            ("time.samples".into(), self.samples.to_string()),
            // output.dir is deliberately omitted: data files must be
            // byte-identical for identical physics regardless of where they
            // land.
            ("code.version".into(), env!("CARGO_PKG_VERSION").into()),
        ]
    }
}
