use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use qiopa_core::protocols::BellOutcome;

/// Largest cutoff a run accepts. Dense operators at this size still fit in
/// memory and finish in minutes on one core.
pub const MAX_CUTOFF: usize = 400;

/// JSON Schema of [`ExperimentConfig`].
pub const SCHEMA: &str = include_str!("../schema/experiment-config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Macrostate,
    MicroMacro,
    Swap,
    DoubleAmp,
    Wigner,
    Chsh,
    Fringe,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Macrostate => "macrostate",
            Protocol::MicroMacro => "micro-macro",
            Protocol::Swap => "swap",
            Protocol::DoubleAmp => "double-amp",
            Protocol::Wigner => "wigner",
            Protocol::Chsh => "chsh",
            Protocol::Fringe => "fringe",
        }
    }

    /// Stem shared by the output files of a run.
    pub fn file_stem(self) -> String {
        self.name().replace('-', "_")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sample,
    #[default]
    Enumerate,
}

/// State handed to the correlation analyzers of `chsh` and `fringe`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// The SPDC singlet with both photons unamplified.
    MicroSinglet,
    MicroMacro,
    /// Post-swap Macro-Macro state for `outcome` (default psi-minus).
    Swap,
    DoubleAmp,
    /// |Φ^φ⟩ ⊗ |Φ^φ⊥⟩, a separable reference.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FilterSites {
    #[default]
    B,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Set by the subcommand; a config file may name it too.
    pub protocol: Option<Protocol>,
    pub gain: f64,
    /// Gain of the second amplifier; defaults to `gain`.
    pub gain_b: Option<f64>,
    pub phase: f64,
    pub cutoff: usize,
    pub injection: u32,
    pub samples: usize,
    pub seed: u64,
    pub of_reflectivity: f64,
    /// Threshold k; the O-Filter is only inserted when this is set.
    pub of_threshold: Option<usize>,
    pub of_phase: f64,
    pub of_sites: FilterSites,
    /// `chsh`: a, a′, b, b′. `fringe`: the fixed site-A phase.
    pub settings: Option<Vec<f64>>,
    pub scan_points: usize,
    pub out: PathBuf,
    pub mode: Mode,
    /// Bell outcome label, or `all`.
    pub outcome: Option<String>,
    pub oracle: bool,
    pub state: Option<StateKind>,
    pub grid_points: usize,
    pub grid_extent: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            protocol: None,
            gain: 0.5,
            gain_b: None,
            phase: 0.0,
            cutoff: 40,
            injection: 1,
            samples: 10_000,
            seed: 42,
            of_reflectivity: 0.1,
            of_threshold: None,
            of_phase: 0.0,
            of_sites: FilterSites::B,
            settings: None,
            scan_points: 25,
            out: PathBuf::from("qiopa-out"),
            mode: Mode::Enumerate,
            outcome: None,
            oracle: false,
            state: None,
            grid_points: 101,
            grid_extent: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, "must be a finite number"))
    }
}

fn gain_value(field: &str, g: f64) -> Result<(), ConfigError> {
    finite(field, g)?;
    if g < 0.0 {
        return Err(ConfigError::new(field, format!("must be non-negative, got {g}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            let message = e.to_string();
            // serde names the offending key in backquotes
            let field = message
                .split('`')
                .nth(1)
                .filter(|_| message.contains("field"))
                .unwrap_or("config")
                .to_string();
            ConfigError::new(field, message)
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn gain_b(&self) -> f64 {
        self.gain_b.unwrap_or(self.gain)
    }

    /// Outcomes selected by `outcome`; `None` and `all` give all four.
    pub fn outcomes(&self) -> Result<Vec<BellOutcome>, ConfigError> {
        match self.outcome.as_deref() {
            None | Some("all") => Ok(BellOutcome::ALL.to_vec()),
            Some(label) => BellOutcome::parse(label)
                .map(|o| vec![o])
                .map_err(|_| ConfigError::new("outcome", format!("unknown Bell outcome {label:?}; expected phi-plus, phi-minus, psi-plus, psi-minus or all"))),
        }
    }

    /// Checks every field, naming the first bad one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        gain_value("gain", self.gain)?;
        if let Some(g) = self.gain_b {
            gain_value("gain_b", g)?;
        }
        finite("phase", self.phase)?;
        if self.cutoff < 1 {
            return Err(ConfigError::new("cutoff", "must be at least 1"));
        }
        if self.cutoff > MAX_CUTOFF {
            return Err(ConfigError::new(
                "cutoff",
                format!("{} exceeds the desk-scale limit {MAX_CUTOFF}", self.cutoff),
            ));
        }
        if !matches!(self.injection, 1 | 2) {
            return Err(ConfigError::new("injection", format!("must be 1 or 2, got {}", self.injection)));
        }
        if self.samples < 1 {
            return Err(ConfigError::new("samples", "must be at least 1"));
        }
        finite("of_reflectivity", self.of_reflectivity)?;
        if !(0.0..1.0).contains(&self.of_reflectivity) {
            return Err(ConfigError::new("of_reflectivity", format!("must lie in [0, 1), got {}", self.of_reflectivity)));
        }
        finite("of_phase", self.of_phase)?;
        if let Some(settings) = &self.settings {
            for &v in settings {
                finite("settings", v)?;
            }
            match self.protocol {
                Some(Protocol::Chsh) => {
                    if settings.len() != 4 {
                        return Err(ConfigError::new("settings", format!("chsh takes four phases a, a', b, b'; got {}", settings.len())));
                    }
                    if settings[0] == settings[1] || settings[2] == settings[3] {
                        return Err(ConfigError::new("settings", "each site needs two distinct phases"));
                    }
                }
                Some(Protocol::Fringe) if settings.len() != 1 => {
                    return Err(ConfigError::new("settings", format!("fringe takes one fixed site-A phase; got {}", settings.len())));
                }
                _ => {}
            }
        }
        if self.scan_points < 2 {
            return Err(ConfigError::new("scan_points", "must be at least 2"));
        }
        if self.grid_points < 1 {
            return Err(ConfigError::new("grid_points", "must be at least 1"));
        }
        finite("grid_extent", self.grid_extent)?;
        if self.grid_extent <= 0.0 {
            return Err(ConfigError::new("grid_extent", "must be positive"));
        }
        if self.out.as_os_str().is_empty() {
            return Err(ConfigError::new("out", "must not be empty"));
        }
        self.outcomes()?;
        Ok(())
    }
}

/// Command-line overrides; each flag sets the config field of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Amplifier gain g.
    #[arg(long, allow_negative_numbers = true)]
    pub gain: Option<f64>,
    /// Gain of the second amplifier (double-amp, validate).
    #[arg(long, allow_negative_numbers = true)]
    pub gain_b: Option<f64>,
    /// Equatorial phase φ of the macro-qubit basis.
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,
    /// Photon-number cutoff per polarization mode.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Injected photons for the Wigner surface (1 or 2).
    #[arg(long)]
    pub injection: Option<u32>,
    /// Samples per correlation in sample mode.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// O-Filter tap reflectivity R.
    #[arg(long = "of-r", allow_negative_numbers = true)]
    pub of_reflectivity: Option<f64>,
    /// O-Filter threshold k; inserts the filter.
    #[arg(long = "of-k")]
    pub of_threshold: Option<usize>,
    /// Equatorial phase of the filter's counting basis.
    #[arg(long, allow_negative_numbers = true)]
    pub of_phase: Option<f64>,
    /// Sites the filter guards.
    #[arg(long, value_enum)]
    pub of_sites: Option<FilterSites>,
    /// Comma-separated analyzer phases.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub settings: Option<Vec<f64>>,
    /// Phases per fringe scan.
    #[arg(long)]
    pub scan_points: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR", env = "QIOPA_OUT_DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Bell outcome for swap: phi-plus, phi-minus, psi-plus, psi-minus or all.
    #[arg(long)]
    pub outcome: Option<String>,
    /// Also evaluate the displaced-parity oracle (wigner).
    #[arg(long)]
    pub oracle: bool,
    /// State analysed by chsh and fringe.
    #[arg(long, value_enum, alias = "protocol")]
    pub state: Option<StateKind>,
    /// Nodes per axis of the Wigner slice.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Half-width of the Wigner slice.
    #[arg(long)]
    pub grid_extent: Option<f64>,
}

impl Flags {
    /// Config file (if any) with these flags applied on top.
    pub fn resolve(&self, protocol: Option<Protocol>) -> Result<ExperimentConfig, ConfigError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let (Some(file), Some(cmd)) = (c.protocol, protocol) {
            if file != cmd {
                return Err(ConfigError::new(
                    "protocol",
                    format!("config file is for {}, not {}", file.name(), cmd.name()),
                ));
            }
        }
        if protocol.is_some() {
            c.protocol = protocol;
        }
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone(); })*
            };
        }
        set!(gain, phase, cutoff, injection, samples, seed, of_reflectivity, of_phase, of_sites, scan_points, out, mode, grid_points, grid_extent);
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if self.$field.is_some() { c.$field = self.$field.clone(); })*
            };
        }
        set_opt!(gain_b, of_threshold, settings, outcome, state);
        if self.oracle {
            c.oracle = true;
        }
        c.validate()?;
        Ok(c)
    }
}
