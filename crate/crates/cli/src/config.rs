//! Run configuration: TOML with unit-suffixed physical quantities.

use std::path::{Path, PathBuf};

use rsn_core::analysis::RegimeThresholds;
use rsn_core::energetics::{HierarchyTier, PiezoStack};
use rsn_core::magnet::{MagnetSpec, StressPolicy};
use rsn_core::sllg::{InitialState, Integrator, MagnetizationState, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::units::{Area, Length, Magnetization, Piezo, Pressure, Quantity, Strain, Temperature, Time};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.key, self.line) {
            (Some(key), Some(line)) => write!(f, "line {line}, `{key}`: {}", self.message),
            (Some(key), None) => write!(f, "`{key}`: {}", self.message),
            (None, Some(line)) => write!(f, "line {line}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    pub fn at_key(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            key: Some(key.into()),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnet: Option<MagnetSection>,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub landscape: LandscapeSection,
    #[serde(default)]
    pub piezo: PiezoSection,
    #[serde(default)]
    pub retention: RetentionSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anneal: Option<AnnealSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub output_dir: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            output_dir: "rsn-out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnetSection {
    pub major_axis: Quantity<Length>,
    pub minor_axis: Quantity<Length>,
    pub thickness: Quantity<Length>,
    pub saturation_magnetization: Quantity<Magnetization>,
    pub magnetostriction: Quantity<Strain>,
    pub youngs_modulus: Quantity<Pressure>,
    pub gilbert_damping: f64,
    #[serde(default = "default_temperature")]
    pub temperature: Quantity<Temperature>,
}

fn default_temperature() -> Quantity<Temperature> {
    Quantity::new(300.0)
}

impl MagnetSection {
    pub fn spec(&self) -> MagnetSpec {
        MagnetSpec {
            major_axis: self.major_axis.si,
            minor_axis: self.minor_axis.si,
            thickness: self.thickness.si,
            saturation_magnetization: self.saturation_magnetization.si,
            magnetostriction: self.magnetostriction.si,
            youngs_modulus: self.youngs_modulus.si,
            gilbert_damping: self.gilbert_damping,
            temperature: self.temperature.si,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub time_step: Quantity<Time>,
    pub duration: Quantity<Time>,
    pub decimation: u64,
    pub stress: Quantity<Pressure>,
    pub integrator: Integrator,
    pub runs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<[f64; 3]>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimulationConfig::default();
        SimulationSection {
            time_step: Quantity::new(d.time_step),
            duration: Quantity::new(d.duration),
            decimation: d.decimation,
            stress: Quantity::new(d.stress),
            integrator: d.integrator,
            runs: 1,
            initial_state: None,
        }
    }
}

impl SimulationSection {
    pub fn config(&self, seed: u64) -> SimulationConfig {
        SimulationConfig {
            time_step: self.time_step.si,
            duration: self.duration.si,
            seed,
            decimation: self.decimation,
            stress: self.stress.si,
            initial_state: match self.initial_state {
                Some([mx, my, mz]) => InitialState::Explicit(MagnetizationState::new(mx, my, mz)),
                None => InitialState::NearEasyAxis,
            },
            integrator: self.integrator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub bins: usize,
    pub dwell_upper: f64,
    pub dwell_lower: f64,
    pub binary_min_bimodality: f64,
    pub analog_max_bimodality: f64,
    pub binary_min_mode_separation: f64,
    pub min_autocorrelation_times: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let t = RegimeThresholds::default();
        AnalysisSection {
            input: None,
            bins: t.histogram_bins,
            dwell_upper: 0.5,
            dwell_lower: -0.5,
            binary_min_bimodality: t.binary_min_bimodality,
            analog_max_bimodality: t.analog_max_bimodality,
            binary_min_mode_separation: t.binary_min_mode_separation,
            min_autocorrelation_times: t.min_autocorrelation_times,
        }
    }
}

impl AnalysisSection {
    pub fn thresholds(&self) -> RegimeThresholds {
        RegimeThresholds {
            binary_min_bimodality: self.binary_min_bimodality,
            analog_max_bimodality: self.analog_max_bimodality,
            binary_min_mode_separation: self.binary_min_mode_separation,
            histogram_bins: self.bins,
            min_autocorrelation_times: self.min_autocorrelation_times,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeSection {
    pub stresses: Vec<Quantity<Pressure>>,
    pub theta_points: usize,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        LandscapeSection {
            stresses: [0.0, 2e6, 4e6, 6.5e6].into_iter().map(Quantity::new).collect(),
            theta_points: 361,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiezoSection {
    pub d33: Quantity<Piezo>,
    pub relative_permittivity: f64,
    pub layer_thickness: Quantity<Length>,
    pub pad_area: Quantity<Area>,
    pub pad_count: u32,
    pub stress: Quantity<Pressure>,
}

impl Default for PiezoSection {
    fn default() -> Self {
        let s = PiezoStack::pmn_pt();
        PiezoSection {
            d33: Quantity::new(s.d33),
            relative_permittivity: s.relative_permittivity,
            layer_thickness: Quantity::new(s.layer_thickness),
            pad_area: Quantity::new(s.pad_area),
            pad_count: s.pad_count,
            stress: Quantity::new(6.5e6),
        }
    }
}

impl PiezoSection {
    pub fn stack(&self) -> PiezoStack {
        PiezoStack {
            d33: self.d33.si,
            relative_permittivity: self.relative_permittivity,
            layer_thickness: self.layer_thickness.si,
            pad_area: self.pad_area.si,
            pad_count: self.pad_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSection {
    pub section: String,
    pub retention: Quantity<Time>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualizeSection {
    pub minor_axes: Vec<Quantity<Length>>,
    pub target_barrier_kt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetentionSection {
    pub attempt_time: Quantity<Time>,
    pub allow_barrier_raising: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_stress: Option<Quantity<Pressure>>,
    pub tiers: Vec<TierSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equalize: Option<EqualizeSection>,
}

impl Default for RetentionSection {
    fn default() -> Self {
        let tier = |section: &str, retention: f64| TierSection {
            section: section.into(),
            retention: Quantity::new(retention),
        };
        RetentionSection {
            attempt_time: Quantity::new(1e-9),
            allow_barrier_raising: true,
            max_abs_stress: None,
            tiers: vec![
                tier("scratch", 1e-6),
                tier("working", 1.0),
                tier("archive", 10.0 * rsn_core::constants::YEAR),
            ],
            equalize: None,
        }
    }
}

impl RetentionSection {
    pub fn policy(&self) -> StressPolicy {
        StressPolicy {
            allow_barrier_raising: self.allow_barrier_raising,
            max_abs_stress: self.max_abs_stress.map(|q| q.si),
        }
    }

    pub fn tiers(&self) -> Vec<HierarchyTier> {
        self.tiers
            .iter()
            .map(|t| HierarchyTier {
                section: t.section.clone(),
                target_retention: t.retention.si,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSection {
    /// Edge-list file, resolved relative to the config file and inlined into
    /// `edges` on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<String>,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    pub schedule: ScheduleSection,
}

fn default_sweeps() -> usize {
    1000
}

fn default_restarts() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSection {
    /// β ramps linearly over the sweeps.
    Linear { beta_start: f64, beta_end: f64 },
    /// Stress ramps linearly; β = barrier/kT of the `[magnet]` device.
    StressRamp {
        stress_start: Quantity<Pressure>,
        stress_end: Quantity<Pressure>,
    },
    /// Explicit β rows, one per spin.
    Table { rows: Vec<Vec<f64>> },
}

/// Parses and validates a config. Relative paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let mut config: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    resolve(&mut config, base)?;
    validate(&config, text)?;
    Ok(config)
}

/// Emits a config that [`parse_config`] reads back to an equal value.
pub fn emit(config: &RunConfig) -> String {
    toml::to_string(config).expect("config is always serializable")
}

/// Applies `dotted.key=value` overrides to the config text and reparses.
/// Values are read as TOML literals when possible and as strings otherwise.
pub fn parse_with_overrides(text: &str, overrides: &[String], base: &Path) -> Result<RunConfig, ConfigError> {
    if overrides.is_empty() {
        return parse_config(text, base);
    }
    let mut table: toml::Table = text.parse().map_err(|e| toml_error(text, &e))?;
    for item in overrides {
        let (path, raw) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::new(format!("override `{item}` is not of the form key.path=value")))?;
        let path = path.trim();
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
        set_path(&mut table, path, value)?;
    }
    let merged = toml::to_string(&table).map_err(|e| ConfigError::new(e.to_string()))?;
    parse_config(&merged, base).map_err(|mut e| {
        // A fault already present in the file keeps its line number.
        if let Err(original) = parse_config(text, base) {
            if original.key == e.key && original.key.is_some() {
                return original;
            }
        }
        e.line = None;
        e.message = format!("{} (after --set overrides)", e.message);
        e
    })
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), ConfigError> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new(format!("bad override key `{path}`")));
    }
    let mut current = table;
    for part in &parts[..parts.len() - 1] {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::at_key(path, format!("`{part}` is not a table")))?;
    }
    current.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn resolve(config: &mut RunConfig, base: &Path) -> Result<(), ConfigError> {
    if let Some(input) = &config.analysis.input {
        config.analysis.input = Some(absolute(base, input).to_string_lossy().into_owned());
    }
    if let Some(anneal) = &mut config.anneal {
        match (&anneal.problem, &anneal.edges) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::at_key("anneal.problem", "give either `problem` or `edges`, not both"));
            }
            (None, None) => return Err(ConfigError::at_key("anneal.problem", "an Ising problem is required")),
            (Some(path), None) => {
                let full = absolute(base, path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| ConfigError::at_key("anneal.problem", format!("{}: {e}", full.display())))?;
                anneal.edges = Some(text);
                anneal.problem = None;
            }
            (None, Some(_)) => {}
        }
    }
    Ok(())
}

fn absolute(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn validate(config: &RunConfig, text: &str) -> Result<(), ConfigError> {
    let fail = |section: &str, key: &str, message: String| ConfigError {
        line: locate(text, section.rsplit('.').next().unwrap_or(section), key),
        key: Some(format!("{section}.{key}")),
        message,
    };
    if let Some(m) = &config.magnet {
        m.spec().validate().map_err(|e| core_error(text, "magnet", e))?;
    }
    config
        .simulation
        .config(config.run.seed)
        .validate()
        .map_err(|e| core_error(text, "simulation", e))?;
    if config.simulation.runs == 0 {
        return Err(fail("simulation", "runs", "must be >= 1".into()));
    }
    let a = &config.analysis;
    if a.bins < 2 {
        return Err(fail("analysis", "bins", "must be >= 2".into()));
    }
    if !(-1.0 < a.dwell_lower && a.dwell_lower < a.dwell_upper && a.dwell_upper < 1.0) {
        return Err(fail("analysis", "dwell_upper", "need -1 < dwell_lower < dwell_upper < 1".into()));
    }
    if config.landscape.theta_points < 2 {
        return Err(fail("landscape", "theta_points", "must be >= 2".into()));
    }
    config.piezo.stack().validate().map_err(|e| core_error(text, "piezo", e))?;
    let r = &config.retention;
    if !(r.attempt_time.si > 0.0) {
        return Err(fail("retention", "attempt_time", "must be positive".into()));
    }
    if let Some(eq) = &r.equalize {
        if eq.minor_axes.is_empty() {
            return Err(fail("retention.equalize", "minor_axes", "needs at least one device".into()));
        }
        if !(eq.target_barrier_kt >= 0.0) {
            return Err(fail("retention.equalize", "target_barrier_kt", "must be >= 0".into()));
        }
    }
    if let Some(an) = &config.anneal {
        if an.sweeps == 0 {
            return Err(fail("anneal", "sweeps", "must be >= 1".into()));
        }
        if an.restarts == 0 {
            return Err(fail("anneal", "restarts", "must be >= 1".into()));
        }
        let edges = an.edges.as_deref().unwrap_or_default();
        rsn_core::anneal::IsingProblem::parse(std::io::Cursor::new(edges))
            .map_err(|e| ConfigError::at_key("anneal.problem", e.to_string()))?;
    }
    Ok(())
}

fn core_error(text: &str, section: &str, e: rsn_core::Error) -> ConfigError {
    match e {
        rsn_core::Error::InvalidParameter { name, reason } => ConfigError {
            line: locate(text, section, name),
            key: Some(format!("{section}.{name}")),
            message: reason,
        },
        other => ConfigError {
            line: None,
            key: Some(section.to_string()),
            message: other.to_string(),
        },
    }
}

/// Line of `key` inside `[section]`, if written explicitly.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = h.trim_matches(['[', ']']).trim().to_string();
            continue;
        }
        if current.rsplit('.').next() == Some(section) {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn toml_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let Some(span) = e.span() else {
        return ConfigError::new(e.message().to_string());
    };
    let line_index = text[..span.start.min(text.len())].matches('\n').count();
    let mut section = String::new();
    for line in text.lines().take(line_index + 1) {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            section = h.trim_matches(['[', ']']).trim().to_string();
        }
    }
    let key = text
        .lines()
        .nth(line_index)
        .and_then(|l| l.split_once('='))
        .map(|(k, _)| k.trim().to_string())
        .filter(|k| !k.starts_with('['));
    let key = match (section.is_empty(), key) {
        (_, None) if section.is_empty() => None,
        (_, None) => Some(section),
        (true, Some(k)) => Some(k),
        (false, Some(k)) => Some(format!("{section}.{k}")),
    };
    ConfigError {
        line: Some(line_index + 1),
        key,
        message: e.message().to_string(),
    }
}

/// Reference for every config key, shown by `--help`.
pub const CONFIG_HELP: &str = r##"CONFIG FILE (TOML)
Physical quantities are strings with a unit, e.g. major_axis = "100 nm".
Bare numbers for physical quantities are rejected. Dimensionless values are
plain numbers. Any key can be overridden with --set section.key=value.

[run]
  seed          integer                     default 0
  output_dir    path                        default "rsn-out" (--out overrides)

[magnet]        required by landscape, simulate, reconfig-cost, retention-plan
  major_axis                length (m, mm, um, nm, pm)       required
  minor_axis                length                           required
  thickness                 length                           required
  saturation_magnetization  magnetization (A/m, kA/m, MA/m)  required
  magnetostriction          ppm, or a quoted plain fraction  required
  youngs_modulus            stress (Pa, kPa, MPa, GPa)       required
  gilbert_damping           number                           required
  temperature               K                                default "300 K"

[simulation]
  time_step      time (s, ms, us, ns, ps, fs, min, h, d, yr)  default "0.1 ps"
  duration       time                          default "1 us"
  decimation     integer, keep every k-th step default 1000
  stress         stress along the major axis   default "0 Pa" (tensile > 0)
  integrator     "euler" | "heun"              default "euler"
  runs           integer; > 1 runs an ensemble with derived seeds  default 1
  initial_state  [mx, my, mz]                  default near the +y easy axis

[analysis]
  input                       trajectory CSV   default <out>/trajectory.csv
  bins                        integer          default 64
  dwell_upper, dwell_lower    m_y thresholds   default 0.5, -0.5
  binary_min_bimodality       number           default 0.887
  analog_max_bimodality       number           default 0.772
  binary_min_mode_separation  number           default 1.0
  min_autocorrelation_times   number           default 100

[landscape]
  stresses      list of stresses               default ["0 MPa", "2 MPa", "4 MPa", "6.5 MPa"]
  theta_points  integer over [0, pi]           default 361

[piezo]
  d33                    C/N, pC/N, m/V, pm/V  default "2500 pC/N"
  relative_permittivity  number                default 4000
  layer_thickness        length                default "300 nm"
  pad_area               area (m^2, mm^2, um^2, nm^2) per pad  default "1e4 nm^2"
  pad_count              integer               default 2
  stress                 stress                default "6.5 MPa"

[retention]
  attempt_time           time                  default "1 ns"
  allow_barrier_raising  bool                  default true
  max_abs_stress         stress                default unlimited
  tiers                  [{ section = "name", retention = "<time>" }, ...]
                         default scratch 1 us, working 1 s, archive 10 yr
[retention.equalize]     optional
  minor_axes             list of lengths, one per device
  target_barrier_kt      number (barrier in units of kT)

[anneal]        required by anneal
  problem      edge-list file ("i j J_ij" lines, "# h i value", "# n N")
  edges        the same format inline (exactly one of problem / edges)
  sweeps       integer                         default 1000
  restarts     integer, run in parallel        default 1
[anneal.schedule]
  kind = "linear"       beta_start, beta_end (numbers)
  kind = "stress-ramp"  stress_start, stress_end (stresses); beta = barrier/kT of [magnet]
  kind = "table"        rows = [[beta per sweep], ...], one row per spin
"##;
