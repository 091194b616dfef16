//! Sectioned key-value configuration with mandatory unit suffixes.
//!
//! ```text
//! [mechanical]
//! omega_m_hz = 10.1e6
//! gamma_m_hz = 150
//! ```
//!
//! Physical keys carry their unit in the name (`_hz`, `_rad_s`, `_K`, `_kg`,
//! `_m`, `_W`, `_rad`, `_pi`). Dimensionless and option keys carry none.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use optosqueeze::params::{coupling_from_geometry, derive_photon_stats, hz_to_rad_s, omega_from_wavelength};
use optosqueeze::{Drive, Execution, Numerics, SqueezeField, SystemParams, TempConvention};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}, column {column}: syntax error: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("{origin}: unknown key `{key}` in [{section}]")]
    UnknownKey { origin: Origin, section: String, key: String },
    #[error("{origin}: key `{key}` needs a unit suffix ({expected})")]
    MissingUnit { origin: Origin, key: String, expected: String },
    #[error("{origin}: key `{key}` has unit `{unit}`, expected {expected}")]
    UnitMismatch {
        origin: Origin,
        key: String,
        unit: String,
        expected: String,
    },
    #[error("duplicate key [{section}] {key}: {first} and {second}")]
    Duplicate {
        section: String,
        key: String,
        first: Origin,
        second: Origin,
    },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("{origin}: invalid value for `{key}`: {message}")]
    Value { origin: Origin, key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => write!(f, "--set"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Frequency,
    Temperature,
    Mass,
    Length,
    Power,
    Angle,
    Number,
    Integer,
    Text,
    Flag,
    List,
}

impl Kind {
    fn units(self) -> &'static [&'static str] {
        match self {
            Kind::Frequency => &["hz", "rad_s"],
            Kind::Temperature => &["K"],
            Kind::Mass => &["kg"],
            Kind::Length => &["m"],
            Kind::Power => &["W"],
            Kind::Angle => &["rad", "pi"],
            _ => &[],
        }
    }

    fn expected(self) -> String {
        match self.units() {
            [] => "no unit suffix".into(),
            units => units.iter().map(|u| format!("_{u}")).collect::<Vec<_>>().join(" or "),
        }
    }
}

const UNITS: [&str; 8] = ["rad_s", "hz", "K", "kg", "m", "W", "rad", "pi"];

pub const SECTIONS: [&str; 7] = ["mechanical", "cavity", "drive", "squeeze", "bath", "numerics", "output"];

const KEYS: &[(&str, &str, Kind)] = &[
    ("mechanical", "omega_m", Kind::Frequency),
    ("mechanical", "gamma_m", Kind::Frequency),
    ("mechanical", "mass", Kind::Mass),
    ("cavity", "kappa", Kind::Frequency),
    ("cavity", "g_m", Kind::Frequency),
    ("cavity", "length", Kind::Length),
    ("cavity", "omega_c", Kind::Frequency),
    ("drive", "mode", Kind::Text),
    ("drive", "power", Kind::Power),
    ("drive", "wavelength", Kind::Length),
    ("drive", "delta0", Kind::Frequency),
    ("drive", "coupling", Kind::Frequency),
    ("drive", "detuning", Kind::Frequency),
    ("squeeze", "r", Kind::Number),
    ("squeeze", "phi", Kind::Angle),
    ("bath", "T", Kind::Temperature),
    ("numerics", "quad_tol", Kind::Number),
    ("numerics", "max_panels", Kind::Integer),
    ("numerics", "bath_cutoff", Kind::Number),
    ("numerics", "parallel", Kind::Flag),
    ("numerics", "phi_points", Kind::Integer),
    ("numerics", "r_values", Kind::List),
    ("numerics", "omega_min", Kind::Frequency),
    ("numerics", "omega_max", Kind::Frequency),
    ("numerics", "omega_points", Kind::Integer),
    ("output", "convention", Kind::Text),
    ("output", "path", Kind::Text),
];

fn kind_of(section: &str, base: &str) -> Option<Kind> {
    KEYS.iter().find(|(s, b, _)| *s == section && *b == base).map(|k| k.2)
}

/// A parsed value, already converted to SI for physical kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Integer(usize),
    Text(String),
    Flag(bool),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub section: String,
    pub base: String,
    /// Unit suffix as written, empty for unitless keys.
    pub unit: String,
    pub raw: String,
    pub value: Value,
    pub origin: Origin,
}

impl Entry {
    pub fn key(&self) -> String {
        if self.unit.is_empty() {
            self.base.clone()
        } else {
            format!("{}_{}", self.base, self.unit)
        }
    }
}

/// Split `key` into a known base and a unit suffix.
fn resolve_key(section: &str, key: &str, origin: Origin) -> Result<(String, String, Kind), ConfigError> {
    if let Some(kind) = kind_of(section, key) {
        if kind.units().is_empty() {
            return Ok((key.to_string(), String::new(), kind));
        }
        return Err(ConfigError::MissingUnit {
            origin,
            key: key.to_string(),
            expected: kind.expected(),
        });
    }
    for unit in UNITS {
        if let Some(base) = key.strip_suffix(unit).and_then(|b| b.strip_suffix('_')) {
            if let Some(kind) = kind_of(section, base) {
                if kind.units().contains(&unit) {
                    return Ok((base.to_string(), unit.to_string(), kind));
                }
                return Err(ConfigError::UnitMismatch {
                    origin,
                    key: key.to_string(),
                    unit: unit.to_string(),
                    expected: kind.expected(),
                });
            }
        }
    }
    Err(ConfigError::UnknownKey {
        origin,
        section: section.to_string(),
        key: key.to_string(),
    })
}

fn parse_value(kind: Kind, unit: &str, raw: &str) -> Result<Value, String> {
    let number = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{}` is not finite", s.trim()))
        }
    };
    Ok(match kind {
        Kind::Frequency => {
            let v = number(raw)?;
            Value::Number(if unit == "hz" { hz_to_rad_s(v) } else { v })
        }
        Kind::Angle => {
            let v = number(raw)?;
            Value::Number(if unit == "pi" { v * PI } else { v })
        }
        Kind::Temperature | Kind::Mass | Kind::Length | Kind::Power | Kind::Number => Value::Number(number(raw)?),
        Kind::Integer => Value::Integer(raw.parse().map_err(|_| format!("`{raw}` is not a nonnegative integer"))?),
        Kind::Text => Value::Text(raw.to_string()),
        Kind::Flag => Value::Flag(match raw {
            "true" | "yes" | "on" => true,
            "false" | "no" | "off" => false,
            _ => return Err(format!("`{raw}` is not a boolean (true/false)")),
        }),
        Kind::List => Value::List(raw.split(',').map(number).collect::<Result<_, _>>()?),
    })
}

/// The raw key-value content of a configuration, before interpretation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<(String, String), Entry>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut file = ConfigFile::default();
        let mut section: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let n = idx + 1;
            let indent = line.len() - line.trim_start().len();
            let content = strip_comment(line).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(ConfigError::Syntax {
                        line: n,
                        column: indent + content.len() + 1,
                        message: "expected `]` to close the section header".into(),
                    });
                };
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::UnknownSection {
                        line: n,
                        name: name.to_string(),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(ConfigError::Syntax {
                    line: n,
                    column: indent + 1,
                    message: "expected `key = value` or `[section]`".into(),
                });
            };
            let key = content[..eq].trim();
            let raw = content[eq + 1..].trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ConfigError::Syntax {
                    line: n,
                    column: indent + 1,
                    message: format!("invalid key `{key}`"),
                });
            }
            let value_column = indent + eq + 2 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
            if raw.is_empty() {
                return Err(ConfigError::Syntax {
                    line: n,
                    column: value_column,
                    message: format!("missing value for `{key}`"),
                });
            }
            let Some(sec) = section.as_deref() else {
                return Err(ConfigError::Syntax {
                    line: n,
                    column: indent + 1,
                    message: "key outside of any section".into(),
                });
            };
            let entry = make_entry(sec, key, raw, Origin::Line(n)).map_err(|e| match e {
                ConfigError::Value { message, .. } => ConfigError::Syntax {
                    line: n,
                    column: value_column,
                    message,
                },
                other => other,
            })?;
            file.insert(entry)?;
        }
        Ok(file)
    }

    fn insert(&mut self, entry: Entry) -> Result<(), ConfigError> {
        let slot = (entry.section.clone(), entry.base.clone());
        if let Some(prev) = self.entries.get(&slot) {
            return Err(ConfigError::Duplicate {
                section: entry.section.clone(),
                key: entry.base.clone(),
                first: prev.origin,
                second: entry.origin,
            });
        }
        self.entries.insert(slot, entry);
        Ok(())
    }

    /// Apply `section.key=value`, replacing any existing setting of that key.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::Invalid(format!("override `{spec}` must look like section.key=value"));
        let (path, raw) = spec.split_once('=').ok_or_else(bad)?;
        let (section, key) = path.trim().split_once('.').ok_or_else(bad)?;
        let (section, key, raw) = (section.trim(), key.trim(), raw.trim());
        if !SECTIONS.contains(&section) {
            return Err(ConfigError::Invalid(format!("override names unknown section [{section}]")));
        }
        if raw.is_empty() {
            return Err(bad());
        }
        let entry = make_entry(section, key, raw, Origin::Override)?;
        self.entries.insert((entry.section.clone(), entry.base.clone()), entry);
        Ok(())
    }

    fn get(&self, section: &str, base: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), base.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        SECTIONS
            .iter()
            .flat_map(move |s| self.entries.values().filter(move |e| e.section == *s))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn make_entry(section: &str, key: &str, raw: &str, origin: Origin) -> Result<Entry, ConfigError> {
    let (base, unit, kind) = resolve_key(section, key, origin)?;
    let value = parse_value(kind, &unit, raw).map_err(|message| ConfigError::Value {
        origin,
        key: key.to_string(),
        message,
    })?;
    Ok(Entry {
        section: section.to_string(),
        base,
        unit,
        raw: raw.to_string(),
        value,
        origin,
    })
}

/// Frequency grid for spectra, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    /// `None` when the squeeze section gives no r (coherent input).
    pub squeeze: Option<SqueezeField>,
    pub numerics: Numerics,
    pub phi_points: usize,
    pub r_values: Vec<f64>,
    pub spectrum_grid: FrequencyGrid,
    pub convention: TempConvention,
    pub output_path: Option<String>,
    /// Every setting in force, in canonical order, including defaults.
    pub resolved: Vec<(String, String)>,
}

impl RunConfig {
    pub fn squeeze_field(&self) -> SqueezeField {
        self.squeeze.unwrap_or_default()
    }
}

pub const DEFAULT_PHI_POINTS: usize = 720;
pub const DEFAULT_R_VALUES: [f64; 4] = [0.3, 1.0, 1.5, 2.0];
pub const DEFAULT_OMEGA_POINTS: usize = 2001;

struct Reader<'a> {
    file: &'a ConfigFile,
    missing: Vec<String>,
}

impl Reader<'_> {
    fn number(&mut self, section: &str, base: &str, required: bool) -> Option<f64> {
        match self.file.get(section, base).map(|e| &e.value) {
            Some(Value::Number(v)) => Some(*v),
            _ => {
                if required {
                    let units = kind_of(section, base).map(|k| k.expected()).unwrap_or_default();
                    self.missing.push(format!("[{section}] {base} ({units})"));
                }
                None
            }
        }
    }

    fn text(&self, section: &str, base: &str) -> Option<&str> {
        match self.file.get(section, base).map(|e| &e.value) {
            Some(Value::Text(t)) => Some(t),
            _ => None,
        }
    }

    fn integer(&self, section: &str, base: &str) -> Option<usize> {
        match self.file.get(section, base).map(|e| &e.value) {
            Some(Value::Integer(v)) => Some(*v),
            _ => None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    resolve(&ConfigFile::parse(text)?)
}

/// Interpret a parsed file: check required keys and build the run inputs.
pub fn resolve(file: &ConfigFile) -> Result<RunConfig, ConfigError> {
    let mut rd = Reader {
        file,
        missing: Vec::new(),
    };
    let omega_m = rd.number("mechanical", "omega_m", true);
    let gamma_m = rd.number("mechanical", "gamma_m", true);
    let mass = rd.number("mechanical", "mass", false);
    let kappa = rd.number("cavity", "kappa", true);
    let length = rd.number("cavity", "length", false);
    let omega_c = rd.number("cavity", "omega_c", false);
    let temperature = rd.number("bath", "T", true);
    let wavelength = rd.number("drive", "wavelength", false);
    let omega_p = wavelength.map(omega_from_wavelength);

    let g_m = match rd.number("cavity", "g_m", false) {
        Some(g) => Some(g),
        None if length.is_some() && mass.is_some() && (omega_c.is_some() || omega_p.is_some()) => None,
        None => {
            rd.missing
                .push("[cavity] g_m (_hz or _rad_s), or length_m with [mechanical] mass_kg".into());
            None
        }
    };

    let mode = rd.text("drive", "mode").map(str::to_string);
    let drive = match mode.as_deref() {
        Some("power") => {
            let watts = rd.number("drive", "power", true);
            let delta0 = rd.number("drive", "delta0", true);
            if wavelength.is_none() {
                rd.missing.push("[drive] wavelength (_m)".into());
            }
            watts.zip(delta0).map(|(w, d)| (Drive::Power { watts: w }, d))
        }
        Some("direct") => {
            let coupling = rd.number("drive", "coupling", true);
            let detuning = rd.number("drive", "detuning", true);
            coupling.zip(detuning).map(|(c, d)| (Drive::Direct { coupling: c, detuning: d }, d))
        }
        Some(other) => {
            return Err(invalid(format!("[drive] mode must be `power` or `direct`, got `{other}`")));
        }
        None => {
            rd.missing.push("[drive] mode (power or direct)".into());
            None
        }
    };

    let r = rd.number("squeeze", "r", false);
    let phi = rd.number("squeeze", "phi", false);
    if matches!(r, Some(r) if r > 0.0) && phi.is_none() {
        rd.missing.push("[squeeze] phi (_rad or _pi)".into());
    }

    if !rd.missing.is_empty() {
        return Err(ConfigError::Missing(rd.missing));
    }
    let (omega_m, gamma_m, kappa, temperature) = (omega_m.unwrap(), gamma_m.unwrap(), kappa.unwrap(), temperature.unwrap());
    let (drive, delta0) = drive.unwrap();
    let g_m = match g_m {
        Some(g) => g,
        None => coupling_from_geometry(omega_c.or(omega_p).unwrap(), length.unwrap(), mass.unwrap(), omega_m)
            .map_err(|e| invalid(e.to_string()))?
            .g_m,
    };
    let params = SystemParams {
        omega_m,
        gamma_m,
        mass,
        omega_p,
        omega_c,
        cavity_length: length,
        kappa,
        delta0,
        g_m,
        drive,
        bath_temperature: temperature,
    };
    params.validate().map_err(|e| invalid(e.to_string()))?;

    let squeeze = match r {
        Some(r) => Some(derive_photon_stats(r, phi.unwrap_or(0.0)).map_err(|e| invalid(e.to_string()))?),
        None => None,
    };

    let defaults = Numerics::default();
    let parallel = match file.get("numerics", "parallel").map(|e| &e.value) {
        Some(Value::Flag(f)) => *f,
        _ => true,
    };
    let numerics = Numerics {
        tol: rd.number("numerics", "quad_tol", false).unwrap_or(defaults.tol),
        max_panels: rd.integer("numerics", "max_panels").unwrap_or(defaults.max_panels),
        bath_cutoff: rd.number("numerics", "bath_cutoff", false).unwrap_or(defaults.bath_cutoff),
        execution: if parallel { Execution::Parallel } else { Execution::Serial },
    };
    if !(numerics.tol > 1e-12 && numerics.tol < 1e-2) {
        return Err(invalid("[numerics] quad_tol must lie in (1e-12, 1e-2)"));
    }
    if numerics.max_panels < 16 {
        return Err(invalid("[numerics] max_panels must be at least 16"));
    }
    let phi_points = rd.integer("numerics", "phi_points").unwrap_or(DEFAULT_PHI_POINTS);
    if phi_points < 3 {
        return Err(invalid("[numerics] phi_points must be at least 3"));
    }
    let r_values = match file.get("numerics", "r_values").map(|e| &e.value) {
        Some(Value::List(v)) => v.clone(),
        _ => DEFAULT_R_VALUES.to_vec(),
    };
    let spectrum_grid = FrequencyGrid {
        min: rd.number("numerics", "omega_min", false).unwrap_or(0.0),
        max: rd.number("numerics", "omega_max", false).unwrap_or(3.0 * omega_m),
        points: rd.integer("numerics", "omega_points").unwrap_or(DEFAULT_OMEGA_POINTS),
    };
    if !(spectrum_grid.max > spectrum_grid.min) || spectrum_grid.points < 2 {
        return Err(invalid("[numerics] spectrum grid needs omega_max > omega_min and omega_points >= 2"));
    }
    let convention = match rd.text("output", "convention") {
        Some(c) => c.parse().map_err(invalid)?,
        None => TempConvention::default(),
    };
    let output_path = rd.text("output", "path").filter(|p| *p != "-").map(str::to_string);

    let mut resolved: Vec<(String, String)> = file
        .entries()
        .map(|e| (format!("{}.{}", e.section, e.key()), e.raw.clone()))
        .collect();
    let mut default = |key: &str, present: bool, value: String| {
        if !present {
            resolved.push((format!("{key} (default)"), value));
        }
    };
    let has = |s: &str, b: &str| file.get(s, b).is_some();
    default("numerics.quad_tol", has("numerics", "quad_tol"), format!("{:e}", numerics.tol));
    default("numerics.max_panels", has("numerics", "max_panels"), numerics.max_panels.to_string());
    default("numerics.bath_cutoff", has("numerics", "bath_cutoff"), format!("{:e}", numerics.bath_cutoff));
    default("numerics.parallel", has("numerics", "parallel"), parallel.to_string());
    default("numerics.phi_points", has("numerics", "phi_points"), phi_points.to_string());
    default(
        "numerics.r_values",
        has("numerics", "r_values"),
        r_values.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "),
    );
    default("numerics.omega_min_rad_s", has("numerics", "omega_min"), format!("{:e}", spectrum_grid.min));
    default("numerics.omega_max_rad_s", has("numerics", "omega_max"), format!("{:e}", spectrum_grid.max));
    default("numerics.omega_points", has("numerics", "omega_points"), spectrum_grid.points.to_string());
    default("output.convention", has("output", "convention"), convention.name().to_string());
    if g_m_derived(file) {
        resolved.push(("cavity.g_m_rad_s (derived)".into(), format!("{g_m:e}")));
    }

    Ok(RunConfig {
        params,
        squeeze,
        numerics,
        phi_points,
        r_values,
        spectrum_grid,
        convention,
        output_path,
        resolved,
    })
}

fn g_m_derived(file: &ConfigFile) -> bool {
    file.get("cavity", "g_m").is_none()
}
