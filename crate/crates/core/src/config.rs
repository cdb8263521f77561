//! TOML run and sweep configuration.
//!
//! A configuration is read from one or more layers: files first, then
//! command-line `--set key=value` assignments. A key in a later layer wins.
//! Errors point at the file line (or the assignment) that supplied the
//! offending value.
//!
//! ```toml
//! [system]
//! n_total = 100            # required
//! n_clean = 50             # default: n_total / 2, or n_total - n_disordered
//! xi_over_pi = 0.25        # or xi = 0.785...
//! directionality = 0.2
//! disorder_strength = 0.5
//!
//! [initial]
//! zone = "disordered"      # clean | right_half | left_half, or sites = [..]
//!
//! [ensemble]
//! realizations = 200
//! seed = 1
//!
//! [grid]
//! kind = "log"             # log | linear | explicit
//! t_min = 0.01
//! t_max = 10000.0
//! points = 200
//! ```

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::ensemble::{
    Link, Summary, SweepAxis, SweepParameter, SweepSpec, DEFAULT_READOUT_TIME, DEFAULT_REALIZATIONS,
    DEFAULT_SPECTRAL_REALIZATIONS,
};
use crate::evolve::TimeGrid;
use crate::model::{SystemConfig, Zone};
use crate::observables::ObservableKind;
use crate::spectral::DEFAULT_WEIGHT_THRESHOLD;

const SECTIONS: [(&str, &[&str]); 6] = [
    (
        "system",
        &["n_total", "n_clean", "n_disordered", "xi", "xi_over_pi", "directionality", "gamma_total", "disorder_strength"],
    ),
    ("initial", &["zone", "sites"]),
    ("ensemble", &["realizations", "seed", "observables"]),
    ("grid", &["kind", "t_min", "t_max", "points", "include_zero", "times"]),
    ("spectrum", &["realizations", "weight_zone", "weight_threshold"]),
    ("sweep", &["axis", "links", "summaries", "readout_time"]),
];

/// Where a configuration value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line { file: String, line: usize },
    File(String),
    Override(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Line { file, line } => write!(f, "{file}:{line}"),
            Self::File(file) => write!(f, "{file}"),
            Self::Override(assignment) => write!(f, "--set {assignment}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub location: Option<Location>,
    /// Dotted key, e.g. `system.n_total`.
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.location, &self.key) {
            (Some(loc), Some(key)) => write!(f, "{loc}: `{key}`: {}", self.message),
            (Some(loc), None) => write!(f, "{loc}: {}", self.message),
            (None, Some(key)) => write!(f, "`{key}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone)]
struct Layer {
    name: String,
    source: Option<String>,
    table: Table,
    /// Original assignment text for override layers, by dotted key.
    assignments: Vec<(String, String)>,
}

impl Layer {
    fn locate(&self, section: &str, key: Option<&str>) -> Location {
        if self.source.is_none() {
            let dotted = key.map(|k| format!("{section}.{k}"));
            let text = self
                .assignments
                .iter()
                .rev()
                .find(|(k, _)| Some(k) == dotted.as_ref())
                .map(|(_, a)| a.clone())
                .unwrap_or_else(|| dotted.unwrap_or_else(|| section.to_string()));
            return Location::Override(text);
        }
        let source = self.source.as_deref().unwrap_or_default();
        match find_line(source, section, key) {
            Some(line) => Location::Line { file: self.name.clone(), line },
            None => Location::File(self.name.clone()),
        }
    }
}

/// 1-based line of `key` inside `[section]`, or of the section header when
/// `key` is `None` or not found.
fn find_line(source: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section && header.is_none() {
                header = Some(i + 1);
            }
            if let Some(k) = key {
                if current == format!("{section}.{k}") {
                    return Some(i + 1);
                }
            }
            continue;
        }
        if let (Some(k), true) = (key, current == section) {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == k {
                    return Some(i + 1);
                }
            }
        }
        if let (Some(k), true) = (key, current.is_empty()) {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == format!("{section}.{k}") {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

/// Flat override names that map to a unique section.
fn section_of(key: &str) -> Option<&'static str> {
    let preferred = match key {
        "realizations" | "seed" | "observables" => Some("ensemble"),
        _ => None,
    };
    preferred.or_else(|| {
        let mut hits = SECTIONS.iter().filter(|(_, keys)| keys.contains(&key));
        let first = hits.next()?;
        hits.next().is_none().then_some(first.0)
    })
}

fn parse_scalar(text: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

/// Layered configuration sources.
#[derive(Debug, Clone, Default)]
pub struct Sources {
    layers: Vec<Layer>,
    overrides: Vec<String>,
}

impl Sources {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_file(&mut self, path: &Path) -> ConfigResult<()> {
        let name = path.display().to_string();
        let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
            location: Some(Location::File(name.clone())),
            key: None,
            message: format!("cannot read: {e}"),
        })?;
        self.add_source(&name, &source)
    }

    pub fn add_source(&mut self, name: &str, source: &str) -> ConfigResult<()> {
        let table: Table = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
            ConfigError {
                location: Some(match line {
                    Some(line) => Location::Line { file: name.to_string(), line },
                    None => Location::File(name.to_string()),
                }),
                key: None,
                message: e.message().to_string(),
            }
        })?;
        let layer = Layer { name: name.to_string(), source: Some(source.to_string()), table, assignments: vec![] };
        check_keys(&layer)?;
        self.layers.push(layer);
        Ok(())
    }

    /// Applies `key=value`. `key` is either `section.key` or a flat key that
    /// belongs to exactly one section.
    pub fn add_override(&mut self, assignment: &str) -> ConfigResult<()> {
        let bad = |message: String| ConfigError {
            location: Some(Location::Override(assignment.to_string())),
            key: None,
            message,
        };
        let (key, value) = assignment.split_once('=').ok_or_else(|| bad("expected KEY=VALUE".into()))?;
        let key = key.trim();
        let (section, field) = match key.split_once('.') {
            Some((s, f)) => (s.to_string(), f.to_string()),
            None => {
                let s = section_of(key).ok_or_else(|| bad(format!("unknown or ambiguous key `{key}`")))?;
                (s.to_string(), key.to_string())
            }
        };
        let known = SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k);
        if !known.is_some_and(|k| k.contains(&field.as_str())) {
            return Err(bad(format!("unknown key `{section}.{field}`")));
        }
        if self.layers.last().is_none_or(|l| l.source.is_some()) {
            self.layers.push(Layer { name: "--set".into(), source: None, table: Table::new(), assignments: vec![] });
        }
        let layer = self.layers.last_mut().expect("just pushed");
        let entry = layer.table.entry(section.clone()).or_insert_with(|| Value::Table(Table::new()));
        if let Value::Table(t) = entry {
            t.insert(field.clone(), parse_scalar(value.trim()));
        }
        layer.assignments.push((format!("{section}.{field}"), assignment.to_string()));
        self.overrides.push(assignment.to_string());
        Ok(())
    }

    pub fn overrides(&self) -> &[String] {
        &self.overrides
    }

    fn find(&self, section: &str, key: &str) -> Option<(&Value, &Layer)> {
        self.layers.iter().rev().find_map(|l| {
            l.table.get(section).and_then(Value::as_table).and_then(|t| t.get(key)).map(|v| (v, l))
        })
    }

    fn has_section(&self, section: &str) -> bool {
        self.layers.iter().any(|l| l.table.contains_key(section))
    }

    fn error(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let location = self.find(section, key).map(|(_, l)| l.locate(section, Some(key)));
        ConfigError { location, key: Some(format!("{section}.{key}")), message: message.into() }
    }

    fn missing(&self, section: &str, key: &str) -> ConfigError {
        let location = self.layers.iter().rev().find(|l| l.source.is_some()).map(|l| l.locate(section, None));
        ConfigError { location, key: Some(format!("{section}.{key}")), message: "missing required key".into() }
    }

    fn get<T: DeserializeOwned>(&self, section: &str, key: &str) -> ConfigResult<Option<T>> {
        match self.find(section, key) {
            None => Ok(None),
            Some((value, layer)) => value.clone().try_into::<T>().map(Some).map_err(|e| ConfigError {
                location: Some(layer.locate(section, Some(key))),
                key: Some(format!("{section}.{key}")),
                message: format!("{}", e.message()),
            }),
        }
    }

    fn require<T: DeserializeOwned>(&self, section: &str, key: &str) -> ConfigResult<T> {
        self.get(section, key)?.ok_or_else(|| self.missing(section, key))
    }
}

fn check_keys(layer: &Layer) -> ConfigResult<()> {
    for (section, value) in &layer.table {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == section) else {
            return Err(ConfigError {
                location: Some(layer.locate(section, None)),
                key: Some(section.clone()),
                message: "unknown section".into(),
            });
        };
        let Some(table) = value.as_table() else {
            return Err(ConfigError {
                location: Some(layer.locate(section, None)),
                key: Some(section.clone()),
                message: "expected a table".into(),
            });
        };
        if let Some(unknown) = table.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(ConfigError {
                location: Some(layer.locate(section, Some(unknown))),
                key: Some(format!("{section}.{unknown}")),
                message: "unknown key".into(),
            });
        }
    }
    Ok(())
}

/// Output time grid as configured.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Log { t_min: f64, t_max: f64, points: usize, include_zero: bool },
    Linear { t_max: f64, points: usize },
    Explicit { times: Vec<f64> },
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::Log { t_min: 1e-2, t_max: 1e4, points: 200, include_zero: true }
    }
}

impl GridSpec {
    pub fn build(&self) -> crate::Result<TimeGrid> {
        match self {
            Self::Log { t_min, t_max, points, include_zero } => {
                TimeGrid::logarithmic(*t_min, *t_max, *points, *include_zero)
            }
            Self::Linear { t_max, points } => TimeGrid::linear(*t_max, *points),
            Self::Explicit { times } => TimeGrid::from_points(times.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Log { t_min, t_max, points, include_zero } => format!(
                "log: {points} points on [{t_min}, {t_max}]{}",
                if *include_zero { " plus t = 0" } else { "" }
            ),
            Self::Linear { t_max, points } => format!("linear: {points} points on [0, {t_max}]"),
            Self::Explicit { times } => format!("explicit: {} points", times.len()),
        }
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        match self {
            Self::Log { t_min, t_max, points, include_zero } => {
                t.insert("kind".into(), "log".into());
                t.insert("t_min".into(), (*t_min).into());
                t.insert("t_max".into(), (*t_max).into());
                t.insert("points".into(), (*points as i64).into());
                t.insert("include_zero".into(), (*include_zero).into());
            }
            Self::Linear { t_max, points } => {
                t.insert("kind".into(), "linear".into());
                t.insert("t_max".into(), (*t_max).into());
                t.insert("points".into(), (*points as i64).into());
            }
            Self::Explicit { times } => {
                t.insert("kind".into(), "explicit".into());
                t.insert("times".into(), Value::Array(times.iter().map(|&x| x.into()).collect()));
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSettings {
    pub realizations: usize,
    pub seed: u64,
    pub observables: Vec<ObservableKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSettings {
    pub realizations: usize,
    pub weight_zone: Option<Zone>,
    pub weight_threshold: f64,
}

/// Fully resolved single-system configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub initial: Zone,
    pub ensemble: EnsembleSettings,
    pub grid: GridSpec,
    pub spectrum: SpectrumSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub axes: Vec<SweepAxis>,
    pub links: Vec<Link>,
    pub summaries: Vec<Summary>,
    pub readout_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub run: RunConfig,
    pub sweep: SweepSettings,
}

fn zone_name(zone: &Zone) -> Option<&'static str> {
    match zone {
        Zone::Disordered => Some("disordered"),
        Zone::Clean => Some("clean"),
        Zone::RightHalf => Some("right_half"),
        Zone::LeftHalf => Some("left_half"),
        Zone::Sites(_) => None,
    }
}

fn parse_zone(name: &str) -> Option<Zone> {
    match name {
        "disordered" => Some(Zone::Disordered),
        "clean" => Some(Zone::Clean),
        "right_half" => Some(Zone::RightHalf),
        "left_half" => Some(Zone::LeftHalf),
        _ => None,
    }
}

fn read_system(src: &Sources) -> ConfigResult<SystemConfig> {
    let s = "system";
    let n_total: usize = src.require(s, "n_total")?;
    if n_total == 0 {
        return Err(src.error(s, "n_total", "must be positive"));
    }
    let n_clean: Option<usize> = src.get(s, "n_clean")?;
    let n_disordered: Option<usize> = src.get(s, "n_disordered")?;
    let (n_clean, n_disordered) = match (n_clean, n_disordered) {
        (Some(c), Some(d)) => (c, d),
        (Some(c), None) => {
            let d = n_total.checked_sub(c).ok_or_else(|| src.error(s, "n_clean", "exceeds n_total"))?;
            (c, d)
        }
        (None, Some(d)) => {
            let c = n_total.checked_sub(d).ok_or_else(|| src.error(s, "n_disordered", "exceeds n_total"))?;
            (c, d)
        }
        (None, None) => (n_total / 2, n_total - n_total / 2),
    };
    if n_clean + n_disordered != n_total {
        let key = if src.find(s, "n_disordered").is_some() { "n_disordered" } else { "n_clean" };
        return Err(src.error(s, key, format!("n_clean + n_disordered = {} but n_total = {n_total}", n_clean + n_disordered)));
    }
    let xi = match (src.get::<f64>(s, "xi")?, src.get::<f64>(s, "xi_over_pi")?) {
        (Some(_), Some(_)) => return Err(src.error(s, "xi_over_pi", "give either xi or xi_over_pi, not both")),
        (Some(x), None) => x,
        (None, Some(x)) => x * PI,
        (None, None) => return Err(src.missing(s, "xi_over_pi")),
    };
    if !xi.is_finite() {
        let key = if src.find(s, "xi").is_some() { "xi" } else { "xi_over_pi" };
        return Err(src.error(s, key, "must be finite"));
    }
    let directionality = src.get(s, "directionality")?.unwrap_or(0.0);
    if !(-1.0..=1.0).contains(&directionality) {
        return Err(src.error(s, "directionality", "must lie in [-1, 1]"));
    }
    let gamma_total = src.get(s, "gamma_total")?.unwrap_or(1.0);
    if !(gamma_total > 0.0 && f64::is_finite(gamma_total)) {
        return Err(src.error(s, "gamma_total", "must be positive"));
    }
    let disorder_strength = src.get(s, "disorder_strength")?.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&disorder_strength) {
        return Err(src.error(s, "disorder_strength", "must lie in [0, 1]"));
    }
    Ok(SystemConfig { n_total, n_clean, n_disordered, xi, directionality, gamma_total, disorder_strength })
}

fn read_zone(src: &Sources, section: &str, key: &str, system: &SystemConfig) -> ConfigResult<Option<Zone>> {
    let Some(name) = src.get::<String>(section, key)? else { return Ok(None) };
    if name == "none" {
        return Ok(None);
    }
    let zone = parse_zone(&name).ok_or_else(|| {
        src.error(section, key, format!("unknown zone `{name}` (disordered, clean, right_half, left_half)"))
    })?;
    let empty = zone.sites(system).map(|s| s.is_empty()).unwrap_or(true);
    if empty {
        return Err(src.error(section, key, "zone is empty for this system"));
    }
    Ok(Some(zone))
}

fn read_initial(src: &Sources, system: &SystemConfig) -> ConfigResult<Zone> {
    let sites: Option<Vec<usize>> = src.get("initial", "sites")?;
    match sites {
        Some(sites) => {
            if src.find("initial", "zone").is_some() {
                return Err(src.error("initial", "sites", "give either zone or sites, not both"));
            }
            if sites.is_empty() {
                return Err(src.error("initial", "sites", "must not be empty"));
            }
            if let Some(bad) = sites.iter().find(|&&i| i >= system.n_total) {
                return Err(src.error("initial", "sites", format!("site {bad} outside chain of {}", system.n_total)));
            }
            Ok(Zone::Sites(sites))
        }
        None => Ok(read_zone(src, "initial", "zone", system)?.unwrap_or(Zone::Disordered)),
    }
}

/// Seeds are integers (negative values stand for their 64-bit pattern) or
/// decimal strings, so that the full `u64` range is expressible in TOML.
fn read_seed(src: &Sources) -> ConfigResult<u64> {
    match src.find("ensemble", "seed").map(|(v, _)| v) {
        None => Ok(0),
        Some(Value::Integer(i)) => Ok(*i as u64),
        Some(Value::String(text)) => {
            text.parse().map_err(|_| src.error("ensemble", "seed", format!("`{text}` is not a 64-bit unsigned integer")))
        }
        Some(_) => Err(src.error("ensemble", "seed", "expected an integer")),
    }
}

fn read_ensemble(src: &Sources) -> ConfigResult<EnsembleSettings> {
    let s = "ensemble";
    let realizations = src.get(s, "realizations")?.unwrap_or(DEFAULT_REALIZATIONS);
    if realizations == 0 {
        return Err(src.error(s, "realizations", "must be positive"));
    }
    let seed = read_seed(src)?;
    let observables = match src.get::<Vec<String>>(s, "observables")? {
        None => ObservableKind::ALL.to_vec(),
        Some(names) => {
            let mut set = BTreeSet::new();
            for n in &names {
                let kind = ObservableKind::parse(n)
                    .ok_or_else(|| src.error(s, "observables", format!("unknown observable `{n}`")))?;
                set.insert(kind);
            }
            set.into_iter().collect()
        }
    };
    Ok(EnsembleSettings { realizations, seed, observables })
}

fn read_grid(src: &Sources) -> ConfigResult<GridSpec> {
    let s = "grid";
    let kind = src.get::<String>(s, "kind")?.unwrap_or_else(|| "log".into());
    let spec = match kind.as_str() {
        "log" => {
            let GridSpec::Log { t_min, t_max, points, include_zero } = GridSpec::default() else { unreachable!() };
            GridSpec::Log {
                t_min: src.get(s, "t_min")?.unwrap_or(t_min),
                t_max: src.get(s, "t_max")?.unwrap_or(t_max),
                points: src.get(s, "points")?.unwrap_or(points),
                include_zero: src.get(s, "include_zero")?.unwrap_or(include_zero),
            }
        }
        "linear" => GridSpec::Linear { t_max: src.require(s, "t_max")?, points: src.require(s, "points")? },
        "explicit" => GridSpec::Explicit { times: src.require(s, "times")? },
        other => return Err(src.error(s, "kind", format!("unknown grid kind `{other}` (log, linear, explicit)"))),
    };
    if let Err(e) = spec.build() {
        let key = match &spec {
            GridSpec::Explicit { .. } => "times",
            _ => "t_max",
        };
        return Err(src.error(s, if src.find(s, key).is_some() { key } else { "kind" }, e.to_string()));
    }
    Ok(spec)
}

fn read_spectrum(src: &Sources, system: &SystemConfig) -> ConfigResult<SpectrumSettings> {
    let s = "spectrum";
    let realizations = src.get(s, "realizations")?.unwrap_or(DEFAULT_SPECTRAL_REALIZATIONS);
    if realizations == 0 {
        return Err(src.error(s, "realizations", "must be positive"));
    }
    let weight_threshold = src.get(s, "weight_threshold")?.unwrap_or(DEFAULT_WEIGHT_THRESHOLD);
    if !(0.0..1.0).contains(&weight_threshold) {
        return Err(src.error(s, "weight_threshold", "must lie in [0, 1)"));
    }
    Ok(SpectrumSettings { realizations, weight_zone: read_zone(src, s, "weight_zone", system)?, weight_threshold })
}

impl RunConfig {
    pub fn from_sources(src: &Sources) -> ConfigResult<Self> {
        let system = read_system(src)?;
        Ok(Self {
            initial: read_initial(src, &system)?,
            ensemble: read_ensemble(src)?,
            grid: read_grid(src)?,
            spectrum: read_spectrum(src, &system)?,
            system,
        })
    }

    pub fn from_toml_str(source: &str) -> ConfigResult<Self> {
        let mut src = Sources::new();
        src.add_source("<string>", source)?;
        Self::from_sources(&src)
    }

    fn to_table(&self) -> Table {
        let mut root = Table::new();
        let s = &self.system;
        let mut system = Table::new();
        system.insert("n_total".into(), (s.n_total as i64).into());
        system.insert("n_clean".into(), (s.n_clean as i64).into());
        system.insert("n_disordered".into(), (s.n_disordered as i64).into());
        system.insert("xi".into(), s.xi.into());
        system.insert("directionality".into(), s.directionality.into());
        system.insert("gamma_total".into(), s.gamma_total.into());
        system.insert("disorder_strength".into(), s.disorder_strength.into());
        root.insert("system".into(), system.into());

        let mut initial = Table::new();
        match &self.initial {
            Zone::Sites(sites) => {
                initial.insert("sites".into(), Value::Array(sites.iter().map(|&i| (i as i64).into()).collect()));
            }
            z => {
                initial.insert("zone".into(), zone_name(z).expect("named zone").into());
            }
        }
        root.insert("initial".into(), initial.into());

        let mut ensemble = Table::new();
        ensemble.insert("realizations".into(), (self.ensemble.realizations as i64).into());
        // seeds above i64::MAX are stored as their two's-complement bit pattern
        ensemble.insert("seed".into(), (self.ensemble.seed as i64).into());
        ensemble.insert(
            "observables".into(),
            Value::Array(self.ensemble.observables.iter().map(|k| k.name().into()).collect()),
        );
        root.insert("ensemble".into(), ensemble.into());
        root.insert("grid".into(), self.grid.to_table().into());

        let mut spectrum = Table::new();
        spectrum.insert("realizations".into(), (self.spectrum.realizations as i64).into());
        let zone = self.spectrum.weight_zone.as_ref().and_then(zone_name).unwrap_or("none");
        spectrum.insert("weight_zone".into(), zone.into());
        spectrum.insert("weight_threshold".into(), self.spectrum.weight_threshold.into());
        root.insert("spectrum".into(), spectrum.into());
        root
    }

    /// Canonical TOML text; parsing it back yields an equal configuration.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_table()).expect("tables always serialize")
    }

    pub fn digest(&self) -> String {
        digest_text(&self.to_toml_string())
    }
}

pub fn digest_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn read_sweep(src: &Sources) -> ConfigResult<SweepSettings> {
    let s = "sweep";
    if !src.has_section(s) {
        return Err(src.missing(s, "axis"));
    }
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawAxis {
        parameter: String,
        values: Vec<f64>,
    }
    let raw: Vec<RawAxis> = src.require(s, "axis")?;
    if raw.is_empty() {
        return Err(src.error(s, "axis", "at least one axis is required"));
    }
    let mut axes = Vec::with_capacity(raw.len());
    for a in raw {
        let parameter = SweepParameter::parse(&a.parameter)
            .ok_or_else(|| src.error(s, "axis", format!("unknown sweep parameter `{}`", a.parameter)))?;
        if a.values.is_empty() {
            return Err(src.error(s, "axis", format!("axis `{}` has no values", a.parameter)));
        }
        axes.push(SweepAxis { parameter, values: a.values });
    }
    let links = src
        .get::<Vec<Link>>(s, "links")?
        .unwrap_or_default();
    let summaries = match src.get::<Vec<String>>(s, "summaries")? {
        None => vec![Summary::Pr, Summary::Dplr, Summary::Imbalance],
        Some(names) => {
            let mut set = BTreeSet::new();
            for n in &names {
                set.insert(
                    Summary::parse(n).ok_or_else(|| src.error(s, "summaries", format!("unknown summary `{n}`")))?,
                );
            }
            set.into_iter().collect()
        }
    };
    let readout_time = src.get(s, "readout_time")?.unwrap_or(DEFAULT_READOUT_TIME);
    if !(readout_time > 0.0 && f64::is_finite(readout_time)) {
        return Err(src.error(s, "readout_time", "must be positive"));
    }
    Ok(SweepSettings { axes, links, summaries, readout_time })
}

impl SweepConfig {
    pub fn from_sources(src: &Sources) -> ConfigResult<Self> {
        Ok(Self { run: RunConfig::from_sources(src)?, sweep: read_sweep(src)? })
    }

    pub fn from_toml_str(source: &str) -> ConfigResult<Self> {
        let mut src = Sources::new();
        src.add_source("<string>", source)?;
        Self::from_sources(&src)
    }

    pub fn to_toml_string(&self) -> String {
        let mut root = self.run.to_table();
        let mut sweep = Table::new();
        let axes = self
            .sweep
            .axes
            .iter()
            .map(|a| {
                let mut t = Table::new();
                t.insert("parameter".into(), a.parameter.name().into());
                t.insert("values".into(), Value::Array(a.values.iter().map(|&v| v.into()).collect()));
                Value::Table(t)
            })
            .collect();
        sweep.insert("axis".into(), Value::Array(axes));
        sweep.insert(
            "links".into(),
            Value::try_from(&self.sweep.links).expect("links serialize"),
        );
        sweep.insert(
            "summaries".into(),
            Value::Array(self.sweep.summaries.iter().map(|s| s.name().into()).collect()),
        );
        sweep.insert("readout_time".into(), self.sweep.readout_time.into());
        root.insert("sweep".into(), sweep.into());
        toml::to_string(&root).expect("tables always serialize")
    }

    pub fn digest(&self) -> String {
        digest_text(&self.to_toml_string())
    }

    pub fn spec(&self) -> SweepSpec {
        let run = &self.run;
        SweepSpec {
            base_config: run.system.clone(),
            initial_zone: run.initial.clone(),
            axes: self.sweep.axes.clone(),
            links: self.sweep.links.clone(),
            n_realizations: run.ensemble.realizations,
            master_seed: run.ensemble.seed,
            summaries: self.sweep.summaries.iter().copied().collect(),
            readout_time: self.sweep.readout_time,
            weight_zone: run.spectrum.weight_zone.clone(),
            weight_threshold: run.spectrum.weight_threshold,
        }
    }
}
