//! INI-style scenario configuration files.
//!
//! Sections `[machine]`, `[control]`, `[scenario]`, and `[fuzzy]` hold
//! `key = value` lines; `#` starts a comment. Every key has a default, so an
//! empty file resolves to the reference experiment. Unknown keys are
//! rejected with their line number, and the resolver records where each
//! value came from (file or default).

use dtcsim::plant::rpm_to_rad_s;
use dtcsim::sim::{ControllerKind, Profile, ScenarioConfig};
use std::fmt;
use std::path::Path;

/// Parse failure with the 1-based line it was detected on, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Where a resolved value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    File,
    Default,
}

/// One key of the fully resolved configuration, in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedEntry {
    /// `section.key`.
    pub key: &'static str,
    /// Canonical value string; parsing it back reproduces the value exactly.
    pub value: String,
    pub source: Source,
}

/// A parsed configuration plus the provenance of every key.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub scenario: ScenarioConfig,
    pub entries: Vec<ResolvedEntry>,
}

const KEYS: &[&str] = &[
    "machine.rs",
    "machine.rr",
    "machine.lls",
    "machine.llr",
    "machine.lm",
    "machine.j",
    "machine.f",
    "machine.pole_pairs",
    "machine.vdc",
    "control.controller",
    "control.flux_band",
    "control.torque_band",
    "control.kp",
    "control.ki",
    "control.torque_max",
    "scenario.speed_ref",
    "scenario.load",
    "scenario.flux_ref",
    "scenario.t_end",
    "scenario.dt_ctrl",
    "fuzzy.flux_scale",
    "fuzzy.torque_scale",
    "fuzzy.flux_centers",
    "fuzzy.torque_centers",
];

/// Input-only key spellings mapped to their canonical key.
const ALIASES: &[(&str, &str)] = &[
    ("scenario.speed_ref_rpm", "scenario.speed_ref"),
    ("scenario.flux_reference", "scenario.flux_ref"),
];

struct RawItem {
    line: usize,
    /// key as given in the file (possibly an alias)
    spelled: String,
    value: String,
}

pub fn parse_config(path: &Path) -> Result<ResolvedConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::global(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ResolvedConfig, ConfigError> {
    let items = lex(text)?;

    // map every item to its canonical key, rejecting unknowns and duplicates
    let mut by_key: Vec<(usize, &'static str, String, String)> = Vec::new();
    for item in items {
        let canonical = canonical_key(&item.spelled)
            .ok_or_else(|| ConfigError::at(item.line, format!("unknown key `{}`", item.spelled)))?;
        if let Some((first_line, _, spelled, _)) = by_key.iter().find(|(_, k, _, _)| *k == canonical) {
            return Err(ConfigError::at(
                item.line,
                format!("`{}` conflicts with `{spelled}` on line {first_line}", item.spelled),
            ));
        }
        by_key.push((item.line, canonical, item.spelled, item.value));
    }

    let mut cfg = ScenarioConfig::default();
    let mut from_file: Vec<&'static str> = Vec::new();
    for (line, key, spelled, value) in &by_key {
        apply(&mut cfg, key, spelled, value).map_err(|msg| ConfigError::at(*line, msg))?;
        from_file.push(key);
    }

    cfg.validate().map_err(|e| ConfigError::global(e.to_string()))?;

    let entries = KEYS
        .iter()
        .map(|key| ResolvedEntry {
            key,
            value: canonical_value(&cfg, key),
            source: if from_file.contains(key) { Source::File } else { Source::Default },
        })
        .collect();
    Ok(ResolvedConfig { scenario: cfg, entries })
}

/// Renders a configuration as an INI file that parses back to the same
/// resolved scenario, bit for bit.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let mut section = "";
    for key in KEYS {
        let (sec, name) = key.split_once('.').unwrap();
        if sec != section {
            if !section.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{sec}]\n"));
            section = sec;
        }
        out.push_str(&format!("{name} = {}\n", canonical_value(cfg, key)));
    }
    out
}

fn lex(text: &str) -> Result<Vec<RawItem>, ConfigError> {
    let mut items = Vec::new();
    let mut section: Option<&str> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, "unterminated section header"))?
                .trim();
            if !matches!(name, "machine" | "control" | "scenario" | "fuzzy") {
                return Err(ConfigError::at(line, format!("unknown section `[{name}]`")));
            }
            section = Some(match name {
                "machine" => "machine",
                "control" => "control",
                "scenario" => "scenario",
                _ => "fuzzy",
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{content}`")))?;
        let section = section.ok_or_else(|| ConfigError::at(line, "key before any [section] header"))?;
        items.push(RawItem {
            line,
            spelled: format!("{section}.{}", key.trim()),
            value: value.trim().to_string(),
        });
    }
    Ok(items)
}

fn canonical_key(spelled: &str) -> Option<&'static str> {
    if let Some((_, canonical)) = ALIASES.iter().find(|(a, _)| *a == spelled) {
        return Some(canonical);
    }
    KEYS.iter().find(|k| **k == spelled).copied()
}

fn parse_f64(value: &str, what: &str) -> Result<f64, String> {
    let v: f64 = value.parse().map_err(|_| format!("{what}: `{value}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{what}: value must be finite"));
    }
    Ok(v)
}

fn parse_positive(value: &str, what: &str) -> Result<f64, String> {
    let v = parse_f64(value, what)?;
    if v <= 0.0 {
        return Err(format!("{what}: value must be positive, got {v}"));
    }
    Ok(v)
}

fn parse_non_negative(value: &str, what: &str) -> Result<f64, String> {
    let v = parse_f64(value, what)?;
    if v < 0.0 {
        return Err(format!("{what}: value must be non-negative, got {v}"));
    }
    Ok(v)
}

/// Profiles are a bare value (`5`) or comma-separated `time:value` steps
/// (`0:0, 0.5:5`). `scale` converts the values (rpm keys pass 2*pi/60).
fn parse_profile(value: &str, what: &str, scale: f64) -> Result<Profile, String> {
    if !value.contains(':') {
        return Ok(Profile::constant(parse_f64(value, what)? * scale));
    }
    let mut points = Vec::new();
    for part in value.split(',') {
        let (t, v) = part
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("{what}: expected `time:value`, got `{part}`"))?;
        points.push((
            parse_non_negative(t.trim(), what)?,
            parse_f64(v.trim(), what)? * scale,
        ));
    }
    Profile::steps(points).map_err(|e| format!("{what}: {e}"))
}

fn parse_list<const N: usize>(value: &str, what: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("{what}: expected {N} comma-separated values, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_f64(part, what)?;
    }
    Ok(out)
}

fn apply(cfg: &mut ScenarioConfig, key: &str, spelled: &str, value: &str) -> Result<(), String> {
    match key {
        "machine.rs" => cfg.machine.rs = parse_positive(value, key)?,
        "machine.rr" => cfg.machine.rr = parse_positive(value, key)?,
        "machine.lls" => cfg.machine.lls = parse_positive(value, key)?,
        "machine.llr" => cfg.machine.llr = parse_positive(value, key)?,
        "machine.lm" => cfg.machine.lm = parse_positive(value, key)?,
        "machine.j" => cfg.machine.j = parse_positive(value, key)?,
        "machine.f" => cfg.machine.f = parse_non_negative(value, key)?,
        "machine.pole_pairs" => {
            let p: u32 = value.parse().map_err(|_| format!("{key}: `{value}` is not an integer"))?;
            if p < 1 {
                return Err(format!("{key}: must be at least 1"));
            }
            cfg.machine.pole_pairs = p;
        }
        "machine.vdc" => cfg.machine.vdc = parse_non_negative(value, key)?,
        "control.controller" => {
            cfg.controller = match value {
                "cdtc" => ControllerKind::Cdtc,
                "flsvm" => ControllerKind::Flsvm,
                other => return Err(format!("{key}: expected `cdtc` or `flsvm`, got `{other}`")),
            };
        }
        "control.flux_band" => cfg.flux_band = parse_positive(value, key)?,
        "control.torque_band" => cfg.torque_band = parse_positive(value, key)?,
        "control.kp" => cfg.kp = parse_non_negative(value, key)?,
        "control.ki" => cfg.ki = parse_non_negative(value, key)?,
        "control.torque_max" => cfg.torque_max = parse_positive(value, key)?,
        "scenario.speed_ref" => {
            let rpm = spelled.ends_with("_rpm");
            let scale = if rpm { rpm_to_rad_s(1.0) } else { 1.0 };
            cfg.speed_ref = parse_profile(value, spelled, scale)?;
        }
        "scenario.load" => cfg.load = parse_profile(value, key, 1.0)?,
        "scenario.flux_ref" => cfg.flux_ref = parse_positive(value, spelled)?,
        "scenario.t_end" => cfg.t_end = parse_positive(value, key)?,
        "scenario.dt_ctrl" => cfg.dt_ctrl = parse_positive(value, key)?,
        "fuzzy.flux_scale" => cfg.fuzzy.flux_scale = parse_positive(value, key)?,
        "fuzzy.torque_scale" => cfg.fuzzy.torque_scale = parse_positive(value, key)?,
        "fuzzy.flux_centers" => cfg.fuzzy.flux_centers = parse_list::<4>(value, key)?,
        "fuzzy.torque_centers" => cfg.fuzzy.torque_centers = parse_list::<5>(value, key)?,
        _ => unreachable!("canonical_key returned an unhandled key"),
    }
    Ok(())
}

fn fmt_profile(p: &Profile) -> String {
    let points = p.points();
    if points.len() == 1 {
        format!("{}", points[0].1)
    } else {
        points
            .iter()
            .map(|(t, v)| format!("{t}:{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn canonical_value(cfg: &ScenarioConfig, key: &str) -> String {
    match key {
        "machine.rs" => format!("{}", cfg.machine.rs),
        "machine.rr" => format!("{}", cfg.machine.rr),
        "machine.lls" => format!("{}", cfg.machine.lls),
        "machine.llr" => format!("{}", cfg.machine.llr),
        "machine.lm" => format!("{}", cfg.machine.lm),
        "machine.j" => format!("{}", cfg.machine.j),
        "machine.f" => format!("{}", cfg.machine.f),
        "machine.pole_pairs" => format!("{}", cfg.machine.pole_pairs),
        "machine.vdc" => format!("{}", cfg.machine.vdc),
        "control.controller" => cfg.controller.name().to_string(),
        "control.flux_band" => format!("{}", cfg.flux_band),
        "control.torque_band" => format!("{}", cfg.torque_band),
        "control.kp" => format!("{}", cfg.kp),
        "control.ki" => format!("{}", cfg.ki),
        "control.torque_max" => format!("{}", cfg.torque_max),
        "scenario.speed_ref" => fmt_profile(&cfg.speed_ref),
        "scenario.load" => fmt_profile(&cfg.load),
        "scenario.flux_ref" => format!("{}", cfg.flux_ref),
        "scenario.t_end" => format!("{}", cfg.t_end),
        "scenario.dt_ctrl" => format!("{}", cfg.dt_ctrl),
        "fuzzy.flux_scale" => format!("{}", cfg.fuzzy.flux_scale),
        "fuzzy.torque_scale" => format!("{}", cfg.fuzzy.torque_scale),
        "fuzzy.flux_centers" => fmt_list(&cfg.fuzzy.flux_centers),
        "fuzzy.torque_centers" => fmt_list(&cfg.fuzzy.torque_centers),
        _ => unreachable!(),
    }
}

/// Convenience for the sweep command: re-renders `base` with one key
/// replaced by a raw value string and parses the result.
pub fn with_override(
    base: &ScenarioConfig,
    key: &str,
    value: &str,
) -> Result<ResolvedConfig, ConfigError> {
    let canonical = canonical_key(key)
        .ok_or_else(|| ConfigError::global(format!("unknown key `{key}`")))?;
    let mut out = String::new();
    let mut section = "";
    for k in KEYS {
        let (sec, name) = k.split_once('.').unwrap();
        if sec != section {
            out.push_str(&format!("[{sec}]\n"));
            section = sec;
        }
        let v = if *k == canonical { value.to_string() } else { canonical_value(base, k) };
        out.push_str(&format!("{name} = {v}\n"));
    }
    parse_config_str(&out)
}
