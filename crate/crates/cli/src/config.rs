//! Strict `key = value` experiment configs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use dce_core::{MMax, PulseProfile, SampledPulse};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Dynamics,
    Pulsetrain,
    Pdf,
    Compare,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Dynamics => "dynamics",
            Mode::Pulsetrain => "pulsetrain",
            Mode::Pdf => "pdf",
            Mode::Compare => "compare",
            Mode::Sweep => "sweep",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        Some(match s {
            "dynamics" => Mode::Dynamics,
            "pulsetrain" => Mode::Pulsetrain,
            "pdf" => Mode::Pdf,
            "compare" => Mode::Compare,
            "sweep" => Mode::Sweep,
            _ => return None,
        })
    }
}

/// Where the pdf and compare modes take their covariance state from.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Thermal { n_mean: f64 },
    Squeezed { r: f64 },
    Invariants { tau: f64, delta: f64 },
    Covariance { sigma_xx: f64, sigma_pp: f64, sigma_xp: f64 },
    Pulsetrain,
    Dynamics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Period {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: &'static str,
    pub mode: Mode,
    /// Raw value and the fully validated config of each point.
    pub points: Vec<(String, ExperimentConfig)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub g: f64,
    pub g0: f64,
    pub omega0: f64,
    pub pulse: Option<PulseProfile>,
    /// Gain and loss given directly instead of through a pulse.
    pub coefficients: Option<(f64, f64)>,
    pub phi: Option<f64>,
    pub n: Option<u64>,
    pub period: Period,
    pub resonance_m: i64,
    pub t_end: Option<f64>,
    pub state: Option<StateSpec>,
    pub m_max: MMax,
    pub moments: u32,
    pub oracle: bool,
    pub name: String,
    pub sweep: Option<SweepSpec>,
    entries: BTreeMap<&'static str, Entry>,
    pulse_text: Option<String>,
    base: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Count(u64),
    Bool(bool),
    Auto,
    Text(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: Value,
    raw: String,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Number,
    Count,
    Bool,
    Choice(&'static [&'static str]),
    NumberOrAuto,
    CountOrAuto,
    Name,
    List,
}

impl Kind {
    fn expected(self) -> String {
        match self {
            Kind::Number => "a finite number".into(),
            Kind::Count => "a nonnegative integer".into(),
            Kind::Bool => "true or false".into(),
            Kind::Choice(c) => format!("one of {}", c.join(", ")),
            Kind::NumberOrAuto => "a finite number or `auto`".into(),
            Kind::CountOrAuto => "a nonnegative integer or `auto`".into(),
            Kind::Name => "a name made of letters, digits, `_`, `-`, `.`, `/`".into(),
            Kind::List => "a comma-separated list or start:stop:step".into(),
        }
    }

    fn parse(self, raw: &str) -> Option<Value> {
        let number = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        match self {
            Kind::Number => number(raw).map(Value::Number),
            Kind::Count => raw.parse().ok().map(Value::Count),
            Kind::Bool => match raw {
                "true" => Some(Value::Bool(true)),
                "false" => Some(Value::Bool(false)),
                _ => None,
            },
            Kind::Choice(c) => c.contains(&raw).then(|| Value::Text(raw.into())),
            Kind::NumberOrAuto => match raw {
                "auto" => Some(Value::Auto),
                _ => number(raw).map(Value::Number),
            },
            Kind::CountOrAuto => match raw {
                "auto" => Some(Value::Auto),
                _ => raw.parse().ok().map(Value::Count),
            },
            Kind::Name => (!raw.is_empty()
                && raw.chars().all(|c| c.is_ascii_alphanumeric() || "_-./".contains(c)))
            .then(|| Value::Text(raw.into())),
            Kind::List => {
                let items: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
                (!items.iter().any(String::is_empty)).then_some(Value::List(items))
            }
        }
    }
}

const MODES: &[&str] = &["dynamics", "pulsetrain", "pdf", "compare", "sweep"];
const SHAPES: &[&str] = &["rectangular", "rise_decay", "matched", "file"];
const STATES: &[&str] = &["thermal", "squeezed", "invariants", "covariance", "pulsetrain", "dynamics"];
const SWEEP_MODES: &[&str] = &["dynamics", "pulsetrain", "pdf", "compare"];

const KEYS: &[(&str, Kind)] = &[
    ("mode", Kind::Choice(MODES)),
    ("name", Kind::Name),
    ("G", Kind::Number),
    ("G0", Kind::Number),
    ("omega0", Kind::Number),
    ("pulse", Kind::Choice(SHAPES)),
    ("chi", Kind::Number),
    ("gamma", Kind::Number),
    ("duration", Kind::Number),
    ("rise", Kind::Number),
    ("decay", Kind::Number),
    ("pulse_file", Kind::Name),
    ("nu", Kind::Number),
    ("lambda", Kind::Number),
    ("phi", Kind::Number),
    ("n", Kind::Count),
    ("period", Kind::NumberOrAuto),
    ("resonance_m", Kind::Count),
    ("t_end", Kind::Number),
    ("state", Kind::Choice(STATES)),
    ("n_mean", Kind::Number),
    ("r", Kind::Number),
    ("tau", Kind::Number),
    ("delta", Kind::Number),
    ("sigma_xx", Kind::Number),
    ("sigma_pp", Kind::Number),
    ("sigma_xp", Kind::Number),
    ("m_max", Kind::CountOrAuto),
    ("moments", Kind::Count),
    ("oracle", Kind::Bool),
    ("sweep_key", Kind::Name),
    ("sweep_values", Kind::List),
    ("sweep_mode", Kind::Choice(SWEEP_MODES)),
];

const DEFAULTS: &[(&str, &str)] = &[
    ("name", "run"),
    ("G", "1"),
    ("G0", "1"),
    ("omega0", "1"),
    ("period", "auto"),
    ("resonance_m", "1"),
    ("m_max", "auto"),
    ("moments", "0"),
    ("oracle", "false"),
];

fn kind_of(key: &str) -> Option<(&'static str, Kind)> {
    KEYS.iter().find(|(k, _)| *k == key).copied()
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub kind: ConfigErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigErrorKind {
    Syntax(String),
    UnknownKey(String),
    DuplicateKey(String),
    TypeMismatch { key: String, expected: String, found: String },
    MissingKey { key: String, reason: String },
    InvalidValue { key: String, reason: String },
    PulseFile { path: String, reason: String },
}

impl fmt::Display for ConfigErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigErrorKind::Syntax(s) => write!(f, "syntax error: {s}"),
            ConfigErrorKind::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ConfigErrorKind::DuplicateKey(k) => write!(f, "key `{k}` given twice"),
            ConfigErrorKind::TypeMismatch { key, expected, found } => {
                write!(f, "type mismatch for `{key}`: expected {expected}, found `{found}`")
            }
            ConfigErrorKind::MissingKey { key, reason } => write!(f, "missing required key `{key}` ({reason})"),
            ConfigErrorKind::InvalidValue { key, reason } => write!(f, "invalid value for `{key}`: {reason}"),
            ConfigErrorKind::PulseFile { path, reason } => write!(f, "pulse file `{path}`: {reason}"),
        }
    }
}

/// Parse a config whose relative paths resolve against the working directory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_in(text, Path::new("."))
}

/// Parse a config file; relative paths resolve against its directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: 0,
        column: 0,
        kind: ConfigErrorKind::Syntax(format!("cannot read {}: {e}", path.display())),
    })?;
    parse_config_in(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config_in(text: &str, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let mut entries = BTreeMap::new();
    let mut last_line = 0;
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let body = full.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        // every token is a subslice of the line
        let col = |s: &str| s.as_ptr() as usize - full.as_ptr() as usize + 1;
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError {
                line,
                column: col(body.trim_start()),
                kind: ConfigErrorKind::Syntax("expected `key = value`".into()),
            });
        };
        let key = k.trim();
        let raw = v.trim();
        if key.is_empty() || raw.is_empty() {
            return Err(ConfigError {
                line,
                column: col(body.trim_start()),
                kind: ConfigErrorKind::Syntax("empty key or value".into()),
            });
        }
        let key_col = col(key);
        let value_col = col(raw);
        let Some((name, kind)) = kind_of(key) else {
            return Err(ConfigError {
                line,
                column: key_col,
                kind: ConfigErrorKind::UnknownKey(key.into()),
            });
        };
        let entry = parse_entry(name, kind, raw, line, value_col)?;
        if entries.insert(name, entry).is_some() {
            return Err(ConfigError {
                line,
                column: key_col,
                kind: ConfigErrorKind::DuplicateKey(key.into()),
            });
        }
    }
    for &(k, raw) in DEFAULTS {
        if !entries.contains_key(k) {
            let (name, kind) = kind_of(k).expect("default keys are known");
            entries.insert(name, parse_entry(name, kind, raw, 0, 0)?);
        }
    }
    build(entries, base, last_line + 1)
}

fn parse_entry(key: &str, kind: Kind, raw: &str, line: usize, column: usize) -> Result<Entry, ConfigError> {
    match kind.parse(raw) {
        Some(value) => Ok(Entry {
            value,
            raw: raw.into(),
            line,
            column,
        }),
        None => Err(ConfigError {
            line,
            column,
            kind: ConfigErrorKind::TypeMismatch {
                key: key.into(),
                expected: kind.expected(),
                found: raw.into(),
            },
        }),
    }
}

struct Builder<'a> {
    entries: &'a BTreeMap<&'static str, Entry>,
    end: usize,
}

impl Builder<'_> {
    fn at(&self, key: &str) -> (usize, usize) {
        self.entries.get(key).map_or((self.end, 1), |e| (e.line, e.column))
    }

    fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        let (line, column) = self.at(key);
        ConfigError {
            line,
            column,
            kind: ConfigErrorKind::InvalidValue {
                key: key.into(),
                reason: reason.into(),
            },
        }
    }

    fn missing(&self, key: &str, anchor: &str, reason: impl Into<String>) -> ConfigError {
        let (line, column) = self.at(anchor);
        ConfigError {
            line,
            column,
            kind: ConfigErrorKind::MissingKey {
                key: key.into(),
                reason: reason.into(),
            },
        }
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn number(&self, key: &str) -> Option<f64> {
        match self.entries.get(key).map(|e| &e.value) {
            Some(Value::Number(v)) => Some(*v),
            _ => None,
        }
    }

    fn need(&self, key: &str, anchor: &str, reason: &str) -> Result<f64, ConfigError> {
        self.number(key).ok_or_else(|| self.missing(key, anchor, reason))
    }

    fn count(&self, key: &str) -> Option<u64> {
        match self.entries.get(key).map(|e| &e.value) {
            Some(Value::Count(v)) => Some(*v),
            _ => None,
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        match self.entries.get(key).map(|e| &e.value) {
            Some(Value::Text(v)) => Some(v),
            _ => None,
        }
    }
}

fn build(entries: BTreeMap<&'static str, Entry>, base: &Path, end: usize) -> Result<ExperimentConfig, ConfigError> {
    let b = Builder { entries: &entries, end };
    let mode = b
        .text("mode")
        .and_then(Mode::parse)
        .ok_or_else(|| b.missing("mode", "mode", "every config selects a pipeline"))?;

    let g = b.number("G").expect("defaulted");
    let g0 = b.number("G0").expect("defaulted");
    let omega0 = b.number("omega0").expect("defaulted");
    if g < 1.0 {
        return Err(b.invalid("G", format!("{g} < 1; thermal factors coth(x) are at least 1")));
    }
    if g0 < 1.0 {
        return Err(b.invalid("G0", format!("{g0} < 1; thermal factors coth(x) are at least 1")));
    }
    if omega0 <= 0.0 {
        return Err(b.invalid("omega0", "must be positive"));
    }

    let (pulse, pulse_text) = build_pulse(&b, base, omega0)?;

    let direct = [b.number("nu"), b.number("lambda")];
    let coefficients = match (pulse.is_some(), direct) {
        (false, [Some(nu), Some(lambda)]) => Some((nu, lambda)),
        (false, [Some(_), None]) => return Err(b.missing("lambda", "nu", "nu and lambda are given together")),
        (false, [None, Some(_)]) => return Err(b.missing("nu", "lambda", "nu and lambda are given together")),
        (true, _) if b.text("pulse") != Some("matched") && (direct[0].is_some() || direct[1].is_some()) => {
            let key = if direct[0].is_some() { "nu" } else { "lambda" };
            return Err(b.invalid(key, "derived from the pulse shape; remove it or use pulse = matched"));
        }
        _ => None,
    };
    if let Some((nu, lambda)) = coefficients {
        if nu < 0.0 {
            return Err(b.invalid("nu", "must be nonnegative"));
        }
        if lambda < 0.0 {
            return Err(b.invalid("lambda", "must be nonnegative"));
        }
    }
    let phi = b.number("phi");
    if pulse.is_some() && phi.is_some() {
        return Err(b.invalid("phi", "derived from the pulse shape; remove it"));
    }

    let n = b.count("n");
    let period = match b.entries["period"].value {
        Value::Number(t) if t > 0.0 => Period::Fixed(t),
        Value::Number(_) => return Err(b.invalid("period", "must be positive")),
        _ => Period::Auto,
    };
    let resonance_m = b.count("resonance_m").expect("defaulted");
    if resonance_m < 1 {
        return Err(b.invalid("resonance_m", "resonance order starts at 1"));
    }
    let t_end = b.number("t_end");
    if matches!(t_end, Some(t) if t < 0.0) {
        return Err(b.invalid("t_end", "must be nonnegative"));
    }
    let m_max = match b.entries["m_max"].value {
        Value::Count(m) => MMax::Fixed(m as usize),
        _ => MMax::Auto,
    };
    let moments = b.count("moments").expect("defaulted");
    if moments > 8 {
        return Err(b.invalid("moments", "at most 8 moments are available"));
    }
    let oracle = matches!(b.entries["oracle"].value, Value::Bool(true));
    let name = b.text("name").expect("defaulted").to_string();

    let state = build_state(&b)?;

    let needs_train = |m: Mode| match m {
        Mode::Dynamics | Mode::Pulsetrain => true,
        Mode::Pdf | Mode::Compare => matches!(state, Some(StateSpec::Pulsetrain | StateSpec::Dynamics)),
        Mode::Sweep => false,
    };
    let train_source = match mode {
        Mode::Pdf | Mode::Compare => match state {
            Some(StateSpec::Dynamics) => Some(Mode::Dynamics),
            Some(StateSpec::Pulsetrain) => Some(Mode::Pulsetrain),
            _ => None,
        },
        Mode::Sweep => None,
        m => Some(m),
    };
    if needs_train(mode) && n.is_none() {
        return Err(b.missing("n", "mode", "number of pulses in the train"));
    }
    match train_source {
        Some(Mode::Dynamics) if pulse.is_none() => {
            return Err(b.missing("pulse", "mode", "the dynamics pipeline integrates a pulse shape"));
        }
        Some(Mode::Pulsetrain) if pulse.is_none() && coefficients.is_none() => {
            return Err(b.missing("nu", "mode", "give nu and lambda, or a pulse shape"));
        }
        _ => {}
    }
    if matches!(mode, Mode::Pdf | Mode::Compare) && state.is_none() {
        return Err(b.missing("state", "mode", "pdf and compare need a state source"));
    }

    let mut cfg = ExperimentConfig {
        mode,
        g,
        g0,
        omega0,
        pulse,
        coefficients,
        phi,
        n,
        period,
        resonance_m: resonance_m as i64,
        t_end,
        state,
        m_max,
        moments: moments as u32,
        oracle,
        name,
        sweep: None,
        entries: entries.clone(),
        pulse_text,
        base: base.to_path_buf(),
    };
    if mode == Mode::Sweep {
        cfg.sweep = Some(build_sweep(&b, &cfg)?);
    }
    Ok(cfg)
}

fn build_pulse(b: &Builder, base: &Path, omega0: f64) -> Result<(Option<PulseProfile>, Option<String>), ConfigError> {
    let Some(shape) = b.text("pulse") else {
        for key in ["chi", "gamma", "duration", "rise", "decay", "pulse_file"] {
            if b.has(key) {
                return Err(b.missing("pulse", key, format!("`{key}` only applies to a pulse shape")));
            }
        }
        return Ok((None, None));
    };
    let why = format!("required by pulse = {shape}");
    let core = |r: dce_core::Result<PulseProfile>| r.map_err(|e| b.invalid("pulse", e.to_string()));
    let profile = match shape {
        "rectangular" => core(PulseProfile::rectangular(
            b.need("chi", "pulse", &why)?,
            b.need("gamma", "pulse", &why)?,
            b.need("duration", "pulse", &why)?,
        ))?,
        "rise_decay" => core(PulseProfile::rise_decay(
            b.need("chi", "pulse", &why)?,
            b.need("gamma", "pulse", &why)?,
            b.need("rise", "pulse", &why)?,
            b.need("decay", "pulse", &why)?,
            b.need("duration", "pulse", &why)?,
        ))?,
        "matched" => core(dce_core::rectangular_pulse_for(
            b.need("nu", "pulse", &why)?,
            b.need("lambda", "pulse", &why)?,
            b.need("duration", "pulse", &why)?,
            omega0,
        ))?,
        _ => {
            let rel = b
                .text("pulse_file")
                .ok_or_else(|| b.missing("pulse_file", "pulse", why.clone()))?;
            let path = base.join(rel);
            let (line, column) = b.at("pulse_file");
            let fail = |reason: String| ConfigError {
                line,
                column,
                kind: ConfigErrorKind::PulseFile {
                    path: rel.into(),
                    reason,
                },
            };
            let text = std::fs::read_to_string(&path).map_err(|e| fail(e.to_string()))?;
            let samples = parse_pulse_samples(&text).map_err(fail)?;
            let profile = PulseProfile::sampled(samples).map_err(|e| fail(e.to_string()))?;
            return Ok((Some(profile), Some(text)));
        }
    };
    Ok((Some(profile), None))
}

/// Two or three whitespace-separated columns `t chi [gamma]`, `#` comments.
pub fn parse_pulse_samples(text: &str) -> Result<SampledPulse, String> {
    let (mut t, mut chi, mut gamma) = (Vec::new(), Vec::new(), Vec::new());
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let cols: Vec<&str> = body.split_whitespace().collect();
        if !(2..=3).contains(&cols.len()) {
            return Err(format!("line {}: expected 2 or 3 columns, found {}", i + 1, cols.len()));
        }
        if *width.get_or_insert(cols.len()) != cols.len() {
            return Err(format!("line {}: column count changed", i + 1));
        }
        let mut vals = Vec::with_capacity(3);
        for c in &cols {
            match c.parse::<f64>() {
                Ok(v) if v.is_finite() => vals.push(v),
                _ => return Err(format!("line {}: `{c}` is not a finite number", i + 1)),
            }
        }
        if t.last().is_some_and(|&last| !(vals[0] > last)) {
            return Err(format!("line {}: times must be strictly increasing", i + 1));
        }
        t.push(vals[0]);
        chi.push(vals[1]);
        gamma.push(vals.get(2).copied().unwrap_or(0.0));
    }
    SampledPulse::new(t, chi, gamma).map_err(|e| e.to_string())
}

fn build_state(b: &Builder) -> Result<Option<StateSpec>, ConfigError> {
    let Some(kind) = b.text("state") else {
        return Ok(None);
    };
    let why = format!("required by state = {kind}");
    let spec = match kind {
        "thermal" => {
            let n_mean = b.need("n_mean", "state", &why)?;
            if n_mean < 0.0 {
                return Err(b.invalid("n_mean", "must be nonnegative"));
            }
            StateSpec::Thermal { n_mean }
        }
        "squeezed" => StateSpec::Squeezed {
            r: b.need("r", "state", &why)?,
        },
        "invariants" => StateSpec::Invariants {
            tau: b.need("tau", "state", &why)?,
            delta: b.need("delta", "state", &why)?,
        },
        "covariance" => StateSpec::Covariance {
            sigma_xx: b.need("sigma_xx", "state", &why)?,
            sigma_pp: b.need("sigma_pp", "state", &why)?,
            sigma_xp: b.need("sigma_xp", "state", &why)?,
        },
        "pulsetrain" => StateSpec::Pulsetrain,
        _ => StateSpec::Dynamics,
    };
    Ok(Some(spec))
}

fn build_sweep(b: &Builder, cfg: &ExperimentConfig) -> Result<SweepSpec, ConfigError> {
    let key_raw = b
        .text("sweep_key")
        .ok_or_else(|| b.missing("sweep_key", "mode", "the parameter to vary"))?;
    let (key, kind) = kind_of(key_raw).ok_or_else(|| b.invalid("sweep_key", format!("`{key_raw}` is not a config key")))?;
    if !matches!(kind, Kind::Number | Kind::Count | Kind::NumberOrAuto | Kind::CountOrAuto) {
        return Err(b.invalid("sweep_key", format!("`{key}` is not numeric")));
    }
    let Some(Value::List(items)) = b.entries.get("sweep_values").map(|e| &e.value) else {
        return Err(b.missing("sweep_values", "sweep_key", "the values of the swept parameter"));
    };
    let values = expand_values(items, kind).map_err(|r| b.invalid("sweep_values", r))?;
    let mode = b.text("sweep_mode").and_then(Mode::parse).unwrap_or(Mode::Pulsetrain);
    let (line, column) = b.at("sweep_values");
    let mut points = Vec::with_capacity(values.len());
    for v in values {
        let mut entries = cfg.entries.clone();
        for k in ["sweep_key", "sweep_values", "sweep_mode"] {
            entries.remove(k);
        }
        entries.insert(key, parse_entry(key, kind, &v, line, column)?);
        entries.insert("mode", parse_entry("mode", Kind::Choice(MODES), mode.name(), line, column)?);
        let point = build(entries, &cfg.base, b.end).map_err(|mut err| {
            err.line = line;
            err.column = column;
            if let ConfigErrorKind::InvalidValue { reason, .. } | ConfigErrorKind::MissingKey { reason, .. } = &mut err.kind {
                *reason = format!("{reason} (sweep point {key} = {v})");
            }
            err
        })?;
        points.push((v, point));
    }
    Ok(SweepSpec { key, mode, points })
}

/// `a,b,c` or a single `start:stop:step` item.
fn expand_values(items: &[String], kind: Kind) -> Result<Vec<String>, String> {
    let integer = matches!(kind, Kind::Count | Kind::CountOrAuto);
    if let [only] = items {
        let parts: Vec<&str> = only.split(':').collect();
        if parts.len() == 3 {
            if integer {
                let p: Vec<u64> = parts
                    .iter()
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| format!("range `{only}` needs integer start:stop:step"))?;
                if p[2] == 0 || p[1] < p[0] {
                    return Err(format!("range `{only}` is empty or has zero step"));
                }
                return Ok((p[0]..=p[1]).step_by(p[2] as usize).map(|v| v.to_string()).collect());
            }
            let p: Vec<f64> = parts
                .iter()
                .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<_>>()
                .ok_or_else(|| format!("range `{only}` needs numeric start:stop:step"))?;
            if !(p[2] > 0.0) || p[1] < p[0] {
                return Err(format!("range `{only}` is empty or has nonpositive step"));
            }
            let count = ((p[1] - p[0]) / p[2] + 1e-9).floor() as usize;
            return Ok((0..=count).map(|i| format!("{:?}", p[0] + i as f64 * p[2])).collect());
        }
    }
    Ok(items.to_vec())
}

impl ExperimentConfig {
    /// Copy with one key replaced, revalidated as if it had been in the file.
    pub fn with_value(&self, key: &str, raw: &str) -> Result<ExperimentConfig, ConfigError> {
        let Some((name, kind)) = kind_of(key) else {
            return Err(ConfigError {
                line: 0,
                column: 0,
                kind: ConfigErrorKind::UnknownKey(key.into()),
            });
        };
        let mut entries = self.entries.clone();
        entries.insert(name, parse_entry(name, kind, raw, 0, 0)?);
        let end = entries.values().map(|e| e.line).max().unwrap_or(0) + 1;
        build(entries, &self.base, end)
    }

    /// Resolved `key = value` lines, defaults included, in key order.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, _) in KEYS {
            if let Some(e) = self.entries.get(k) {
                out.push_str(&format!("{k} = {}\n", e.raw));
            }
        }
        out
    }

    /// Contents of the sampled pulse file, when one is used.
    pub fn pulse_text(&self) -> Option<&str> {
        self.pulse_text.as_deref()
    }

    /// Whether the key was set in the file rather than defaulted.
    pub fn is_explicit(&self, key: &str) -> bool {
        self.entries.get(key).is_some_and(|e| e.line > 0)
    }
}
