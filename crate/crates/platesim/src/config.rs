//! Scenario configuration: a sectioned `key = value` text format and its
//! validating parser. Parsing collects every problem it finds (unknown keys,
//! duplicates with both line numbers, type and range violations) instead of
//! stopping at the first.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{BoxRegion, DampingProfile, NonlinearityClass, NonlinearitySpec};
use crate::spectral::{DomainKind, Geometry};

/// One configuration problem with its location.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Text(String),
    Array(Vec<f64>),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Text(_) => "string",
            Value::Array(_) => "array",
        }
    }
}

/// Raw parse product: sections of key/value entries with line numbers.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, (usize, Value)>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> std::result::Result<RawConfig, Vec<ConfigError>> {
        let mut errors = Vec::new();
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (idx, line_raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match line_raw.find('#') {
                Some(pos) => &line_raw[..pos],
                None => line_raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if line.ends_with(']') && line.len() > 2 {
                    section = Some(line[1..line.len() - 1].trim().to_string());
                } else {
                    errors.push(ConfigError {
                        line: Some(line_no),
                        message: format!("malformed section header `{line}`"),
                    });
                }
                continue;
            }
            let Some(eq) = line.find('=') else {
                errors.push(ConfigError {
                    line: Some(line_no),
                    message: format!("expected `key = value`, got `{line}`"),
                });
                continue;
            };
            let key = line[..eq].trim().to_string();
            let value_text = line[eq + 1..].trim();
            if key.is_empty() {
                errors.push(ConfigError { line: Some(line_no), message: "empty key".into() });
                continue;
            }
            let Some(sect) = section.clone() else {
                errors.push(ConfigError {
                    line: Some(line_no),
                    message: format!("key `{key}` appears before any [section] header"),
                });
                continue;
            };
            let value = match parse_value(value_text) {
                Ok(v) => v,
                Err(msg) => {
                    errors.push(ConfigError {
                        line: Some(line_no),
                        message: format!("key `{key}`: {msg}"),
                    });
                    continue;
                }
            };
            let entry = raw.sections.entry(sect).or_default();
            if let Some((first_line, _)) = entry.get(&key) {
                errors.push(ConfigError {
                    line: Some(line_no),
                    message: format!("duplicate key `{key}` (first defined at line {first_line})"),
                });
                continue;
            }
            entry.insert(key, (line_no, value));
        }
        if errors.is_empty() {
            Ok(raw)
        } else {
            Err(errors)
        }
    }

    /// Applies a `section.key=value` override, replacing any existing entry.
    pub fn set_override(&mut self, assignment: &str) -> std::result::Result<(), ConfigError> {
        let Some(eq) = assignment.find('=') else {
            return Err(ConfigError {
                line: None,
                message: format!("override `{assignment}` is not of the form section.key=value"),
            });
        };
        let path = assignment[..eq].trim();
        let value_text = assignment[eq + 1..].trim();
        let Some(dot) = path.find('.') else {
            return Err(ConfigError {
                line: None,
                message: format!("override path `{path}` must be section.key"),
            });
        };
        let (section, key) = (path[..dot].trim(), path[dot + 1..].trim());
        let value = parse_value(value_text).map_err(|msg| ConfigError {
            line: None,
            message: format!("override `{path}`: {msg}"),
        })?;
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), (0, value));
        Ok(())
    }
}

fn parse_value(text: &str) -> std::result::Result<Value, String> {
    if text.is_empty() {
        return Err("empty value".into());
    }
    if text == "true" {
        return Ok(Value::Bool(true));
    }
    if text == "false" {
        return Ok(Value::Bool(false));
    }
    if text.starts_with('[') {
        if !text.ends_with(']') {
            return Err("unterminated array".into());
        }
        let inner = &text[1..text.len() - 1];
        let mut out = Vec::new();
        for part in inner.split(',') {
            let p = part.trim();
            if p.is_empty() {
                continue;
            }
            match p.parse::<f64>() {
                Ok(x) => out.push(x),
                Err(_) => return Err(format!("array element `{p}` is not a number")),
            }
        }
        return Ok(Value::Array(out));
    }
    if let Some(stripped) = text.strip_prefix('"') {
        return match stripped.strip_suffix('"') {
            Some(s) => Ok(Value::Text(s.to_string())),
            None => Err("unterminated string".into()),
        };
    }
    if let Ok(x) = text.parse::<f64>() {
        return Ok(Value::Number(x));
    }
    Ok(Value::Text(text.to_string()))
}

/// Run modes exposed by the scenario runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RunMode {
    Simulate,
    Observability,
    Hum,
    LocalControl,
    Steer,
    Equilibria,
}

impl RunMode {
    pub fn parse(s: &str) -> Option<RunMode> {
        match s {
            "simulate" => Some(RunMode::Simulate),
            "observability" => Some(RunMode::Observability),
            "hum" => Some(RunMode::Hum),
            "local-control" => Some(RunMode::LocalControl),
            "steer" => Some(RunMode::Steer),
            "equilibria" => Some(RunMode::Equilibria),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunMode::Simulate => "simulate",
            RunMode::Observability => "observability",
            RunMode::Hum => "hum",
            RunMode::LocalControl => "local-control",
            RunMode::Steer => "steer",
            RunMode::Equilibria => "equilibria",
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GeometryConfig {
    pub kind: DomainKind,
    pub dim: usize,
    pub modes: Vec<usize>,
    pub beta: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct NonlinearityConfig {
    pub coefficients: Vec<f64>,
    pub class: NonlinearityClass,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DampingConfig {
    pub boxes: Vec<BoxRegion>,
    pub gamma0: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunConfig {
    pub mode: RunMode,
    pub t_final: f64,
    pub dt: f64,
    pub seed: u64,
    pub damping: bool,
    pub initial_norm: f64,
    /// observability: schrodinger | plate | nonlinear
    pub observability_kind: String,
    /// observability: indicator | bump
    pub weight: String,
    /// observability plate mode: boundary | boundaryless | damped
    pub plate_mode: String,
    pub sobolev_s: f64,
    pub potential_constant: f64,
    pub samples: usize,
    pub energy_cap: f64,
    pub cg_tol: f64,
    pub tolerance: f64,
    pub target_norm: f64,
    pub start_norm: f64,
    pub check_observability: bool,
    /// constant-value guesses for equilibrium seeding
    pub guesses: Vec<f64>,
    pub random_guesses: usize,
    pub guess_norm: f64,
    /// steering endpoints as constant states (torus scenarios)
    pub start_constant: Option<f64>,
    pub end_constant: Option<f64>,
    /// per-phase control horizon of local controls inside plans
    pub control_time: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct OutputConfig {
    pub directory: String,
    pub formats: Vec<String>,
}

/// A fully validated scenario.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub nonlinearity: NonlinearityConfig,
    pub damping: DampingConfig,
    pub run: RunConfig,
    pub output: OutputConfig,
    /// Stable hash of the raw configuration text plus overrides.
    pub config_hash: String,
}

struct Extractor<'a> {
    section: &'a str,
    entries: BTreeMap<String, (usize, Value)>,
    errors: &'a mut Vec<ConfigError>,
}

impl Extractor<'_> {
    fn take(&mut self, key: &str) -> Option<(usize, Value)> {
        self.entries.remove(key)
    }

    fn number(&mut self, key: &str, default: Option<f64>) -> f64 {
        match self.take(key) {
            Some((_, Value::Number(x))) => x,
            Some((line, v)) => {
                self.errors.push(ConfigError {
                    line: Some(line),
                    message: format!(
                        "[{}] {key} must be a number, got {}",
                        self.section,
                        v.type_name()
                    ),
                });
                default.unwrap_or(0.0)
            }
            None => match default {
                Some(d) => d,
                None => {
                    self.errors.push(ConfigError {
                        line: None,
                        message: format!("[{}] missing required key `{key}`", self.section),
                    });
                    0.0
                }
            },
        }
    }

    fn boolean(&mut self, key: &str, default: bool) -> bool {
        match self.take(key) {
            Some((_, Value::Bool(b))) => b,
            Some((line, v)) => {
                self.errors.push(ConfigError {
                    line: Some(line),
                    message: format!(
                        "[{}] {key} must be true or false, got {}",
                        self.section,
                        v.type_name()
                    ),
                });
                default
            }
            None => default,
        }
    }

    fn text(&mut self, key: &str, default: Option<&str>) -> String {
        match self.take(key) {
            Some((_, Value::Text(s))) => s,
            Some((line, v)) => {
                self.errors.push(ConfigError {
                    line: Some(line),
                    message: format!(
                        "[{}] {key} must be a string, got {}",
                        self.section,
                        v.type_name()
                    ),
                });
                default.unwrap_or("").to_string()
            }
            None => match default {
                Some(d) => d.to_string(),
                None => {
                    self.errors.push(ConfigError {
                        line: None,
                        message: format!("[{}] missing required key `{key}`", self.section),
                    });
                    String::new()
                }
            },
        }
    }

    fn array(&mut self, key: &str, default: Option<Vec<f64>>) -> Vec<f64> {
        match self.take(key) {
            Some((_, Value::Array(a))) => a,
            Some((line, v)) => {
                self.errors.push(ConfigError {
                    line: Some(line),
                    message: format!(
                        "[{}] {key} must be an array, got {}",
                        self.section,
                        v.type_name()
                    ),
                });
                default.unwrap_or_default()
            }
            None => match default {
                Some(d) => d,
                None => {
                    self.errors.push(ConfigError {
                        line: None,
                        message: format!("[{}] missing required key `{key}`", self.section),
                    });
                    Vec::new()
                }
            },
        }
    }

    fn finish(self) {
        for (key, (line, _)) in self.entries {
            self.errors.push(ConfigError {
                line: Some(line),
                message: format!("[{}] unknown key `{key}`", self.section),
            });
        }
    }
}

/// Parses and validates a scenario from text. Returns either the validated
/// configuration or every error found.
pub fn parse_config(text: &str) -> std::result::Result<ScenarioConfig, Vec<ConfigError>> {
    let raw = RawConfig::parse(text)?;
    validate_config(&raw, text)
}

/// Validates a raw configuration (after any overrides).
pub fn validate_config(
    raw: &RawConfig,
    hash_source: &str,
) -> std::result::Result<ScenarioConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let known = ["geometry", "nonlinearity", "damping", "run", "output"];
    for section in raw.sections.keys() {
        if !known.contains(&section.as_str()) {
            errors.push(ConfigError {
                line: None,
                message: format!("unknown section [{section}]"),
            });
        }
    }
    let section = |name: &str| -> BTreeMap<String, (usize, Value)> {
        raw.sections.get(name).cloned().unwrap_or_default()
    };
    for required in ["geometry", "run"] {
        if !raw.sections.contains_key(required) {
            errors.push(ConfigError {
                line: None,
                message: format!("missing required section [{required}]"),
            });
        }
    }

    // geometry
    let mut ex =
        Extractor { section: "geometry", entries: section("geometry"), errors: &mut errors };
    let kind_text = ex.text("kind", None);
    let dim = ex.number("dim", Some(1.0));
    let modes = ex.array("modes", None);
    let beta = ex.number("beta", Some(0.0));
    ex.finish();
    let kind = match kind_text.as_str() {
        "hinged-rectangle" | "" => DomainKind::HingedRectangle,
        "torus" => DomainKind::Torus,
        other => {
            errors.push(ConfigError {
                line: None,
                message: format!(
                    "[geometry] kind must be `hinged-rectangle` or `torus`, got `{other}`"
                ),
            });
            DomainKind::HingedRectangle
        }
    };
    let geometry = GeometryConfig {
        kind,
        dim: dim as usize,
        modes: modes.iter().map(|&x| x as usize).collect(),
        beta,
    };

    // nonlinearity (optional block: zero nonlinearity when absent)
    let mut ex = Extractor {
        section: "nonlinearity",
        entries: section("nonlinearity"),
        errors: &mut errors,
    };
    let coefficients = ex.array("coefficients", Some(Vec::new()));
    let class_text = ex.text("class", Some("defocusing"));
    let alpha = ex.number("alpha", Some(0.0));
    let radius = ex.number("radius", Some(1.0));
    ex.finish();
    let class = match class_text.as_str() {
        "defocusing" => NonlinearityClass::Defocusing { alpha },
        "asymptotic-defocusing" => NonlinearityClass::AsymptoticDefocusing { radius },
        other => {
            errors.push(ConfigError {
                line: None,
                message: format!(
                    "[nonlinearity] class must be `defocusing` or `asymptotic-defocusing`, \
                     got `{other}`"
                ),
            });
            NonlinearityClass::Defocusing { alpha: 0.0 }
        }
    };
    let nonlinearity = NonlinearityConfig { coefficients, class };

    // damping (optional unless the mode needs it)
    let mut ex =
        Extractor { section: "damping", entries: section("damping"), errors: &mut errors };
    let flat_boxes = ex.array("boxes", Some(Vec::new()));
    let gamma0 = ex.number("gamma0", Some(1.0));
    let delta = ex.number("delta", Some(0.3));
    ex.finish();
    let dim = geometry.dim.max(1);
    let mut boxes = Vec::new();
    if flat_boxes.len() % (2 * dim) != 0 {
        errors.push(ConfigError {
            line: None,
            message: format!(
                "[damping] boxes must hold 2·dim = {} numbers per box (lo then hi per \
                 direction), got {}",
                2 * dim,
                flat_boxes.len()
            ),
        });
    } else {
        for chunk in flat_boxes.chunks(2 * dim) {
            boxes.push(BoxRegion { lo: chunk[..dim].to_vec(), hi: chunk[dim..].to_vec() });
        }
    }
    let damping = DampingConfig { boxes, gamma0, delta };

    // run
    let mut ex = Extractor { section: "run", entries: section("run"), errors: &mut errors };
    let mode_text = ex.text("mode", None);
    let t_final = ex.number("t_final", Some(1.0));
    let dt = ex.number("dt", Some(1e-3));
    let seed = ex.number("seed", Some(0.0));
    let use_damping = ex.boolean("damping", false);
    let initial_norm = ex.number("initial_norm", Some(1.0));
    let observability_kind = ex.text("observability_kind", Some("schrodinger"));
    let weight = ex.text("weight", Some("bump"));
    let plate_mode = ex.text("plate_mode", Some("damped"));
    let sobolev_s = ex.number("sobolev_s", Some(0.0));
    let potential_constant = ex.number("potential_constant", Some(0.0));
    let samples = ex.number("samples", Some(10.0));
    let energy_cap = ex.number("energy_cap", Some(1.0));
    let cg_tol = ex.number("cg_tol", Some(1e-10));
    let tolerance = ex.number("tolerance", Some(1e-8));
    let target_norm = ex.number("target_norm", Some(1.0));
    let start_norm = ex.number("start_norm", Some(1e-2));
    let check_observability = ex.boolean("check_observability", false);
    let guesses = ex.array("guesses", Some(Vec::new()));
    let random_guesses = ex.number("random_guesses", Some(0.0));
    let guess_norm = ex.number("guess_norm", Some(1.0));
    let start_constant = ex.take("start_constant");
    let end_constant = ex.take("end_constant");
    let control_time = ex.number("control_time", Some(2.0));
    ex.finish();
    let mode = match RunMode::parse(&mode_text) {
        Some(m) => m,
        None => {
            if !mode_text.is_empty() {
                errors.push(ConfigError {
                    line: None,
                    message: format!("[run] unknown mode `{mode_text}`"),
                });
            }
            RunMode::Simulate
        }
    };
    let mut as_const = |entry: Option<(usize, Value)>| match entry {
        None => None,
        Some((_, Value::Number(x))) => Some(x),
        Some((line, v)) => {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("[run] constant must be a number, got {}", v.type_name()),
            });
            None
        }
    };
    let start_constant = as_const(start_constant);
    let end_constant = as_const(end_constant);
    let run = RunConfig {
        mode,
        t_final,
        dt,
        seed: seed as u64,
        damping: use_damping,
        initial_norm,
        observability_kind,
        weight,
        plate_mode,
        sobolev_s,
        potential_constant,
        samples: samples as usize,
        energy_cap,
        cg_tol,
        tolerance,
        target_norm,
        start_norm,
        check_observability,
        guesses,
        random_guesses: random_guesses as usize,
        guess_norm,
        start_constant,
        end_constant,
        control_time,
    };

    // output
    let mut ex = Extractor { section: "output", entries: section("output"), errors: &mut errors };
    let directory = ex.text("directory", Some("out"));
    let formats_text = ex.text("formats", Some("csv,json"));
    ex.finish();
    let formats = formats_text.split(',').map(|p| p.trim().to_string()).collect();
    let output = OutputConfig { directory, formats };

    if !(run.dt > 0.0) {
        errors.push(ConfigError { line: None, message: "[run] dt must be > 0".into() });
    }
    if run.t_final < 0.0 {
        errors.push(ConfigError { line: None, message: "[run] t_final must be >= 0".into() });
    }
    let config = ScenarioConfig {
        geometry,
        nonlinearity,
        damping,
        run,
        output,
        config_hash: stable_hash(hash_source),
    };
    // range validation through the module preconditions (dry construction)
    if errors.is_empty() {
        match config.build_geometry() {
            Err(e) => errors.push(ConfigError { line: None, message: e.to_string() }),
            Ok(geom) => {
                if let Err(e) = config.build_nonlinearity(&geom) {
                    errors.push(ConfigError { line: None, message: e.to_string() });
                }
                if config.needs_damping() {
                    if let Err(e) = config.build_damping(&geom) {
                        errors.push(ConfigError { line: None, message: e.to_string() });
                    }
                }
            }
        }
    }
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(errors)
    }
}

impl ScenarioConfig {
    pub fn build_geometry(&self) -> Result<Arc<Geometry>> {
        Ok(Arc::new(Geometry::build(
            self.geometry.kind,
            self.geometry.dim,
            &self.geometry.modes,
            self.geometry.beta,
        )?))
    }

    pub fn build_nonlinearity(&self, geom: &Arc<Geometry>) -> Result<NonlinearitySpec> {
        if self.nonlinearity.coefficients.iter().all(|&c| c == 0.0) {
            Ok(NonlinearitySpec::zero(geom.clone()))
        } else {
            NonlinearitySpec::polynomial(
                geom.clone(),
                &self.nonlinearity.coefficients,
                self.nonlinearity.class,
            )
        }
    }

    pub fn build_damping(&self, geom: &Arc<Geometry>) -> Result<DampingProfile> {
        if self.damping.boxes.is_empty() {
            return Err(Error::Damping("[damping] boxes required for this mode".into()));
        }
        DampingProfile::new(
            geom.clone(),
            self.damping.boxes.clone(),
            self.damping.gamma0,
            self.damping.delta,
        )
    }

    /// Whether the selected mode requires a damping block.
    pub fn needs_damping(&self) -> bool {
        match self.run.mode {
            RunMode::Simulate => self.run.damping,
            RunMode::Observability | RunMode::Hum | RunMode::LocalControl | RunMode::Steer => true,
            RunMode::Equilibria => false,
        }
    }

    /// Constant-in-space state (the constant basis function is
    /// `measure^{-1/2}`).
    pub fn constant_state(geom: &Arc<Geometry>, value: f64) -> crate::spectral::ModalState {
        let mut s = crate::spectral::ModalState::zero(geom.clone());
        let measure = match geom.kind() {
            DomainKind::HingedRectangle => std::f64::consts::PI.powi(geom.dim() as i32),
            DomainKind::Torus => (2.0 * std::f64::consts::PI).powi(geom.dim() as i32),
        };
        s.u[0] = value * measure.sqrt();
        s
    }

    pub fn constant_guess(geom: &Arc<Geometry>, value: f64) -> Array1<f64> {
        ScenarioConfig::constant_state(geom, value).u
    }
}

/// FNV-1a over the configuration text; stable across runs and platforms.
fn stable_hash(text: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
