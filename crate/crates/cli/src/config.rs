//! Flat `key = value` scenario configuration.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown scenario '{0}' (see `wnd list`)")]
    UnknownScenario(String),
    #[error("line {line}: expected `key = value`, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for '{key}': {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("no scenario given")]
    MissingScenario,
    #[error("cannot read config: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    LinearConstant,
    LinearResonant,
    QuadraticConstant,
    QuadraticParametric,
    GaussianCombined,
    OpenDamped,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::LinearConstant,
        ScenarioKind::LinearResonant,
        ScenarioKind::QuadraticConstant,
        ScenarioKind::QuadraticParametric,
        ScenarioKind::GaussianCombined,
        ScenarioKind::OpenDamped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::LinearConstant => "linear-constant",
            ScenarioKind::LinearResonant => "linear-resonant",
            ScenarioKind::QuadraticConstant => "quadratic-constant",
            ScenarioKind::QuadraticParametric => "quadratic-parametric",
            ScenarioKind::GaussianCombined => "gaussian-combined",
            ScenarioKind::OpenDamped => "open-damped",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::LinearConstant => "a†a + g0(a† + a); keys g0 alpha T",
            ScenarioKind::LinearResonant => "a†a + g0 cos(t + phi)(a† + a); keys g0 phi alpha T",
            ScenarioKind::QuadraticConstant => "a†a + lp a†² + lm a²; keys lp lm alpha T",
            ScenarioKind::QuadraticParametric => "a†a + cos(omega t)(lp a†² + lm a²); keys lp lm omega alpha T",
            ScenarioKind::GaussianCombined => "a†a + g0(a† + a) + lp a†² + lm a²; keys g0 lp lm alpha T",
            ScenarioKind::OpenDamped => "a†a with damping L = a at rate kappa; keys kappa alpha T",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|k| k.name() == s).ok_or_else(|| ConfigError::UnknownScenario(s.to_string()))
    }
}

/// Fully resolved scenario parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub g0: f64,
    pub phi: f64,
    pub lambda_plus: C64,
    /// Defaults to the conjugate of `lambda_plus` (Hermitian drive).
    pub lambda_minus: C64,
    pub omega: f64,
    pub alpha: C64,
    pub kappa: f64,
    pub span: f64,
    pub points: usize,
    /// `None` selects the cutoff from the expected displacement.
    pub cutoff: Option<usize>,
    pub rtol: f64,
    pub atol: f64,
}

impl ScenarioConfig {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let base = ScenarioConfig {
            kind,
            g0: 0.0,
            phi: 0.0,
            lambda_plus: C64::new(0.0, 0.0),
            lambda_minus: C64::new(0.0, 0.0),
            omega: 2.0,
            alpha: C64::new(1.0, 0.0),
            kappa: 0.0,
            span: 1.0,
            points: 201,
            cutoff: None,
            rtol: 1e-10,
            atol: 1e-12,
        };
        let lam = C64::new(0.2, 0.0);
        match kind {
            ScenarioKind::LinearConstant => ScenarioConfig { g0: 0.5, span: 4.0 * PI, ..base },
            ScenarioKind::LinearResonant => ScenarioConfig { g0: 0.2, span: 8.0 * PI, ..base },
            ScenarioKind::QuadraticConstant => ScenarioConfig { lambda_plus: lam, lambda_minus: lam, span: 2.0, ..base },
            ScenarioKind::QuadraticParametric => {
                let lam = C64::new(0.1, 0.0);
                ScenarioConfig { lambda_plus: lam, lambda_minus: lam, span: 6.0, ..base }
            }
            ScenarioKind::GaussianCombined => {
                let lam = C64::new(0.1, 0.0);
                ScenarioConfig { g0: 0.1, lambda_plus: lam, lambda_minus: lam, span: 3.0, ..base }
            }
            ScenarioKind::OpenDamped => ScenarioConfig { kappa: 0.5, span: 5.0, points: 101, ..base },
        }
    }

    /// Evenly spaced output grid on `[0, T]`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n).map(|k| if k + 1 == n { self.span } else { self.span * k as f64 / (n - 1) as f64 }).collect()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: String, reason: &str| {
            Err(ConfigError::Value { key: key.into(), value, reason: reason.into() })
        };
        let finite = [
            ("g0", self.g0),
            ("phi", self.phi),
            ("lp", self.lambda_plus.norm()),
            ("lm", self.lambda_minus.norm()),
            ("omega", self.omega),
            ("alpha", self.alpha.norm()),
            ("kappa", self.kappa),
        ];
        for (k, v) in finite {
            if !v.is_finite() {
                return bad(k, v.to_string(), "must be finite");
            }
        }
        if !(self.span > 0.0 && self.span.is_finite()) {
            return bad("T", self.span.to_string(), "must be positive");
        }
        if self.points < 2 {
            return bad("points", self.points.to_string(), "need at least 2");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol", format!("{}/{}", self.rtol, self.atol), "tolerances must be positive");
        }
        if self.kappa < 0.0 {
            return bad("kappa", self.kappa.to_string(), "must be non-negative");
        }
        if let Some(c) = self.cutoff {
            if !(2..=512).contains(&c) {
                return bad("cutoff", c.to_string(), "must lie in 2..=512");
            }
        }
        Ok(())
    }
}

/// Ordered `key = value` assignments collected from a file, positional
/// arguments and flags; later assignments win.
#[derive(Debug, Clone, Default)]
pub struct Assignments(Vec<(String, String)>);

impl Assignments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.0.push((key.trim().to_string(), value.trim().to_string()));
    }

    /// Parses a config file: `key = value` per line, `#` starts a comment.
    pub fn parse_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
            if k.trim().is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            }
            self.set(k, v);
        }
        Ok(())
    }

    /// Parses a positional `key=value` argument.
    pub fn parse_arg(&mut self, arg: &str) -> Result<(), ConfigError> {
        let (k, v) = arg.split_once('=').ok_or_else(|| ConfigError::Syntax { line: 0, text: arg.to_string() })?;
        self.set(k, v);
        Ok(())
    }

    fn scenario(&self) -> Option<&str> {
        self.0.iter().rev().find(|(k, _)| k == "scenario").map(|(_, v)| v.as_str())
    }

    /// Resolves the assignments on top of the scenario defaults.
    pub fn resolve(&self, scenario: Option<&str>) -> Result<ScenarioConfig, ConfigError> {
        let name = scenario.or_else(|| self.scenario()).ok_or(ConfigError::MissingScenario)?;
        let mut cfg = ScenarioConfig::defaults(name.parse()?);
        let mut lm_set = false;
        let mut lm_im: Option<f64> = None;
        let mut lp_im: Option<f64> = None;
        let mut alpha_im: Option<f64> = None;
        let mut dt_out: Option<f64> = None;
        for (k, v) in &self.0 {
            match k.as_str() {
                "scenario" => {}
                "g0" => cfg.g0 = real(k, v)?,
                "phi" => cfg.phi = real(k, v)?,
                "lp" => cfg.lambda_plus = C64::new(real(k, v)?, cfg.lambda_plus.im),
                "lp_im" => lp_im = Some(real(k, v)?),
                "lm" => {
                    cfg.lambda_minus = C64::new(real(k, v)?, cfg.lambda_minus.im);
                    lm_set = true;
                }
                "lm_im" => {
                    lm_im = Some(real(k, v)?);
                    lm_set = true;
                }
                "omega" => cfg.omega = real(k, v)?,
                "alpha" => cfg.alpha = C64::new(real(k, v)?, cfg.alpha.im),
                "alpha_im" => alpha_im = Some(real(k, v)?),
                "kappa" => cfg.kappa = real(k, v)?,
                "T" | "span" => cfg.span = real(k, v)?,
                "points" => cfg.points = integer(k, v)?,
                "cutoff" => cfg.cutoff = Some(integer(k, v)?),
                "rtol" => cfg.rtol = real(k, v)?,
                "atol" => cfg.atol = real(k, v)?,
                "dt_out" | "dt-out" => dt_out = Some(real(k, v)?),
                _ => return Err(ConfigError::UnknownKey(k.clone())),
            }
        }
        if let Some(im) = lp_im {
            cfg.lambda_plus.im = im;
        }
        if let Some(im) = alpha_im {
            cfg.alpha.im = im;
        }
        if lm_set {
            if let Some(im) = lm_im {
                cfg.lambda_minus.im = im;
            }
        } else {
            cfg.lambda_minus = cfg.lambda_plus.conj();
        }
        if let Some(dt) = dt_out {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ConfigError::Value { key: "dt_out".into(), value: dt.to_string(), reason: "must be positive".into() });
            }
            cfg.points = ((cfg.span / dt) - 1e-9).ceil().max(1.0) as usize + 1;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn real(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| ConfigError::Value { key: key.into(), value: value.into(), reason: "not a number".into() })?;
    if !v.is_finite() {
        return Err(ConfigError::Value { key: key.into(), value: value.into(), reason: "must be finite".into() });
    }
    Ok(v)
}

fn integer(key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::Value { key: key.into(), value: value.into(), reason: "not a non-negative integer".into() })
}
