//! Run configuration: defaults, the flat `key = value` file format, JSON
//! configs (including result sidecars) and the hash embedded in outputs.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file,
//! command-line flags.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

/// Detuning given as a number (units γ) or pinned to the cooperative shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    Value(f64),
    Named(Resonance),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resonance {
    Resonance,
}

impl DeltaSpec {
    pub const RESONANCE: DeltaSpec = DeltaSpec::Named(Resonance::Resonance);

    pub fn value(&self) -> Option<f64> {
        match self {
            DeltaSpec::Value(v) => Some(*v),
            DeltaSpec::Named(_) => None,
        }
    }
}

impl FromStr for DeltaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "resonance" | "Delta" | "delta" => Ok(Self::RESONANCE),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(DeltaSpec::Value)
                .ok_or_else(|| format!("expected a number or `resonance`, got `{t}`")),
        }
    }
}

impl fmt::Display for DeltaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaSpec::Value(v) => write!(f, "{v}"),
            DeltaSpec::Named(_) => write!(f, "resonance"),
        }
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    t => Err(format!("unknown {} `{t}`", stringify!($name))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self {
                    $($name::$variant => f.write_str($text),)+
                }
            }
        }
    };
}

keyword_enum!(Pol { P => "p", S => "s", X => "x", Y => "y" });
keyword_enum!(Mode { InPlane => "in-plane", ThreeD => "3d" });
keyword_enum!(Estimator { Fit => "fit", ModeEnergy => "mode-energy" });
keyword_enum!(Plane { Xz => "xz", Yz => "yz", Xy => "xy" });

/// Every parameter a command may read. Angles are in degrees, lengths in λ,
/// rates and detunings in γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub a: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub a_step: f64,
    pub n_a: usize,
    pub delta: DeltaSpec,
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_delta: usize,
    pub gamma_nr: f64,
    pub theta: f64,
    pub phi: f64,
    pub pol: Pol,
    pub waist: Option<f64>,
    pub nx: usize,
    pub ny: usize,
    pub tol: f64,
    pub seed: u64,
    /// rms displacement as a fraction of a.
    pub dr: f64,
    pub samples: usize,
    pub mode: Mode,
    pub estimator: Estimator,
    pub n_k: usize,
    pub path_points: usize,
    pub x: f64,
    pub u_max: f64,
    pub plane: Plane,
    pub plane_offset: f64,
    pub extent: f64,
    pub resolution: usize,
    /// Cone half-angle (degrees) for per-order far-field power.
    pub cone: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            a: 0.2,
            a_min: 0.1,
            a_max: 0.98,
            a_step: 0.005,
            n_a: 160,
            delta: DeltaSpec::Value(0.0),
            delta_min: -15.0,
            delta_max: 15.0,
            n_delta: 120,
            gamma_nr: 0.0,
            theta: 0.0,
            phi: 0.0,
            pol: Pol::S,
            waist: None,
            nx: 26,
            ny: 26,
            tol: 1e-4,
            seed: 1,
            dr: 0.02,
            samples: 200,
            mode: Mode::InPlane,
            estimator: Estimator::Fit,
            n_k: 81,
            path_points: 64,
            x: 0.5,
            u_max: 3.99,
            plane: Plane::Xz,
            plane_offset: 0.0,
            extent: 8.0,
            resolution: 81,
            cone: 15.0,
            out: None,
            jobs: None,
        }
    }
}

/// Largest polar angle accepted, in degrees; grazing incidence diverges.
pub const MAX_THETA: f64 = 89.9;

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse::<T>()
        .map_err(|e| CliError::Config(format!("{key}: {e}")))
}

/// Floats must be finite: overflowing literals such as `1e999` are refused.
fn real(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = parse(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key}: value must be finite, got `{}`", v.trim())))
    }
}

impl RunConfig {
    /// Set one parameter from its textual value. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let k = key.trim().replace('-', "_");
        match k.as_str() {
            "command" => self.command = value.trim().to_string(),
            "a" => self.a = real(key, value)?,
            "a_min" => self.a_min = real(key, value)?,
            "a_max" => self.a_max = real(key, value)?,
            "a_step" => self.a_step = real(key, value)?,
            "n_a" => self.n_a = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "delta_min" => self.delta_min = real(key, value)?,
            "delta_max" => self.delta_max = real(key, value)?,
            "n_delta" => self.n_delta = parse(key, value)?,
            "gamma_nr" => self.gamma_nr = real(key, value)?,
            "theta" => self.theta = real(key, value)?,
            "phi" => self.phi = real(key, value)?,
            "pol" => self.pol = parse(key, value)?,
            "waist" => {
                self.waist = match value.trim() {
                    "auto" | "" => None,
                    v => Some(real(key, v)?),
                }
            }
            "nx" => self.nx = parse(key, value)?,
            "ny" => self.ny = parse(key, value)?,
            "tol" => self.tol = real(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "dr" => self.dr = real(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "mode" => self.mode = parse(key, value)?,
            "estimator" => self.estimator = parse(key, value)?,
            "n_k" => self.n_k = parse(key, value)?,
            "path_points" => self.path_points = parse(key, value)?,
            "x" => self.x = real(key, value)?,
            "u_max" => self.u_max = real(key, value)?,
            "plane" => self.plane = parse(key, value)?,
            "plane_offset" => self.plane_offset = real(key, value)?,
            "extent" => self.extent = real(key, value)?,
            "resolution" => self.resolution = parse(key, value)?,
            "cone" => self.cone = real(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "jobs" => self.jobs = Some(parse(key, value)?),
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Apply a config file: JSON if it starts with `{`, flat text otherwise.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let pairs = if text.trim_start().starts_with('{') {
            parse_json(text)?
        } else {
            parse_flat(text)?
        };
        for (k, v) in pairs {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Flat `key = value` rendering that `apply_text` reads back.
    pub fn to_flat(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let mut out = String::new();
        for (k, val) in v.as_object().expect("object") {
            let text = match val {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => "auto".into(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {text}\n"));
        }
        out
    }

    /// SHA-256 of the canonical JSON form; output path and job count are
    /// excluded since they do not affect results.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.gamma_nr < 0.0 || !self.gamma_nr.is_finite() {
            return bad(format!("gamma-nr must be non-negative, got {}", self.gamma_nr));
        }
        if !(0.0..=MAX_THETA).contains(&self.theta) {
            return bad(format!("theta must lie in [0, {MAX_THETA}] degrees, got {}", self.theta));
        }
        if self.a_step <= 0.0 || self.a_min > self.a_max {
            return bad("a-min ≤ a-max and a-step > 0 required".into());
        }
        if self.nx == 0 || self.ny == 0 || self.n_k < 2 || self.n_a < 2 || self.n_delta < 2 || self.resolution < 2 {
            return bad("grid sizes must be at least 2 (array sides at least 1)".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment; blank lines are skipped.
pub fn parse_flat(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// A JSON object of scalars, or a sidecar whose `config` member is one.
pub fn parse_json(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON config: {e}")))?;
    let obj = match v.get("config") {
        Some(inner) => inner,
        None => &v,
    };
    let obj = obj
        .as_object()
        .ok_or_else(|| CliError::Config("JSON config must be an object".into()))?;
    let mut flat = BTreeMap::new();
    for (k, val) in obj {
        let text = match val {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Null => "auto".into(),
            _ => return Err(CliError::Config(format!("`{k}` must be a scalar"))),
        };
        flat.insert(k.clone(), text);
    }
    Ok(flat.into_iter().collect())
}
