//! Configuration loading.
//!
//! Flat key/value TOML with dotted sections. Unknown keys are hard errors:
//! a silently ignored misspelling of a mathematical constant would invalidate
//! every downstream number. Missing keys fall back to the shipped defaults.
//!
//! Points accept either a float (`0.105`) or an exact fraction string
//! (`"1/8"`).

use minimal_bottle_core::circle::{CirclePoint, Lift};
use minimal_bottle_core::transport::EngineParams;
use minimal_bottle_core::verify::VerifyOptions;
use minimal_bottle_core::{CocycleSpec, Harmonic, ProfileSpec, TransportEngine};
use std::path::{Path, PathBuf};
use thiserror::Error;
use toml::Value;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}`: expected {expected}")]
    BadType { key: String, expected: &'static str },
    #[error("config key `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("cocycle spec rejected: {0}")]
    Cocycle(#[from] minimal_bottle_core::skewbase::SkewError),
    #[error("blow-up profile rejected: {0}")]
    Profile(#[from] minimal_bottle_core::blowup::ProfileError),
    #[error("engine construction failed: {0}")]
    Engine(#[from] minimal_bottle_core::transport::EngineError),
}

/// Everything a command needs: the cocycle and profile data, engine knobs,
/// battery options, and output location.
#[derive(Clone, Debug)]
pub struct SystemConfig {
    pub partial_quotients: Vec<u64>,
    pub harmonics: Vec<Harmonic>,
    pub scale: f64,
    pub x1_star: CirclePoint,
    pub y1_star: Lift,
    pub bump: (CirclePoint, CirclePoint),
    pub truncation_n: u32,
    pub scan_horizon: u64,
    pub verify: VerifyOptions,
    pub output_dir: PathBuf,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let cocycle = CocycleSpec::default_liouville();
        let profile = ProfileSpec::default_star();
        let (lo, hi) = profile.bump();
        Self {
            partial_quotients: cocycle.partial_quotients().to_vec(),
            harmonics: cocycle.harmonics().to_vec(),
            scale: cocycle.scale(),
            x1_star: profile.x1_star(),
            y1_star: profile.y1_star(),
            bump: (lo, hi),
            truncation_n: 60,
            scan_horizon: 10_000,
            verify: VerifyOptions::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl SystemConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse()?;
        reject_unknown_keys(&table)?;
        let mut cfg = Self::default();

        if let Some(alpha) = section(&table, "alpha")? {
            if let Some(v) = alpha.get("partial_quotients") {
                cfg.partial_quotients = u64_list(v, "alpha.partial_quotients")?;
            }
        }
        if let Some(cocycle) = section(&table, "cocycle")? {
            if let Some(v) = cocycle.get("harmonics") {
                cfg.harmonics = harmonics(v)?;
            }
            if let Some(v) = cocycle.get("scale") {
                cfg.scale = float(v, "cocycle.scale")?;
            }
        }
        if let Some(blowup) = section(&table, "blowup")? {
            if let Some(v) = blowup.get("x1_star") {
                cfg.x1_star = point(v, "blowup.x1_star")?;
            }
            if let Some(v) = blowup.get("y1_star") {
                cfg.y1_star = lift(v, "blowup.y1_star")?;
            }
            if let Some(v) = blowup.get("bump") {
                let pair = float_pair(v, "blowup.bump")?;
                cfg.bump = (CirclePoint::from_f64(pair.0), CirclePoint::from_f64(pair.1));
            }
            if let Some(v) = blowup.get("truncation_N") {
                cfg.truncation_n = integer(v, "blowup.truncation_N")? as u32;
            }
            if let Some(v) = blowup.get("validate_horizon_M") {
                cfg.scan_horizon = integer(v, "blowup.validate_horizon_M")? as u64;
            }
        }
        if let Some(verify) = section(&table, "verify")? {
            let o = &mut cfg.verify;
            if let Some(v) = verify.get("seed") {
                o.seed = integer(v, "verify.seed")? as u64;
            }
            if let Some(v) = verify.get("samples") {
                o.samples = integer(v, "verify.samples")? as usize;
            }
            if let Some(v) = verify.get("tol_map") {
                o.tol_map = float(v, "verify.tol_map")?;
            }
            if let Some(v) = verify.get("tol_oracle") {
                o.tol_oracle = float(v, "verify.tol_oracle")?;
            }
            if let Some(v) = verify.get("oracle_samples") {
                o.oracle_samples = integer(v, "verify.oracle_samples")? as usize;
            }
            if let Some(v) = verify.get("oracle_cells") {
                o.oracle_cells = integer(v, "verify.oracle_cells")? as usize;
            }
            if let Some(v) = verify.get("theta_levels") {
                o.theta_levels = u64_list(v, "verify.theta_levels")?;
            }
            if let Some(v) = verify.get("theta_grid") {
                o.theta_grid = integer(v, "verify.theta_grid")? as usize;
            }
            if let Some(v) = verify.get("theta_modulus") {
                o.theta_modulus = float(v, "verify.theta_modulus")?;
            }
            if let Some(v) = verify.get("growth_factor") {
                o.growth_factor = float(v, "verify.growth_factor")?;
            }
            if let Some(v) = verify.get("exclusion_margin") {
                o.exclusion_margin = float(v, "verify.exclusion_margin")?;
            }
            if let Some(v) = verify.get("density_steps") {
                o.density_steps = integer(v, "verify.density_steps")? as u64;
            }
            if let Some(v) = verify.get("density_epsilon") {
                o.density_epsilon = float(v, "verify.density_epsilon")?;
            }
            if let Some(v) = verify.get("density_min_coverage") {
                o.density_min_coverage = float(v, "verify.density_min_coverage")?;
            }
            if let Some(v) = verify.get("density_seed") {
                o.density_seed = float_pair(v, "verify.density_seed")?;
            }
        }
        if let Some(output) = section(&table, "output")? {
            if let Some(v) = output.get("dir") {
                cfg.output_dir = PathBuf::from(string(v, "output.dir")?);
            }
        }
        cfg.verify.scan_horizon = cfg.scan_horizon;
        Ok(cfg)
    }

    /// Cocycle spec without the mathematical invariant checks (the battery
    /// reports violations as check failures instead).
    pub fn cocycle_unvalidated(&self) -> Result<CocycleSpec, ConfigError> {
        Ok(CocycleSpec::new_unvalidated(
            self.partial_quotients.clone(),
            self.harmonics.clone(),
            self.scale,
        )?)
    }

    pub fn profile(&self) -> Result<ProfileSpec, ConfigError> {
        Ok(ProfileSpec::new(
            self.x1_star,
            self.y1_star,
            self.bump.0,
            self.bump.1,
        )?)
    }

    pub fn engine_params(&self) -> EngineParams {
        EngineParams {
            n_terms: self.truncation_n,
            scan_horizon: self.scan_horizon,
            exclusion_margin: self.verify.exclusion_margin,
            r_grid_cells: self.verify.r_grid_cells,
        }
    }

    /// Fully validated engine: cocycle invariants, amplitude grid bound and
    /// the exclusion scan must all pass (used by orbit/render/cdf).
    pub fn engine_checked(&self) -> Result<TransportEngine, ConfigError> {
        Ok(TransportEngine::new(
            self.profile()?,
            self.cocycle_unvalidated()?,
            self.engine_params(),
        )?)
    }

    /// Engine skipping the mathematical invariants, so `verify` can run its
    /// battery (and fail it) on a deliberately broken config.
    pub fn engine_unchecked(&self) -> Result<TransportEngine, ConfigError> {
        Ok(TransportEngine::new_unchecked(
            self.profile()?,
            self.cocycle_unvalidated()?,
            self.engine_params(),
        ))
    }
}

/// Parse a circle point or lift argument: decimal float or `p/q` fraction.
pub fn parse_unit_value(s: &str) -> Result<f64, String> {
    if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad fraction numerator in `{s}`"))?;
        let den: u64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad fraction denominator in `{s}`"))?;
        if den == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(num as f64 / den as f64)
    } else {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number or p/q fraction"))
    }
}

const KNOWN: &[(&str, &[&str])] = &[
    ("alpha", &["partial_quotients"]),
    ("cocycle", &["harmonics", "scale"]),
    (
        "blowup",
        &[
            "x1_star",
            "y1_star",
            "bump",
            "truncation_N",
            "validate_horizon_M",
        ],
    ),
    (
        "verify",
        &[
            "seed",
            "samples",
            "tol_map",
            "tol_oracle",
            "oracle_samples",
            "oracle_cells",
            "theta_levels",
            "theta_grid",
            "theta_modulus",
            "growth_factor",
            "exclusion_margin",
            "density_steps",
            "density_epsilon",
            "density_min_coverage",
            "density_seed",
        ],
    ),
    ("output", &["dir"]),
];

fn reject_unknown_keys(table: &toml::Table) -> Result<(), ConfigError> {
    for (name, value) in table {
        let Some((_, keys)) = KNOWN.iter().find(|(s, _)| s == name) else {
            return Err(ConfigError::UnknownKey(name.clone()));
        };
        let Value::Table(inner) = value else {
            return Err(ConfigError::BadType {
                key: name.clone(),
                expected: "a table of settings",
            });
        };
        for key in inner.keys() {
            if !keys.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(format!("{name}.{key}")));
            }
        }
    }
    Ok(())
}

fn section<'t>(table: &'t toml::Table, name: &str) -> Result<Option<&'t toml::Table>, ConfigError> {
    match table.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(ConfigError::BadType {
            key: name.to_string(),
            expected: "a table of settings",
        }),
    }
}

fn float(v: &Value, key: &str) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::BadType {
            key: key.to_string(),
            expected: "a number",
        }),
    }
}

fn integer(v: &Value, key: &str) -> Result<i64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i),
        _ => Err(ConfigError::BadType {
            key: key.to_string(),
            expected: "a nonnegative integer",
        }),
    }
}

fn string<'v>(v: &'v Value, key: &str) -> Result<&'v str, ConfigError> {
    v.as_str().ok_or_else(|| ConfigError::BadType {
        key: key.to_string(),
        expected: "a string",
    })
}

fn unit_value(v: &Value, key: &str) -> Result<f64, ConfigError> {
    let raw = match v {
        Value::String(s) => parse_unit_value(s).map_err(|message| ConfigError::BadValue {
            key: key.to_string(),
            message,
        })?,
        other => float(other, key)?,
    };
    Ok(raw)
}

fn point(v: &Value, key: &str) -> Result<CirclePoint, ConfigError> {
    Ok(CirclePoint::from_f64(unit_value(v, key)?))
}

fn lift(v: &Value, key: &str) -> Result<Lift, ConfigError> {
    Ok(Lift::from_f64(unit_value(v, key)?))
}

fn u64_list(v: &Value, key: &str) -> Result<Vec<u64>, ConfigError> {
    let arr = v.as_array().ok_or_else(|| ConfigError::BadType {
        key: key.to_string(),
        expected: "a list of integers",
    })?;
    arr.iter()
        .map(|item| integer(item, key).map(|i| i as u64))
        .collect()
}

fn float_pair(v: &Value, key: &str) -> Result<(f64, f64), ConfigError> {
    let arr = v.as_array().ok_or_else(|| ConfigError::BadType {
        key: key.to_string(),
        expected: "a pair [lo, hi]",
    })?;
    if arr.len() != 2 {
        return Err(ConfigError::BadType {
            key: key.to_string(),
            expected: "a pair [lo, hi]",
        });
    }
    Ok((float(&arr[0], key)?, float(&arr[1], key)?))
}

fn harmonics(v: &Value) -> Result<Vec<Harmonic>, ConfigError> {
    let key = "cocycle.harmonics";
    let arr = v.as_array().ok_or_else(|| ConfigError::BadType {
        key: key.to_string(),
        expected: "a list of [freq, amp] pairs",
    })?;
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let pair = item.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
            ConfigError::BadType {
                key: key.to_string(),
                expected: "a list of [freq, amp] pairs",
            }
        })?;
        out.push(Harmonic {
            freq: integer(&pair[0], key)? as u64,
            amp: float(&pair[1], key)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_empty_config() {
        let cfg = SystemConfig::from_toml("").unwrap();
        assert_eq!(cfg.truncation_n, 60);
        assert_eq!(cfg.x1_star, CirclePoint::from_fraction(1, 8));
        cfg.engine_checked().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = SystemConfig::from_toml("[blowup]\nx1_stars = 0.125\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(k) if k == "blowup.x1_stars"));
        let err = SystemConfig::from_toml("[typo]\nx = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(k) if k == "typo"));
    }

    #[test]
    fn fraction_strings_are_exact() {
        let cfg = SystemConfig::from_toml("[blowup]\nx1_star = \"1/8\"\ny1_star = \"1/2\"\n").unwrap();
        assert_eq!(cfg.x1_star.ticks(), 1u64 << 61);
        assert_eq!(cfg.y1_star.ticks(), 1u128 << 63);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = SystemConfig::from_toml("[blowup\nx1_star = 0.125\n").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line 1"), "got: {msg}");
    }

    #[test]
    fn unit_value_forms() {
        assert_eq!(parse_unit_value("0.25").unwrap(), 0.25);
        assert_eq!(parse_unit_value("1/4").unwrap(), 0.25);
        assert!(parse_unit_value("1/0").is_err());
        assert!(parse_unit_value("abc").is_err());
    }
}
