//! `key = value` configuration merged from a file and command-line flags.
//!
//! The file holds one assignment per line; `#` starts a comment; there are no
//! sections. Flags override the file. Within a single source a key may repeat
//! only with the same value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use ionghz_core::experiments::{Engine, ALPHA_GHZ, OMEGA_EXPERIMENT};
use ionghz_core::{EngineControls, GhzSign};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    File,
    Flags,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::File => "config file",
            Source::Flags => "command line",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{origin}{}: unknown key `{key}`", line_suffix(*.line))]
    UnknownKey { key: String, origin: Source, line: Option<usize> },

    #[error("config file line {line}: expected `key = value`, found `{text}`")]
    Malformed { line: usize, text: String },

    #[error("{origin}{}: conflicting values for `{key}`: `{first}` and `{second}`", line_suffix(*.line))]
    Duplicate { key: String, first: String, second: String, origin: Source, line: Option<usize> },

    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" line {l}")).unwrap_or_default()
}

pub const KEYS: [&str; 16] = [
    "alpha",
    "dt",
    "engine",
    "eta_c",
    "eta_l",
    "m",
    "n",
    "n_traj",
    "omega_rad_s",
    "out",
    "r",
    "seed",
    "t_max_deg",
    "t_step_deg",
    "tail_tol",
    "target",
];

fn default_value(key: &str) -> String {
    let c = EngineControls::default();
    match key {
        "alpha" => ALPHA_GHZ.to_string(),
        "dt" => "auto".into(),
        "engine" => Engine::Eigenbasis.to_string(),
        "eta_c" | "eta_l" => "0.05".into(),
        "m" | "n" => "1".into(),
        "n_traj" => c.n_traj.to_string(),
        "omega_rad_s" => OMEGA_EXPERIMENT.to_string(),
        "out" => "-".into(),
        "r" => "0.001,0.005,0.01,0.1".into(),
        "seed" => c.seed.to_string(),
        "t_max_deg" => "360".into(),
        "t_step_deg" => "0.25".into(),
        "tail_tol" => format!("{:?}", c.tail_tol),
        "target" => "both".into(),
        _ => unreachable!("no default for `{key}`"),
    }
}

fn canonical_key(raw: &str) -> String {
    raw.trim().replace('-', "_")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSet {
    Minus,
    Plus,
    Both,
}

impl TargetSet {
    pub fn signs(self) -> Vec<GhzSign> {
        match self {
            TargetSet::Minus => vec![GhzSign::Minus],
            TargetSet::Plus => vec![GhzSign::Plus],
            TargetSet::Both => GhzSign::BOTH.to_vec(),
        }
    }
}

/// The merged configuration, typed, plus its normalized key-value echo.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub alpha: f64,
    pub r_values: Vec<f64>,
    pub t_max_deg: f64,
    pub t_step_deg: f64,
    pub target: TargetSet,
    pub engine: Engine,
    pub omega: f64,
    pub m: i64,
    pub n: i64,
    pub eta_c: f64,
    pub eta_l: f64,
    pub controls: EngineControls,
    /// `None` writes to stdout.
    pub out: Option<PathBuf>,
    effective: BTreeMap<String, String>,
}

impl Config {
    /// Every key with its normalized effective value, sorted by key.
    pub fn effective(&self) -> &BTreeMap<String, String> {
        &self.effective
    }
}

fn collect_source(
    entries: impl IntoIterator<Item = (String, String, Option<usize>)>,
    origin: Source,
) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (raw_key, raw_value, line) in entries {
        let key = canonical_key(&raw_key);
        let value = raw_value.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key: raw_key.trim().to_string(), origin, line });
        }
        if let Some(first) = map.get(&key) {
            if *first != value {
                return Err(ConfigError::Duplicate { key, first: first.clone(), second: value, origin, line });
            }
        }
        map.insert(key, value);
    }
    Ok(map)
}

fn file_entries(text: &str) -> Result<Vec<(String, String, Option<usize>)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
                out.push((k.to_string(), v.to_string(), Some(i + 1)))
            }
            _ => return Err(ConfigError::Malformed { line: i + 1, text: raw.trim().to_string() }),
        }
    }
    Ok(out)
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.into(), value: value.into(), reason: reason.into() }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| invalid(key, v, "not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, v, "must be finite"))
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| invalid(key, v, "not an integer"))
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

/// Merge `file` (contents of the config file, if any) with `flags`, given as
/// `(key, value)` pairs; keys may use `-` or `_`.
pub fn parse_config(file: Option<&str>, flags: &[(String, String)]) -> Result<Config, ConfigError> {
    let from_file = match file {
        Some(text) => collect_source(file_entries(text)?, Source::File)?,
        None => BTreeMap::new(),
    };
    let from_flags = collect_source(flags.iter().map(|(k, v)| (k.clone(), v.clone(), None)), Source::Flags)?;

    let raw = |key: &str| -> String {
        from_flags.get(key).or_else(|| from_file.get(key)).cloned().unwrap_or_else(|| default_value(key))
    };
    let mut effective = BTreeMap::new();

    let alpha = parse_f64("alpha", &raw("alpha"))?;
    effective.insert("alpha".into(), format!("{alpha:?}"));

    let r_raw = raw("r");
    let r_values = if r_raw.trim().is_empty() || r_raw.trim() == "none" {
        Vec::new()
    } else {
        r_raw.split(',').map(|s| parse_f64("r", s.trim())).collect::<Result<Vec<_>, _>>()?
    };
    effective.insert("r".into(), if r_values.is_empty() { "none".into() } else { fmt_list(&r_values) });

    let mut float_key = |key: &'static str| -> Result<f64, ConfigError> {
        let x = parse_f64(key, &raw(key))?;
        effective.insert(key.into(), format!("{x:?}"));
        Ok(x)
    };
    let t_max_deg = float_key("t_max_deg")?;
    let t_step_deg = float_key("t_step_deg")?;
    let omega = float_key("omega_rad_s")?;
    let eta_c = float_key("eta_c")?;
    let eta_l = float_key("eta_l")?;
    let tail_tol = float_key("tail_tol")?;

    let target_raw = raw("target");
    let target = match target_raw.as_str() {
        "minus" => TargetSet::Minus,
        "plus" => TargetSet::Plus,
        "both" => TargetSet::Both,
        _ => return Err(invalid("target", &target_raw, "expected minus, plus or both")),
    };
    effective.insert("target".into(), target_raw);

    let engine_raw = raw("engine");
    let engine: Engine = engine_raw.parse().map_err(|e: String| invalid("engine", &engine_raw, e))?;
    effective.insert("engine".into(), engine.to_string());

    let m: i64 = parse_int("m", &raw("m"))?;
    let n: i64 = parse_int("n", &raw("n"))?;
    let n_traj: usize = parse_int("n_traj", &raw("n_traj"))?;
    let seed: u64 = parse_int("seed", &raw("seed"))?;
    effective.insert("m".into(), m.to_string());
    effective.insert("n".into(), n.to_string());
    effective.insert("n_traj".into(), n_traj.to_string());
    effective.insert("seed".into(), seed.to_string());

    let dt_raw = raw("dt");
    let dt = if dt_raw == "auto" { None } else { Some(parse_f64("dt", &dt_raw)?) };
    effective.insert("dt".into(), dt.map_or("auto".into(), |x| format!("{x:?}")));

    let out_raw = raw("out");
    let out = (out_raw != "-").then(|| PathBuf::from(&out_raw));
    effective.insert("out".into(), out_raw);

    debug_assert_eq!(effective.len(), KEYS.len());
    Ok(Config {
        alpha,
        r_values,
        t_max_deg,
        t_step_deg,
        target,
        engine,
        omega,
        m,
        n,
        eta_c,
        eta_l,
        controls: EngineControls { tail_tol, dt, n_traj, seed },
        out,
        effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults() {
        let c = parse_config(None, &[]).unwrap();
        assert_eq!(c.alpha, 4.0);
        assert_eq!(c.r_values, vec![0.001, 0.005, 0.01, 0.1]);
        assert_eq!(c.engine, Engine::Eigenbasis);
        assert_eq!(c.target, TargetSet::Both);
        assert_eq!(c.out, None);
        assert_eq!(c.effective().len(), KEYS.len());
    }

    #[test]
    fn flags_override_file() {
        let c = parse_config(Some("r = 0.001\n"), &flags(&[("r", "0.01")])).unwrap();
        assert_eq!(c.r_values, vec![0.01]);
        let c = parse_config(Some("alpha = 4\n# comment\n\nseed = 9 # trailing\n"), &[]).unwrap();
        assert_eq!(c.alpha, 4.0);
        assert_eq!(c.controls.seed, 9);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = parse_config(Some("alpha = 4\nalhpa = 4\n"), &[]).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { key: "alhpa".into(), origin: Source::File, line: Some(2) });
        let msg = err.to_string();
        assert!(msg.contains("alhpa") && msg.contains("line 2"), "{msg}");
        assert!(parse_config(None, &flags(&[("betta", "1")])).is_err());
    }

    #[test]
    fn malformed_line() {
        let err = parse_config(Some("alpha 4\n"), &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Malformed { line: 1, .. }));
        assert!(matches!(parse_config(Some("\n\nalpha =\n"), &[]), Err(ConfigError::Malformed { line: 3, .. })));
    }

    #[test]
    fn duplicates_within_a_source() {
        assert!(parse_config(Some("alpha = 4\nalpha = 4\n"), &[]).is_ok());
        let err = parse_config(Some("alpha = 4\nalpha = 5\n"), &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { line: Some(2), .. }));
        let err = parse_config(None, &flags(&[("seed", "1"), ("seed", "2")])).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { origin: Source::Flags, .. }));
    }

    #[test]
    fn hyphenated_keys_and_values() {
        let c = parse_config(
            Some("t-max-deg = 90\n"),
            &flags(&[("t-step-deg", "0.5"), ("engine", "mc"), ("dt", "1e-9"), ("target", "plus")]),
        )
        .unwrap();
        assert_eq!(c.t_max_deg, 90.0);
        assert_eq!(c.t_step_deg, 0.5);
        assert_eq!(c.engine, Engine::MonteCarlo);
        assert_eq!(c.controls.dt, Some(1e-9));
        assert_eq!(c.target.signs(), vec![GhzSign::Plus]);
        assert_eq!(c.effective()["t_max_deg"], "90.0");
    }

    #[test]
    fn bad_values() {
        for (k, v) in
            [("alpha", "four"), ("m", "1.5"), ("target", "neither"), ("engine", "rk4"), ("r", "0.1,x"), ("seed", "-1")]
        {
            assert!(matches!(parse_config(None, &flags(&[(k, v)])), Err(ConfigError::InvalidValue { .. })), "{k}");
        }
    }

    #[test]
    fn empty_r_list() {
        let c = parse_config(None, &flags(&[("r", "none")])).unwrap();
        assert!(c.r_values.is_empty());
    }
}
