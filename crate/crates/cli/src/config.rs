//! `key = value` configuration files with SI suffixes.
//!
//! Unspecified converter keys fall back to the reference fixture; unspecified simulation
//! keys take the engine defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ppconv_core::transient::Seed;
use ppconv_core::{ConverterParams, ParamsError, SimConfig, SimError};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}{}: {source}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Invalid { path: PathBuf, line: Option<usize>, source: ParamsError },
    #[error("{path}: {source}")]
    Sim { path: PathBuf, source: SimError },
}

/// Parsed and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: ConverterParams,
    pub sim: SimConfig,
    pub warnings: Vec<String>,
}

impl Config {
    /// The reference fixture with default simulation settings.
    pub fn reference() -> Self {
        Config { params: ConverterParams::reference(), sim: SimConfig::default(), warnings: Vec::new() }
    }

    /// Canonical `key = value` listing of every resolved setting.
    pub fn canonical(&self) -> String {
        let p = &self.params;
        let s = &self.sim;
        let mut out = String::new();
        let mut put = |k: &str, v: f64| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("vi", p.vi);
        put("l", p.l);
        put("llk1", p.llk1);
        put("llk2", p.llk2);
        put("ci", p.ci);
        put("co1", p.co1);
        put("co2", p.co2);
        for (k, c) in p.csn.iter().enumerate() {
            put(&format!("csn{}", k + 1), *c);
        }
        put("n", p.n);
        put("d", p.d);
        put("r1", p.r1);
        put("r2", p.r2);
        put("fs", p.fs);
        if let Some(h) = s.max_step {
            put("max_step", h);
        }
        put("event_tol", s.event_tol);
        put("ss_tol", s.ss_tol);
        put("max_periods", s.max_periods as f64);
        put("samples", s.samples as f64);
        let seed = match s.seed {
            Seed::Analytic => "analytic".to_string(),
            Seed::Zero => "zero".to_string(),
            Seed::Custom { i_lk1, i_lk2, vo1 } => format!("{i_lk1},{i_lk2},{vo1}"),
        };
        let _ = writeln!(out, "seed = {seed}");
        out
    }

    /// SHA-256 of [`Config::canonical`], lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Parses a number with an optional SI suffix (`f p n u m k meg g t`, case-insensitive).
pub fn parse_si(text: &str) -> Option<f64> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    const SUFFIXES: [(&str, i32); 9] =
        [("meg", 6), ("f", -15), ("p", -12), ("n", -9), ("u", -6), ("m", -3), ("k", 3), ("g", 9), ("t", 12)];
    for (suffix, exp) in SUFFIXES {
        if let Some(num) = lower.strip_suffix(suffix) {
            // "1e3" ends in a digit, so exponents never collide with suffixes.
            num.parse::<f64>().ok()?;
            // Scaling through the decimal exponent keeps "4.7n" identical to "4.7e-9".
            let v = if num.contains('e') { num.parse::<f64>().ok()? * 10f64.powi(exp) } else { format!("{num}e{exp}").parse().ok()? };
            return Some(v).filter(|v: &f64| v.is_finite());
        }
    }
    lower.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn count(v: f64) -> Option<usize> {
    (v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64).then_some(v as usize)
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<Config, ConfigError> {
    let mut p = ConverterParams::reference();
    let mut sim = SimConfig::default();
    let mut lines: BTreeMap<&'static str, usize> = BTreeMap::new();
    let err = |line: usize, msg: String| ConfigError::Parse { path: path.into(), line, msg };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, got `{body}`")))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        if key == "seed" {
            sim.seed = match value.to_ascii_lowercase().as_str() {
                "analytic" => Seed::Analytic,
                "zero" => Seed::Zero,
                other => {
                    let v: Vec<f64> = other.split(',').filter_map(parse_si).collect();
                    match v[..] {
                        [i_lk1, i_lk2, vo1] if other.split(',').count() == 3 => Seed::Custom { i_lk1, i_lk2, vo1 },
                        _ => return Err(err(line, format!("seed must be `analytic`, `zero` or `i_lk1,i_lk2,vo1`, got `{value}`"))),
                    }
                }
            };
            continue;
        }
        let v = parse_si(value).ok_or_else(|| err(line, format!("invalid number `{value}` for `{key}`")))?;
        let name: &'static str = match key.as_str() {
            "vi" => { p.vi = v; "vi" }
            "l" => { p.l = v; "l" }
            "llk" => { p.llk1 = v; p.llk2 = v; "llk" }
            "llk1" => { p.llk1 = v; "llk1" }
            "llk2" => { p.llk2 = v; "llk2" }
            "ci" => { p.ci = v; "ci" }
            "co1" => { p.co1 = v; "co1" }
            "co2" => { p.co2 = v; "co2" }
            "csn" => { p.csn = [v; 6]; "csn" }
            "csn1" => { p.csn[0] = v; "csn1" }
            "csn2" => { p.csn[1] = v; "csn2" }
            "csn3" => { p.csn[2] = v; "csn3" }
            "csn4" => { p.csn[3] = v; "csn4" }
            "csn5" => { p.csn[4] = v; "csn5" }
            "csn6" => { p.csn[5] = v; "csn6" }
            "n" => { p.n = v; "n" }
            "d" => { p.d = v; "d" }
            "r1" => { p.r1 = v; "r1" }
            "r2" => { p.r2 = v; "r2" }
            "fs" => { p.fs = v; "fs" }
            "max_step" => { sim.max_step = Some(v); "max_step" }
            "event_tol" => { sim.event_tol = v; "event_tol" }
            "ss_tol" => { sim.ss_tol = v; "ss_tol" }
            "max_periods" => {
                sim.max_periods = count(v).ok_or_else(|| err(line, format!("max_periods must be a whole number, got `{value}`")))?;
                "max_periods"
            }
            "samples" => {
                sim.samples = count(v).ok_or_else(|| err(line, format!("samples must be a whole number, got `{value}`")))?;
                "samples"
            }
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        };
        if lines.insert(name, line).is_some() {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
    }

    let params = p.validate().map_err(|source| {
        let line = offending_key(&source).iter().find_map(|k| lines.get(k).copied());
        ConfigError::Invalid { path: path.into(), line, source }
    })?;
    sim.validate().map_err(|source| ConfigError::Sim { path: path.into(), source })?;

    let mut warnings = Vec::new();
    for (k, v) in [("llk1", params.llk1), ("llk2", params.llk2)] {
        if v == params.l {
            let at = lines.get(k).or_else(|| lines.get("llk")).map(|l| format!("line {l}: ")).unwrap_or_default();
            warnings.push(format!("{at}{k} equals l ({v} H); leakage this large leaves no room for commutation"));
        }
    }
    Ok(Config { params, sim, warnings })
}

/// Config keys that can set the value named in a validation error.
fn offending_key(e: &ParamsError) -> Vec<&'static str> {
    match e {
        ParamsError::NotPositive(name) | ParamsError::Negative(name) => match *name {
            "Vi" => vec!["vi"],
            "L" => vec!["l"],
            "LLK1" => vec!["llk1", "llk"],
            "LLK2" => vec!["llk2", "llk"],
            "Ci" => vec!["ci"],
            "Co1" => vec!["co1"],
            "Co2" => vec!["co2"],
            "n" => vec!["n"],
            "R1" => vec!["r1"],
            "R2" => vec!["r2"],
            "fs" => vec!["fs"],
            "Csn1" => vec!["csn1", "csn"],
            "Csn2" => vec!["csn2", "csn"],
            "Csn3" => vec!["csn3", "csn"],
            "Csn4" => vec!["csn4", "csn"],
            "Csn5" => vec!["csn5", "csn"],
            "Csn6" => vec!["csn6", "csn"],
            _ => vec![],
        },
        ParamsError::DutyTooLow(_) | ParamsError::DutyTooHigh(_) => vec!["d"],
        ParamsError::LeakageAsymmetric(..) => vec!["llk2", "llk1", "llk"],
    }
}
