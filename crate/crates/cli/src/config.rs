//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use sol_geometry::cutlocus::DEFAULT_TOL_PERFECT;
use sol_geometry::export::MeshFormat;
use sol_geometry::flow::DEFAULT_DT;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FileConfig {
    pub dt: Option<f64>,
    pub tol_perfect: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<MeshFormat>,
    pub full: Option<bool>,
}

/// Settings after merging flags over the config file over defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub tol_perfect: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<MeshFormat>,
    pub full: bool,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig, CliError> {
        let mut cfg = FileConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Input(format!("config line {}: {msg}", n + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key.replace('-', "_").as_str() {
                "dt" => cfg.dt = Some(value.parse().map_err(|_| bad(format!("bad dt '{value}'")))?),
                "tol_perfect" => {
                    cfg.tol_perfect = Some(value.parse().map_err(|_| bad(format!("bad tol_perfect '{value}'")))?)
                }
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad(format!("bad seed '{value}'")))?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = Some(value.parse().map_err(bad)?),
                "full" => cfg.full = Some(value.parse().map_err(|_| bad(format!("bad full '{value}'")))?),
                _ => return Err(bad(format!("unknown key '{key}'"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        FileConfig::parse(&text)
    }
}

impl RunConfig {
    pub fn merge(flags: FileConfig, file: FileConfig) -> Result<RunConfig, CliError> {
        let cfg = RunConfig {
            dt: flags.dt.or(file.dt).unwrap_or(DEFAULT_DT),
            tol_perfect: flags.tol_perfect.or(file.tol_perfect).unwrap_or(DEFAULT_TOL_PERFECT),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format),
            full: flags.full.or(file.full).unwrap_or(false),
        };
        if !(cfg.dt > 0.0 && cfg.dt <= 0.1) {
            return Err(CliError::Input(format!("dt must lie in (0, 0.1], got {}", cfg.dt)));
        }
        if !(cfg.tol_perfect >= 0.0 && cfg.tol_perfect < 1.0) {
            return Err(CliError::Input(format!("tol-perfect must lie in [0, 1), got {}", cfg.tol_perfect)));
        }
        Ok(cfg)
    }
}
