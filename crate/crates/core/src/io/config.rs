//! Run configuration as flat `key = value` text.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! override earlier ones, so command-line flags are applied with
//! [`RunConfig::set`] after the file.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::oracle::OracleConfig;
use crate::solve::SolverConfig;
use crate::spectral::SpectralConfig;
use crate::state::StateConfig;
use crate::sweep::{GridAxis, Method, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Svg => "svg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            "svg" => Some(OutputFormat::Svg),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub root_tolerance: f64,
    pub series_tolerance: f64,
    pub state_tail_tolerance: f64,
    /// Oracle `e0` convergence target.
    pub convergence_target: f64,
    pub n_cap: usize,
    pub oracle_n_cap: usize,
    pub delta: GridAxis,
    pub g: GridAxis,
    /// `0` means one worker per core.
    pub workers: usize,
    pub method: Method,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Field rendered by the `svg` format.
    pub field: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spectral = SpectralConfig::default();
        let state = StateConfig::default();
        let oracle = OracleConfig::default();
        Self {
            root_tolerance: spectral.root_tolerance,
            series_tolerance: spectral.series_tolerance,
            state_tail_tolerance: state.state_tail_tolerance,
            convergence_target: oracle.e0_tolerance,
            n_cap: spectral.n_cap,
            oracle_n_cap: oracle.n_cap,
            delta: GridAxis { lo: 0.1, hi: 18.0, steps: 32 },
            g: GridAxis { lo: 1.0, hi: 3.0, steps: 32 },
            workers: 0,
            method: Method::Spectral,
            output: None,
            format: OutputFormat::Csv,
            field: "r".to_string(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| RabiError::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl RunConfig {
    pub const KEYS: [&'static str; 18] = [
        "root_tolerance",
        "series_tolerance",
        "state_tail_tolerance",
        "convergence_target",
        "n_cap",
        "oracle_n_cap",
        "delta_lo",
        "delta_hi",
        "delta_steps",
        "g_lo",
        "g_hi",
        "g_steps",
        "workers",
        "method",
        "output",
        "format",
        "field",
        "steps",
    ];

    /// Assigns one key; `steps` sets both axes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "root_tolerance" => self.root_tolerance = parse_num(key, value)?,
            "series_tolerance" => self.series_tolerance = parse_num(key, value)?,
            "state_tail_tolerance" => self.state_tail_tolerance = parse_num(key, value)?,
            "convergence_target" => self.convergence_target = parse_num(key, value)?,
            "n_cap" => self.n_cap = parse_num(key, value)?,
            "oracle_n_cap" => self.oracle_n_cap = parse_num(key, value)?,
            "delta_lo" => self.delta.lo = parse_num(key, value)?,
            "delta_hi" => self.delta.hi = parse_num(key, value)?,
            "delta_steps" => self.delta.steps = parse_num(key, value)?,
            "g_lo" => self.g.lo = parse_num(key, value)?,
            "g_hi" => self.g.hi = parse_num(key, value)?,
            "g_steps" => self.g.steps = parse_num(key, value)?,
            "steps" => {
                let steps = parse_num(key, value)?;
                self.delta.steps = steps;
                self.g.steps = steps;
            }
            "workers" => self.workers = parse_num(key, value)?,
            "method" => {
                self.method =
                    Method::parse(value).ok_or_else(|| RabiError::Config(format!("`method`: unknown `{value}`")))?
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => {
                self.format = OutputFormat::parse(value)
                    .ok_or_else(|| RabiError::Config(format!("`format`: unknown `{value}`")))?
            }
            "field" => self.field = value.to_string(),
            other => return Err(RabiError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| RabiError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value).map_err(|e| RabiError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("root_tolerance", self.root_tolerance),
            ("series_tolerance", self.series_tolerance),
            ("state_tail_tolerance", self.state_tail_tolerance),
            ("convergence_target", self.convergence_target),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(RabiError::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        if self.n_cap == 0 || self.oracle_n_cap == 0 {
            return Err(RabiError::Config("caps must be positive".into()));
        }
        self.delta.validate().map_err(|e| RabiError::Config(format!("delta axis: {e}")))?;
        self.g.validate().map_err(|e| RabiError::Config(format!("g axis: {e}")))?;
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        cfg.spectral.root_tolerance = self.root_tolerance;
        cfg.spectral.series_tolerance = self.series_tolerance;
        cfg.spectral.n_cap = self.n_cap;
        cfg.state.state_tail_tolerance = self.state_tail_tolerance;
        cfg.oracle.e0_tolerance = self.convergence_target;
        cfg.oracle.n_cap = self.oracle_n_cap;
        cfg
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec { delta: self.delta, g: self.g, method: self.method, solver: self.solver() }
    }

    /// Canonical text form; [`RunConfig::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("root_tolerance", format!("{:e}", self.root_tolerance));
        kv("series_tolerance", format!("{:e}", self.series_tolerance));
        kv("state_tail_tolerance", format!("{:e}", self.state_tail_tolerance));
        kv("convergence_target", format!("{:e}", self.convergence_target));
        kv("n_cap", self.n_cap.to_string());
        kv("oracle_n_cap", self.oracle_n_cap.to_string());
        kv("delta_lo", self.delta.lo.to_string());
        kv("delta_hi", self.delta.hi.to_string());
        kv("delta_steps", self.delta.steps.to_string());
        kv("g_lo", self.g.lo.to_string());
        kv("g_hi", self.g.hi.to_string());
        kv("g_steps", self.g.steps.to_string());
        kv("workers", self.workers.to_string());
        kv("method", self.method.as_str().to_string());
        if let Some(p) = &self.output {
            kv("output", p.display().to_string());
        }
        kv("format", self.format.as_str().to_string());
        kv("field", self.field.clone());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_solver_defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.solver(), SolverConfig::default());
        assert_eq!(cfg.root_tolerance, 1e-12);
        assert_eq!(cfg.series_tolerance, 1e-14);
        assert_eq!(cfg.state_tail_tolerance, 1e-10);
        assert_eq!(cfg.convergence_target, 1e-9);
        assert_eq!(cfg.n_cap, 400);
        assert_eq!(cfg.oracle_n_cap, 4096);
    }

    #[test]
    fn parse_with_comments_and_overrides() {
        let text =
            "# window\n delta_lo = 0.1\ndelta_hi=1\n\ng_hi = 1\ng_lo = 0.1\nsteps = 8\nmethod = oracle\ng_steps = 4\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.delta, GridAxis { lo: 0.1, hi: 1.0, steps: 8 });
        assert_eq!(cfg.g.steps, 4);
        assert_eq!(cfg.method, Method::Oracle);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("output", "out/sweep.csv").unwrap();
        cfg.set("workers", "3").unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("n_cap").is_err());
        assert!(RunConfig::parse("root_tolerance = -1").is_err());
        assert!(RunConfig::parse("steps = 1").is_err());
        assert!(RunConfig::parse("format = png").is_err());
    }
}
