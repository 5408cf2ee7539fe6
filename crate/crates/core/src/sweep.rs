//! Rectangular `(Δ, g)` sweeps of the full statistics panel.

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::oracle::oracle_statistics;
use crate::params::{Parity, Phase, RabiParams};
use crate::solve::{solve_point, SolverConfig};
use crate::stats::PhotonStatistics;

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let axis = Self { lo, hi, steps };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo > 0.0 && self.hi > self.lo) {
            return Err(RabiError::InvalidParams(format!(
                "axis range must satisfy 0 < lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(RabiError::InvalidParams(format!("axis needs at least 2 steps, got {}", self.steps)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| if i == last { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / last as f64 })
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "spectral" => Some(Method::Spectral),
            "oracle" => Some(Method::Oracle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSummary {
    pub x_root: f64,
    pub energy: f64,
    pub residual: f64,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub delta: f64,
    pub g: f64,
    pub lambda: f64,
    pub phase: Phase,
    pub root: Option<RootSummary>,
    pub stats: Option<PhotonStatistics>,
    pub truncation_n: Option<usize>,
    pub method: Method,
    /// `code: message` of a failed point.
    pub error: Option<String>,
}

/// Numeric columns addressable by [`SweepRecord::field`].
pub const NUMERIC_FIELDS: [&str; 19] = [
    "delta",
    "g",
    "lambda",
    "x_root",
    "energy",
    "residual",
    "mean_n",
    "var_n",
    "q_excess",
    "mandel_q",
    "mean_x",
    "mean_p",
    "dx",
    "dp",
    "product",
    "r",
    "overlap",
    "cov_xp",
    "truncation_n",
];

impl SweepRecord {
    /// Value of a numeric column; `Ok(None)` when the point has no value.
    pub fn field(&self, name: &str) -> Result<Option<f64>> {
        let stat = |f: fn(&PhotonStatistics) -> f64| self.stats.as_ref().map(f);
        let root = |f: fn(&RootSummary) -> f64| self.root.as_ref().map(f);
        Ok(match name {
            "delta" => Some(self.delta),
            "g" => Some(self.g),
            "lambda" => Some(self.lambda),
            "x_root" => root(|r| r.x_root),
            "energy" => root(|r| r.energy),
            "residual" => root(|r| r.residual),
            "mean_n" => stat(|s| s.mean_n),
            "var_n" => stat(|s| s.var_n),
            "q_excess" => stat(|s| s.q_excess),
            "mandel_q" => self.stats.as_ref().and_then(PhotonStatistics::mandel_q),
            "mean_x" => stat(|s| s.mean_x),
            "mean_p" => stat(|s| s.mean_p),
            "dx" => stat(|s| s.dx),
            "dp" => stat(|s| s.dp),
            "product" => stat(|s| s.product),
            "r" => stat(|s| s.r),
            "overlap" => stat(|s| s.overlap),
            "cov_xp" => stat(|s| s.cov_xp),
            "truncation_n" => self.truncation_n.map(|n| n as f64),
            other => return Err(RabiError::UnknownField(other.to_string())),
        })
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

fn error_marker(e: &RabiError) -> String {
    format!("{}: {}", e.code(), e)
}

/// One grid point; failures become an error marker on the record.
pub fn sweep_point(delta: f64, g: f64, method: Method, cfg: &SolverConfig) -> SweepRecord {
    let mut record = SweepRecord {
        delta,
        g,
        lambda: g * (2.0 / delta).sqrt(),
        phase: Phase::from_lambda(g * (2.0 / delta).sqrt()),
        root: None,
        stats: None,
        truncation_n: None,
        method,
        error: None,
    };
    let params = match RabiParams::normalized(delta, g) {
        Ok(p) => p,
        Err(e) => {
            record.error = Some(error_marker(&e));
            return record;
        }
    };
    record.lambda = params.lambda();
    record.phase = params.phase();
    match method {
        Method::Spectral => match solve_point(&params, cfg) {
            Ok(sol) => {
                record.root = Some(RootSummary {
                    x_root: sol.root.x_root,
                    energy: sol.root.energy,
                    residual: sol.root.residual,
                    parity: sol.root.parity,
                });
                record.truncation_n = Some(sol.truncation_n());
                record.stats = Some(sol.stats);
            }
            Err(e) => record.error = Some(error_marker(&e)),
        },
        Method::Oracle => match oracle_statistics(&params, &cfg.oracle) {
            Ok(o) => {
                record.root = Some(RootSummary { x_root: o.e0 + g * g, energy: o.e0, residual: 0.0, parity: o.parity });
                record.truncation_n = Some(o.n_max_used + 1);
                record.stats = Some(o.stats);
            }
            Err(e) => record.error = Some(error_marker(&e)),
        },
    }
    record
}

/// How grid points are scheduled; results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Data-parallel map on a private pool; `0` means one worker per core.
    /// Runs sequentially when built without the `parallel` feature.
    Parallel {
        workers: usize,
    },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { workers: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub delta: GridAxis,
    pub g: GridAxis,
    pub method: Method,
    pub solver: SolverConfig,
}

impl SweepSpec {
    /// Grid points in row-major order, `Δ` outer and `g` inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let gs = self.g.values();
        self.delta.values().into_iter().flat_map(|d| gs.iter().map(move |&g| (d, g))).collect()
    }
}

pub fn run_sweep(spec: &SweepSpec, execution: Execution) -> Result<Vec<SweepRecord>> {
    spec.delta.validate()?;
    spec.g.validate()?;
    let points = spec.points();
    let eval = |&(d, g): &(f64, f64)| sweep_point(d, g, spec.method, &spec.solver);
    match execution {
        Execution::Sequential => Ok(points.iter().map(eval).collect()),
        Execution::Parallel { workers } => parallel_map(&points, workers, eval),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<F>(points: &[(f64, f64)], workers: usize, eval: F) -> Result<Vec<SweepRecord>>
where
    F: Fn(&(f64, f64)) -> SweepRecord + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RabiError::Config(format!("worker pool: {e}")))?;
    // indexed collect keeps grid order
    Ok(pool.install(|| points.par_iter().map(eval).collect()))
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<F>(points: &[(f64, f64)], _workers: usize, eval: F) -> Result<Vec<SweepRecord>>
where
    F: Fn(&(f64, f64)) -> SweepRecord,
{
    Ok(points.iter().map(eval).collect())
}
