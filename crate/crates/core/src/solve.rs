//! One parameter point end to end: ground root, both branches, statistics.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::oracle::OracleConfig;
use crate::params::{Branch, RabiParams};
use crate::spectral::{ground_solution, SpectralConfig, SpectralRoot};
use crate::state::{build_branch_state, BranchState, StateConfig};
use crate::stats::{photon_statistics, PhotonStatistics};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub spectral: SpectralConfig,
    pub state: StateConfig,
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSolution {
    pub params: RabiParams,
    pub root: SpectralRoot,
    pub plus: BranchState,
    pub minus: BranchState,
    pub stats: PhotonStatistics,
}

impl PointSolution {
    /// Retained length of the reported (minus) branch.
    pub fn truncation_n(&self) -> usize {
        self.minus.truncation_n
    }
}

pub fn solve_point(params: &RabiParams, cfg: &SolverConfig) -> Result<PointSolution> {
    let root = ground_solution(params, &cfg.spectral)?;
    let plus = build_branch_state(params, &root, Branch::Plus, &cfg.state)?;
    let minus = build_branch_state(params, &root, Branch::Minus, &cfg.state)?;
    let stats = photon_statistics(&plus, &minus)?;
    Ok(PointSolution { params: *params, root, plus, minus, stats })
}

/// Exactly solvable corners of the parameter plane.
pub mod limits {
    use crate::stats::PhotonStatistics;

    const HALF_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// `g = 0`: ground state `|0⟩ ⊗ |↓⟩`, `E = -Δ`; both branches are the vacuum.
    pub fn zero_coupling(delta: f64) -> (f64, PhotonStatistics) {
        let stats = PhotonStatistics {
            mean_n: 0.0,
            var_n: 0.0,
            q_excess: 0.0,
            mean_x: 0.0,
            mean_p: 0.0,
            dx: HALF_SQRT2,
            dp: HALF_SQRT2,
            product: 0.5,
            r: 0.0,
            overlap: 1.0,
            cov_xp: 0.0,
        };
        (-delta, stats)
    }

    /// `Δ = 0`: the branches are the coherent states `|±g⟩`, `E = -g²`; the
    /// minus branch is `|+g⟩`.
    pub fn zero_splitting(g: f64) -> (f64, PhotonStatistics) {
        let n = g * g;
        let stats = PhotonStatistics {
            mean_n: n,
            var_n: n,
            q_excess: 0.0,
            mean_x: std::f64::consts::SQRT_2 * g,
            mean_p: 0.0,
            dx: HALF_SQRT2,
            dp: HALF_SQRT2,
            product: 0.5,
            r: 0.0,
            overlap: (-2.0 * n).exp(),
            cov_xp: 0.0,
        };
        (-n, stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_point_matches_closed_form() {
        let params = RabiParams::normalized(1.3, 0.0).unwrap();
        let sol = solve_point(&params, &SolverConfig::default()).unwrap();
        let (e, stats) = limits::zero_coupling(1.3);
        assert_eq!(sol.root.energy, e);
        for (a, b) in sol.stats.values().iter().zip(stats.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn small_splitting_approaches_coherent_panel() {
        let g = 1.0;
        let params = RabiParams::normalized(1e-6, g).unwrap();
        let sol = solve_point(&params, &SolverConfig::default()).unwrap();
        let (e, stats) = limits::zero_splitting(g);
        assert!((sol.root.energy - e).abs() < 1e-5);
        for (name, (a, b)) in PhotonStatistics::FIELDS.iter().zip(sol.stats.values().iter().zip(stats.values())) {
            assert!((a - b).abs() < 1e-5, "{name}: {a} vs {b}");
        }
    }
}
