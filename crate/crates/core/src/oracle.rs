//! Brute-force reference: the Hamiltonian on a truncated Fock ⊗ spin basis.
//!
//! Basis ordering is interleaved, `(n,↓) ↦ 2n` and `(n,↑) ↦ 2n + 1`.
//! The parity `Π = e^{iπa†a}σ_z` splits the basis into two chains
//! `(n, s₀(-1)^n)`, each tridiagonal; the ground state is taken from the lower
//! of the two chain ground states, so near-degenerate parity doublets never mix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::params::{Parity, RabiParams};
use crate::stats::{LabMoments, PhotonStatistics};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHamiltonian {
    pub matrix: DMatrix<f64>,
    pub n_max: usize,
}

/// Index of `|n, s⟩` with `s = -1` for `↓` and `+1` for `↑`.
#[inline]
pub fn basis_index(n: usize, s: i8) -> usize {
    2 * n + usize::from(s > 0)
}

/// Full `2(n_max+1)`-dimensional matrix.
pub fn build_hamiltonian(params: &RabiParams, n_max: usize) -> TruncatedHamiltonian {
    let dim = 2 * (n_max + 1);
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=n_max {
        for s in [-1i8, 1] {
            let i = basis_index(n, s);
            h[(i, i)] = n as f64 + f64::from(s) * params.delta;
            if n < n_max {
                let j = basis_index(n + 1, -s);
                let c = params.g * ((n + 1) as f64).sqrt();
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
        }
    }
    TruncatedHamiltonian { matrix: h, n_max }
}

impl TruncatedHamiltonian {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(RabiError::InvalidParams("matrix is not square".into()));
        }
        let n_max = (matrix.nrows() / 2).saturating_sub(1);
        Ok(Self { matrix, n_max })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Sign `s₀` of the spin on `n = 0` in the chain of the given parity:
/// `Π|0, s⟩ = s|0, s⟩`.
fn chain_spin0(parity: Parity) -> i8 {
    match parity {
        Parity::Plus => 1,
        Parity::Minus => -1,
    }
}

/// Tridiagonal block of one parity on `(n, s₀(-1)^n)`, `n = 0..=n_max`.
pub fn parity_sector(params: &RabiParams, n_max: usize, parity: Parity) -> DMatrix<f64> {
    let s0 = f64::from(chain_spin0(parity));
    let dim = n_max + 1;
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        let s = if n % 2 == 0 { s0 } else { -s0 };
        h[(n, n)] = n as f64 + s * params.delta;
        if n + 1 < dim {
            let c = params.g * ((n + 1) as f64).sqrt();
            h[(n, n + 1)] = c;
            h[(n + 1, n)] = c;
        }
    }
    h
}

/// Lowest eigenpair of a real symmetric matrix, checked by its residual.
pub fn lowest_eigenpair(h: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(RabiError::ConvergenceFailure("empty or non-square matrix".into()));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(RabiError::ConvergenceFailure("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| RabiError::ConvergenceFailure(format!("eigensolver did not converge at dim {}", h.nrows())))?;
    let (idx, &e0) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty spectrum");
    let mut v = eig.eigenvectors.column(idx).into_owned();
    v /= v.norm();
    // fix the overall sign: largest component positive
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v.neg_mut();
    }
    let scale = h.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(1.0, f64::max);
    let residual = (h * &v - &v * e0).norm();
    if !(residual < 1e-9 * scale) {
        return Err(RabiError::ConvergenceFailure(format!(
            "eigenpair residual {residual:e} exceeds {:e} at dim {}",
            1e-9 * scale,
            h.nrows()
        )));
    }
    Ok((e0, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Absolute `e0` change between successive cutoffs.
    pub e0_tolerance: f64,
    /// `mean_n` change relative to `max(mean_n, 1)`.
    pub mean_n_tolerance: f64,
    pub n_start: usize,
    pub growth: f64,
    pub n_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { e0_tolerance: 1e-9, mean_n_tolerance: 1e-8, n_start: 32, growth: 1.5, n_cap: 4096 }
    }
}

impl OracleConfig {
    pub fn with_target(e0_tolerance: f64) -> Self {
        Self { e0_tolerance, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub e0: f64,
    /// Ground eigenvector in the interleaved full basis.
    pub vector: Vec<f64>,
    pub parity: Parity,
    pub parity_expect: f64,
    /// Statistics of the renormalized `|−⟩` photonic component, with the overlap
    /// of both components.
    pub stats: PhotonStatistics,
    pub plus_moments: LabMoments,
    pub minus_moments: LabMoments,
    /// Renormalized photonic components, `⟨±|ψ⟩` over `|n⟩`.
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub n_max_used: usize,
}

/// Ground state at a fixed cutoff, from the lower of the two parity chains.
pub fn ground_state_at(params: &RabiParams, n_max: usize) -> Result<(f64, Parity, Vec<f64>)> {
    let mut best: Option<(f64, Parity, DVector<f64>)> = None;
    for parity in Parity::BOTH {
        let (e, v) = lowest_eigenpair(&parity_sector(params, n_max, parity))?;
        if best.as_ref().is_none_or(|b| e < b.0) {
            best = Some((e, parity, v));
        }
    }
    let (e0, parity, chain) = best.expect("two sectors solved");
    let s0 = chain_spin0(parity);
    let mut full = vec![0.0; 2 * (n_max + 1)];
    for (n, &c) in chain.iter().enumerate() {
        let s = if n % 2 == 0 { s0 } else { -s0 };
        full[basis_index(n, s)] = c;
    }
    Ok((e0, parity, full))
}

/// `⟨Π⟩` of a full-basis vector.
pub fn parity_expectation(vector: &[f64]) -> f64 {
    vector
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = i / 2;
            let s = if i % 2 == 1 { 1.0 } else { -1.0 };
            let photon = if n % 2 == 0 { 1.0 } else { -1.0 };
            photon * s * c * c
        })
        .sum()
}

/// `(⟨+|ψ⟩, ⟨−|ψ⟩)` with `|±⟩ = (|↑⟩ ± |↓⟩)/√2`, each renormalized.
pub fn spin_projections(vector: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (mut plus, mut minus): (Vec<f64>, Vec<f64>) = vector
        .chunks_exact(2)
        .map(|pair| {
            let (down, up) = (pair[0], pair[1]);
            (h * (up + down), h * (up - down))
        })
        .unzip();
    for v in [&mut plus, &mut minus] {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|c| *c /= norm);
        }
    }
    (plus, minus)
}

/// Moments of an undisplaced real Fock vector by direct sums.
pub fn fock_moments(c: &[f64]) -> LabMoments {
    let mut m = LabMoments { a: 0.0, a2: 0.0, n: 0.0, n2: 0.0 };
    for (n, &cn) in c.iter().enumerate() {
        let nf = n as f64;
        m.n += nf * cn * cn;
        m.n2 += nf * nf * cn * cn;
        if let Some(&c1) = c.get(n + 1) {
            m.a += (nf + 1.0).sqrt() * cn * c1;
        }
        if let Some(&c2) = c.get(n + 2) {
            m.a2 += ((nf + 1.0) * (nf + 2.0)).sqrt() * cn * c2;
        }
    }
    m
}

/// Ground state with the cutoff grown until `e0` and `mean_n` settle.
pub fn oracle_statistics(params: &RabiParams, cfg: &OracleConfig) -> Result<OracleResult> {
    let mut n_max = cfg.n_start.max(1);
    let mut previous: Option<(f64, f64)> = None;
    loop {
        if n_max > cfg.n_cap {
            return Err(RabiError::ConvergenceFailure(format!(
                "oracle cutoff exceeded {} without convergence (last e0 {:?})",
                cfg.n_cap,
                previous.map(|p| p.0)
            )));
        }
        let (e0, parity, vector) = ground_state_at(params, n_max)?;
        let (plus, minus) = spin_projections(&vector);
        let minus_moments = fock_moments(&minus);
        let mean_n = minus_moments.n;
        if let Some((e_prev, n_prev)) = previous {
            let e_ok = (e0 - e_prev).abs() < cfg.e0_tolerance;
            let n_ok = (mean_n - n_prev).abs() < cfg.mean_n_tolerance * mean_n.max(1.0);
            if e_ok && n_ok {
                let overlap: f64 = plus.iter().zip(&minus).map(|(a, b)| a * b).sum();
                let stats = PhotonStatistics::from_moments(&minus_moments, overlap);
                return Ok(OracleResult {
                    e0,
                    parity_expect: parity_expectation(&vector),
                    vector,
                    parity,
                    stats,
                    plus_moments: fock_moments(&plus),
                    minus_moments,
                    plus,
                    minus,
                    n_max_used: n_max,
                });
            }
        }
        previous = Some((e0, mean_n));
        n_max = ((n_max as f64) * cfg.growth).ceil() as usize;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(delta: f64, g: f64) -> RabiParams {
        RabiParams::normalized(delta, g).unwrap()
    }

    #[test]
    fn decoupled_diagonal() {
        let h = build_hamiltonian(&p(1.0, 0.0), 2);
        let diag: Vec<f64> = h.matrix.diagonal().iter().copied().collect();
        assert_eq!(diag, vec![-1.0, 1.0, 0.0, 2.0, 1.0, 3.0]);
        let (e0, v) = lowest_eigenpair(&h.matrix).unwrap();
        assert_eq!(e0, -1.0);
        assert_eq!(v[0], 1.0);
    }

    #[test]
    fn coupling_entries() {
        let h = build_hamiltonian(&p(0.5, 0.3), 3);
        // ⟨n+1, -s|H|n, s⟩ = g√(n+1)
        assert_eq!(h.matrix[(basis_index(1, 1), basis_index(0, -1))], 0.3);
        assert_eq!(h.matrix[(basis_index(3, -1), basis_index(2, 1))], 0.3 * 3f64.sqrt());
        // no same-spin hopping
        assert_eq!(h.matrix[(basis_index(1, -1), basis_index(0, -1))], 0.0);
        assert_eq!(h.matrix, h.matrix.transpose());
    }

    #[test]
    fn two_by_two_truncation() {
        let (delta, g) = (0.7, 0.4);
        let h = DMatrix::from_row_slice(2, 2, &[-delta, g, g, delta]);
        let (e0, _) = lowest_eigenpair(&h).unwrap();
        assert!((e0 + (delta * delta + g * g).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sectors_reproduce_full_spectrum() {
        let params = p(0.8, 0.6);
        let full = build_hamiltonian(&params, 20);
        let mut all: Vec<f64> = SymmetricEigen::new(full.matrix).eigenvalues.iter().copied().collect();
        let mut split: Vec<f64> = Parity::BOTH
            .iter()
            .flat_map(|&par| {
                SymmetricEigen::new(parity_sector(&params, 20, par)).eigenvalues.iter().copied().collect::<Vec<_>>()
            })
            .collect();
        all.sort_by(f64::total_cmp);
        split.sort_by(f64::total_cmp);
        for (a, b) in all.iter().zip(&split) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn embedded_vector_is_full_eigenvector() {
        let params = p(1.0, 1.0);
        let (e0, _, v) = ground_state_at(&params, 40).unwrap();
        let h = build_hamiltonian(&params, 40).matrix;
        let v = DVector::from_vec(v);
        assert!((&h * &v - &v * e0).norm() < 1e-10);
    }

    #[test]
    fn displaced_oscillator_energy() {
        let (e0, _, _) = ground_state_at(&p(1e-9, 1.0), 80).unwrap();
        assert!((e0 + 1.0).abs() < 1e-8);
    }

    #[test]
    fn coherent_moments_by_direct_sum() {
        // |α⟩ with α = 1
        let mut c = Vec::new();
        let mut term = (-0.5f64).exp();
        for n in 0..60 {
            if n > 0 {
                term /= (n as f64).sqrt();
            }
            c.push(term);
        }
        let m = fock_moments(&c);
        assert!((m.a - 1.0).abs() < 1e-14);
        assert!((m.a2 - 1.0).abs() < 1e-14);
        assert!((m.n - 1.0).abs() < 1e-14);
        assert!((m.n2 - 2.0).abs() < 1e-13);
    }
}
