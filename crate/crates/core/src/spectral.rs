//! Dense Hermitian spectral utilities.
//!
//! Every routine here accepts a complex matrix that must be Hermitian to
//! within [`HERMITIAN_TOL`] relative to its largest entry; the Hermitian part
//! is what gets diagonalized. Eigenvector choice inside degenerate subspaces is
//! left to the solver, so callers should only rely on spectra and
//! reconstructions.

use alloc::vec::Vec;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{hermitian_part_checked, CMatrix};

/// Relative Hermiticity tolerance applied to spectral inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default relative threshold below which an eigenvalue counts as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Default relative tolerance for positive semi-definiteness.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub is_psd: bool,
    pub pseudo_det: f64,
    pub numerical_rank: usize,
}

/// One term `gamma * l l^dagger` of a Hermitian coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTerm {
    pub gamma: f64,
    /// Unit-norm coefficient vector.
    pub vector: DVector<Complex64>,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvals_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    let h = hermitian_part_checked(m, HERMITIAN_TOL)?;
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    Ok(sorted(h.symmetric_eigenvalues().iter().copied().collect()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(m: &CMatrix) -> Result<f64> {
    Ok(eigvals_hermitian(m)?.first().copied().unwrap_or(0.0))
}

fn max_modulus(eigs: &[f64]) -> f64 {
    eigs.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

fn psd_from_eigs(eigs: &[f64], tol: f64) -> bool {
    match (eigs.first(), eigs.last()) {
        (Some(&lo), Some(&hi)) => lo >= -tol * hi.max(1.0),
        _ => true,
    }
}

fn pseudo_det_from_eigs(eigs: &[f64], rank_tol: f64) -> (f64, usize) {
    let cutoff = rank_tol * max_modulus(eigs);
    eigs.iter().filter(|x| x.abs() > cutoff).fold((1.0, 0), |(p, r), &x| (p * x, r + 1))
}

/// Full spectral summary with the default tolerances.
pub fn eig_hermitian(m: &CMatrix) -> Result<SpectralReport> {
    let eigenvalues = eigvals_hermitian(m)?;
    let (pseudo_det, numerical_rank) = pseudo_det_from_eigs(&eigenvalues, RANK_TOL);
    Ok(SpectralReport {
        lambda_min: eigenvalues.first().copied().unwrap_or(0.0),
        is_psd: psd_from_eigs(&eigenvalues, PSD_TOL),
        pseudo_det,
        numerical_rank,
        eigenvalues,
    })
}

/// True iff `lambda_min >= -tol * max(1, lambda_max)`.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    Ok(psd_from_eigs(&eigvals_hermitian(m)?, tol))
}

/// Product of the eigenvalues whose modulus exceeds `rank_tol * max|lambda|`.
/// The empty product (zero matrix) is 1.
pub fn pseudo_det(m: &CMatrix, rank_tol: f64) -> Result<f64> {
    Ok(pseudo_det_from_eigs(&eigvals_hermitian(m)?, rank_tol).0)
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(eigvals_hermitian(m)?.iter().map(|x| x.abs()).sum())
}

/// Writes `C = sum_k gamma_k l_k l_k^dagger` with orthonormal `l_k`, sorted by
/// descending `gamma_k`. Terms with `|gamma_k| <= rank_tol * max|gamma|` are
/// dropped; negative rates are kept.
pub fn lindblad_decomposition(c: &CMatrix, rank_tol: f64) -> Result<Vec<LindbladTerm>> {
    let h = hermitian_part_checked(c, HERMITIAN_TOL)?;
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::new(h);
    let scale = eig.eigenvalues.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()));
    let mut terms: Vec<LindbladTerm> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, g)| g.abs() > rank_tol * scale)
        .map(|(k, &gamma)| LindbladTerm { gamma, vector: eig.eigenvectors.column(k).into_owned() })
        .collect();
    terms.sort_by(|a, b| b.gamma.total_cmp(&a.gamma));
    Ok(terms)
}

/// Reassembles `sum_k gamma_k l_k l_k^dagger`.
pub fn reconstruct(terms: &[LindbladTerm], n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for t in terms {
        out += (&t.vector * t.vector.adjoint()).scale(t.gamma);
    }
    out
}
