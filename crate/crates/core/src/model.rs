//! Correlated dephasing environments.
//!
//! A model is the pair `(C, h)` of the generator
//!
//! ```text
//! L(rho) = -i[H, rho] + sum_ij c_ij (Z_i rho Z_j - 1/2 {Z_i Z_j, rho}),
//! H = 1/2 sum_ij h_ij Z_i Z_j
//! ```
//!
//! with `C` Hermitian and `h` real symmetric with zero diagonal.

use alloc::format;

use core::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use rand_core::RngCore;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, hermitian_deviation, max_abs, max_abs_real, CMatrix, RMatrix};
use crate::rng::{seeded, standard_normal};
use crate::spectral::{is_psd, PSD_TOL};

/// Relative tolerance for the Hermitian / symmetric input checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Read access to a dephasing generator's coefficients. Implemented by both
/// physical models and their partial-transposed counterparts.
pub trait Coefficients {
    fn n(&self) -> usize;
    /// Hermitian dissipator coefficients.
    fn c(&self) -> &CMatrix;
    /// Symmetric Ising couplings with zero diagonal.
    fn h(&self) -> &RMatrix;
}

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingModel {
    n: usize,
    c: CMatrix,
    h: RMatrix,
    physical: bool,
}

impl Coefficients for DephasingModel {
    fn n(&self) -> usize {
        self.n
    }
    fn c(&self) -> &CMatrix {
        &self.c
    }
    fn h(&self) -> &RMatrix {
        &self.h
    }
}

fn check_shape(n: usize, rows: usize, cols: usize) -> Result<()> {
    if rows != n {
        return Err(Error::DimensionMismatch { expected: n, found: rows });
    }
    if cols != n {
        return Err(Error::DimensionMismatch { expected: n, found: cols });
    }
    Ok(())
}

/// Validates `h` and returns its symmetrized copy with the diagonal zeroed.
pub(crate) fn sanitize_couplings(n: usize, h: &RMatrix) -> Result<RMatrix> {
    check_shape(n, h.nrows(), h.ncols())?;
    let scale = max_abs_real(h).max(1.0);
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            dev = dev.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    if dev > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    let mut out = (h + h.transpose()).scale(0.5);
    out.fill_diagonal(0.0);
    Ok(out)
}

impl DephasingModel {
    /// Validates and symmetrizes `(C, h)`. Inputs within tolerance of
    /// Hermitian / symmetric are replaced by `(C + C^dagger)/2` and `(h + h^T)/2`;
    /// the diagonal of `h` is dropped since `Z_i^2 = 1`.
    pub fn new(n: usize, c: CMatrix, h: RMatrix) -> Result<Self> {
        if n == 0 {
            return Err(invalid("qubit count must be positive"));
        }
        check_shape(n, c.nrows(), c.ncols())?;
        let dev = hermitian_deviation(&c);
        if dev > SYMMETRY_TOL * max_abs(&c).max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let c = (&c + c.adjoint()).scale(0.5);
        let h = sanitize_couplings(n, &h)?;
        let physical = is_psd(&c, PSD_TOL)?;
        Ok(Self { n, c, h, physical })
    }

    /// Pure dissipator, `h = 0`.
    pub fn dissipative(c: CMatrix) -> Result<Self> {
        let n = c.nrows();
        Self::new(n, c, RMatrix::zeros(n, n))
    }

    /// Builds `C = v v^dagger`.
    pub fn rank_one(v: &DVector<Complex64>) -> Result<Self> {
        Self::dissipative(v * v.adjoint())
    }

    /// True iff `C` is positive semi-definite (completely positive dynamics).
    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn with_couplings(self, h: RMatrix) -> Result<Self> {
        let h = sanitize_couplings(self.n, &h)?;
        Ok(Self { h, ..self })
    }

    pub fn without_couplings(&self) -> Self {
        Self { h: RMatrix::zeros(self.n, self.n), ..self.clone() }
    }

    pub fn has_couplings(&self) -> bool {
        self.h.iter().any(|&x| x != 0.0)
    }

    /// Relabels qubits so that qubit `i` of `self` becomes qubit `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(self.n, perm)?;
        let mut c = CMatrix::zeros(self.n, self.n);
        let mut h = RMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                c[(perm[i], perm[j])] = self.c[(i, j)];
                h[(perm[i], perm[j])] = self.h[(i, j)];
            }
        }
        Ok(Self { n: self.n, c, h, physical: self.physical })
    }
}

pub(crate) fn check_permutation(n: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: perm.len() });
    }
    let mut seen = alloc::vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(invalid(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Uniformly correlated classical dephasing: every `c_ij = 1/n`.
pub fn case_c1(n: usize) -> Result<DephasingModel> {
    if n == 0 {
        return Err(invalid("case_c1 needs n >= 1"));
    }
    DephasingModel::dissipative(CMatrix::from_element(n, n, c(1.0 / n as f64, 0.0)))
}

/// Purely imaginary off-diagonal correlations: `i` above the diagonal, `-i`
/// below, diagonal `n - 1`.
pub fn case_c2(n: usize) -> Result<DephasingModel> {
    if n < 2 {
        return Err(invalid("case_c2 needs n >= 2"));
    }
    let gamma = (n - 1) as f64;
    let m = CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        core::cmp::Ordering::Equal => c(gamma, 0.0),
        core::cmp::Ordering::Less => c(0.0, 1.0),
        core::cmp::Ordering::Greater => c(0.0, -1.0),
    });
    DephasingModel::dissipative(m)
}

/// Fourier mode `f_k` with entries `exp(2 pi i j k / n) / sqrt(n)`.
pub fn fourier_mode(n: usize, k: usize) -> DVector<Complex64> {
    let norm = 1.0 / (n as f64).sqrt();
    DVector::from_fn(n, |j, _| Complex64::from_polar(norm, 2.0 * PI * ((j * k) % n) as f64 / n as f64))
}

/// Rank-one environment `C = f_1 f_1^dagger`, i.e. `c_jk = omega^(j-k) / n`.
pub fn case_c3(n: usize) -> Result<DephasingModel> {
    if n == 0 {
        return Err(invalid("case_c3 needs n >= 1"));
    }
    DephasingModel::rank_one(&fourier_mode(n, 1))
}

/// Three-qubit family `C = g g^dagger`, `g = (1, e^{i theta}, e^{2 i theta}) / sqrt(3)`.
pub fn g_theta(theta: f64) -> DephasingModel {
    let s = 1.0 / 3f64.sqrt();
    let g = DVector::from_fn(3, |j, _| Complex64::from_polar(s, theta * j as f64));
    DephasingModel::rank_one(&g).expect("rank-one construction is Hermitian")
}

/// Two-qubit family with jump operator `Z_0 + r e^{i alpha} Z_1`.
pub fn two_qubit_family(r: f64, alpha: f64) -> DephasingModel {
    let l = DVector::from_vec(alloc::vec![c(1.0, 0.0), Complex64::from_polar(r, alpha)]);
    DephasingModel::rank_one(&l).expect("rank-one construction is Hermitian")
}

/// `C = w w^dagger` with `w` drawn from the complex Ginibre ensemble: real and
/// imaginary parts of every entry independent `N(0, 1)`, drawn row-major,
/// real part first.
pub fn sample_ginibre_with<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<DephasingModel> {
    if n == 0 {
        return Err(invalid("sample_ginibre needs n >= 1"));
    }
    let mut w = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = standard_normal(rng);
            let im = standard_normal(rng);
            w[(i, j)] = c(re, im);
        }
    }
    DephasingModel::dissipative(&w * w.adjoint())
}

pub fn sample_ginibre(n: usize, seed: u64) -> Result<DephasingModel> {
    sample_ginibre_with(n, &mut seeded(seed))
}

/// `tr(C^2) / tr(C)^2`; equals 1 for rank one and `1/n` for `C ∝ I`.
pub fn rank_proxy(model: &DephasingModel) -> Result<f64> {
    let tr = model.c.trace().re;
    if tr == 0.0 {
        return Err(Error::Undefined("rank proxy of a traceless C"));
    }
    // C is Hermitian so tr(C^2) is the squared Frobenius norm.
    Ok(model.c.norm_squared() / (tr * tr))
}

/// `||Im C||_F / ||C - diag(C)||_F`.
pub fn rel_imag_norm(model: &DephasingModel) -> Result<f64> {
    let mut off = model.c.clone();
    off.fill_diagonal(Complex64::new(0.0, 0.0));
    let denom = off.norm();
    if denom == 0.0 {
        return Err(Error::Undefined("relative imaginary norm of a diagonal C"));
    }
    let im = model.c.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    Ok(im / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigvals_hermitian;
    use approx::assert_relative_eq;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn scalar_model() {
        let m = DephasingModel::new(1, CMatrix::from_element(1, 1, c(0.3, 0.0)), RMatrix::zeros(1, 1)).unwrap();
        assert!(m.is_physical());
        let m = DephasingModel::new(1, CMatrix::from_element(1, 1, c(-0.3, 0.0)), RMatrix::zeros(1, 1)).unwrap();
        assert!(!m.is_physical());
    }

    #[test]
    fn hermitian_input_accepted_and_non_hermitian_rejected() {
        let ok = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 1.), c(0., -1.), c(1., 0.)]);
        let m = DephasingModel::dissipative(ok).unwrap();
        assert!(m.is_physical());
        let bad = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 1.), c(0., 1.), c(1., 0.)]);
        assert!(matches!(DephasingModel::dissipative(bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_bad_shapes_and_asymmetric_h() {
        let cm = CMatrix::identity(2, 2);
        assert!(matches!(
            DephasingModel::new(3, cm.clone(), RMatrix::zeros(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let h = RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(DephasingModel::new(2, cm.clone(), h), Err(Error::NotSymmetric { .. })));
        let h = RMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.0]);
        let m = DephasingModel::new(2, cm, h).unwrap();
        assert_eq!(m.h()[(0, 0)], 0.0);
        assert_eq!(m.h()[(0, 1)], 1.0);
    }

    #[test]
    fn small_rounding_is_symmetrized() {
        let cm = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0.5, 1e-14), c(0.5, 0.), c(1., 0.)]);
        let m = DephasingModel::dissipative(cm).unwrap();
        assert_eq!(m.c()[(0, 1)], m.c()[(1, 0)].conj());
    }

    #[test]
    fn c1_entries() {
        let m = case_c1(2).unwrap();
        assert!(m.c().iter().all(|z| *z == c(0.5, 0.0)));
        assert_eq!(case_c1(1).unwrap().c()[(0, 0)], c(1.0, 0.0));
        let e = eigvals_hermitian(case_c1(4).unwrap().c()).unwrap();
        assert_relative_eq!(e[3], 1.0, epsilon = 1e-12);
        assert!(e[2].abs() < 1e-12);
    }

    #[test]
    fn c2_structure() {
        let m = case_c2(2).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 1.), c(0., -1.), c(1., 0.)]);
        assert_eq!(m.c(), &want);
        let m3 = case_c2(3).unwrap();
        assert!(m3.is_physical());
        assert_relative_eq!(rel_imag_norm(&m3).unwrap(), 1.0);
        assert!(case_c2(1).is_err());
    }

    #[test]
    fn c3_matches_closed_form() {
        let m = case_c3(3).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let want = Complex64::from_polar(1.0 / 3.0, 2.0 * PI * (j as f64 - k as f64) / 3.0);
                assert!((m.c()[(j, k)] - want).norm() < 1e-15);
            }
        }
        let m2 = case_c3(2).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(-0.5, 0.), c(-0.5, 0.), c(0.5, 0.)]);
        assert!(close(m2.c(), &want, 1e-15));
    }

    #[test]
    fn g_theta_special_points() {
        assert!(close(g_theta(2.0 * PI / 3.0).c(), case_c3(3).unwrap().c(), 1e-15));
        assert!(close(g_theta(0.0).c(), case_c1(3).unwrap().c(), 1e-15));
        let m = g_theta(PI);
        for j in 0..3 {
            for k in 0..3 {
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((m.c()[(j, k)] - c(sign / 3.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_qubit_family_entries() {
        let m = two_qubit_family(1.0, PI / 2.0);
        let want = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., -1.), c(0., 1.), c(1., 0.)]);
        assert!(close(m.c(), &want, 1e-15));
        let m = two_qubit_family(0.0, 0.4);
        assert!(close(m.c(), &CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]), 0.0));
        let m = two_qubit_family(1.0, 0.0);
        assert!(close(m.c(), &CMatrix::from_element(2, 2, c(1.0, 0.0)), 0.0));
    }

    #[test]
    fn ginibre_is_deterministic_and_psd() {
        let a = sample_ginibre(4, 11).unwrap();
        let b = sample_ginibre(4, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.is_physical());
        assert_ne!(a, sample_ginibre(4, 12).unwrap());
    }

    #[test]
    fn rank_proxy_values() {
        assert_relative_eq!(rank_proxy(&case_c3(5).unwrap()).unwrap(), 1.0, epsilon = 1e-12);
        let id = DephasingModel::dissipative(CMatrix::identity(4, 4)).unwrap();
        assert_relative_eq!(rank_proxy(&id).unwrap(), 0.25);
        assert!(matches!(rel_imag_norm(&id), Err(Error::Undefined(_))));
        let zero = DephasingModel::dissipative(CMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(rank_proxy(&zero), Err(Error::Undefined(_))));
        assert_eq!(rel_imag_norm(&case_c1(3).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn permutation_relabels() {
        let m = case_c2(3).unwrap();
        let p = m.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.c()[(2, 0)], m.c()[(0, 1)]);
        assert!(m.permuted(&[0, 0, 1]).is_err());
    }
}
