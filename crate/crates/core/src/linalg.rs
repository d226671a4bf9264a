//! Matrix aliases and small dense helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    Ok(m.nrows())
}

/// Checks Hermiticity to `rel_tol * max(1, max|m|)` and returns `(m + m^dagger) / 2`.
pub fn hermitian_part_checked(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    ensure_square(m)?;
    let dev = hermitian_deviation(m);
    if dev > rel_tol * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok((m + m.adjoint()).scale(0.5))
}

pub fn real_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.im)
}

pub fn complexify(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
