#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qdeph_core::dynamics::DensityMatrix;
use qdeph_core::linalg::{CMatrix, RMatrix};
use qdeph_core::model::{sample_ginibre_with, DephasingModel};
use qdeph_core::rng::{seeded, standard_normal, uniform, SeededRng};
use qdeph_core::Coefficients;

pub fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> SeededRng {
    seeded(seed)
}

pub fn gaussian_matrix(n: usize, r: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| cz(standard_normal(r), standard_normal(r)))
}

/// Symmetric, zero diagonal.
pub fn random_couplings(n: usize, scale: f64, r: &mut SeededRng) -> RMatrix {
    let mut h = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            h[(i, j)] = scale * standard_normal(r);
            h[(j, i)] = h[(i, j)];
        }
    }
    h
}

/// Ginibre `C` scaled by `1/n`, optionally with random couplings.
pub fn random_model(n: usize, seed: u64, with_h: bool) -> DephasingModel {
    let mut r = rng(seed);
    let m = sample_ginibre_with(n, &mut r).unwrap();
    let c = m.c().scale(1.0 / n as f64);
    let h = if with_h { random_couplings(n, 0.5, &mut r) } else { RMatrix::zeros(n, n) };
    DephasingModel::new(n, c, h).unwrap()
}

/// Real PSD `C`, no couplings.
pub fn random_real_model(n: usize, seed: u64) -> DephasingModel {
    let mut r = rng(seed);
    let w = RMatrix::from_fn(n, n, |_, _| standard_normal(&mut r));
    let c = (&w * w.transpose()).scale(1.0 / n as f64).map(|x| cz(x, 0.0));
    DephasingModel::dissipative(c).unwrap()
}

pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let g = gaussian_matrix(n, &mut rng(seed));
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    gaussian_matrix(n, &mut rng(seed)).qr().q()
}

pub fn random_state(n: usize, seed: u64) -> DensityMatrix {
    let g = gaussian_matrix(1 << n, &mut rng(seed));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let mut rho = rho / tr;
    // Exact Hermiticity.
    rho = (&rho + rho.adjoint()).scale(0.5);
    DensityMatrix::new(n, rho).unwrap()
}

pub fn random_product_state(n: usize, seed: u64) -> DensityMatrix {
    let mut r = rng(seed);
    let qubits: Vec<[Complex64; 2]> = (0..n)
        .map(|_| {
            let theta = std::f64::consts::PI * uniform(&mut r);
            let phi = std::f64::consts::TAU * uniform(&mut r);
            [cz((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)]
        })
        .collect();
    DensityMatrix::product(&qubits).unwrap()
}

/// `Z_q` on `n` qubits, qubit 0 the most significant tensor factor.
pub fn z_op(q: usize, n: usize) -> CMatrix {
    let z = CMatrix::from_row_slice(2, 2, &[cz(1., 0.), cz(0., 0.), cz(0., 0.), cz(-1., 0.)]);
    let id = CMatrix::identity(2, 2);
    (0..n).fold(CMatrix::identity(1, 1), |acc, k| acc.kronecker(if k == q { &z } else { &id }))
}

/// `L(rho) = -i[H, rho] + sum_ij c_ij (Z_i rho Z_j - {Z_i Z_j, rho}/2)` with
/// `H = (1/2) sum_ij h_ij Z_i Z_j`, built from explicit operator products.
pub fn dense_generator(c: &CMatrix, h: &RMatrix, rho: &CMatrix) -> CMatrix {
    let n = c.nrows();
    let zs: Vec<CMatrix> = (0..n).map(|q| z_op(q, n)).collect();
    let d = 1 << n;
    let mut ham = CMatrix::zeros(d, d);
    let mut out = CMatrix::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            let zz = &zs[i] * &zs[j];
            ham += zz.scale(0.5 * h[(i, j)]);
            let anti = &zz * rho + rho * &zz;
            out += (&zs[i] * rho * &zs[j] - anti.scale(0.5)) * c[(i, j)];
        }
    }
    out + (&ham * rho - rho * &ham) * cz(0.0, -1.0)
}

/// Partial transpose on qubits in `members`, written with explicit bit
/// manipulation per qubit.
pub fn pt_oracle(rho: &CMatrix, n: usize, members: &[usize]) -> CMatrix {
    let d = 1 << n;
    let mut out = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let (mut a2, mut b2) = (a, b);
            for &q in members {
                let bit = 1 << (n - 1 - q);
                let (x, y) = (a & bit, b & bit);
                a2 = (a2 & !bit) | y;
                b2 = (b2 & !bit) | x;
            }
            out[(a2, b2)] = rho[(a, b)];
        }
    }
    out
}

/// Ascending eigenvalues by cyclic Jacobi on the real symmetric embedding
/// `[[Re, -Im], [Im, Re]]`, which doubles every eigenvalue.
pub fn jacobi_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[(i, j)] = z.re;
            a[(i + n, j + n)] = z.re;
            a[(i, j + n)] = -z.im;
            a[(i + n, j)] = z.im;
        }
    }
    let size = 2 * n;
    for _sweep in 0..100 {
        let off: f64 = (0..size)
            .flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..size {
            for q in p + 1..size {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..size {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..size {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..size).map(|i| a[(i, i)]).collect();
    e.sort_by(|x, y| x.total_cmp(y));
    e.into_iter().step_by(2).collect()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn basis_op(d: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(a, b)] = cz(1.0, 0.0);
    m
}

pub fn z_vector(l: &DVector<Complex64>) -> CMatrix {
    let n = l.len();
    (0..n).fold(CMatrix::zeros(1 << n, 1 << n), |acc, q| acc + z_op(q, n) * l[q])
}
