//! Exact evolution under dephasing generators.
//!
//! In the `Z` product basis every coherence `|alpha><beta|` is an eigenvector
//! of the generator with eigenvalue `i Omega_ab - Gamma_ab`, so evolution is an
//! elementwise multiplication. Basis index `x` has qubit 0 as its most
//! significant bit; bit value 0 is `|0>`, i.e. `alpha_q = +1`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, hermitian_deviation, max_abs, CMatrix};
use crate::model::Coefficients;
use crate::pt::{Bipartition, TransformedModel};
use crate::spectral::{lindblad_decomposition, trace_norm, RANK_TOL};

/// Largest register for which dense `2^n x 2^n` states are built.
pub const STATE_QUBIT_CAP: usize = 10;
/// Tolerance on Hermiticity and unit trace of density matrices.
pub const STATE_TOL: f64 = 1e-12;

/// A `Z` eigenstate label `alpha in {+1, -1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisLabel(Vec<i8>);

impl BasisLabel {
    pub fn new(alpha: Vec<i8>) -> Result<Self> {
        if alpha.iter().any(|&a| a != 1 && a != -1) {
            return Err(invalid("basis label entries must be +1 or -1"));
        }
        Ok(Self(alpha))
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        Self((0..n).map(|q| if index >> (n - 1 - q) & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &a| (acc << 1) | usize::from(a == -1))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }
}

/// Basis-index bit for qubit `q` of `n`.
#[inline]
pub fn qubit_bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn check_labels<M: Coefficients + ?Sized>(alpha: &BasisLabel, beta: &BasisLabel, model: &M) -> Result<usize> {
    let n = model.n();
    for l in [alpha, beta] {
        if l.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: l.len() });
        }
    }
    Ok(n)
}

/// Decay rate `Gamma_ab = sum_km (a_k - b_k) Re(c_km)/2 (a_m - b_m)`.
pub fn gamma_rate<M: Coefficients + ?Sized>(alpha: &BasisLabel, beta: &BasisLabel, model: &M) -> Result<f64> {
    let n = check_labels(alpha, beta, model)?;
    let (a, b) = (alpha.as_slice(), beta.as_slice());
    let mut g = 0.0;
    for k in 0..n {
        for m in 0..n {
            g += f64::from(a[k] - b[k]) * model.c()[(k, m)].re / 2.0 * f64::from(a[m] - b[m]);
        }
    }
    Ok(g)
}

/// Frequency `Omega_ab = sum_{k<m} (a_k b_m - a_m b_k) Im(c_km) - sum_{k<m} (a_k a_m - b_k b_m) h_km`.
pub fn omega_freq<M: Coefficients + ?Sized>(alpha: &BasisLabel, beta: &BasisLabel, model: &M) -> Result<f64> {
    let n = check_labels(alpha, beta, model)?;
    let (a, b) = (alpha.as_slice(), beta.as_slice());
    let mut w = 0.0;
    for k in 0..n {
        for m in k + 1..n {
            let (ak, am, bk, bm) = (f64::from(a[k]), f64::from(a[m]), f64::from(b[k]), f64::from(b[m]));
            w += (ak * bm - am * bk) * model.c()[(k, m)].im;
            w -= (ak * am - bk * bm) * model.h()[(k, m)];
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// Validates shape `2^n`, Hermiticity and unit trace.
    pub fn new(n: usize, rho: CMatrix) -> Result<Self> {
        if n > STATE_QUBIT_CAP {
            return Err(Error::TooManyQubits { n, cap: STATE_QUBIT_CAP });
        }
        let d = 1usize << n;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows().max(rho.ncols()) });
        }
        let dev = hermitian_deviation(&rho);
        if dev > STATE_TOL * max_abs(&rho).max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = rho.trace();
        if (tr - c(1.0, 0.0)).norm() > STATE_TOL {
            return Err(invalid(alloc::format!("density matrix trace {tr} is not 1")));
        }
        Ok(Self { n, rho })
    }

    /// `|psi><psi|` for a normalized amplitude vector.
    pub fn from_pure(n: usize, psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(n, &v * v.adjoint())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    /// Single-qubit-product state `|s_0> (x) ... (x) |s_{n-1}>`.
    pub fn product(states: &[[Complex64; 2]]) -> Result<Self> {
        let n = states.len();
        if n > STATE_QUBIT_CAP {
            return Err(Error::TooManyQubits { n, cap: STATE_QUBIT_CAP });
        }
        let psi: Vec<Complex64> = (0..1usize << n)
            .map(|x| (0..n).fold(c(1.0, 0.0), |acc, q| acc * states[q][x >> (n - 1 - q) & 1]))
            .collect();
        Self::from_pure(n, &psi)
    }
}

fn check_state_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("states need n >= 1"));
    }
    if n > STATE_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: STATE_QUBIT_CAP });
    }
    Ok(())
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    if !(i < j && j < n) {
        return Err(invalid(alloc::format!("need i < j < n, got i = {i}, j = {j}, n = {n}")));
    }
    check_state_size(n)
}

/// Equal superposition `(|a> + |b>) / sqrt 2` of two basis indices.
fn cat(n: usize, a: usize, b: usize) -> Result<DensityMatrix> {
    let mut rho = CMatrix::zeros(1 << n, 1 << n);
    for (x, y) in [(a, a), (a, b), (b, a), (b, b)] {
        rho[(x, y)] = c(0.5, 0.0);
    }
    DensityMatrix::new(n, rho)
}

/// `|+>^n`.
pub fn product_plus_state(n: usize) -> Result<DensityMatrix> {
    check_state_size(n)?;
    let d = 1usize << n;
    DensityMatrix::new(n, CMatrix::from_element(d, d, c(1.0 / d as f64, 0.0)))
}

/// Basis indices `(alpha, beta)` of the coherence carried by [`bell_state`].
pub fn bell_coherence(i: usize, j: usize, n: usize) -> (usize, usize) {
    (0, qubit_bit(n, i) | qubit_bit(n, j))
}

/// Basis indices `(alpha, beta)` of the coherence carried by [`bar_state`].
pub fn bar_coherence(i: usize, j: usize, n: usize) -> (usize, usize) {
    let ones = (0..=i).fold(0, |acc, q| acc | qubit_bit(n, q));
    (ones, ones | qubit_bit(n, j))
}

/// Basis indices of the coherence carried by [`single_plus_state`].
pub fn single_coherence(i: usize, n: usize) -> (usize, usize) {
    (0, qubit_bit(n, i))
}

/// `(|0>_i |0>_j + |1>_i |1>_j) / sqrt 2`, other qubits in `|0>`.
pub fn bell_state(i: usize, j: usize, n: usize) -> Result<DensityMatrix> {
    check_pair(i, j, n)?;
    let (a, b) = bell_coherence(i, j, n);
    cat(n, a, b)
}

/// Qubits `0..=i` in `|1>`, qubit `j` in `|+>`, the rest in `|0>`.
pub fn bar_state(i: usize, j: usize, n: usize) -> Result<DensityMatrix> {
    check_pair(i, j, n)?;
    let (a, b) = bar_coherence(i, j, n);
    cat(n, a, b)
}

/// Qubit `i` in `|+>`, the rest in `|0>`.
pub fn single_plus_state(i: usize, n: usize) -> Result<DensityMatrix> {
    if i >= n {
        return Err(invalid(alloc::format!("qubit {i} out of range for n = {n}")));
    }
    check_state_size(n)?;
    let (a, b) = single_coherence(i, n);
    cat(n, a, b)
}

/// Per-label quantities that turn `Gamma` and `Omega` into O(n) dot products:
/// `Gamma_ab = (a.Ra + b.Rb)/2 - (Ra).b` and `Omega_ab = (T^T a).b - (a.ha - b.hb)/2`
/// with `R = Re C`, `T = Im C`.
struct RateTable {
    n: usize,
    labels: Vec<Vec<f64>>,
    ra: Vec<Vec<f64>>,
    ta: Vec<Vec<f64>>,
    quad_r: Vec<f64>,
    quad_h: Vec<f64>,
}

impl RateTable {
    fn new<M: Coefficients + ?Sized>(model: &M) -> Self {
        let n = model.n();
        let d = 1usize << n;
        let (cm, hm) = (model.c(), model.h());
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let mut t = Self {
            n,
            labels: Vec::with_capacity(d),
            ra: Vec::with_capacity(d),
            ta: Vec::with_capacity(d),
            quad_r: Vec::with_capacity(d),
            quad_h: Vec::with_capacity(d),
        };
        for x in 0..d {
            let a: Vec<f64> = BasisLabel::from_index(n, x).as_slice().iter().map(|&v| f64::from(v)).collect();
            let ra: Vec<f64> = (0..n).map(|k| (0..n).map(|m| cm[(k, m)].re * a[m]).sum()).collect();
            let ta: Vec<f64> = (0..n).map(|m| (0..n).map(|k| cm[(k, m)].im * a[k]).sum()).collect();
            let ha: Vec<f64> = (0..n).map(|k| (0..n).map(|m| hm[(k, m)] * a[m]).sum()).collect();
            t.quad_r.push(dot(&a, &ra));
            t.quad_h.push(dot(&a, &ha));
            t.labels.push(a);
            t.ra.push(ra);
            t.ta.push(ta);
        }
        t
    }

    /// `i Omega_ab - Gamma_ab`.
    fn exponent(&self, a: usize, b: usize) -> Complex64 {
        let lb = &self.labels[b];
        let (mut cross_r, mut cross_t) = (0.0, 0.0);
        for k in 0..self.n {
            cross_r += self.ra[a][k] * lb[k];
            cross_t += self.ta[a][k] * lb[k];
        }
        let gamma = 0.5 * (self.quad_r[a] + self.quad_r[b]) - cross_r;
        let omega = cross_t - 0.5 * (self.quad_h[a] - self.quad_h[b]);
        c(-gamma, omega)
    }
}

/// Multiplies each element of `rho` by `exp[(i Omega_ab - Gamma_ab) t]`.
/// Works on any `2^n x 2^n` operator, physical or not.
pub fn propagate<M: Coefficients + ?Sized>(rho: &CMatrix, model: &M, t: f64) -> Result<CMatrix> {
    let n = model.n();
    if n > STATE_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: STATE_QUBIT_CAP });
    }
    if !(t >= 0.0) {
        return Err(invalid("evolution time must be non-negative"));
    }
    let d = 1usize << n;
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let table = RateTable::new(model);
    let mut out = rho.clone();
    for b in 0..d {
        for a in 0..d {
            if a != b {
                out[(a, b)] *= (table.exponent(a, b) * t).exp();
            }
        }
    }
    Ok(out)
}

/// `rho(t)` under the generator `model` (a physical or transformed model).
pub fn evolve<M: Coefficients + ?Sized>(rho0: &DensityMatrix, model: &M, t: f64) -> Result<DensityMatrix> {
    if rho0.n != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: rho0.n });
    }
    Ok(DensityMatrix { n: rho0.n, rho: propagate(&rho0.rho, model, t)? })
}

/// Transposes the indices of the qubits in `part`.
pub fn partial_transpose_state(rho: &CMatrix, part: Bipartition) -> Result<CMatrix> {
    let n = part.n();
    if n > STATE_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: STATE_QUBIT_CAP });
    }
    let d = 1usize << n;
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
    }
    let mask = part.members().into_iter().fold(0, |acc, q| acc | qubit_bit(n, q));
    let mut out = CMatrix::zeros(d, d);
    for b in 0..d {
        for a in 0..d {
            let a2 = (a & !mask) | (b & mask);
            let b2 = (b & !mask) | (a & mask);
            out[(a2, b2)] = rho[(a, b)];
        }
    }
    Ok(out)
}

/// `E_N = log2 || rho^{T_A} ||_1`; rounding below zero is clamped.
pub fn log_negativity(rho: &DensityMatrix, part: Bipartition) -> Result<f64> {
    if part.n() != rho.n {
        return Err(Error::DimensionMismatch { expected: rho.n, found: part.n() });
    }
    let norm = trace_norm(&partial_transpose_state(&rho.rho, part)?)?;
    Ok(norm.log2().max(0.0))
}

/// `(t, E_N(t))` along `grid`.
pub fn negativity_trace<M: Coefficients + ?Sized>(
    model: &M,
    rho0: &DensityMatrix,
    part: Bipartition,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    grid.iter().map(|&t| Ok((t, log_negativity(&evolve(rho0, model, t)?, part)?))).collect()
}

/// `points` log-spaced times from `start` to `stop` inclusive.
pub fn geometric_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > start) || points < 2 {
        return Err(invalid("geometric grid needs 0 < start < stop and at least 2 points"));
    }
    let ratio = (stop / start).ln() / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|k| start * (ratio * k as f64).exp()).collect();
    g[points - 1] = stop;
    Ok(g)
}

/// Default negativity sampling: `t = 0` followed by 60 log-spaced points on `[1e-3, 10]`.
pub fn default_negativity_grid() -> Vec<f64> {
    let mut g = alloc::vec![0.0];
    g.extend(geometric_grid(1e-3, 10.0, 60).expect("valid constants"));
    g
}

/// Short-time positivity test for a generator with a negative rate.
///
/// With `psi = |+>^n` and `L_0` the jump operator of the most negative rate,
/// returns `<phi| rho(dt) |phi>` for `phi = L_0 psi`, where `rho(dt)` is the
/// exact evolution of `|psi><psi|` under `transformed`. To first order this is
/// `dt * gamma_0 < 0`.
pub fn positivity_probe(transformed: &TransformedModel, dt: f64) -> Result<f64> {
    let n = transformed.n();
    check_state_size(n)?;
    let terms = lindblad_decomposition(transformed.c(), RANK_TOL)?;
    let worst = terms.last().filter(|t| t.gamma < 0.0).ok_or(Error::NoNegativeRate)?;
    let d = 1usize << n;
    let amp = 1.0 / (d as f64).sqrt();
    // L_0 |alpha> = (sum_q l_q alpha_q) |alpha>, and <psi|L^dag L|psi> = |l|^2 = 1.
    let mut phi: Vec<Complex64> = (0..d)
        .map(|x| {
            let label = BasisLabel::from_index(n, x);
            let s: Complex64 = label.as_slice().iter().enumerate().map(|(q, &a)| worst.vector[q] * f64::from(a)).sum();
            s * amp
        })
        .collect();
    let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    phi.iter_mut().for_each(|z| *z /= norm);
    let rho = propagate(product_plus_state(n)?.matrix(), transformed, dt)?;
    let mut acc = c(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            acc += phi[a].conj() * rho[(a, b)] * phi[b];
        }
    }
    Ok(acc.re)
}

/// Coherences `(alpha, beta)`, `alpha < beta`, left untouched by the generator
/// (`|Gamma_ab|` and `|Omega_ab|` both below `tol`).
pub fn dark_coherences<M: Coefficients + ?Sized>(model: &M, tol: f64) -> Result<Vec<(usize, usize)>> {
    let n = model.n();
    if n > STATE_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: STATE_QUBIT_CAP });
    }
    let table = RateTable::new(model);
    let d = 1usize << n;
    let mut out = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let z = table.exponent(a, b);
            if z.re.abs() <= tol && z.im.abs() <= tol {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}
