//! Cross-checks of the dephasing dynamics against two independent pictures:
//! classical Gaussian phase noise, and weak measurement with feedforward.
//!
//! Superoperators use column stacking: `vec(A X B) = (B^T (x) A) vec(X)`.

use alloc::vec::Vec;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::dynamics::{evolve, BasisLabel, DensityMatrix, STATE_QUBIT_CAP};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, ensure_square, kron, max_abs, real_part, CMatrix, RMatrix, I};
use crate::model::{Coefficients, DephasingModel};
use crate::rng::{derive_seed, seeded, standard_normal};
use crate::spectral::{lindblad_decomposition, RANK_TOL};

/// Largest register accepted by [`feedforward_equiv`].
pub const FEEDFORWARD_QUBIT_CAP: usize = 3;
/// Contract bound on the feedforward deviation.
pub const FEEDFORWARD_TOL: f64 = 1e-12;
/// Trajectories per Monte Carlo block. Blocks are summed in index order.
pub const TRAJECTORY_BLOCK: usize = 1024;

/// Linear map on column-stacked `2^n x 2^n` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    n: usize,
    s: CMatrix,
}

impl Superoperator {
    pub fn zeros(n: usize) -> Self {
        let d = 1usize << (2 * n);
        Self { n, s: CMatrix::zeros(d, d) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.s
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = 1usize << self.n;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.nrows() });
        }
        Ok(unvectorize(&(&self.s * vectorize(rho)), d))
    }

    /// Spectral norm of `self - other`.
    pub fn distance(&self, other: &Superoperator) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(spectral_norm(&(&self.s - &other.s)))
    }
}

impl core::ops::Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Superoperator) -> Superoperator {
        Superoperator { n: self.n, s: self.s + rhs.s }
    }
}

pub fn vectorize(m: &CMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<Complex64>, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0, |acc: f64, &x| acc.max(x))
}

fn qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(invalid(alloc::format!("operator dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn left(a: &CMatrix) -> CMatrix {
    kron(&CMatrix::identity(a.nrows(), a.nrows()), a)
}

fn right(b: &CMatrix) -> CMatrix {
    kron(&b.transpose(), &CMatrix::identity(b.nrows(), b.nrows()))
}

/// `rho -> L rho L^dag - {L^dag L, rho}/2`.
pub fn dissipator_superop(l: &CMatrix) -> Result<Superoperator> {
    let n = qubits_of(ensure_square(l)?)?;
    let ld = l.adjoint();
    let ldl = &ld * l;
    let s = kron(&l.conjugate(), l) - (left(&ldl) + right(&ldl)).scale(0.5);
    Ok(Superoperator { n, s })
}

/// `rho -> -i[H, rho] + sum_k gamma_k D[L_k](rho)`.
pub fn liouvillian_superop(h: &CMatrix, jumps: &[(f64, CMatrix)]) -> Result<Superoperator> {
    let d = ensure_square(h)?;
    let n = qubits_of(d)?;
    let mut s = (left(h) - right(h)) * (-I);
    for (gamma, l) in jumps {
        if l.nrows() != d || l.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: l.nrows() });
        }
        s += dissipator_superop(l)?.s.scale(*gamma);
    }
    Ok(Superoperator { n, s })
}

/// Unconditional generator of measuring `x` with strength `k` and feeding the
/// record back through `y` with strength `alpha`:
/// `(k/4) D[x] + alpha D[y] - i (sqrt(k alpha)/2) [y, x rho + rho x]`.
pub fn feedforward_scheme(x: &CMatrix, y: &CMatrix, k: f64, alpha: f64) -> Result<Superoperator> {
    let d = ensure_square(x)?;
    if y.nrows() != d || y.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: y.nrows() });
    }
    if !(k >= 0.0 && alpha >= 0.0) {
        return Err(invalid("feedforward strengths must be non-negative"));
    }
    let mut s = dissipator_superop(x)?.s.scale(k / 4.0) + dissipator_superop(y)?.s.scale(alpha);
    // [y, x rho + rho x] = y x rho + y rho x - x rho y - rho x y
    let yx = y * x;
    let xy = x * y;
    let cross = left(&yx) + left(y) * right(x) - left(x) * right(y) - right(&xy);
    s -= cross * (I * ((k * alpha).sqrt() / 2.0));
    Ok(Superoperator { n: qubits_of(d)?, s })
}

/// Hermitian `(A, B)` with `L = A - iB`.
pub fn hermitian_split(l: &CMatrix) -> (CMatrix, CMatrix) {
    let ld = l.adjoint();
    let a = (l + &ld).scale(0.5);
    let b = (l - &ld) * c(0.0, 0.5);
    (a, b)
}

/// Spectral-norm distance between `D[L]` and the sum of the forward scheme
/// (measure `A`, feed `B`) and the reverse scheme (measure `B`, feed `-A`),
/// each run with `alpha = 1/2` and `k = 4 alpha`.
pub fn feedforward_equiv(l: &CMatrix) -> Result<f64> {
    let n = qubits_of(ensure_square(l)?)?;
    if n > FEEDFORWARD_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: FEEDFORWARD_QUBIT_CAP });
    }
    let (a, b) = hermitian_split(l);
    let alpha = 0.5;
    let k = 4.0 * alpha;
    let combined = feedforward_scheme(&a, &b, k, alpha)? + feedforward_scheme(&b, &(-&a), k, alpha)?;
    combined.distance(&dissipator_superop(l)?)
}

/// `Z` on qubit `q` of `n` as a `2^n` diagonal matrix.
pub fn pauli_z(q: usize, n: usize) -> CMatrix {
    let d = 1usize << n;
    CMatrix::from_diagonal(&DVector::from_fn(d, |x, _| c(if x >> (n - 1 - q) & 1 == 1 { -1.0 } else { 1.0 }, 0.0)))
}

/// `sum_q l_q Z_q`.
pub fn z_combination(l: &[Complex64]) -> CMatrix {
    let n = l.len();
    let d = 1usize << n;
    CMatrix::from_diagonal(&DVector::from_fn(d, |x, _| {
        BasisLabel::from_index(n, x).as_slice().iter().zip(l).map(|(&a, &w)| w * f64::from(a)).sum()
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCheck {
    pub gamma: f64,
    pub deviation: f64,
}

/// [`feedforward_equiv`] for each jump operator `sum_q l_q Z_q` in the
/// Lindblad decomposition of `C`.
pub fn feedforward_components<M: Coefficients + ?Sized>(model: &M) -> Result<Vec<ComponentCheck>> {
    let n = model.n();
    if n > FEEDFORWARD_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: FEEDFORWARD_QUBIT_CAP });
    }
    lindblad_decomposition(model.c(), RANK_TOL)?
        .into_iter()
        .map(|t| {
            Ok(ComponentCheck { gamma: t.gamma, deviation: feedforward_equiv(&z_combination(t.vector.as_slice()))? })
        })
        .collect()
}

/// Gaussian phase noise with covariance `C t`, sampled through the symmetric
/// square root `S = O sqrt(D) O^T` of `C t = O D O^T`.
#[derive(Debug, Clone)]
pub struct ClassicalNoise {
    n: usize,
    factor: RMatrix,
    labels: Vec<Vec<f64>>,
}

impl ClassicalNoise {
    /// Requires real PSD `C`, `h = 0`, `n <= 10` and `t >= 0`.
    pub fn new(model: &DephasingModel, t: f64) -> Result<Self> {
        let n = model.n();
        if n > STATE_QUBIT_CAP {
            return Err(Error::TooManyQubits { n, cap: STATE_QUBIT_CAP });
        }
        let imag = model.c().iter().fold(0.0, |acc: f64, z| acc.max(z.im.abs()));
        if imag > 1e-12 * max_abs(model.c()).max(1.0) {
            return Err(Error::Unsupported("classical noise cannot produce imaginary correlations"));
        }
        if !model.is_physical() {
            return Err(Error::Unsupported("noise covariance must be positive semi-definite"));
        }
        if model.has_couplings() {
            return Err(Error::Unsupported("classical noise model has no coherent couplings"));
        }
        if !(t >= 0.0) {
            return Err(invalid("evolution time must be non-negative"));
        }
        let eig = SymmetricEigen::new(real_part(model.c()) * t);
        let root = RMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
        let factor = &eig.eigenvectors * root * eig.eigenvectors.transpose();
        let labels = (0..1usize << n)
            .map(|x| BasisLabel::from_index(n, x).as_slice().iter().map(|&a| f64::from(a)).collect())
            .collect();
        Ok(Self { n, factor, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Accumulated phases `Phi` of trajectory `index`.
    pub fn phases(&self, seed: u64, index: u64) -> DVector<f64> {
        let mut rng = seeded(derive_seed(seed, index));
        let xi = DVector::from_fn(self.n, |_, _| standard_normal(&mut rng));
        &self.factor * xi
    }

    /// `e^{-i Phi.Z} rho e^{+i Phi.Z}` for one trajectory.
    fn kicked(&self, rho0: &CMatrix, phi: &DVector<f64>) -> CMatrix {
        let u: Vec<Complex64> = self
            .labels
            .iter()
            .map(|a| {
                let theta: f64 = a.iter().zip(phi.iter()).map(|(x, p)| x * p).sum();
                c(0.0, -theta).exp()
            })
            .collect();
        CMatrix::from_fn(rho0.nrows(), rho0.ncols(), |a, b| rho0[(a, b)] * u[a] * u[b].conj())
    }

    pub fn block_count(n_traj: usize) -> usize {
        n_traj.div_ceil(TRAJECTORY_BLOCK)
    }

    /// Sum over trajectories `block * TRAJECTORY_BLOCK ..` (clipped to `n_traj`).
    pub fn block_sum(&self, rho0: &DensityMatrix, seed: u64, block: usize, n_traj: usize) -> CMatrix {
        let start = block * TRAJECTORY_BLOCK;
        let stop = (start + TRAJECTORY_BLOCK).min(n_traj);
        let mut acc = CMatrix::zeros(rho0.matrix().nrows(), rho0.matrix().ncols());
        for index in start..stop {
            acc += self.kicked(rho0.matrix(), &self.phases(seed, index as u64));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub rho: CMatrix,
    pub max_dev: f64,
}

/// Averages block sums (given in block order) and compares with the exact
/// evolution.
pub fn finish_classical_mc(
    model: &DephasingModel,
    rho0: &DensityMatrix,
    t: f64,
    n_traj: usize,
    block_sums: impl IntoIterator<Item = CMatrix>,
) -> Result<MonteCarloResult> {
    let d = rho0.matrix().nrows();
    let total = block_sums.into_iter().fold(CMatrix::zeros(d, d), |acc, b| acc + b);
    let rho = total.unscale(n_traj as f64);
    let exact = evolve(rho0, model, t)?;
    let max_dev = max_abs(&(&rho - exact.matrix()));
    Ok(MonteCarloResult { rho, max_dev })
}

fn check_mc_args(model: &DephasingModel, rho0: &DensityMatrix, n_traj: usize) -> Result<()> {
    if rho0.n() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: rho0.n() });
    }
    if n_traj == 0 {
        return Err(invalid("need at least one trajectory"));
    }
    Ok(())
}

/// Monte Carlo average of `rho0` under random phase kicks with covariance
/// `C t`, and its largest entrywise deviation from the exact evolution.
pub fn classical_mc(
    model: &DephasingModel,
    rho0: &DensityMatrix,
    t: f64,
    n_traj: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    let noise = ClassicalNoise::new(model, t)?;
    check_mc_args(model, rho0, n_traj)?;
    let sums = (0..ClassicalNoise::block_count(n_traj)).map(|b| noise.block_sum(rho0, seed, b, n_traj));
    finish_classical_mc(model, rho0, t, n_traj, sums)
}

/// Argument validation shared with parallel drivers.
pub fn prepare_classical_mc(
    model: &DephasingModel,
    rho0: &DensityMatrix,
    t: f64,
    n_traj: usize,
) -> Result<ClassicalNoise> {
    let noise = ClassicalNoise::new(model, t)?;
    check_mc_args(model, rho0, n_traj)?;
    Ok(noise)
}
