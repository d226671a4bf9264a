//! Partial transposition lifted to the generator coefficients, and the
//! minimum-eigenvalue entanglement witness built on it.
//!
//! For a bipartition with subsystem `A`, the partially transposed state evolves
//! under a generator of the same form with coefficients `(C~, h~)`:
//!
//! * both qubits in `A`: `h~ = -h`, `c~_ij = c_ji`;
//! * neither in `A`: unchanged;
//! * exactly one in `A` (`k` in `A`, `l` not): `h~_kl = Im c_kl`,
//!   `c~_kl = -Re c_kl + i h_kl`.
//!
//! `C~` stays Hermitian but need not be PSD; a negative eigenvalue means the
//! original dissipation can entangle `A` with its complement.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, max_abs, CMatrix, RMatrix};
use crate::model::{Coefficients, DephasingModel};
use crate::spectral::lambda_min;

/// Default cap on `n` for the exhaustive bipartition search.
pub const WITNESS_QUBIT_CAP: usize = 16;
/// Relative threshold separating genuine negativity from solver noise.
pub const NEG_TOL: f64 = 1e-12;

/// Subsystem `A` of an `n`-qubit register, `0 < |A| < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n: usize,
    mask: u64,
}

impl Bipartition {
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        if n > 64 {
            return Err(Error::TooManyQubits { n, cap: 64 });
        }
        let mut mask = 0u64;
        for &q in members {
            if q >= n {
                return Err(invalid(alloc::format!("qubit {q} out of range for n = {n}")));
            }
            mask |= 1 << q;
        }
        Self::from_mask(n, mask)
    }

    /// Bit `q` of `mask` selects qubit `q`.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n > 64 {
            return Err(Error::TooManyQubits { n, cap: 64 });
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if mask & !full != 0 {
            return Err(invalid("bipartition mask has bits beyond n"));
        }
        if mask == 0 || mask == full {
            return Err(invalid("subsystem must be a non-empty proper subset"));
        }
        Ok(Self { n, mask })
    }

    /// `A = {0}`.
    pub fn first_qubit(n: usize) -> Result<Self> {
        Self::new(n, &[0])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, q: usize) -> bool {
        q < self.n && self.mask >> q & 1 == 1
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.contains(q)).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn complement(&self) -> Self {
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        Self { n: self.n, mask: full & !self.mask }
    }

    /// Image under the relabeling `q -> perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::model::check_permutation(self.n, perm)?;
        let members: Vec<usize> = self.members().into_iter().map(|q| perm[q]).collect();
        Self::new(self.n, &members)
    }
}

/// Coefficients `(C~, h~)` governing the partially transposed state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedModel {
    c_tilde: CMatrix,
    h_tilde: RMatrix,
    partition: Bipartition,
}

impl TransformedModel {
    pub fn partition(&self) -> Bipartition {
        self.partition
    }
    pub fn c_tilde(&self) -> &CMatrix {
        &self.c_tilde
    }
    pub fn h_tilde(&self) -> &RMatrix {
        &self.h_tilde
    }
}

impl Coefficients for TransformedModel {
    fn n(&self) -> usize {
        self.partition.n
    }
    fn c(&self) -> &CMatrix {
        &self.c_tilde
    }
    fn h(&self) -> &RMatrix {
        &self.h_tilde
    }
}

/// Applies the coefficient rules for partial transposition on `part`.
pub fn pt_transform<M: Coefficients + ?Sized>(model: &M, part: Bipartition) -> Result<TransformedModel> {
    let n = model.n();
    if part.n != n {
        return Err(Error::DimensionMismatch { expected: n, found: part.n });
    }
    let (cm, hm) = (model.c(), model.h());
    let mut ct = cm.clone();
    let mut ht = hm.clone();
    for i in 0..n {
        for j in i + 1..n {
            let (new_h, new_c) = match (part.contains(i), part.contains(j)) {
                (true, true) => (-hm[(i, j)], cm[(j, i)]),
                (false, false) => (hm[(i, j)], cm[(i, j)]),
                (true, false) => (cm[(i, j)].im, c(-cm[(i, j)].re, hm[(i, j)])),
                // j is the member of A: apply the rule to (j, i) and conjugate back.
                (false, true) => (cm[(j, i)].im, c(-cm[(j, i)].re, hm[(j, i)]).conj()),
            };
            ct[(i, j)] = new_c;
            ct[(j, i)] = new_c.conj();
            ht[(i, j)] = new_h;
            ht[(j, i)] = new_h;
        }
    }
    Ok(TransformedModel { c_tilde: ct, h_tilde: ht, partition: part })
}

/// One representative per `{A, complement}` pair: every subset containing
/// qubit 0 except the full register, in ascending bitmask order.
pub fn enumerate_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if n < 2 {
        return Err(invalid("bipartitions need n >= 2"));
    }
    if n > 63 {
        return Err(Error::TooManyQubits { n, cap: 63 });
    }
    let full = (1u64 << n) - 1;
    Ok((1..full).step_by(2).map(|mask| Bipartition { n, mask }).collect())
}

/// Negativity threshold for a coefficient matrix: `NEG_TOL * max(1, max|c_ij|)`.
pub fn neg_tolerance(c: &CMatrix) -> f64 {
    NEG_TOL * max_abs(c).max(1.0)
}

/// Whether a witness value certifies entangling dissipation for `model`.
pub fn is_entangling(lambda: f64, model: &DephasingModel) -> bool {
    lambda < -neg_tolerance(model.c())
}

/// Smallest eigenvalue of `C~` for `part`, with the Lamb shift ignored.
pub fn witness(model: &DephasingModel, part: Bipartition) -> Result<f64> {
    let dissipative = model.without_couplings();
    lambda_min(pt_transform(&dissipative, part)?.c_tilde())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessOutcome {
    pub lambda_min: f64,
    pub partition: Bipartition,
}

/// Minimum witness over all bipartitions for `n <= cap`. Ties go to the
/// earliest partition in enumeration order.
pub fn witness_all_capped(model: &DephasingModel, cap: usize) -> Result<WitnessOutcome> {
    let n = model.n();
    if n > cap {
        return Err(Error::TooManyQubits { n, cap });
    }
    let mut best: Option<WitnessOutcome> = None;
    for part in enumerate_bipartitions(n)? {
        let lambda = witness(model, part)?;
        if best.is_none_or(|b| lambda < b.lambda_min) {
            best = Some(WitnessOutcome { lambda_min: lambda, partition: part });
        }
    }
    Ok(best.expect("n >= 2 has at least one bipartition"))
}

pub fn witness_all(model: &DephasingModel) -> Result<WitnessOutcome> {
    witness_all_capped(model, WITNESS_QUBIT_CAP)
}
