//! Noise tomography from two-qubit coherences.
//!
//! Preparing `(|0..0> + |..1_i..1_j..>)/sqrt 2` and tracking its coherence
//! gives `Gamma_ij` and `Omega_ij`. The companion state with qubits `0..=i` in
//! `|1>` and qubit `j` in `|+>` gives `Omega~_ij`. Single-qubit `|+>` states
//! give `Gamma_i`. Rates fix `Re C`, and the two frequency families
//! form a linear system for the strict upper triangles of `h` and `Im C`.
//!
//! Pairs `(k, m)`, `k < m`, are ordered lexicographically everywhere.

use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use rand_core::RngCore;

use crate::dynamics::{
    bar_coherence, bar_state, bell_coherence, bell_state, propagate, single_coherence, single_plus_state, DensityMatrix,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, frobenius, imag_part, real_part, CMatrix, RMatrix};
use crate::model::{Coefficients, DephasingModel};
use crate::rng::standard_normal;

/// Largest register accepted by [`roundtrip`].
pub const TOMOGRAPHY_QUBIT_CAP: usize = 6;
/// Samples below this fraction of the largest `|s|` are left out of fits.
pub const FIT_FLOOR: f64 = 1e-6;
/// Relative singular-value threshold for the frequency system.
pub const SOLVE_RANK_TOL: f64 = 1e-10;
/// Points in [`default_grid`] unless aliasing forces more.
pub const DEFAULT_GRID_POINTS: usize = 40;

/// `(k, m)` with `k < m < n` in lexicographic order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|k| (k + 1..n).map(move |m| (k, m))).collect()
}

/// Position of `(k, m)` in [`pairs`].
pub fn pair_index(k: usize, m: usize, n: usize) -> usize {
    k * n - k * (k + 1) / 2 + (m - k - 1)
}

fn strict_upper(m: &RMatrix) -> DVector<f64> {
    let n = m.nrows();
    DVector::from_iterator(n * n.saturating_sub(1) / 2, pairs(n).into_iter().map(|(k, l)| m[(k, l)]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVectors {
    pub pair: (usize, usize),
    pub q: DVector<f64>,
    pub w: DVector<f64>,
    pub q_bar: DVector<f64>,
    pub w_bar: DVector<f64>,
}

/// Coefficients of `Omega_ij = -h.q + t.w` and `Omega~_ij = -h.q~ + t.w~`,
/// where `h` and `t` are the strict upper triangles of `h` and `Im C`.
pub fn measurement_vectors(i: usize, j: usize, n: usize) -> Result<MeasurementVectors> {
    if !(i < j && j < n) {
        return Err(invalid(alloc::format!("need i < j < n, got i = {i}, j = {j}, n = {n}")));
    }
    let p = n * (n - 1) / 2;
    let mut v = MeasurementVectors {
        pair: (i, j),
        q: DVector::zeros(p),
        w: DVector::zeros(p),
        q_bar: DVector::zeros(p),
        w_bar: DVector::zeros(p),
    };
    let in_pair = |x: usize| x == i || x == j;
    for (idx, (k, m)) in pairs(n).into_iter().enumerate() {
        let (q, w) = match (in_pair(k), in_pair(m)) {
            (true, false) => (2.0, 2.0),
            (false, true) => (2.0, -2.0),
            _ => (0.0, 0.0),
        };
        v.q[idx] = q;
        v.w[idx] = w;
        let (qb, wb) = if m == j && k <= i {
            (-2.0, 2.0)
        } else if m == j && k > i {
            (2.0, -2.0)
        } else if k == j {
            (2.0, 2.0)
        } else {
            (0.0, 0.0)
        };
        v.q_bar[idx] = qb;
        v.w_bar[idx] = wb;
    }
    Ok(v)
}

/// Rates and frequencies read off the prepared coherences. Pair-indexed
/// fields follow [`pairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub n: usize,
    pub gamma_single: Vec<f64>,
    pub gamma_pair: Vec<f64>,
    pub omega_pair: Vec<f64>,
    /// Recorded for completeness; recovery does not use it.
    pub gamma_bar: Vec<f64>,
    pub omega_bar: Vec<f64>,
}

impl MeasurementSet {
    fn check(&self) -> Result<usize> {
        let n = self.n;
        let p = n * n.saturating_sub(1) / 2;
        if self.gamma_single.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.gamma_single.len() });
        }
        for v in [&self.gamma_pair, &self.omega_pair, &self.gamma_bar, &self.omega_bar] {
            if v.len() != p {
                return Err(Error::DimensionMismatch { expected: p, found: v.len() });
            }
        }
        Ok(p)
    }
}

/// Noiseless measurement outcomes for `model`.
pub fn predict_measurements<M: Coefficients + ?Sized>(model: &M) -> Result<MeasurementSet> {
    let n = model.n();
    let (cm, hm) = (model.c(), model.h());
    let hv = strict_upper(hm);
    let tv = strict_upper(&imag_part(cm));
    let mut set = MeasurementSet {
        n,
        gamma_single: (0..n).map(|i| 2.0 * cm[(i, i)].re).collect(),
        gamma_pair: Vec::new(),
        omega_pair: Vec::new(),
        gamma_bar: Vec::new(),
        omega_bar: Vec::new(),
    };
    for (i, j) in pairs(n) {
        let v = measurement_vectors(i, j, n)?;
        set.gamma_pair.push(2.0 * (cm[(i, i)].re + cm[(j, j)].re + 2.0 * cm[(i, j)].re));
        set.omega_pair.push(-hv.dot(&v.q) + tv.dot(&v.w));
        set.gamma_bar.push(2.0 * cm[(j, j)].re);
        set.omega_bar.push(-hv.dot(&v.q_bar) + tv.dot(&v.w_bar));
    }
    Ok(set)
}

/// Rows `[-q^T | w^T]` for every pair, then `[-q~^T | w~^T]` for every pair.
pub fn measurement_matrix(n: usize) -> Result<RMatrix> {
    let p = n * n.saturating_sub(1) / 2;
    let mut a = RMatrix::zeros(2 * p, 2 * p);
    for (r, (i, j)) in pairs(n).into_iter().enumerate() {
        let v = measurement_vectors(i, j, n)?;
        for col in 0..p {
            a[(r, col)] = -v.q[col];
            a[(r, p + col)] = v.w[col];
            a[(p + r, col)] = -v.q_bar[col];
            a[(p + r, p + col)] = v.w_bar[col];
        }
    }
    Ok(a)
}

/// Numerical rank of `a` relative to its largest singular value.
pub fn numerical_rank(a: &RMatrix, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let top = sv.iter().fold(0.0, |acc: f64, &x| acc.max(x));
    sv.iter().filter(|&&x| x > rel_tol * top).count()
}

/// `(C, h)` reconstructed from a measurement set.
pub fn recover(meas: &MeasurementSet) -> Result<(CMatrix, RMatrix)> {
    let p = meas.check()?;
    let n = meas.n;
    let mut ch = CMatrix::zeros(n, n);
    let mut hh = RMatrix::zeros(n, n);
    for i in 0..n {
        ch[(i, i)] = c(meas.gamma_single[i] / 2.0, 0.0);
    }
    if p == 0 {
        return Ok((ch, hh));
    }
    let a = measurement_matrix(n)?;
    let rank = numerical_rank(&a, SOLVE_RANK_TOL);
    if rank < 2 * p {
        return Err(Error::RankDeficient { rank, unknowns: 2 * p });
    }
    let rhs = DVector::from_iterator(2 * p, meas.omega_pair.iter().chain(&meas.omega_bar).copied());
    let x = a.svd(true, true).solve(&rhs, 0.0).map_err(|_| Error::Undefined("frequency system solve"))?;
    for (idx, (k, m)) in pairs(n).into_iter().enumerate() {
        let re = (meas.gamma_pair[idx] / 2.0 - ch[(k, k)].re - ch[(m, m)].re) / 2.0;
        ch[(k, m)] = c(re, x[p + idx]);
        ch[(m, k)] = c(re, -x[p + idx]);
        hh[(k, m)] = x[idx];
        hh[(m, k)] = x[idx];
    }
    Ok((ch, hh))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFamily {
    Single,
    Bell,
    Bar,
    Synthetic,
}

/// `s(t) = rho_ab(t) / (2 rho_ab(0))`, possibly with additive noise.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTrace {
    pub times: Vec<f64>,
    pub samples: Vec<Complex64>,
    pub family: StateFamily,
    pub i: usize,
    pub j: Option<usize>,
    pub sigma: f64,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("time grid must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Checks that `grid` is increasing and samples `omega` without aliasing.
pub fn validate_grid(grid: &[f64], omega: f64) -> Result<()> {
    check_grid(grid)?;
    if grid.len() < 4 {
        return Err(invalid("need at least 4 time points"));
    }
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if omega.abs() * step >= core::f64::consts::PI {
        return Err(invalid(alloc::format!("time step {step} aliases frequency {omega}")));
    }
    Ok(())
}

fn noisy<R: RngCore + ?Sized>(z: Complex64, sigma: f64, rng: &mut R) -> Complex64 {
    if sigma == 0.0 {
        return z;
    }
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    z + c(sigma * re, sigma * im)
}

/// `s(t_k) = exp[(i Omega - Gamma) t_k] / 2` plus Gaussian noise of width
/// `sigma` on each quadrature.
pub fn synthesize_trace<R: RngCore + ?Sized>(
    omega: f64,
    gamma: f64,
    grid: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<CoherenceTrace> {
    check_grid(grid)?;
    if !(gamma >= 0.0) || !(sigma >= 0.0) {
        return Err(invalid("need gamma >= 0 and sigma >= 0"));
    }
    let samples = grid.iter().map(|&t| noisy((c(-gamma, omega) * t).exp() * 0.5, sigma, rng)).collect();
    Ok(CoherenceTrace { times: grid.to_vec(), samples, family: StateFamily::Synthetic, i: 0, j: None, sigma })
}

/// `(Omega^, Gamma^)` from least-squares lines through the origin for the
/// unwrapped phase and for `ln|2 s|`.
pub fn fit_trace(trace: &CoherenceTrace) -> Result<(f64, f64)> {
    if trace.times.len() != trace.samples.len() {
        return Err(Error::DimensionMismatch { expected: trace.times.len(), found: trace.samples.len() });
    }
    if trace.samples.len() < 4 {
        return Err(invalid("need at least 4 samples"));
    }
    let top = trace.samples.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()));
    let kept: Vec<(f64, Complex64)> = trace
        .times
        .iter()
        .zip(&trace.samples)
        .filter(|(_, z)| z.norm() >= FIT_FLOOR * top && z.norm() > 0.0)
        .map(|(&t, &z)| (t, z))
        .collect();
    let stt: f64 = kept.iter().map(|(t, _)| t * t).sum();
    if kept.is_empty() || stt == 0.0 {
        return Err(Error::DegenerateTrace);
    }
    let (mut phase, mut prev) = (0.0, 0.0);
    let (mut s_log, mut s_phase) = (0.0, 0.0);
    for (k, (t, z)) in kept.iter().enumerate() {
        let raw = z.arg();
        if k == 0 {
            phase = raw;
        } else {
            let mut d = raw - prev;
            d -= (d / core::f64::consts::TAU).round() * core::f64::consts::TAU;
            phase += d;
        }
        prev = raw;
        s_log += t * (2.0 * z.norm()).ln();
        s_phase += t * phase;
    }
    Ok((s_phase / stt, -s_log / stt))
}

/// `DEFAULT_GRID_POINTS` uniform times on `[0, 2 / max Gamma]`, refined so
/// that no frequency in `meas` aliases.
pub fn default_grid(meas: &MeasurementSet) -> Vec<f64> {
    let rates = meas.gamma_single.iter().chain(&meas.gamma_pair).chain(&meas.gamma_bar);
    let top_rate = rates.fold(0.0, |acc: f64, &g| acc.max(g));
    let t_end = if top_rate > 0.0 { 2.0 / top_rate } else { 1.0 };
    let top_freq = meas.omega_pair.iter().chain(&meas.omega_bar).fold(0.0, |acc: f64, w| acc.max(w.abs()));
    // Keep |Omega| dt at or below pi / 2.
    let needed = (top_freq * t_end / core::f64::consts::FRAC_PI_2).ceil() as usize + 1;
    let points = DEFAULT_GRID_POINTS.max(needed);
    (0..points).map(|k| t_end * k as f64 / (points - 1) as f64).collect()
}

fn trace_from_state<M: Coefficients + ?Sized, R: RngCore + ?Sized>(
    model: &M,
    state: &DensityMatrix,
    (a, b): (usize, usize),
    grid: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let initial = state.matrix()[(a, b)];
    grid.iter()
        .map(|&t| {
            let rho = propagate(state.matrix(), model, t)?;
            Ok(noisy(rho[(a, b)] / initial * 0.5, sigma, rng))
        })
        .collect()
}

/// Records the coherence of one prepared state. `j` is ignored for
/// [`StateFamily::Single`] and required for the pair families.
pub fn record_trace<M: Coefficients + ?Sized, R: RngCore + ?Sized>(
    model: &M,
    family: StateFamily,
    i: usize,
    j: Option<usize>,
    grid: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<CoherenceTrace> {
    let n = model.n();
    if n > TOMOGRAPHY_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: TOMOGRAPHY_QUBIT_CAP });
    }
    check_grid(grid)?;
    if !(sigma >= 0.0) {
        return Err(invalid("sigma must be non-negative"));
    }
    let pair = || j.ok_or_else(|| invalid("pair families need a second qubit"));
    let (state, coh, j) = match family {
        StateFamily::Single => (single_plus_state(i, n)?, single_coherence(i, n), None),
        StateFamily::Bell => {
            let j = pair()?;
            (bell_state(i, j, n)?, bell_coherence(i, j, n), Some(j))
        }
        StateFamily::Bar => {
            let j = pair()?;
            (bar_state(i, j, n)?, bar_coherence(i, j, n), Some(j))
        }
        StateFamily::Synthetic => return Err(invalid("synthetic traces have no prepared state")),
    };
    let samples = trace_from_state(model, &state, coh, grid, sigma, rng)?;
    Ok(CoherenceTrace { times: grid.to_vec(), samples, family, i, j, sigma })
}

/// Every trace the protocol records: singles, then Bell pairs, then bar pairs.
pub fn simulate_traces<R: RngCore + ?Sized>(
    model: &DephasingModel,
    grid: &[f64],
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<CoherenceTrace>> {
    let n = model.n();
    let mut out = Vec::new();
    for i in 0..n {
        out.push(record_trace(model, StateFamily::Single, i, None, grid, sigma, rng)?);
    }
    for family in [StateFamily::Bell, StateFamily::Bar] {
        for (i, j) in pairs(n) {
            out.push(record_trace(model, family, i, Some(j), grid, sigma, rng)?);
        }
    }
    Ok(out)
}

/// Fits every trace from [`simulate_traces`] into a measurement set.
pub fn measurements_from_traces(n: usize, traces: &[CoherenceTrace]) -> Result<MeasurementSet> {
    let p = n * n.saturating_sub(1) / 2;
    if traces.len() != n + 2 * p {
        return Err(Error::DimensionMismatch { expected: n + 2 * p, found: traces.len() });
    }
    let fits: Vec<(f64, f64)> = traces.iter().map(fit_trace).collect::<Result<_>>()?;
    let (single, rest) = fits.split_at(n);
    let (bell, bar) = rest.split_at(p);
    Ok(MeasurementSet {
        n,
        gamma_single: single.iter().map(|f| f.1).collect(),
        gamma_pair: bell.iter().map(|f| f.1).collect(),
        omega_pair: bell.iter().map(|f| f.0).collect(),
        gamma_bar: bar.iter().map(|f| f.1).collect(),
        omega_bar: bar.iter().map(|f| f.0).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub err_re: f64,
    pub err_im: f64,
    pub err_h: f64,
    pub c_hat: CMatrix,
    pub h_hat: RMatrix,
    pub measured: MeasurementSet,
}

/// Simulates the protocol on `model`, fits, recovers, and reports Frobenius
/// errors in `Re C`, `Im C` and `h`. `grid` defaults to [`default_grid`].
pub fn roundtrip<R: RngCore + ?Sized>(
    model: &DephasingModel,
    sigma: f64,
    grid: Option<&[f64]>,
    rng: &mut R,
) -> Result<RoundtripReport> {
    if !model.is_physical() {
        return Err(Error::Unsupported("tomography needs a physical model"));
    }
    let n = model.n();
    if n > TOMOGRAPHY_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: TOMOGRAPHY_QUBIT_CAP });
    }
    let truth = predict_measurements(model)?;
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = default_grid(&truth);
            &owned
        }
    };
    let top_freq = truth.omega_pair.iter().chain(&truth.omega_bar).fold(0.0, |acc: f64, w| acc.max(w.abs()));
    validate_grid(grid, top_freq)?;
    let traces = simulate_traces(model, grid, sigma, rng)?;
    let measured = measurements_from_traces(n, &traces)?;
    let (c_hat, h_hat) = recover(&measured)?;
    Ok(RoundtripReport {
        err_re: (real_part(&c_hat) - real_part(model.c())).norm(),
        err_im: (imag_part(&c_hat) - imag_part(model.c())).norm(),
        err_h: (&h_hat - model.h()).norm(),
        c_hat,
        h_hat,
        measured,
    })
}

/// Frobenius distance between two coefficient matrices.
pub fn coefficient_error(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a - b))
}
