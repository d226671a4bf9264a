//! Acceptance criteria, one test each. Every test writes a single
//! `[PASS]`/`[FAIL]` line with the measured quantities and runtime.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use qdeph::parallel;
use qdeph_core::dynamics::{
    bar_coherence, bell_coherence, default_negativity_grid, evolve, gamma_rate, geometric_grid, log_negativity,
    negativity_trace, omega_freq, positivity_probe, product_plus_state, BasisLabel, DensityMatrix,
};
use qdeph_core::ensembles::{FractionPoint, ScanConfig};
use qdeph_core::linalg::{CMatrix, RMatrix};
use qdeph_core::model::{case_c1, case_c2, case_c3, g_theta, sample_ginibre_with, two_qubit_family};
use qdeph_core::pt::{enumerate_bipartitions, pt_transform, witness, Bipartition};
use qdeph_core::rng::{seeded, standard_normal, uniform, SeededRng};
use qdeph_core::spectral::{eigvals_hermitian, lindblad_decomposition, pseudo_det, RANK_TOL};
use qdeph_core::tomography::{measurement_matrix, numerical_rank, predict_measurements, roundtrip, SOLVE_RANK_TOL};
use qdeph_core::verify::{feedforward_equiv, pauli_z, z_combination};
use qdeph_core::{Coefficients, Complex64, DephasingModel};

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration, limit_s: f64) {
    let secs = elapsed.as_secs_f64();
    let ok = pass && secs < limit_s;
    let tag = if ok { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] criterion {id:>2} {name}: {detail}; runtime {secs:.2} s (limit {limit_s} s)\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(secs < limit_s, "criterion {id} exceeded {limit_s} s ({secs:.2} s)");
}

fn spectral_norm(c: &CMatrix) -> f64 {
    eigvals_hermitian(c).unwrap().iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

fn random_couplings(n: usize, r: &mut SeededRng) -> RMatrix {
    let mut h = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            h[(i, j)] = 0.5 * standard_normal(r);
            h[(j, i)] = h[(i, j)];
        }
    }
    h
}

/// Ginibre `C / n` with Gaussian couplings.
fn random_model(n: usize, seed: u64) -> DephasingModel {
    let mut r = seeded(seed);
    let c = sample_ginibre_with(n, &mut r).unwrap().c().scale(1.0 / n as f64);
    let h = random_couplings(n, &mut r);
    DephasingModel::new(n, c, h).unwrap()
}

fn random_real_psd(n: usize, seed: u64) -> DephasingModel {
    let mut r = seeded(seed);
    let w = RMatrix::from_fn(n, n, |_, _| standard_normal(&mut r));
    DephasingModel::dissipative((&w * w.transpose()).scale(1.0 / n as f64).map(|x| cz(x, 0.0))).unwrap()
}

fn random_product_state(n: usize, r: &mut SeededRng) -> DensityMatrix {
    let qubits: Vec<[Complex64; 2]> = (0..n)
        .map(|_| {
            let theta = PI * uniform(r);
            let phi = 2.0 * PI * uniform(r);
            [cz((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)]
        })
        .collect();
    DensityMatrix::product(&qubits).unwrap()
}

fn random_state(n: usize, r: &mut SeededRng) -> DensityMatrix {
    let d = 1 << n;
    let g = CMatrix::from_fn(d, d, |_, _| cz(standard_normal(r), standard_normal(r)));
    let rho = &g * g.adjoint();
    let rho = &rho / rho.trace();
    DensityMatrix::new(n, (&rho + rho.adjoint()).scale(0.5)).unwrap()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[test]
fn criterion_01_pseudo_determinant_law() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 3..=8 {
        let t = pt_transform(&case_c3(n).unwrap(), Bipartition::first_qubit(n).unwrap()).unwrap();
        let got = pseudo_det(t.c_tilde(), RANK_TOL).unwrap();
        let want = (2.0 - n as f64) / (4.0 * (n * n) as f64);
        worst = worst.max(((got - want) / want).abs());
    }
    report(
        1,
        "pseudo-determinant law n=3..8",
        worst <= 1e-10,
        &format!("max rel err {worst:.2e} <= 1e-10"),
        start.elapsed(),
        1.0,
    );
}

#[test]
fn criterion_02_explicit_three_by_three() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [4usize, 6, 8] {
        let nf = n as f64;
        let s = (nf / 2.0 - 1.0).sqrt();
        let u = (nf * (nf - 2.0)).sqrt() / 2.0;
        let small = CMatrix::from_row_slice(
            3,
            3,
            &[
                cz(1.0, 0.0),
                cz(0.0, 0.0),
                cz(-s, 0.0),
                cz(0.0, 0.0),
                cz(nf / 2.0, 0.0),
                cz(0.0, u),
                cz(-s, 0.0),
                cz(0.0, -u),
                cz(nf / 2.0 - 1.0, 0.0),
            ],
        )
        .scale(1.0 / nf);
        let want = eigvals_hermitian(&small).unwrap();
        let t = pt_transform(&case_c3(n).unwrap(), Bipartition::first_qubit(n).unwrap()).unwrap();
        let got: Vec<f64> = eigvals_hermitian(t.c_tilde()).unwrap().into_iter().filter(|x| x.abs() > 1e-10).collect();
        assert_eq!(got.len(), 3, "n = {n}: nonzero eigenvalues {got:?}");
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    report(
        2,
        "3x3 reduced matrix n=4,6,8",
        worst <= 1e-10,
        &format!("max eigenvalue err {worst:.2e} <= 1e-10"),
        start.elapsed(),
        1.0,
    );
}

#[test]
fn criterion_03_classical_cases_stay_classical() {
    let start = Instant::now();
    let mut worst: f64 = f64::INFINITY;
    let mut checked = 0;
    for n in 2..=8 {
        let c1 = case_c1(n).unwrap();
        let scale = spectral_norm(c1.c());
        for part in enumerate_bipartitions(n).unwrap() {
            worst = worst.min(witness(&c1, part).unwrap() / scale);
            checked += 1;
        }
        let c2 = case_c2(n).unwrap();
        let scale = spectral_norm(c2.c());
        for k in 1..n {
            let prefix: Vec<usize> = (0..k).collect();
            worst = worst.min(witness(&c2, Bipartition::new(n, &prefix).unwrap()).unwrap() / scale);
            checked += 1;
        }
    }
    report(
        3,
        "C1 all bipartitions, C2 prefixes n=2..8",
        worst >= -1e-10,
        &format!("{checked} witnesses, min lambda/||C|| {worst:.2e} >= -1e-10"),
        start.elapsed(),
        10.0,
    );
}

#[test]
fn criterion_04_g_theta_landscape() {
    let start = Instant::now();
    let part = Bipartition::first_qubit(3).unwrap();
    // 49 interior points: k = 1..49 of 50 steps; k = 25 is theta = pi.
    let mut worst_interior = f64::NEG_INFINITY;
    for k in (1..50).filter(|&k| k != 25) {
        let theta = 2.0 * PI * k as f64 / 50.0;
        worst_interior = worst_interior.max(witness(&g_theta(theta), part).unwrap());
    }
    let at_pi = witness(&g_theta(PI), part).unwrap();
    let at_zero = witness(&g_theta(0.0), part).unwrap();
    let pass = worst_interior < -1e-6 && at_pi.abs() <= 1e-10 && at_zero.abs() <= 1e-10;
    report(
        4,
        "g(theta) entangling away from 0, pi",
        pass,
        &format!(
            "max interior witness {worst_interior:.3e} < -1e-6, |w(0)| {:.1e}, |w(pi)| {:.1e} <= 1e-10",
            at_zero.abs(),
            at_pi.abs()
        ),
        start.elapsed(),
        1.0,
    );
}

#[test]
fn criterion_05_transient_negativity() {
    let start = Instant::now();
    let grid = default_negativity_grid();
    let trace = negativity_trace(
        &case_c3(3).unwrap(),
        &product_plus_state(3).unwrap(),
        Bipartition::first_qubit(3).unwrap(),
        &grid,
    )
    .unwrap();
    let (t0, e0) = trace[0];
    let max = trace.iter().map(|p| p.1).fold(0.0, f64::max);
    let (t_end, e_end) = *trace.last().unwrap();
    let pass = t0 == 0.0 && e0 == 0.0 && max > 1e-3 && e_end < 1e-3 && t_end == 10.0;
    report(
        5,
        "transient negativity of C3(3)",
        pass,
        &format!("E_N(0) = {e0}, max {max:.4} > 1e-3, E_N({t_end}) = {e_end:.2e} < 1e-3"),
        start.elapsed(),
        5.0,
    );
}

#[test]
fn criterion_06_two_qubit_family_never_entangles() {
    let start = Instant::now();
    let part = Bipartition::first_qubit(2).unwrap();
    let grid = geometric_grid(1e-3, 10.0, 30).unwrap();
    let mut r = seeded(6);
    let states: Vec<DensityMatrix> = (0..20).map(|_| random_product_state(2, &mut r)).collect();
    let (mut min_witness, mut max_en, mut coeff_exact) = (f64::INFINITY, 0.0f64, true);
    for i in 1..=10 {
        let rr = 0.2 * i as f64;
        for j in 1..=8 {
            let alpha = PI * j as f64 / 9.0;
            let m = two_qubit_family(rr, alpha);
            min_witness = min_witness.min(witness(&m, part).unwrap());
            let t = pt_transform(&m, part).unwrap();
            coeff_exact &=
                t.h_tilde()[(0, 1)] == -rr * alpha.sin() && t.c_tilde()[(0, 1)] == cz(-rr * alpha.cos(), 0.0);
            for rho in &states {
                for &time in &grid {
                    max_en = max_en.max(log_negativity(&evolve(rho, &m, time).unwrap(), part).unwrap());
                }
            }
        }
    }
    let pass = min_witness >= -1e-12 && max_en <= 1e-9 && coeff_exact;
    report(
        6,
        "two-qubit family 10x8 grid",
        pass,
        &format!(
            "min witness {min_witness:.2e} >= -1e-12, max E_N {max_en:.2e} <= 1e-9, coefficients exact: {coeff_exact}"
        ),
        start.elapsed(),
        30.0,
    );
}

#[test]
fn criterion_07_positivity_probe() {
    let start = Instant::now();
    let dt = 1e-4;
    let mut worst: f64 = 0.0;
    let mut all_negative = true;
    for n in 3..=6 {
        let t = pt_transform(&case_c3(n).unwrap(), Bipartition::first_qubit(n).unwrap()).unwrap();
        let gamma0 = eigvals_hermitian(t.c_tilde()).unwrap()[0];
        let value = positivity_probe(&t, dt).unwrap();
        all_negative &= value < 0.0;
        worst = worst.max((value / dt - gamma0).abs() / gamma0.abs());
    }
    report(
        7,
        "positivity probe on transformed C3(n), n=3..6",
        all_negative && worst <= 0.01,
        &format!("all negative: {all_negative}, max rel err of value/dt vs gamma_0 {worst:.2e} <= 1e-2"),
        start.elapsed(),
        5.0,
    );
}

#[test]
fn criterion_08_classical_noise_equivalence() {
    let start = Instant::now();
    let pool = parallel::pool(None).unwrap();
    let models = [case_c1(3).unwrap(), random_real_psd(3, 81), random_real_psd(3, 82)];
    let rho0 = product_plus_state(3).unwrap();
    let devs: Vec<f64> =
        models.iter().map(|m| parallel::classical_mc(&pool, m, &rho0, 0.3, 100_000, 1).unwrap().max_dev).collect();
    let worst = devs.iter().copied().fold(0.0, f64::max);
    report(
        8,
        "classical Gaussian noise, 1e5 trajectories",
        worst <= 0.02,
        &format!("deviations {} <= 0.02", devs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(", ")),
        start.elapsed(),
        60.0,
    );
}

#[test]
fn criterion_09_feedforward_identity() {
    let start = Instant::now();
    let mut ops =
        vec![("Z0", pauli_z(0, 3)), ("Z0 - iZ1", z_combination(&[cz(1.0, 0.0), cz(0.0, -1.0), cz(0.0, 0.0)]))];
    let c3 = case_c3(3).unwrap();
    let jump = &lindblad_decomposition(c3.c(), RANK_TOL).unwrap()[0];
    ops.push(("C3(3) jump", z_combination(jump.vector.as_slice())));
    let mut r = seeded(9);
    for _ in 0..5 {
        let l: Vec<Complex64> = (0..3).map(|_| cz(standard_normal(&mut r), standard_normal(&mut r))).collect();
        ops.push(("random", z_combination(&l)));
    }
    let devs: Vec<f64> = ops.iter().map(|(_, l)| feedforward_equiv(l).unwrap()).collect();
    let worst = devs.iter().copied().fold(0.0, f64::max);
    report(
        9,
        "feedforward identity, 8 jump operators",
        worst <= 1e-12,
        &format!("max deviation {worst:.2e} <= 1e-12"),
        start.elapsed(),
        5.0,
    );
}

#[test]
fn criterion_10_tomography_roundtrip() {
    let start = Instant::now();
    let (mut worst, mut ranks_ok, mut count) = (0.0f64, true, 0);
    for n in 3..=5 {
        let a = measurement_matrix(n).unwrap();
        ranks_ok &= numerical_rank(&a, SOLVE_RANK_TOL) == n * (n - 1);
        for k in 0..10 {
            let m = random_model(n, 1000 * n as u64 + k);
            assert!(m.is_physical() && m.has_couplings());
            let rep = roundtrip(&m, 0.0, None, &mut seeded(k)).unwrap();
            worst = worst.max(rep.err_re).max(rep.err_im).max(rep.err_h);
            count += 1;
        }
    }
    report(
        10,
        "noiseless tomography n=3,4,5",
        worst <= 1e-6 && ranks_ok,
        &format!("{count} models, max Frobenius err {worst:.2e} <= 1e-6, rank n(n-1): {ranks_ok}"),
        start.elapsed(),
        30.0,
    );
}

#[test]
fn criterion_11_fig2_shape() {
    let start = Instant::now();
    let pool = parallel::pool(None).unwrap();
    let scan = parallel::fig2_scan(&pool, &ScanConfig::new(3, 100_000, 1)).unwrap();
    let bins = &scan.bins;
    let (first, last) = (&bins[0], &bins[bins.len() - 1]);
    let interior = bins[1..bins.len() - 1].iter().filter_map(|b| b.fraction()).fold(0.0, f64::max);
    let pass = first.entangling == 0 && last.entangling == 0 && interior > 0.1;
    report(
        11,
        "three-qubit fraction vs imaginary norm, 1e5 samples",
        pass,
        &format!(
            "bin [{:.2},{:.2}]: {}/{} entangling, bin [{:.2},{:.2}]: {}/{} entangling (both must be 0), interior max f {interior:.4} > 0.1",
            first.lo, first.hi, first.entangling, first.count, last.lo, last.hi, last.entangling, last.count
        ),
        start.elapsed(),
        120.0,
    );
}

#[test]
fn criterion_12_fraction_convergence() {
    let start = Instant::now();
    let pool = parallel::pool(None).unwrap();
    let points: Vec<FractionPoint> = parallel::fraction_vs_n(&pool, 4, 24, 10_000, 1).unwrap();
    let mut violations = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let slack = 2.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        if (1.0 - b.f) > (1.0 - a.f) + slack {
            violations.push(b.n);
        }
    }
    let (f4, f24) = (points[0].f, points[points.len() - 1].f);
    report(
        12,
        "fraction vs n, n=4..24, 1e4 samples",
        violations.is_empty() && f24 > f4,
        &format!("non-monotone steps beyond 2 sigma at n = {violations:?}, f(4) = {f4:.4}, f(24) = {f24:.4}"),
        start.elapsed(),
        300.0,
    );
}

#[test]
fn criterion_13_property_suites() {
    let start = Instant::now();
    const CASES: u64 = 200;
    let mut failures: Vec<(&str, u64)> = Vec::new();
    let mut check = |name: &'static str, case: u64, ok: bool| {
        if !ok {
            failures.push((name, case));
        }
    };
    for case in 0..CASES {
        let mut r = seeded(13_000 + case);
        let n = 2 + (case as usize % 5);
        let m = random_model(n, 50_000 + case);
        let parts = enumerate_bipartitions(n).unwrap();
        let part = parts[(uniform(&mut r) * parts.len() as f64) as usize];

        let twice = pt_transform(&pt_transform(&m, part).unwrap(), part).unwrap();
        let inv = max_abs(&(twice.c() - m.c())) <= 1e-14 && (twice.h() - m.h()).amax() <= 1e-14;
        check("pt involution", case, inv);

        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, (uniform(&mut r) * (i + 1) as f64) as usize);
        }
        let w = witness(&m, part).unwrap();
        let wp = witness(&m.permuted(&perm).unwrap(), part.permuted(&perm).unwrap()).unwrap();
        check("permutation covariance", case, (w - wp).abs() <= 1e-12);

        let real = random_real_psd(n, 70_000 + case);
        let (a, b) =
            (eigvals_hermitian(real.c()).unwrap(), eigvals_hermitian(pt_transform(&real, part).unwrap().c()).unwrap());
        let scale = a.last().unwrap().abs().max(1.0);
        check("real-C spectrum invariance", case, a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale));

        let small = random_model(1 + (case as usize % 4), 90_000 + case);
        let rho0 = random_state(small.n(), &mut r);
        let (t1, t2) = (3.0 * uniform(&mut r), 3.0 * uniform(&mut r));
        let two = evolve(&evolve(&rho0, &small, t1).unwrap(), &small, t2).unwrap();
        let one = evolve(&rho0, &small, t1 + t2).unwrap();
        check("semigroup", case, max_abs(&(two.matrix() - one.matrix())) <= 1e-12);

        let rho = one.matrix();
        let herm = max_abs(&(rho - rho.adjoint())) <= 1e-15;
        let tr = (rho.trace() - rho0.matrix().trace()).norm() <= 1e-14;
        check("Hermiticity and trace", case, herm && tr);

        let nt = 3 + (case as usize % 4);
        let mt = random_model(nt, 110_000 + case);
        let meas = predict_measurements(&mt).unwrap();
        let mut consistent = true;
        for (p, (i, j)) in qdeph_core::tomography::pairs(nt).into_iter().enumerate() {
            let (a, b) = bell_coherence(i, j, nt);
            let (la, lb) = (BasisLabel::from_index(nt, a), BasisLabel::from_index(nt, b));
            consistent &= (meas.omega_pair[p] - omega_freq(&la, &lb, &mt).unwrap()).abs() <= 1e-12;
            consistent &= (meas.gamma_pair[p] - gamma_rate(&la, &lb, &mt).unwrap()).abs() <= 1e-12;
            let (a, b) = bar_coherence(i, j, nt);
            let (la, lb) = (BasisLabel::from_index(nt, a), BasisLabel::from_index(nt, b));
            consistent &= (meas.omega_bar[p] - omega_freq(&la, &lb, &mt).unwrap()).abs() <= 1e-12;
        }
        check("rate/frequency cross-consistency", case, consistent);
    }
    report(
        13,
        "property suites, 6 x 200 cases",
        failures.is_empty(),
        &format!("failures {failures:?}"),
        start.elapsed(),
        60.0,
    );
}
