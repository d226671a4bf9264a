//! `qdeph` command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input (arguments, files, models),
//! 2 when a numerical contract fails (a verification bound is exceeded or a
//! reconstruction is ill-posed).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdeph_core::dynamics::{
    bar_state, bell_state, default_negativity_grid, evolve, geometric_grid, negativity_trace, product_plus_state,
    DensityMatrix,
};
use qdeph_core::ensembles::{peak_fraction, FractionPoint, PartitionChoice, ScanConfig, DEFAULT_BIN_WIDTH};
use qdeph_core::model::{case_c1, case_c2, case_c3, g_theta, sample_ginibre, two_qubit_family};
use qdeph_core::pt::{is_entangling, witness, Bipartition};
use qdeph_core::rng::seeded;
use qdeph_core::tomography::{
    default_grid, pairs, predict_measurements, record_trace, roundtrip, MeasurementSet, StateFamily,
};
use qdeph_core::verify::{feedforward_components, FEEDFORWARD_TOL};
use qdeph_core::{Coefficients, DephasingModel, Error};
use serde::Serialize;

use crate::io::{self, Cell, DensityFile, IoError};
use crate::parallel;

const MODEL_SCHEMA: &str =
    "Output (JSON model): {\"n\": int, \"c_re\": [[float]], \"c_im\": [[float]], \"h\": [[float]]}";
const WITNESS_SCHEMA: &str = "Output (JSON): {\"partition\": [int], \"lambda_min\": float, \"entangling\": bool}
With --all (JSON): {\"best_lambda\": float, \"partition\": [int], \"entangling\": bool, \"records\": [{\"partition\", \"lambda_min\", \"entangling\"}]}
Output (CSV): partition,lambda_min,entangling  (partition as space-separated qubits)";
const EVOLVE_SCHEMA: &str = "Output (JSON): {\"n\": int, \"t\": float, \"re\": [[float]], \"im\": [[float]]}";
const NEGATIVITY_SCHEMA: &str = "Output (CSV): t,E_N";
const FIG2_SCHEMA: &str = "Output (CSV): rel_imag_norm,lambda_min
With --out, stdout (JSON): {\"samples\": int, \"seed\": int, \"peak_fraction\": float, \"bins\": [{\"lo\", \"hi\", \"count\", \"entangling\", \"fraction\"}]}";
const FIG3_SCHEMA: &str = "Output (CSV): rank_proxy,lambda_min
With --out, stdout (JSON): {\"n\": int, \"samples\": int, \"seed\": int, \"fraction\": float, \"stderr\": float}";
const FVSN_SCHEMA: &str = "Output (CSV): n,f,stderr";
const PREDICT_SCHEMA: &str = "Output (JSON): {\"n\": int, \"pairs\": [[int, int]], \"gamma_single\": [float], \"gamma_pair\": [float], \"omega_pair\": [float], \"gamma_bar\": [float], \"omega_bar\": [float]}";
const ROUNDTRIP_SCHEMA: &str = "Output (JSON): {\"n\": int, \"sigma\": float, \"seed\": int, \"err_re\": float, \"err_im\": float, \"err_h\": float, \"c_re\": [[float]], \"c_im\": [[float]], \"h\": [[float]], \"measured\": {measurement set}}";
const TRACE_SCHEMA: &str = "Output (CSV): t,re,im";
const CLASSICAL_SCHEMA: &str =
    "Output (JSON): {\"deviation\": float, \"pass\": bool, \"t\": float, \"trajectories\": int, \"tol\": float}
Exit code 2 when deviation exceeds --tol.";
const FEEDFORWARD_SCHEMA: &str =
    "Output (JSON): {\"deviation\": float, \"pass\": bool, \"components\": [{\"gamma\": float, \"deviation\": float}]}
Exit code 2 when any deviation exceeds 1e-12.";

#[derive(Debug, Parser)]
#[command(name = "qdeph", version, about = "Entanglement generation by correlated Markovian dephasing")]
struct Cli {
    /// Worker threads for sampling commands (default: all cores).
    #[arg(long, global = true, env = "QDEPH_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one of the built-in models.
    #[command(after_help = MODEL_SCHEMA)]
    Case(CaseArgs),
    /// Smallest eigenvalue of the partially transposed rate matrix.
    #[command(after_help = WITNESS_SCHEMA)]
    Witness(WitnessArgs),
    /// Evolve a state exactly.
    #[command(after_help = EVOLVE_SCHEMA)]
    Evolve(EvolveArgs),
    /// Logarithmic negativity along a time grid.
    #[command(after_help = NEGATIVITY_SCHEMA)]
    Negativity(NegativityArgs),
    /// Random-environment scans.
    #[command(subcommand)]
    Ensemble(EnsembleCommand),
    /// Simulated noise tomography.
    #[command(subcommand)]
    Tomo(TomoCommand),
    /// Equivalence checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseKind {
    C1,
    C2,
    C3,
    GTheta,
    TwoQubit,
    Ginibre,
}

#[derive(Debug, Args)]
struct CaseArgs {
    kind: CaseKind,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Phase for g-theta.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// Amplitude for two-qubit.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Phase for two-qubit.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    #[arg(long)]
    model: PathBuf,
    /// Qubits of subsystem A (default: 0).
    #[arg(long, value_delimiter = ',', conflicts_with = "all")]
    partition: Option<Vec<usize>>,
    /// Search every bipartition.
    #[arg(long)]
    all: bool,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
enum StateSpec {
    Plus,
    Bell(usize, usize),
    Bar(usize, usize),
}

fn parse_state(s: &str) -> Result<StateSpec, String> {
    let pair = |rest: &str| -> Result<(usize, usize), String> {
        let (a, b) = rest.split_once(',').ok_or_else(|| format!("expected i,j in '{s}'"))?;
        let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}"));
        Ok((p(a)?, p(b)?))
    };
    match s.split_once(':') {
        None if s == "plus" => Ok(StateSpec::Plus),
        Some(("bell", rest)) => pair(rest).map(|(i, j)| StateSpec::Bell(i, j)),
        Some(("bar", rest)) => pair(rest).map(|(i, j)| StateSpec::Bar(i, j)),
        _ => Err(format!("unknown state '{s}' (expected plus, bell:i,j or bar:i,j)")),
    }
}

impl StateSpec {
    fn build(&self, n: usize) -> qdeph_core::Result<DensityMatrix> {
        match *self {
            StateSpec::Plus => product_plus_state(n),
            StateSpec::Bell(i, j) => bell_state(i, j, n),
            StateSpec::Bar(i, j) => bar_state(i, j, n),
        }
    }
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "plus", value_parser = parse_state)]
    state: StateSpec,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NegativityArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    partition: Vec<usize>,
    #[arg(long, default_value = "plus", value_parser = parse_state)]
    state: StateSpec,
    #[arg(long, default_value_t = 1e-3)]
    tmin: f64,
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Log-spaced points after t = 0.
    #[arg(long, default_value_t = 60)]
    points: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum EnsembleCommand {
    /// Three-qubit witness against the relative imaginary norm.
    #[command(after_help = FIG2_SCHEMA)]
    Fig2(Fig2Args),
    /// Witness against the rank proxy.
    #[command(after_help = FIG3_SCHEMA)]
    Fig3(Fig3Args),
    /// Entangling fraction against qubit count.
    #[command(after_help = FVSN_SCHEMA)]
    Fvsn(FvsnArgs),
}

#[derive(Debug, Args)]
struct Fig2Args {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    bin_width: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Fig3Args {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Minimise over every bipartition instead of A = {0}.
    #[arg(long)]
    all_partitions: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FvsnArgs {
    #[arg(long, default_value_t = 4)]
    nmin: usize,
    #[arg(long, default_value_t = 32)]
    nmax: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum TomoCommand {
    /// Noiseless rates and frequencies.
    #[command(after_help = PREDICT_SCHEMA)]
    Predict(ModelOnly),
    /// Simulate, fit and recover the model.
    #[command(after_help = ROUNDTRIP_SCHEMA)]
    Roundtrip(RoundtripArgs),
    /// One simulated coherence trace.
    #[command(after_help = TRACE_SCHEMA)]
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
struct ModelOnly {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Single,
    Bell,
    Bar,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = Family::Bell)]
    family: Family,
    #[arg(long, default_value_t = 0)]
    i: usize,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Uniform grid end (default: from the predicted rates).
    #[arg(long, requires = "points")]
    tmax: Option<f64>,
    #[arg(long, requires = "tmax")]
    points: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Gaussian phase-noise Monte Carlo against exact evolution.
    #[command(after_help = CLASSICAL_SCHEMA)]
    Classical(ClassicalArgs),
    /// Measurement-and-feedforward identity for each jump operator.
    #[command(after_help = FEEDFORWARD_SCHEMA)]
    Feedforward(ModelOnly),
}

#[derive(Debug, Args)]
struct ClassicalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    t: f64,
    #[arg(long, default_value_t = 100_000)]
    traj: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "plus", value_parser = parse_state)]
    state: StateSpec,
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
    #[error("contract failed: {0}")]
    Contract(String),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Io(IoError::Model(e))
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Contract(_) => 2,
            CliError::Io(IoError::Model(Error::RankDeficient { .. } | Error::DegenerateTrace)) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

struct Ctx<'a> {
    threads: Option<usize>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        Ok(parallel::pool(self.threads)?)
    }

    /// Writes `text` to `path`, or to stdout without one.
    fn emit(&mut self, path: Option<&Path>, text: &str) -> CliResult<()> {
        match path {
            Some(p) => io::write_text(p, text)?,
            None => self.out.write_all(text.as_bytes()).map_err(IoError::from)?,
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, path: Option<&Path>, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(IoError::from)?;
        text.push('\n');
        self.emit(path, &text)
    }

    fn emit_csv(&mut self, path: Option<&Path>, header: &[&str], rows: Vec<Vec<Cell>>) -> CliResult<()> {
        match path {
            Some(p) => {
                let f = File::create(p).map_err(|source| IoError::File { path: p.display().to_string(), source })?;
                io::write_csv(BufWriter::new(f), header, rows)?;
            }
            None => io::write_csv(&mut *self.out, header, rows)?,
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let mut ctx = Ctx { threads: cli.threads.map(usize::from), out };
    match dispatch(cli.command, &mut ctx) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx) -> CliResult<()> {
    match cmd {
        Command::Case(a) => cmd_case(a, ctx),
        Command::Witness(a) => cmd_witness(a, ctx),
        Command::Evolve(a) => cmd_evolve(a, ctx),
        Command::Negativity(a) => cmd_negativity(a, ctx),
        Command::Ensemble(EnsembleCommand::Fig2(a)) => cmd_fig2(a, ctx),
        Command::Ensemble(EnsembleCommand::Fig3(a)) => cmd_fig3(a, ctx),
        Command::Ensemble(EnsembleCommand::Fvsn(a)) => cmd_fvsn(a, ctx),
        Command::Tomo(TomoCommand::Predict(a)) => cmd_predict(a, ctx),
        Command::Tomo(TomoCommand::Roundtrip(a)) => cmd_roundtrip(a, ctx),
        Command::Tomo(TomoCommand::Trace(a)) => cmd_trace(a, ctx),
        Command::Verify(VerifyCommand::Classical(a)) => cmd_classical(a, ctx),
        Command::Verify(VerifyCommand::Feedforward(a)) => cmd_feedforward(a, ctx),
    }
}

fn cmd_case(a: CaseArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = match a.kind {
        CaseKind::C1 => case_c1(a.n)?,
        CaseKind::C2 => case_c2(a.n)?,
        CaseKind::C3 => case_c3(a.n)?,
        CaseKind::GTheta => g_theta(a.theta),
        CaseKind::TwoQubit => two_qubit_family(a.r, a.alpha),
        CaseKind::Ginibre => sample_ginibre(a.n, a.seed)?,
    };
    let mut text = io::model_to_json(&model);
    text.push('\n');
    ctx.emit(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct WitnessRecord {
    partition: Vec<usize>,
    lambda_min: f64,
    entangling: bool,
}

#[derive(Serialize)]
struct WitnessSummary {
    best_lambda: f64,
    partition: Vec<usize>,
    entangling: bool,
    records: Vec<WitnessRecord>,
}

fn partition_label(p: &[usize]) -> String {
    p.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_witness(a: WitnessArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    let record = |part: Bipartition, lambda: f64| WitnessRecord {
        partition: part.members(),
        lambda_min: lambda,
        entangling: is_entangling(lambda, &model),
    };
    let records: Vec<WitnessRecord> = if a.all {
        parallel::witness_each(&ctx.pool()?, &model)?.into_iter().map(|(p, l)| record(p, l)).collect()
    } else {
        let members = a.partition.unwrap_or_else(|| vec![0]);
        let part = Bipartition::new(model.n(), &members)?;
        vec![record(part, witness(&model, part)?)]
    };
    if a.csv {
        let rows = records
            .iter()
            .map(|r| {
                vec![Cell::Text(partition_label(&r.partition)), Cell::Float(r.lambda_min), Cell::Bool(r.entangling)]
            })
            .collect();
        return ctx.emit_csv(a.out.as_deref(), &["partition", "lambda_min", "entangling"], rows);
    }
    if a.all {
        // Earliest partition wins ties.
        let best = records.iter().fold(&records[0], |b, r| if r.lambda_min < b.lambda_min { r } else { b });
        let summary = WitnessSummary {
            best_lambda: best.lambda_min,
            partition: best.partition.clone(),
            entangling: best.entangling,
            records: Vec::new(),
        };
        let summary = WitnessSummary { records, ..summary };
        ctx.emit_json(a.out.as_deref(), &summary)
    } else {
        ctx.emit_json(a.out.as_deref(), &records[0])
    }
}

#[derive(Serialize)]
struct EvolveOutput {
    n: usize,
    t: f64,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn cmd_evolve(a: EvolveArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    let rho = evolve(&a.state.build(model.n())?, &model, a.t)?;
    let f = DensityFile::from_matrix(model.n(), rho.matrix());
    ctx.emit_json(a.out.as_deref(), &EvolveOutput { n: f.n, t: a.t, re: f.re, im: f.im })
}

fn cmd_negativity(a: NegativityArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    let part = Bipartition::new(model.n(), &a.partition)?;
    let grid = if (a.tmin, a.tmax, a.points) == (1e-3, 10.0, 60) {
        default_negativity_grid()
    } else {
        let mut g = vec![0.0];
        g.extend(geometric_grid(a.tmin, a.tmax, a.points)?);
        g
    };
    let trace = negativity_trace(&model, &a.state.build(model.n())?, part, &grid)?;
    let rows = trace.into_iter().map(|(t, e)| vec![Cell::Float(t), Cell::Float(e)]).collect();
    ctx.emit_csv(a.csv.as_deref(), &["t", "E_N"], rows)
}

#[derive(Serialize)]
struct BinOut {
    lo: f64,
    hi: f64,
    count: usize,
    entangling: usize,
    fraction: Option<f64>,
}

#[derive(Serialize)]
struct Fig2Summary {
    samples: usize,
    seed: u64,
    peak_fraction: f64,
    bins: Vec<BinOut>,
}

fn cmd_fig2(a: Fig2Args, ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ScanConfig { bin_width: a.bin_width, ..ScanConfig::new(3, a.samples, a.seed) };
    let scan = parallel::fig2_scan(&ctx.pool()?, &cfg)?;
    let rows = scan.records.iter().map(|r| vec![Cell::Float(r.metric), Cell::Float(r.lambda_min)]).collect();
    ctx.emit_csv(a.out.as_deref(), &["rel_imag_norm", "lambda_min"], rows)?;
    if a.out.is_some() {
        let summary = Fig2Summary {
            samples: a.samples,
            seed: a.seed,
            peak_fraction: peak_fraction(&scan.bins)?,
            bins: scan
                .bins
                .iter()
                .map(|b| BinOut {
                    lo: b.lo,
                    hi: b.hi,
                    count: b.count,
                    entangling: b.entangling,
                    fraction: b.fraction(),
                })
                .collect(),
        };
        ctx.emit_json(None, &summary)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Fig3Summary {
    n: usize,
    samples: usize,
    seed: u64,
    fraction: f64,
    stderr: f64,
}

fn cmd_fig3(a: Fig3Args, ctx: &mut Ctx) -> CliResult<()> {
    let partition = if a.all_partitions { PartitionChoice::All } else { PartitionChoice::FirstQubit };
    let cfg = ScanConfig { partition, ..ScanConfig::new(a.n, a.samples, a.seed) };
    let records = parallel::fig3_scan(&ctx.pool()?, &cfg)?;
    let rows = records.iter().map(|r| vec![Cell::Float(r.metric), Cell::Float(r.lambda_min)]).collect();
    ctx.emit_csv(a.out.as_deref(), &["rank_proxy", "lambda_min"], rows)?;
    if a.out.is_some() {
        let p = FractionPoint::from_records(a.n, &records);
        ctx.emit_json(
            None,
            &Fig3Summary { n: a.n, samples: a.samples, seed: a.seed, fraction: p.f, stderr: p.stderr },
        )?;
    }
    Ok(())
}

fn cmd_fvsn(a: FvsnArgs, ctx: &mut Ctx) -> CliResult<()> {
    let points = parallel::fraction_vs_n(&ctx.pool()?, a.nmin, a.nmax, a.samples, a.seed)?;
    let rows = points.iter().map(|p| vec![Cell::Int(p.n as u64), Cell::Float(p.f), Cell::Float(p.stderr)]).collect();
    ctx.emit_csv(a.out.as_deref(), &["n", "f", "stderr"], rows)
}

#[derive(Serialize)]
struct MeasurementOut {
    n: usize,
    pairs: Vec<(usize, usize)>,
    gamma_single: Vec<f64>,
    gamma_pair: Vec<f64>,
    omega_pair: Vec<f64>,
    gamma_bar: Vec<f64>,
    omega_bar: Vec<f64>,
}

impl From<MeasurementSet> for MeasurementOut {
    fn from(m: MeasurementSet) -> Self {
        Self {
            n: m.n,
            pairs: pairs(m.n),
            gamma_single: m.gamma_single,
            gamma_pair: m.gamma_pair,
            omega_pair: m.omega_pair,
            gamma_bar: m.gamma_bar,
            omega_bar: m.omega_bar,
        }
    }
}

fn cmd_predict(a: ModelOnly, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    ctx.emit_json(None, &MeasurementOut::from(predict_measurements(&model)?))
}

#[derive(Serialize)]
struct RoundtripOut {
    n: usize,
    sigma: f64,
    seed: u64,
    err_re: f64,
    err_im: f64,
    err_h: f64,
    c_re: Vec<Vec<f64>>,
    c_im: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
    measured: MeasurementOut,
}

fn cmd_roundtrip(a: RoundtripArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    let report = roundtrip(&model, a.sigma, None, &mut seeded(a.seed))?;
    let recovered = DephasingModel::new(model.n(), report.c_hat.clone(), report.h_hat.clone())
        .map(|m| io::ModelFile::from_model(&m))
        .unwrap_or_else(|_| io::ModelFile { n: model.n(), c_re: Vec::new(), c_im: Vec::new(), h: None });
    let out = RoundtripOut {
        n: model.n(),
        sigma: a.sigma,
        seed: a.seed,
        err_re: report.err_re,
        err_im: report.err_im,
        err_h: report.err_h,
        c_re: recovered.c_re,
        c_im: recovered.c_im,
        h: recovered.h.unwrap_or_default(),
        measured: report.measured.into(),
    };
    ctx.emit_json(a.json.as_deref(), &out)
}

fn cmd_trace(a: TraceArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    let grid = match (a.tmax, a.points) {
        (Some(tmax), Some(points)) => {
            if points < 2 || !(tmax > 0.0) {
                return Err(CliError::Usage("need tmax > 0 and at least 2 points".into()));
            }
            (0..points).map(|k| tmax * k as f64 / (points - 1) as f64).collect()
        }
        _ => default_grid(&predict_measurements(&model)?),
    };
    let family = match a.family {
        Family::Single => StateFamily::Single,
        Family::Bell => StateFamily::Bell,
        Family::Bar => StateFamily::Bar,
    };
    let trace = record_trace(&model, family, a.i, a.j, &grid, a.sigma, &mut seeded(a.seed))?;
    let rows = trace
        .times
        .iter()
        .zip(&trace.samples)
        .map(|(&t, z)| vec![Cell::Float(t), Cell::Float(z.re), Cell::Float(z.im)])
        .collect();
    ctx.emit_csv(a.csv.as_deref(), &["t", "re", "im"], rows)
}

#[derive(Serialize)]
struct ClassicalOut {
    deviation: f64,
    pass: bool,
    t: f64,
    trajectories: usize,
    tol: f64,
}

fn cmd_classical(a: ClassicalArgs, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    let rho0 = a.state.build(model.n())?;
    let r = parallel::classical_mc(&ctx.pool()?, &model, &rho0, a.t, a.traj, a.seed)?;
    let pass = r.max_dev <= a.tol;
    ctx.emit_json(None, &ClassicalOut { deviation: r.max_dev, pass, t: a.t, trajectories: a.traj, tol: a.tol })?;
    if !pass {
        return Err(CliError::Contract(format!("Monte Carlo deviation {:e} exceeds {:e}", r.max_dev, a.tol)));
    }
    Ok(())
}

#[derive(Serialize)]
struct ComponentOut {
    gamma: f64,
    deviation: f64,
}

#[derive(Serialize)]
struct FeedforwardOut {
    deviation: f64,
    pass: bool,
    components: Vec<ComponentOut>,
}

fn cmd_feedforward(a: ModelOnly, ctx: &mut Ctx) -> CliResult<()> {
    let model = io::read_model(&a.model)?;
    let checks = feedforward_components(&model)?;
    let deviation = checks.iter().fold(0.0, |acc: f64, c| acc.max(c.deviation));
    let pass = deviation <= FEEDFORWARD_TOL;
    let components = checks.into_iter().map(|c| ComponentOut { gamma: c.gamma, deviation: c.deviation }).collect();
    ctx.emit_json(None, &FeedforwardOut { deviation, pass, components })?;
    if !pass {
        return Err(CliError::Contract(format!("feedforward deviation {deviation:e} exceeds {FEEDFORWARD_TOL:e}")));
    }
    Ok(())
}
