//! Command-line front end: figure data as CSV plus plain-text summaries.
//!
//! CSV goes to `--out` when given (summary on stdout), otherwise CSV goes to
//! stdout and the summary to stderr.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bell::{self, ChshResult, Mode, TSIRELSON_BOUND};
use crate::circuit::{CircuitParams, Qubit};
use crate::dynamics::compare_flip_transition;
use crate::dynamics::sequence::{builtin, verify_sequence, BuiltinOptions, PulseSequence, Target, BUILTINS};
use crate::entangle::{concurrence_trace, find_plateaus, first_maximal_plateau, ConcurrenceMethod, BELL_THRESHOLD};
use crate::error::{Error, Result};
pub use config::{ModeChoice, RunConfig, TeChoice};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VALIDATION: i32 = 2;
}

#[derive(Debug, Parser)]
#[command(
    name = "josephson-bell",
    version,
    about = "Two fixed-coupled charge qubits: decoupling gates, entanglement plateaus, CHSH"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write CSV output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled measurements (overrides bell.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Shots per correlation (overrides bell.shots).
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decoupled vs exact flip probability.
    Fig2(Fig2Args),
    /// Concurrence traces and plateau table.
    Fig3(Fig3Args),
    /// CHSH test on a plateau state.
    Chsh(ChshArgs),
    /// Run and verify a pulse sequence.
    Pulses(PulsesArgs),
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    /// Coupling ratios zeta (repeatable).
    #[arg(long)]
    pub zeta: Vec<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Fig3Args {
    /// Coupling ratios E_m / eps_J (repeatable).
    #[arg(long)]
    pub em_ratio: Vec<f64>,
    /// Time horizon in ps.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ChshArgs {
    /// Plateau time in ps, or "auto" for the first maximal plateau.
    #[arg(long)]
    pub te: Option<TeChoice>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Sampled,
    Both,
}

#[derive(Debug, Args)]
pub struct PulsesArgs {
    /// Pulse-sequence file.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub sequence: Option<PathBuf>,
    /// Built-in sequence name.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(BUILTINS))]
    pub builtin: Option<String>,
    /// Target for --sequence: identity, cz, rx or rz.
    #[arg(long, default_value = "identity")]
    pub target: String,
    /// Target qubit for rx / rz.
    #[arg(long, default_value_t = 1)]
    pub qubit: usize,
    /// Rotation angle (rad) for rx / rz targets and the single-qubit builtins.
    #[arg(long)]
    pub angle: Option<f64>,
    /// Delay of the decoupling builtins (ps).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Coupling ratio for rx-physical.
    #[arg(long)]
    pub zeta: Option<f64>,
}

/// Output of a command before it is written out.
#[derive(Debug, Default)]
pub struct Report {
    pub csv: Vec<u8>,
    pub summary: String,
    /// Set when a numerical check failed.
    pub validation_failure: Option<String>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
        }
    };
    match run(&cli).and_then(|r| emit(&cli, r)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::USAGE
        }
    }
}

fn emit(cli: &Cli, report: Report) -> Result<i32> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &report.csv)?;
            print!("{}", report.summary);
        }
        None => {
            std::io::stdout().write_all(&report.csv)?;
            eprint!("{}", report.summary);
        }
    }
    Ok(match report.validation_failure {
        Some(msg) => {
            eprintln!("validation failed: {msg}");
            exit::VALIDATION
        }
        None => exit::SUCCESS,
    })
}

pub fn run(cli: &Cli) -> Result<Report> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.bell.seed = seed;
    }
    if let Some(shots) = cli.shots {
        cfg.bell.shots = shots;
    }
    match &cli.command {
        Command::Fig2(a) => {
            if !a.zeta.is_empty() {
                cfg.sweep.zeta = a.zeta.clone();
            }
            cfg.sweep.tau_max = a.tau_max.unwrap_or(cfg.sweep.tau_max);
            cfg.sweep.tau_steps = a.steps.unwrap_or(cfg.sweep.tau_steps);
            cfg.validate()?;
            cmd_fig2(&cfg)
        }
        Command::Fig3(a) => {
            if !a.em_ratio.is_empty() {
                cfg.sweep.em_ratio = a.em_ratio.clone();
            }
            cfg.sweep.t_max_ps = a.t_max.unwrap_or(cfg.sweep.t_max_ps);
            cfg.sweep.t_steps = a.steps.unwrap_or(cfg.sweep.t_steps);
            cfg.validate()?;
            cmd_fig3(&cfg)
        }
        Command::Chsh(a) => {
            cfg.bell.te = a.te.unwrap_or(cfg.bell.te);
            if let Some(m) = a.mode {
                cfg.bell.mode = match m {
                    ModeArg::Analytic => ModeChoice::Analytic,
                    ModeArg::Sampled => ModeChoice::Sampled,
                    ModeArg::Both => ModeChoice::Both,
                };
            }
            cfg.validate()?;
            cmd_chsh(&cfg)
        }
        Command::Pulses(a) => {
            cfg.validate()?;
            cmd_pulses(&cfg, a)
        }
    }
}

fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[derive(Serialize)]
struct Fig2Row {
    zeta: f64,
    tau: f64,
    p_appr: f64,
    p_ex: f64,
    diff: f64,
}

pub fn cmd_fig2(cfg: &RunConfig) -> Result<Report> {
    let s = &cfg.sweep;
    let mut rows = Vec::new();
    let mut summary = String::from("fig2: |P_appr - P_ex| for the decoupled flip\n");
    for &zeta in &s.zeta {
        let points = compare_flip_transition(zeta, s.tau_max, s.tau_steps)?;
        let max = points.iter().map(|p| p.diff()).fold(0.0, f64::max);
        writeln!(summary, "  zeta = {zeta}: max diff = {max:.6} over tau in [0, {}]", s.tau_max).unwrap();
        rows.extend(points.iter().map(|p| Fig2Row {
            zeta,
            tau: p.tau,
            p_appr: p.p_appr,
            p_ex: p.p_ex,
            diff: p.diff(),
        }));
    }
    let validation_failure = rows
        .iter()
        .find(|r| ![r.p_appr, r.p_ex].iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)))
        .map(|r| format!("probability out of range at zeta = {}, tau = {}", r.zeta, r.tau));
    Ok(Report { csv: csv_bytes(rows)?, summary, validation_failure })
}

#[derive(Serialize)]
struct Fig3Row {
    em_ratio: f64,
    t_ps: f64,
    concurrence: f64,
    is_plateau: bool,
    above_threshold: bool,
}

pub fn cmd_fig3(cfg: &RunConfig) -> Result<Report> {
    let base = cfg.circuit_params()?;
    if !base.is_symmetric() {
        return Err(Error::Asymmetric(base.eps_j[0], base.eps_j[1]));
    }
    let s = &cfg.sweep;
    let mut rows = Vec::new();
    let mut summary = format!(
        "fig3: concurrence from |00> at co-resonance, eps_J = {} ueV, threshold {BELL_THRESHOLD:.3}\n",
        base.eps_j[0]
    );
    let mut validation_failure = None;
    for &ratio in &s.em_ratio {
        let params = CircuitParams { e12: ratio * base.eps_j[0] / 4.0, ..base };
        let trace = concurrence_trace(&params, s.t_max_ps, s.t_steps, ConcurrenceMethod::Oracle)?;
        if let Some(c) = trace.values.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            validation_failure = Some(format!("concurrence {c} outside [0, 1]"));
        }
        for ((&t, &c), &p) in trace.times.iter().zip(&trace.values).zip(&trace.is_plateau) {
            rows.push(Fig3Row {
                em_ratio: ratio,
                t_ps: t,
                concurrence: c,
                is_plateau: p,
                above_threshold: c > BELL_THRESHOLD,
            });
        }
        let plateaus = find_plateaus(&params, s.t_max_ps)?;
        writeln!(summary, "  E_m/eps_J = {ratio} (E12 = {} ueV): {} plateaus", params.e12, plateaus.len()).unwrap();
        writeln!(summary, "    {:>3}  {:>12}  {:>10}  maximal", "k", "t_e [ps]", "C_E(t_e)").unwrap();
        for p in &plateaus {
            writeln!(
                summary,
                "    {:>3}  {:>12.4}  {:>10.6}  {}",
                p.k,
                p.t_e,
                p.concurrence,
                if p.maximal { "yes" } else { "no" }
            )
            .unwrap();
        }
    }
    Ok(Report { csv: csv_bytes(rows)?, summary, validation_failure })
}

pub fn cmd_chsh(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.circuit_params()?;
    let b = &cfg.bell;
    let te = match b.te {
        TeChoice::Auto => first_maximal_plateau(&params, cfg.sweep.t_max_ps)?.t_e,
        TeChoice::At(t) => t,
    };
    let settings = b.settings();
    let sampled = Mode::Sampled { shots: b.shots, seed: b.seed };
    let modes: &[Mode] = match b.mode {
        ModeChoice::Analytic => &[Mode::Analytic],
        ModeChoice::Sampled => &[sampled],
        ModeChoice::Both => &[Mode::Analytic, sampled],
    };
    let results = modes.iter().map(|&m| bell::chsh(&params, te, &settings, m)).collect::<Result<Vec<ChshResult>>>()?;
    let mut summary = String::new();
    for r in &results {
        writeln!(summary, "{r}").unwrap();
    }
    let validation_failure = results
        .iter()
        .find(|r| r.mode == Mode::Analytic && r.f > TSIRELSON_BOUND + 1e-10)
        .map(|r| format!("analytic f = {} exceeds the Tsirelson bound", r.f));
    let mut csv = Vec::new();
    bell::write_csv(&results, &mut csv)?;
    Ok(Report { csv, summary, validation_failure })
}

#[derive(Serialize)]
struct PulsesRow {
    sequence: String,
    target: String,
    total_duration_ps: f64,
    fidelity: f64,
    unitarity_error: f64,
    tolerance: f64,
    passed: bool,
}

pub fn cmd_pulses(cfg: &RunConfig, a: &PulsesArgs) -> Result<Report> {
    let params = cfg.circuit_params()?;
    let qubit = Qubit::from_label(a.qubit)?;
    let (name, seq, target) = match (&a.builtin, &a.sequence) {
        (Some(name), _) => {
            let defaults = BuiltinOptions::default();
            let opts = BuiltinOptions {
                tau: a.tau.unwrap_or(defaults.tau),
                angle: a.angle.unwrap_or(defaults.angle),
                zeta: a.zeta.unwrap_or(defaults.zeta),
            };
            let (seq, target) = builtin(name, &params, opts)?;
            (name.clone(), seq, target)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let seq = PulseSequence::parse(&text, params)?;
            let target = Target::parse(&a.target, qubit, a.angle.unwrap_or(0.0))?;
            (path.display().to_string(), seq, target)
        }
        (None, None) => return Err(Error::InvalidParameter("pass --sequence or --builtin".into())),
    };
    let check = verify_sequence(&seq, target)?;
    let mut summary = String::new();
    writeln!(summary, "pulses: {name} ({} segments)", seq.segments.len()).unwrap();
    writeln!(summary, "  total duration  = {:.6} ps", check.total_duration).unwrap();
    writeln!(summary, "  target          = {}", target.describe()).unwrap();
    writeln!(summary, "  fidelity        = {:.12}", check.fidelity).unwrap();
    writeln!(summary, "  unitarity error = {:.3e}", check.unitarity_error).unwrap();
    writeln!(
        summary,
        "  threshold       = 1 - {:.0e} ({})",
        check.tolerance,
        if check.approximate { "decoupling approximation" } else { "exact identity" }
    )
    .unwrap();
    writeln!(summary, "  unitary:\n{:?}", check.unitary).unwrap();
    writeln!(summary, "  result: {}", if check.passed { "PASS" } else { "FAIL" }).unwrap();
    let row = PulsesRow {
        sequence: name,
        target: target.describe(),
        total_duration_ps: check.total_duration,
        fidelity: check.fidelity,
        unitarity_error: check.unitarity_error,
        tolerance: check.tolerance,
        passed: check.passed,
    };
    let validation_failure =
        (!check.passed).then(|| format!("fidelity {:.6} below 1 - {:.0e}", check.fidelity, check.tolerance));
    Ok(Report { csv: csv_bytes([row])?, summary, validation_failure })
}
