//! Command-line interface: subcommands for the step-by-step truth table, a
//! single transfer, the average-fidelity sweep, step timing, and driven |2⟩
//! occupation, all emitting deterministic CSV or JSON artifacts.
//!
//! Exit codes are a stable contract: 0 on success, 1 when a quantitative
//! threshold is exceeded (truth-table deviation budget, norm drift), 2 on
//! configuration or usage errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::analytics::{consistency_report, occupation_p2, ConsistencyReport, FidelityParams};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::{detunings, QubitId};
use crate::protocol::{
    deviation_threshold, run_transfer, verify_truth_table, Engine, Schedule, TransferReport,
    TruthTableReport,
};

/// Grid used by `sweep` when neither the flag nor the configuration sets one.
pub const DEFAULT_SWEEP_GRID: &str = "0:10:1";

/// Monte-Carlo draws per sweep point unless overridden.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// Final-state amplitudes below this magnitude are omitted from reports.
const AMPLITUDE_PRINT_FLOOR: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "qit",
    version,
    about = "Deterministic simulator for a four-step resonator-mediated qubit state transfer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve both basis inputs through all four steps and check each stage.
    TruthTable(TruthTableArgs),
    /// Run one transfer of alpha|0> + beta|1> and report the outcome.
    Transfer(TransferArgs),
    /// Tabulate average transfer fidelity over a pulse-strength ratio grid.
    Sweep(SweepArgs),
    /// Print the four step durations and their total in seconds.
    Timing(TimingArgs),
    /// Print the driven |2> occupation of each qubit under its Raman pulse.
    Occupation(OccupationArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file; omitted, the reference device at --ratio is used.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Detuning ratio Delta/g for the reference device (ignored with --config).
    #[arg(long, default_value_t = 10.0)]
    pub ratio: f64,

    /// Output file; stdout when neither this nor the configuration names one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TruthTableArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Propagation engine: analytic, effective, or full.
    #[arg(long, default_value = "analytic")]
    pub engine: Engine,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Propagation engine: analytic, effective, or full.
    #[arg(long, default_value = "analytic")]
    pub engine: Engine,

    /// Real part of the amplitude on |0>_a.
    #[arg(long, default_value_t = 1.0)]
    pub alpha_re: f64,

    /// Imaginary part of the amplitude on |0>_a.
    #[arg(long, default_value_t = 0.0)]
    pub alpha_im: f64,

    /// Real part of the amplitude on |1>_a.
    #[arg(long, default_value_t = 0.0)]
    pub beta_re: f64,

    /// Imaginary part of the amplitude on |1>_a.
    #[arg(long, default_value_t = 0.0)]
    pub beta_im: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Grid of pulse-strength ratios as start:stop:step (0 is the exact
    /// vanishing-Stark sentinel); overrides the configuration's grid.
    #[arg(long)]
    pub grid: Option<String>,

    /// Seed override for the Monte-Carlo column.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Monte-Carlo draws per grid point.
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct OccupationArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parses "start:stop:step" into an inclusive, strictly increasing grid.
/// The step must divide the span to within a relative 1e-9 so the printed
/// grid never silently drops its endpoint.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "grid must be start:stop:step, got '{text}'"
        )));
    }
    let mut values = [0.0; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("grid component '{part}' is not a number")))?;
    }
    let [start, stop, step] = values;
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0) {
        return Err(Error::Config(format!(
            "grid needs finite bounds and a positive step, got '{text}'"
        )));
    }
    if stop < start {
        return Err(Error::Config(format!(
            "grid stop {stop} lies below start {start}"
        )));
    }
    let count = ((stop - start) / step).round() as usize;
    let landing = start + count as f64 * step;
    if (landing - stop).abs() > 1e-9 * stop.abs().max(1.0) {
        return Err(Error::Config(format!(
            "grid step {step} does not divide the span from {start} to {stop}"
        )));
    }
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

fn fmt(value: f64) -> String {
    format!("{value:.11e}")
}

/// Truth-table CSV: one row per input row and stage with the expected basis
/// label, the amplitude found on it, and both deviation measures. The header
/// is frozen.
pub fn truth_table_csv(report: &TruthTableReport) -> String {
    let mut out = String::from(
        "engine,row,stage,expected_a,expected_b,expected_n,amp_re,amp_im,\
         raw_deviation,phase_aligned_deviation,global_phase\n",
    );
    for (row_index, row) in report.rows.iter().enumerate() {
        for stage in &row.stages {
            let (a, b, n) = stage.expected;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                report.engine.name(),
                row_index,
                stage.stage,
                a,
                b,
                n,
                fmt(stage.amplitude.re),
                fmt(stage.amplitude.im),
                fmt(stage.raw_deviation),
                fmt(stage.phase_aligned_deviation),
                fmt(stage.global_phase),
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

#[derive(Debug, serde::Serialize)]
struct LeakageSummary {
    step: usize,
    qubit_a: f64,
    qubit_b: f64,
}

#[derive(Debug, serde::Serialize)]
struct AmplitudeSummary {
    a: usize,
    b: usize,
    n: usize,
    re: f64,
    im: f64,
}

#[derive(Debug, serde::Serialize)]
struct TransferSummary {
    engine: &'static str,
    alpha: [f64; 2],
    beta: [f64; 2],
    fidelity_vs_ideal: f64,
    residual_photon: f64,
    norm_drift: f64,
    leakage: Vec<LeakageSummary>,
    final_state: Vec<AmplitudeSummary>,
}

/// Transfer outcome as JSON with stable key order: fidelity, residual
/// photon number, norm drift, per-step |2> leakage maxima, and every
/// final-state amplitude above the print floor in basis order.
pub fn transfer_json(
    report: &TransferReport,
    alpha: Complex64,
    beta: Complex64,
) -> Result<String> {
    let space = report.final_state.space();
    let mut final_state = Vec::new();
    for (index, amp) in report.final_state.amplitudes().iter().enumerate() {
        if amp.norm() > AMPLITUDE_PRINT_FLOOR {
            let (a, b, n) = space.label_of(index)?;
            final_state.push(AmplitudeSummary {
                a,
                b,
                n,
                re: amp.re,
                im: amp.im,
            });
        }
    }
    let summary = TransferSummary {
        engine: report.engine.name(),
        alpha: [alpha.re, alpha.im],
        beta: [beta.re, beta.im],
        fidelity_vs_ideal: report.fidelity_vs_ideal,
        residual_photon: report.residual_photon,
        norm_drift: report.final_state.norm_drift(),
        leakage: report
            .leakage
            .iter()
            .enumerate()
            .map(|(i, l)| LeakageSummary {
                step: i + 1,
                qubit_a: l.qubit_a,
                qubit_b: l.qubit_b,
            })
            .collect(),
        final_state,
    };
    to_pretty_json(&summary)
}

/// One sweep grid point: the ratio and the sampled-versus-closed-form
/// comparison at that ratio.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub rabi_over_s: f64,
    pub report: ConsistencyReport,
}

/// Evaluates the sweep on a ratio grid. Each point draws its own seed as
/// `seed + index` so inserting a grid point never reshuffles the others'
/// samples; ratio 0 is the exact vanishing-Stark limit.
pub fn sweep_rows(grid: &[f64], n_samples: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(grid.len());
    for (index, &ratio) in grid.iter().enumerate() {
        let params = if ratio == 0.0 {
            FidelityParams::new(0.0, 0.0, 1.0)?
        } else {
            FidelityParams::new(1.0, 1.0, ratio)?
        };
        let report = consistency_report(&params, n_samples, seed.wrapping_add(index as u64))?;
        rows.push(SweepRow {
            rabi_over_s: ratio,
            report,
        });
    }
    Ok(rows)
}

/// Sweep CSV with the frozen header: the ratio, both closed-form averages,
/// and the seeded Monte-Carlo average with its standard error.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("rabi_over_s,avg_fidelity,avg_squared_overlap,avg_fidelity_mc,mc_stderr\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt(row.rabi_over_s),
            fmt(row.report.average_fidelity),
            fmt(row.report.average_squared_overlap),
            fmt(row.report.mc.mean),
            fmt(row.report.mc.std_error),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, serde::Serialize)]
struct TimingSummary {
    t1: f64,
    t2: f64,
    t3: f64,
    t4: f64,
    tau: f64,
}

/// Step durations and their total as JSON, in seconds.
pub fn timing_json(schedule: &Schedule) -> Result<String> {
    let summary = TimingSummary {
        t1: schedule.step(1).duration(),
        t2: schedule.step(2).duration(),
        t3: schedule.step(3).duration(),
        t4: schedule.step(4).duration(),
        tau: schedule.total_duration(),
    };
    to_pretty_json(&summary)
}

#[derive(Debug, serde::Serialize)]
struct OccupationSummary {
    p2_a: f64,
    p2_b: f64,
}

/// Maximum driven |2> occupation of each qubit under its own Raman pulse.
pub fn occupation_json(schedule: &Schedule) -> Result<String> {
    let resonator = schedule.resonator();
    let mut values = [0.0; 2];
    for (slot, (id, step)) in values
        .iter_mut()
        .zip([(QubitId::A, 1), (QubitId::B, 4)])
    {
        let qubit = schedule.qubit(id);
        let drive = &schedule.step(step).drives()[0];
        let d = detunings(qubit, resonator, drive)?;
        *slot = occupation_p2(drive.rabi(), d.delta_uw, qubit.g(), d.delta_c)?;
    }
    let summary = OccupationSummary {
        p2_a: values[0],
        p2_b: values[1],
    };
    to_pretty_json(&summary)
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut text| {
            text.push('\n');
            text
        })
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    match &common.config {
        Some(path) => RunConfig::from_path(path),
        None => {
            if !(common.ratio.is_finite() && common.ratio > 0.0) {
                return Err(Error::Config(format!(
                    "--ratio must be finite and positive, got {}",
                    common.ratio
                )));
            }
            Ok(RunConfig::default_device(common.ratio))
        }
    }
}

fn write_output(text: &str, common: &CommonArgs, config: &RunConfig) -> Result<()> {
    let path = common
        .out
        .clone()
        .or_else(|| config.output_path.as_ref().map(PathBuf::from));
    match path {
        Some(path) => std::fs::write(&path, text).map_err(|e| {
            Error::Config(format!("cannot write output {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit code for an error: quantitative check failures map to 1,
/// configuration and usage problems to 2.
fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::NormDrift { .. } => 1,
        _ => 2,
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::TruthTable(args) => {
            let config = load_config(&args.common)?;
            let schedule = config.schedule()?;
            let integrator = config.integrator(&schedule)?;
            let report = verify_truth_table(&schedule, args.engine, &integrator)?;
            write_output(&truth_table_csv(&report), &args.common, &config)?;
            let worst = report.thresholded_deviation();
            let budget = deviation_threshold(args.engine);
            if worst > budget {
                eprintln!(
                    "truth-table deviation {worst:.6e} exceeds the {} budget {budget:.6e}",
                    args.engine
                );
                return Ok(1);
            }
            Ok(0)
        }
        Command::Transfer(args) => {
            let config = load_config(&args.common)?;
            let schedule = config.schedule()?;
            let integrator = config.integrator(&schedule)?;
            let alpha = Complex64::new(args.alpha_re, args.alpha_im);
            let beta = Complex64::new(args.beta_re, args.beta_im);
            let report = run_transfer(alpha, beta, &schedule, args.engine, &integrator)?;
            write_output(&transfer_json(&report, alpha, beta)?, &args.common, &config)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let config = load_config(&args.common)?;
            let grid = match (&args.grid, &config.sweep) {
                (Some(text), _) => parse_grid(text)?,
                (None, Some(sweep)) => sweep.grid.clone(),
                (None, None) => parse_grid(DEFAULT_SWEEP_GRID)?,
            };
            let seed = args.seed.unwrap_or(config.seed);
            let rows = sweep_rows(&grid, args.samples, seed)?;
            write_output(&sweep_csv(&rows), &args.common, &config)?;
            for row in &rows {
                if row.report.flagged {
                    eprintln!(
                        "flag: at ratio {} the sampled average {:.6} sits {:.1} sigma from \
                         one closed form and {:.1} sigma from the other",
                        row.rabi_over_s,
                        row.report.mc.mean,
                        row.report.sigma_vs_average,
                        row.report.sigma_vs_squared_overlap,
                    );
                }
            }
            Ok(0)
        }
        Command::Timing(args) => {
            let config = load_config(&args.common)?;
            let schedule = config.schedule()?;
            write_output(&timing_json(&schedule)?, &args.common, &config)?;
            Ok(0)
        }
        Command::Occupation(args) => {
            let config = load_config(&args.common)?;
            let schedule = config.schedule()?;
            write_output(&occupation_json(&schedule)?, &args.common, &config)?;
            Ok(0)
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            exit_code_for(&error)
        }
    }
}
