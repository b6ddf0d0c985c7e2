//! Command line front end for the multirec library.
//!
//! Every command reads a JSON document, runs one library computation, and
//! writes a single artifact (JSON or CSV) to `--output` or stdout. Outputs
//! are deterministic for equal inputs and seeds, so artifacts can be
//! golden-file tested byte for byte.
//!
//! Exit codes: 0 success, 1 malformed input document or argument value,
//! 2 mathematical precondition violated (incompatible system, singular
//! coefficient, domain error), 3 requested root extraction that falls into
//! the unsupported defective-family case.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multirec::doc::{
    self, CheckDocument, DecompositionDocument, HicksModel, HicksModelDocument,
    MultipliersDocument, SynthDocument, SystemDocument, TransitionDocument,
};
use multirec::{
    decompose_multi, decompose_periodic, floquet_multipliers, monodromy_periodic, BoxIter,
    CoefficientSystem, Complex64, Error, HicksState, MultiIndex, PeriodVector, Result,
    DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "multirec",
    version,
    about = "Multitime linear recurrences: compatibility checks, transition matrices, Floquet decompositions, and the Samuelson-Hicks model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the compatibility condition over a box and report violations.
    Check(CheckArgs),
    /// Propagate an initial vector over a box and emit the trajectory.
    Evolve(EvolveArgs),
    /// Compute a single transition matrix between two lattice points.
    Transition(TransitionArgs),
    /// Compute a Floquet decomposition (per-axis or single-period form).
    Floquet(FloquetArgs),
    /// Compute Floquet multipliers of a monodromy matrix.
    Multipliers(MultipliersArgs),
    /// Evolve the Samuelson-Hicks model from initial income and consumption.
    HicksEvolve(HicksEvolveArgs),
    /// Multipliers and determinant identity of a Samuelson-Hicks model.
    HicksMultipliers(HicksMultipliersArgs),
    /// Generate a compatible system document from periodic (P, B) data.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input document path.
    #[arg(long)]
    input: PathBuf,
    /// Artifact path; written to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Per-axis periods, one factor per axis.
    Multi,
    /// One vector period, a single factor powered by the level |t|.
    Periodic,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Box extents for the sweep, comma-separated; defaults to the
    /// system's natural verification box.
    #[arg(long, value_name = "E1,..,EM")]
    r#box: Option<String>,
    /// Relative tolerance override for the identity check.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Initial state at t0: comma-separated reals or a JSON list of
    /// [re, im] pairs.
    #[arg(long)]
    x0: String,
    /// Box extents, comma-separated; extent 0 keeps an axis at t0.
    #[arg(long, value_name = "E1,..,EM")]
    r#box: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct TransitionArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Target point, comma-separated coordinates.
    #[arg(long, value_name = "T1,..,TM")]
    t: String,
    /// Source point; defaults to the system's base point.
    #[arg(long, value_name = "S1,..,SM")]
    s: Option<String>,
}

#[derive(Args)]
struct FloquetArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value_t = Mode::Multi)]
    mode: Mode,
    /// Periods: per-axis values in multi mode (defaults to the document's
    /// declared periods), the vector period in periodic mode (required).
    #[arg(long, value_name = "T1,..,TM")]
    t: Option<String>,
    /// Seed of the root-extraction eigenbasis search; MULTIREC_SEED, then
    /// a fixed default, when omitted.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MultipliersArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Vector period defining the monodromy; ignored for Hicks systems,
    /// which carry their own period.
    #[arg(long, value_name = "T1,..,TM")]
    t: Option<String>,
}

#[derive(Args)]
struct HicksEvolveArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Initial income and consumption: two reals or two [re, im] pairs.
    #[arg(long)]
    x0: String,
    /// Box extents, comma-separated; their count fixes the number of axes.
    #[arg(long, value_name = "E1,..,EM")]
    r#box: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct HicksMultipliersArgs {
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    io: IoArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Check(args) => cmd_check(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::Transition(args) => cmd_transition(args),
        Command::Floquet(args) => cmd_floquet(args),
        Command::Multipliers(args) => cmd_multipliers(args),
        Command::HicksEvolve(args) => cmd_hicks_evolve(args),
        Command::HicksMultipliers(args) => cmd_hicks_multipliers(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn read_input(io: &IoArgs) -> Result<String> {
    fs::read_to_string(&io.input)
        .map_err(|e| Error::Document(format!("cannot read {}: {e}", io.input.display())))
}

fn write_artifact(io: &IoArgs, text: &str) -> Result<()> {
    match &io.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Document(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_system(io: &IoArgs) -> Result<CoefficientSystem> {
    let text = read_input(io)?;
    let document: SystemDocument = doc::from_json(&text)?;
    document.to_system()
}

fn load_hicks_model(io: &IoArgs) -> Result<HicksModel> {
    let text = read_input(io)?;
    let document: HicksModelDocument = doc::from_json(&text)?;
    document.to_model()
}

fn parse_ints(text: &str, what: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<i64>()
                .map_err(|_| Error::Document(format!("{what}: `{part}` is not an integer")))
        })
        .collect()
}

fn parse_point(text: &str, m: usize, what: &str) -> Result<MultiIndex> {
    let coords = parse_ints(text, what)?;
    if coords.len() != m {
        return Err(Error::Document(format!(
            "{what}: expected {m} coordinates, got {}",
            coords.len()
        )));
    }
    MultiIndex::new(coords)
}

fn parse_box(text: &str, m: usize) -> Result<MultiIndex> {
    let extents = parse_point(text, m, "--box")?;
    if extents.coords().iter().any(|&e| e < 0) {
        return Err(Error::Document("--box: extents must be non-negative".into()));
    }
    Ok(extents)
}

/// `--x0` accepts comma-separated reals or a JSON list of [re, im] pairs.
fn parse_vector(text: &str, n: usize) -> Result<Vec<Complex64>> {
    let trimmed = text.trim();
    let values: Vec<Complex64> = if trimmed.starts_with('[') {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(trimmed)
            .map_err(|e| Error::Document(format!("--x0: invalid [re, im] list: {e}")))?;
        pairs.into_iter().map(doc::complex_from_pair).collect()
    } else {
        trimmed
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .map(|re| Complex64::new(re, 0.0))
                    .map_err(|_| Error::Document(format!("--x0: `{part}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?
    };
    if values.len() != n {
        return Err(Error::Document(format!(
            "--x0: expected {n} components, got {}",
            values.len()
        )));
    }
    Ok(values)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("MULTIREC_SEED") {
        Ok(value) => value.trim().parse().map_err(|_| {
            Error::Document(format!(
                "MULTIREC_SEED must be an unsigned integer, got `{value}`"
            ))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Points of `[t0, t0 + box]` in lexicographic order.
fn box_points(t0: &MultiIndex, extents: &MultiIndex) -> Result<Vec<MultiIndex>> {
    BoxIter::new(extents.coords())?
        .map(|offset| t0.add(&MultiIndex::new(offset)?))
        .collect()
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let sys = load_system(&args.io)?;
    let extents = match &args.r#box {
        Some(text) => parse_box(text, sys.num_axes())?,
        None => sys.default_check_box(),
    };
    let report = match args.tol {
        Some(tol) => sys.check_compatibility_with(&extents, tol)?,
        None => sys.check_compatibility(&extents)?,
    };
    let document = CheckDocument::from_report(&report);
    write_artifact(&args.io, &doc::to_json(&document)?)?;
    if report.ok {
        Ok(())
    } else {
        Err(Error::Incompatible {
            violations: report.violations.len(),
            worst: report.worst(),
        })
    }
}

fn cmd_evolve(args: EvolveArgs) -> Result<()> {
    let sys = load_system(&args.io)?;
    let x0 = parse_vector(&args.x0, sys.state_dim())?;
    let extents = match &args.r#box {
        Some(text) => parse_box(text, sys.num_axes())?,
        None => sys.default_check_box(),
    };
    let mut rows = Vec::new();
    for t in box_points(sys.base_point(), &extents)? {
        let x = sys.solve(&x0, &t)?;
        rows.push((t, x));
    }
    let text = match args.format {
        Format::Csv => doc::trajectory_csv(sys.num_axes(), sys.state_dim(), &rows),
        Format::Json => {
            let entries: Vec<serde_json::Value> = rows
                .iter()
                .map(|(t, x)| {
                    serde_json::json!({
                        "t": t.coords(),
                        "x": x.iter().map(|&v| doc::complex_to_pair(v)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            doc::to_json(&entries)?
        }
    };
    write_artifact(&args.io, &text)
}

fn cmd_transition(args: TransitionArgs) -> Result<()> {
    let sys = load_system(&args.io)?;
    let m = sys.num_axes();
    let t = parse_point(&args.t, m, "--t")?;
    let s = match &args.s {
        Some(text) => parse_point(text, m, "--s")?,
        None => sys.base_point().clone(),
    };
    let matrix = sys.transition(&t, &s)?;
    let document = TransitionDocument {
        t: t.coords().to_vec(),
        s: s.coords().to_vec(),
        matrix: doc::matrix_to_doc(&matrix),
    };
    write_artifact(&args.io, &doc::to_json(&document)?)
}

/// Per-axis periods for multi mode: the flag, then the document's declared
/// periods, then all ones for constant systems.
fn resolve_periods(sys: &CoefficientSystem, flag: &Option<String>) -> Result<PeriodVector> {
    if let Some(text) = flag {
        let values = parse_ints(text, "--t")?;
        let periods: Vec<u32> = values
            .iter()
            .map(|&v| {
                u32::try_from(v)
                    .map_err(|_| Error::Document(format!("--t: period `{v}` must be >= 0")))
            })
            .collect::<Result<Vec<_>>>()?;
        if periods.len() != sys.num_axes() {
            return Err(Error::Document(format!(
                "--t: expected {} periods, got {}",
                sys.num_axes(),
                periods.len()
            )));
        }
        return PeriodVector::new(periods);
    }
    if let Some(periods) = sys.periods() {
        return Ok(periods);
    }
    PeriodVector::new(vec![1; sys.num_axes()])
}

fn cmd_floquet(args: FloquetArgs) -> Result<()> {
    let sys = load_system(&args.io)?;
    let seed = resolve_seed(args.seed)?;
    let document = match args.mode {
        Mode::Multi => {
            let periods = resolve_periods(&sys, &args.t)?;
            let dec = decompose_multi(&sys, &periods, seed)?;
            DecompositionDocument::from_multi(&dec)?
        }
        Mode::Periodic => {
            let text = args.t.as_ref().ok_or_else(|| {
                Error::Document("periodic mode needs --t, the vector period".into())
            })?;
            let period = parse_point(text, sys.num_axes(), "--t")?;
            let dec = decompose_periodic(&sys, &period, seed)?;
            DecompositionDocument::from_periodic(&dec)?
        }
    };
    write_artifact(&args.io, &doc::to_json(&document)?)
}

fn cmd_multipliers(args: MultipliersArgs) -> Result<()> {
    let sys = load_system(&args.io)?;
    let document = match sys.hicks_params() {
        Some(params) => MultipliersDocument::from_hicks(&params.multipliers()?),
        None => {
            let text = args.t.as_ref().ok_or_else(|| {
                Error::Document(
                    "the multipliers command needs --t, the vector period of the monodromy".into(),
                )
            })?;
            let period = parse_point(text, sys.num_axes(), "--t")?;
            let mono = monodromy_periodic(&sys, &period)?;
            MultipliersDocument::from_values(&floquet_multipliers(&mono)?)
        }
    };
    write_artifact(&args.io, &doc::to_json(&document)?)
}

fn cmd_hicks_evolve(args: HicksEvolveArgs) -> Result<()> {
    let model = load_hicks_model(&args.io)?;
    let extents_raw = parse_ints(&args.r#box, "--box")?;
    if extents_raw.is_empty() || extents_raw.iter().any(|&e| e < 0) {
        return Err(Error::Document(
            "--box: needs at least one non-negative extent".into(),
        ));
    }
    let m = extents_raw.len();
    let extents = MultiIndex::new(extents_raw)?;
    let x0 = parse_vector(&args.x0, 2)?;
    let t0 = MultiIndex::zeros(m)?;

    let mut rows: Vec<(MultiIndex, HicksState)> = Vec::new();
    for t in box_points(&t0, &extents)? {
        let state = match &model {
            HicksModel::Constant(params) => params.solve(x0[0], x0[1], &t)?,
            HicksModel::Periodic(params) => params.solve((x0[0], x0[1]), &t)?,
        };
        rows.push((t, state));
    }
    if let Some((t, _)) = rows.iter().find(|(_, state)| !state.non_negative()) {
        eprintln!("warning: income or consumption leaves the non-negative domain at t = {t}");
    }
    let text = match args.format {
        Format::Csv => doc::hicks_csv(m, &rows),
        Format::Json => {
            let entries: Vec<serde_json::Value> = rows
                .iter()
                .map(|(t, state)| {
                    serde_json::json!({
                        "t": t.coords(),
                        "Y": doc::complex_to_pair(state.income),
                        "C": doc::complex_to_pair(state.consumption),
                    })
                })
                .collect();
            doc::to_json(&entries)?
        }
    };
    write_artifact(&args.io, &text)
}

fn cmd_hicks_multipliers(args: HicksMultipliersArgs) -> Result<()> {
    let text = read_input(&args.io)?;
    let document: HicksModelDocument = doc::from_json(&text)?;
    let params = document.to_periodic_params()?;
    let multipliers = MultipliersDocument::from_hicks(&params.multipliers()?);
    write_artifact(&args.io, &doc::to_json(&multipliers)?)
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let text = read_input(&args.io)?;
    let request: SynthDocument = doc::from_json(&text)?;
    let sys = request.synthesize()?;
    let document = SystemDocument::from_system(&sys);
    write_artifact(&args.io, &doc::to_json(&document)?)
}
