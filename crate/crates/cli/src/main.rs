//! Command-line front end: builds states, prints spectra and entanglement
//! reports, runs measurement channels and transfer maps, compares spectra
//! under majorization, and emits the eigenvalue-landscape CSV.
//!
//! Reports stream to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 2 assertion failure, 3 input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use mbody::channels::{
    apply_transfer_map, measure_l_body, measure_occupancy, measure_single_fermion,
    verify_lbody_majorization, verify_occupancy_majorization, verify_transfer_majorization,
    EntropyCheck, TransferMap,
};
use mbody::dm::{partner_spectrum_check, rho_m};
use mbody::entanglement::{
    entropy, majorization_tol, majorize_compare, normalized_entropy, EntropyFunctional,
    MajorizationReport, MajorizationVerdict, Spectrum,
};
use mbody::fock::binom_f64;
use mbody::oracles::figure1_data;
use mbody::states::{make_ghz, make_pair_condensate, make_random, make_slater};
use mbody::PureState;
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "mbody",
    version,
    about = "M-body entanglement of N-fermion states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state and write it as a JSON document.
    State(StateArgs),
    /// Spectrum, trace check, partner deviation, and entropies of rho^(M).
    Spectrum(SpectrumArgs),
    /// Apply a measurement channel and verify the majorization relations.
    Measure(MeasureArgs),
    /// Send M fermions through a transfer map and report the outcome data.
    MapBipartite(MapArgs),
    /// Compare two spectra under majorization.
    Majorize(MajorizeArgs),
    /// Largest-eigenvalue landscape over pair number and body order (CSV).
    Figure1(Figure1Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    PairCondensate,
    Ghz,
    Slater,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Channel {
    Single,
    Lbody,
    Occupancy,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerdictArg {
    FirstMoreMixed,
    SecondMoreMixed,
    Equivalent,
    Incomparable,
}

impl From<VerdictArg> for MajorizationVerdict {
    fn from(v: VerdictArg) -> Self {
        match v {
            VerdictArg::FirstMoreMixed => MajorizationVerdict::FirstMoreMixed,
            VerdictArg::SecondMoreMixed => MajorizationVerdict::SecondMoreMixed,
            VerdictArg::Equivalent => MajorizationVerdict::Equivalent,
            VerdictArg::Incomparable => MajorizationVerdict::Incomparable,
        }
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in state family.
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Number of modes for --family.
    #[arg(long = "D")]
    d: Option<usize>,
    /// Number of pairs (pair-condensate family).
    #[arg(long)]
    k: Option<usize>,
    /// Number of fermions (slater and random families).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Base RNG seed for the random family.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON state file; alternative to --family.
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args)]
struct StateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Body orders, comma separated.
    #[arg(long = "M", value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Measurement channel.
    #[arg(long, value_enum)]
    channel: Channel,
    /// Number of annihilated fermions for the lbody channel.
    #[arg(long = "L", default_value_t = 1)]
    l: usize,
    /// Probed mode for the occupancy channel.
    #[arg(long)]
    mode: Option<usize>,
    /// Body orders to verify, comma separated.
    #[arg(long = "M", value_delimiter = ',', required = true)]
    m: Vec<usize>,
    /// Number of seeds to sweep (random family only).
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Built-in map (uniform | mode-tagged | random) or a JSON map file.
    #[arg(long)]
    map: String,
    /// Transferred body order M (uniform and random maps).
    #[arg(long = "M", default_value_t = 1)]
    m: usize,
    /// Subsystem mode count d_a (random map).
    #[arg(long = "d-a")]
    d_a: Option<usize>,
    /// Number of Kraus blocks (random map).
    #[arg(long = "n-kraus")]
    n_kraus: Option<usize>,
    /// Seed for the random map.
    #[arg(long, default_value_t = 0)]
    map_seed: u64,
}

#[derive(Args)]
struct MajorizeArgs {
    /// First spectrum: inline comma list, JSON array file, or state file.
    #[arg(long)]
    a: String,
    /// Second spectrum, same formats.
    #[arg(long)]
    b: String,
    /// Body order when --a/--b point at state files.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Comparison tolerance (default: MBODY_TOL env var or 1e-9).
    #[arg(long)]
    tol: Option<f64>,
    /// Exit with code 2 unless the verdict matches.
    #[arg(long, value_enum)]
    expect: Option<VerdictArg>,
}

#[derive(Args)]
struct Figure1Args {
    /// Number of modes.
    #[arg(long = "D")]
    d: usize,
    /// Body orders, comma separated.
    #[arg(long = "M", value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

enum Failure {
    Input(String),
    Assertion(String),
}

impl From<mbody::Error> for Failure {
    fn from(e: mbody::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// On-disk state document; f64 fields survive serialize -> parse -> serialize
/// unchanged because serde_json prints shortest round-trip decimals.
#[derive(Serialize, Deserialize)]
struct StateDoc {
    d: usize,
    n: usize,
    amplitudes: Vec<AmplitudeDoc>,
}

#[derive(Serialize, Deserialize)]
struct AmplitudeDoc {
    mask: u64,
    re: f64,
    im: f64,
}

fn state_to_doc(state: &PureState) -> StateDoc {
    StateDoc {
        d: state.d(),
        n: state.n(),
        amplitudes: state
            .amplitudes()
            .map(|(mask, a)| AmplitudeDoc {
                mask,
                re: a.re,
                im: a.im,
            })
            .collect(),
    }
}

fn state_from_doc(doc: &StateDoc) -> Result<PureState, Failure> {
    let state = PureState::new(
        doc.d,
        doc.n,
        doc.amplitudes
            .iter()
            .map(|a| (a.mask, Complex64::new(a.re, a.im))),
    )?;
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Failure::Input(format!(
            "state file is not normalized: |psi| = {norm}"
        )));
    }
    Ok(state)
}

fn load_state(path: &Path) -> Result<PureState, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let doc: StateDoc = serde_json::from_str(&text)?;
    state_from_doc(&doc)
}

fn need(flag: &str, value: Option<usize>) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::Input(format!("missing --{flag} for this state family")))
}

fn build_state(source: &SourceArgs, seed_offset: u64) -> Result<PureState, Failure> {
    match (&source.state, source.family) {
        (Some(_), Some(_)) => Err(Failure::Input(
            "choose one state source: --family or --state".into(),
        )),
        (Some(path), None) => load_state(path),
        (None, Some(family)) => {
            let d = need("D", source.d)?;
            match family {
                Family::PairCondensate => Ok(make_pair_condensate(d, need("k", source.k)?)?),
                Family::Ghz => Ok(make_ghz(d)?),
                Family::Slater => {
                    let n = need("N", source.n)?;
                    let modes: Vec<usize> = (0..n).collect();
                    Ok(make_slater(d, &modes)?)
                }
                Family::Random => {
                    let n = need("N", source.n)?;
                    Ok(make_random(d, n, source.seed + seed_offset)?)
                }
            }
        }
        (None, None) => Err(Failure::Input(
            "no state source: pass --family or --state".into(),
        )),
    }
}

/// 15 significant digits, '.' decimal separator, deterministic.
fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}

fn functional_name(f: EntropyFunctional) -> &'static str {
    match f {
        EntropyFunctional::VonNeumann => "von-neumann",
        EntropyFunctional::BosonicLike => "bosonic-like",
        EntropyFunctional::Linear => "linear",
    }
}

fn majorization_json(r: &MajorizationReport) -> serde_json::Value {
    json!({
        "verdict": r.verdict.to_string(),
        "tol": r.tol,
        "first_violation_a_under_b": r.first_violation_a_under_b,
        "first_violation_b_under_a": r.first_violation_b_under_a,
        "prefix_a": r.prefix_a,
        "prefix_b": r.prefix_b,
    })
}

fn entropy_checks_json(checks: &[EntropyCheck]) -> serde_json::Value {
    checks
        .iter()
        .map(|c| {
            json!({
                "functional": functional_name(c.functional),
                "original": c.original,
                "branch_average": c.branch_average,
                "holds": c.holds,
            })
        })
        .collect()
}

fn normalized_branch_spectrum(post: &PureState, m: usize) -> Result<Vec<f64>, Failure> {
    Ok(rho_m(post, m)?.normalized()?.spectrum())
}

fn cmd_state(args: &StateArgs) -> CmdResult {
    let state = build_state(&args.source, 0)?;
    let mut text = serde_json::to_string(&state_to_doc(&state))?;
    text.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_spectrum(args: &SpectrumArgs) -> CmdResult {
    let state = build_state(&args.source, 0)?;
    let n = state.n();
    let mut bad = Vec::new();
    for &m in &args.m {
        let dm = rho_m(&state, m)?;
        let values = dm.spectrum();
        let trace = dm.trace();
        let expected = binom_f64(n, m)?;
        let (partner_ok, partner_dev) = partner_spectrum_check(&state, m)?;
        if (trace - expected).abs() > 1e-8 * expected.max(1.0) {
            bad.push(format!("M={m}: trace {trace} != {expected}"));
        }
        if !partner_ok {
            bad.push(format!("M={m}: partner deviation {partner_dev:e}"));
        }
        let spectrum = Spectrum::new(values.clone())?;
        match args.format {
            Format::Json => {
                let report = json!({
                    "m": m,
                    "trace": trace,
                    "trace_expected": expected,
                    "partner_deviation": partner_dev,
                    "spectrum": values,
                    "entropy": {
                        "von_neumann": entropy(&spectrum, EntropyFunctional::VonNeumann),
                        "bosonic_like": entropy(&spectrum, EntropyFunctional::BosonicLike),
                        "linear": entropy(&spectrum, EntropyFunctional::Linear),
                    },
                    "normalized_entropy": normalized_entropy(&spectrum, n, m)?,
                });
                println!("{report}");
            }
            Format::Csv => {
                for (index, value) in values.iter().enumerate() {
                    println!("{m},{index},{}", sig15(*value));
                }
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(bad.join("; ")))
    }
}

fn cmd_measure(args: &MeasureArgs) -> CmdResult {
    if args.trials > 1 && !matches!(args.source.family, Some(Family::Random)) {
        return Err(Failure::Input(
            "--trials needs --family random (other sources are deterministic)".into(),
        ));
    }
    let asserted = !matches!(args.channel, Channel::Occupancy);
    let mut checks = 0usize;
    let mut passes = 0usize;
    let mut bad = Vec::new();
    for trial in 0..args.trials.max(1) as u64 {
        let state = build_state(&args.source, trial)?;
        for &m in &args.m {
            let report = match args.channel {
                Channel::Single => {
                    let r = verify_lbody_majorization(&state, 1, m)?;
                    let outcomes: Vec<serde_json::Value> = measure_single_fermion(&state)?
                        .iter()
                        .map(|o| {
                            Ok(json!({
                                "outcome": o.label.to_string(),
                                "probability": o.probability,
                                "spectrum": normalized_branch_spectrum(&o.post, m)?,
                            }))
                        })
                        .collect::<Result<_, Failure>>()?;
                    json!({
                        "channel": "single",
                        "trial": trial,
                        "l": 1,
                        "m": m,
                        "outcomes": outcomes,
                        "mixture_deviation": r.mixture_deviation,
                        "majorization": majorization_json(&r.majorization),
                        "entropy_checks": entropy_checks_json(&r.entropy_checks),
                        "holds": r.holds,
                    })
                }
                Channel::Lbody => {
                    let r = verify_lbody_majorization(&state, args.l, m)?;
                    let outcomes: Vec<serde_json::Value> = measure_l_body(&state, args.l)?
                        .iter()
                        .map(|o| {
                            Ok(json!({
                                "outcome": o.label.to_string(),
                                "probability": o.probability,
                                "spectrum": normalized_branch_spectrum(&o.post, m)?,
                            }))
                        })
                        .collect::<Result<_, Failure>>()?;
                    json!({
                        "channel": "lbody",
                        "trial": trial,
                        "l": args.l,
                        "m": m,
                        "outcomes": outcomes,
                        "mixture_deviation": r.mixture_deviation,
                        "majorization": majorization_json(&r.majorization),
                        "entropy_checks": entropy_checks_json(&r.entropy_checks),
                        "holds": r.holds,
                    })
                }
                Channel::Occupancy => {
                    let mode = args
                        .mode
                        .ok_or_else(|| Failure::Input("occupancy channel needs --mode".into()))?;
                    let r = verify_occupancy_majorization(&state, mode, m)?;
                    let outcomes: Vec<serde_json::Value> = measure_occupancy(&state, mode)?
                        .iter()
                        .map(|o| {
                            Ok(json!({
                                "outcome": o.label.to_string(),
                                "probability": o.probability,
                                "spectrum": normalized_branch_spectrum(&o.post, m)?,
                            }))
                        })
                        .collect::<Result<_, Failure>>()?;
                    json!({
                        "channel": "occupancy",
                        "trial": trial,
                        "mode": mode,
                        "m": m,
                        "outcomes": outcomes,
                        "occupied_prob": r.occupied_prob,
                        "occupied_top": r.occupied_top,
                        "empty_top": r.empty_top,
                        "average_top": r.average_top,
                        "original_top": r.original_top,
                        "mixture_deviation": r.mixture_deviation,
                        "majorization": majorization_json(&r.majorization),
                        "holds": r.theorem_holds,
                    })
                }
            };
            checks += 1;
            let holds = report["holds"].as_bool().unwrap_or(false);
            if holds {
                passes += 1;
            } else if asserted {
                bad.push(format!("trial {trial} M={m}: majorization failed"));
            }
            println!("{report}");
        }
    }
    eprintln!("{passes}/{checks} majorization passes");
    if asserted && !bad.is_empty() {
        return Err(Failure::Assertion(bad.join("; ")));
    }
    Ok(())
}

/// JSON map file: {"d", "d_a", "m", "kraus": [block...]} with each block a
/// row-major matrix of [re, im] pairs.
#[derive(Deserialize)]
struct MapDoc {
    d: usize,
    d_a: usize,
    m: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

fn load_map(path: &Path) -> Result<TransferMap, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let doc: MapDoc = serde_json::from_str(&text)?;
    let mut blocks = Vec::with_capacity(doc.kraus.len());
    for rows in &doc.kraus {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Failure::Input("ragged Kraus block in map file".into()));
        }
        let block = nalgebra::DMatrix::from_fn(nrows, ncols, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        });
        blocks.push(block);
    }
    Ok(TransferMap::new(doc.d, doc.d_a, doc.m, blocks)?)
}

fn resolve_map(args: &MapArgs, d: usize) -> Result<TransferMap, Failure> {
    match args.map.as_str() {
        "uniform" => Ok(TransferMap::uniform(d, args.m)?),
        "mode-tagged" => Ok(TransferMap::mode_tagged(d)?),
        "random" => {
            let d_a = args
                .d_a
                .ok_or_else(|| Failure::Input("random map needs --d-a".into()))?;
            let n_kraus = args
                .n_kraus
                .ok_or_else(|| Failure::Input("random map needs --n-kraus".into()))?;
            Ok(TransferMap::random(d, d_a, args.m, n_kraus, args.map_seed)?)
        }
        path => load_map(Path::new(path)),
    }
}

fn cmd_map(args: &MapArgs) -> CmdResult {
    let state = build_state(&args.source, 0)?;
    let map = resolve_map(args, state.d())?;
    let outcomes = apply_transfer_map(&map, &state)?;
    let report = verify_transfer_majorization(&map, &state)?;
    let outcome_values: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| {
            Ok(json!({
                "outcome": o.label.to_string(),
                "probability": o.probability,
                "spectrum_a": o.post.reduced_state_a()?.spectrum(),
            }))
        })
        .collect::<Result<_, Failure>>()?;
    let doc = json!({
        "d": map.d(),
        "d_a": map.d_a(),
        "m": map.m(),
        "outcomes": outcome_values,
        "probabilities": report.probabilities,
        "majorization": majorization_json(&report.majorization),
        "holds": report.holds,
    });
    println!("{doc}");
    if report.holds {
        Ok(())
    } else {
        Err(Failure::Assertion(
            "transfer map failed the majorization relation".into(),
        ))
    }
}

fn parse_spectrum(text: &str, m: Option<usize>) -> Result<Spectrum, Failure> {
    let inline: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let values = match inline {
        Ok(v) => v,
        Err(_) => {
            let body = std::fs::read_to_string(text)
                .map_err(|e| Failure::Input(format!("{text}: not a number list, and {e}")))?;
            if let Ok(v) = serde_json::from_str::<Vec<f64>>(&body) {
                v
            } else {
                let doc: StateDoc = serde_json::from_str(&body).map_err(|e| {
                    Failure::Input(format!("{text}: neither a number array nor a state: {e}"))
                })?;
                let m =
                    m.ok_or_else(|| Failure::Input("comparing state files needs --M".into()))?;
                rho_m(&state_from_doc(&doc)?, m)?.spectrum()
            }
        }
    };
    Ok(Spectrum::new(values)?)
}

fn cmd_majorize(args: &MajorizeArgs) -> CmdResult {
    let a = parse_spectrum(&args.a, args.m)?;
    let b = parse_spectrum(&args.b, args.m)?;
    let tol = match args.tol {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Failure::Input(format!("tolerance must be positive: {t}"))),
        None => majorization_tol(),
    };
    let report = majorize_compare(&a, &b, tol)?;
    println!("{}", majorization_json(&report));
    match args.expect {
        Some(want) if MajorizationVerdict::from(want) != report.verdict => {
            Err(Failure::Assertion(format!(
                "verdict {} does not match expected {}",
                report.verdict,
                MajorizationVerdict::from(want)
            )))
        }
        _ => Ok(()),
    }
}

fn cmd_figure1(args: &Figure1Args) -> CmdResult {
    let rows = figure1_data(args.d, &args.m)?;
    match args.format {
        Format::Csv => {
            println!("k,M,lambda_max");
            for row in &rows {
                println!("{},{},{}", row.k, row.m, sig15(row.lambda_max));
            }
        }
        Format::Json => {
            let values: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| json!({"k": r.k, "M": r.m, "lambda_max": r.lambda_max}))
                .collect();
            println!("{}", serde_json::Value::Array(values));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::State(args) => cmd_state(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Measure(args) => cmd_measure(args),
        Command::MapBipartite(args) => cmd_map(args),
        Command::Majorize(args) => cmd_majorize(args),
        Command::Figure1(args) => cmd_figure1(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::from(0)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(3)
                }
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::from(0),
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
