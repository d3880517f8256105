//! The `gh` command-line tool.
//!
//! Exit codes: 0 on success or a passing verification, 1 when a verification
//! finds a counterexample, 2 on usage, parse, domain or resource errors.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gh_core::embed::{embed_report, EmbedStatus};
use gh_core::generic::{perturbed_generic, shramov_space_with_budget};
use gh_core::ghdist::{geodesic_point, gh_exact_with_limit, gh_oracle, GhResult};
use gh_core::io::{read_space_with_tolerance, space_to_csv};
use gh_core::metricspace::{characteristics_with_budget, FiniteMetricSpace, GenericityReport};
use gh_core::stability::{
    canonical_partition, verify_interiority, verify_local_isometry, CanonicalPartition,
    VerificationReport, VerifyOptions, EPSILON_MARGIN,
};
use gh_core::{GhError, Result};
use serde::Serialize;

use config::{ConfigLayer, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gh",
    version,
    about = "Exact Gromov-Hausdorff distances between finite metric spaces"
)]
pub struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Slack allowed on the triangle inequality when reading spaces.
    #[arg(long, global = true)]
    tau_metric: Option<f64>,
    /// Tolerance for distance equality checks.
    #[arg(long, global = true)]
    tau_eq: Option<f64>,
    /// Largest number of points per side for the exact solver.
    #[arg(long, global = true)]
    max_exact_side: Option<usize>,
    /// Largest space for which the asymmetry e is computed.
    #[arg(long, global = true)]
    e_budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gromov-Hausdorff distance between two spaces.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Star)]
        method: MethodArg,
        /// Include an optimal correspondence in the output.
        #[arg(long)]
        emit_witness: bool,
    },
    /// Minimal distance s, triangle excess t and asymmetry e of a space.
    Characteristics { space: PathBuf },
    /// Generate a generic space.
    Generic(GenericArgs),
    /// Check neighbourhood statements on a concrete anchor.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Embed a space isometrically into the class of n-point spaces.
    Embed {
        space: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving the anchor, the image spaces and the report.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Point at parameter t on a geodesic between two spaces.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Oracle,
    Star,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenericKind {
    Perturbed,
    Shramov,
}

#[derive(Debug, Args)]
struct GenericArgs {
    #[arg(long, value_enum)]
    kind: GenericKind,
    /// Number of points (perturbed).
    #[arg(long)]
    n: Option<usize>,
    /// Number of base vertices (shramov).
    #[arg(long)]
    m: Option<usize>,
    /// Edge lengthening (shramov).
    #[arg(long)]
    eps: Option<f64>,
    /// Perturbation amplitude (perturbed).
    #[arg(long, default_value_t = 0.25)]
    amplitude: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving space.json and report.json.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Projection is isometric near a generic anchor.
    LocalIsometry(SamplingArgs),
    /// Vectors near a generic anchor are interior to the metric cone.
    Interior(SamplingArgs),
    /// A space near the anchor has a well-defined canonical partition.
    Partition {
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SamplingArgs {
    #[arg(long)]
    anchor: PathBuf,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Ball radius; derived from the anchor when omitted.
    #[arg(long)]
    epsilon: Option<f64>,
}

/// What a command produced, before rendering.
struct Outcome {
    json: serde_json::Value,
    pretty: String,
    space: Option<FiniteMetricSpace>,
    exit: i32,
}

impl Outcome {
    fn new(value: &impl Serialize, pretty: String) -> Self {
        Self {
            json: serde_json::to_value(value).expect("reports serialize"),
            pretty,
            space: None,
            exit: EXIT_OK,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok((outcome, format)) => {
            let text = match format {
                Format::Json => {
                    serde_json::to_string_pretty(&outcome.json).expect("json values serialize")
                        + "\n"
                }
                Format::Pretty => outcome.pretty,
                Format::Csv => {
                    match &outcome.space {
                        Some(space) => space_to_csv(space),
                        None => {
                            let _ = writeln!(err, "error: csv output is only available for commands that produce a space");
                            return EXIT_ERROR;
                        }
                    }
                }
            };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_ERROR;
            }
            outcome.exit
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                GhError::TheoremViolation(_) => EXIT_VERIFICATION_FAILED,
                _ => EXIT_ERROR,
            }
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config = config.merge(&ConfigLayer::from_file(path)?);
    }
    config = config.merge(&ConfigLayer {
        tau_metric: cli.tau_metric,
        tau_eq: cli.tau_eq,
        max_exact_side: cli.max_exact_side,
        e_budget: cli.e_budget,
        seed: None,
        format: cli.format,
    });
    config.validate()?;
    Ok(config)
}

/// A seed from the flag, then the config file, then the clock. The chosen value
/// is always part of the command's output.
fn pick_seed(flag: Option<u64>, config: &RunConfig) -> u64 {
    flag.or(config.seed).unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    })
}

fn execute(cli: &Cli) -> Result<(Outcome, Format)> {
    let config = resolve_config(cli)?;
    let read = |path: &Path| read_space_with_tolerance(path, config.tau_metric);
    let outcome = match &cli.command {
        Command::Dist {
            a,
            b,
            method,
            emit_witness,
        } => dist(&read(a)?, &read(b)?, *method, *emit_witness, &config)?,
        Command::Characteristics { space } => {
            let report = characteristics_with_budget(&read(space)?, config.e_budget)?;
            Outcome::new(&report, pretty_report(&report))
        }
        Command::Generic(args) => generic(args, &config)?,
        Command::Verify(VerifyCommand::LocalIsometry(args)) => {
            let options = sampling_options(args, &config);
            verification(verify_local_isometry(&read(&args.anchor)?, &options)?)
        }
        Command::Verify(VerifyCommand::Interior(args)) => {
            let options = sampling_options(args, &config);
            verification(verify_interiority(&read(&args.anchor)?, &options)?)
        }
        Command::Verify(VerifyCommand::Partition {
            anchor,
            target,
            epsilon,
        }) => partition(&read(anchor)?, &read(target)?, *epsilon, &config)?,
        Command::Embed { space, seed, out } => {
            embed(&read(space)?, pick_seed(*seed, &config), out.as_deref())?
        }
        Command::Geodesic { a, b, t } => geodesic(&read(a)?, &read(b)?, *t, &config)?,
    };
    Ok((outcome, config.format))
}

#[derive(Serialize)]
struct DistOutput<'a> {
    distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<&'a gh_core::correspondence::Correspondence>,
    nodes_explored: u64,
    method: gh_core::ghdist::Method,
}

fn dist(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    method: MethodArg,
    emit_witness: bool,
    config: &RunConfig,
) -> Result<Outcome> {
    let result: GhResult = match method {
        MethodArg::Oracle => gh_oracle(a, b)?,
        MethodArg::Star => gh_exact_with_limit(a, b, config.max_exact_side)?,
    };
    let output = DistOutput {
        distance: result.distance,
        witness: emit_witness.then_some(&result.optimal),
        nodes_explored: result.nodes_explored,
        method: result.method,
    };
    let mut pretty = format!("distance: {}\n", result.distance);
    if emit_witness {
        let pairs: Vec<String> = result
            .optimal
            .pairs()
            .map(|(i, j)| format!("({i},{j})"))
            .collect();
        let _ = writeln!(pretty, "witness: {}", pairs.join(" "));
    }
    let _ = writeln!(pretty, "nodes explored: {}", result.nodes_explored);
    Ok(Outcome::new(&output, pretty))
}

fn pretty_report(r: &GenericityReport) -> String {
    let mut text = format!(
        "points: {}\ndiameter: {}\ns: {} at {:?}\nt: {} at {:?}\n",
        r.n, r.diam, r.s, r.s_witness, r.t, r.t_witness
    );
    match (r.e, &r.e_witness) {
        (Some(e), Some(w)) => {
            let _ = writeln!(text, "e: {e} via {w:?}");
        }
        _ => text.push_str("e: not computed\n"),
    }
    let _ = writeln!(text, "generic: {}", r.is_generic);
    text
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("outputs serialize") + "\n";
    std::fs::write(&path, text)
        .map_err(|e| GhError::Resource(format!("writing {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| GhError::Resource(format!("creating {}: {e}", dir.display())))
}

fn generic(args: &GenericArgs, config: &RunConfig) -> Result<Outcome> {
    let (json, space, report) = match args.kind {
        GenericKind::Perturbed => {
            let n = args
                .n
                .ok_or_else(|| GhError::Domain("--kind perturbed needs --n".into()))?;
            let g = perturbed_generic(n, pick_seed(args.seed, config), args.amplitude)?;
            let mut json = serde_json::to_value(&g).expect("serializes");
            json["kind"] = "perturbed".into();
            (json, g.space, g.report)
        }
        GenericKind::Shramov => {
            let m = args
                .m
                .ok_or_else(|| GhError::Domain("--kind shramov needs --m".into()))?;
            let eps = args
                .eps
                .ok_or_else(|| GhError::Domain("--kind shramov needs --eps".into()))?;
            let g = shramov_space_with_budget(m, eps, config.e_budget)?;
            let mut json = serde_json::to_value(&g).expect("serializes");
            json["kind"] = "shramov".into();
            (json, g.space, g.report)
        }
    };
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_json(dir, "space.json", &space)?;
        write_json(dir, "report.json", &report)?;
    }
    let pretty = pretty_report(&report);
    Ok(Outcome {
        json,
        pretty,
        space: Some(space),
        exit: EXIT_OK,
    })
}

fn sampling_options(args: &SamplingArgs, config: &RunConfig) -> VerifyOptions {
    VerifyOptions {
        samples: args.samples,
        seed: pick_seed(args.seed, config),
        epsilon: args.epsilon,
        tau_eq: config.tau_eq,
    }
}

fn verification(report: VerificationReport) -> Outcome {
    let pretty = format!(
        "check: {}\npass: {}\nsamples: {}\nepsilon: {}\nseed: {}\nmax deviation: {:e}\ncounterexamples: {}\n",
        report.check,
        report.pass,
        report.samples,
        report.epsilon,
        report.seed,
        report.max_deviation,
        report.counterexamples.len()
    );
    let mut outcome = Outcome::new(&report, pretty);
    if !report.pass {
        outcome.exit = EXIT_VERIFICATION_FAILED;
    }
    outcome
}

#[derive(Serialize)]
struct PartitionReport {
    check: &'static str,
    pass: bool,
    epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<CanonicalPartition>,
    counterexamples: Vec<String>,
}

fn partition(
    anchor: &FiniteMetricSpace,
    target: &FiniteMetricSpace,
    epsilon: Option<f64>,
    config: &RunConfig,
) -> Result<Outcome> {
    let epsilon = match epsilon {
        Some(eps) => eps,
        None => {
            let r = characteristics_with_budget(anchor, config.e_budget)?;
            let quarter_s = r.s / 4.0;
            match r.e {
                Some(e) if e > 0.0 => quarter_s.min(e / 4.0 * (1.0 - EPSILON_MARGIN)),
                _ => quarter_s,
            }
        }
    };
    let report = match canonical_partition(anchor, target, epsilon) {
        Ok(p) => PartitionReport {
            check: "partition",
            pass: true,
            epsilon,
            partition: Some(p),
            counterexamples: Vec::new(),
        },
        Err(GhError::TheoremViolation(detail)) => PartitionReport {
            check: "partition",
            pass: false,
            epsilon,
            partition: None,
            counterexamples: vec![detail],
        },
        Err(e) => return Err(e),
    };
    let mut pretty = format!(
        "check: partition\npass: {}\nepsilon: {}\n",
        report.pass, epsilon
    );
    if let Some(p) = &report.partition {
        for (i, block) in p.blocks.iter().enumerate() {
            let _ = writeln!(pretty, "block {i}: {block:?}");
        }
    }
    for c in &report.counterexamples {
        let _ = writeln!(pretty, "counterexample: {c}");
    }
    let exit = if report.pass {
        EXIT_OK
    } else {
        EXIT_VERIFICATION_FAILED
    };
    let mut outcome = Outcome::new(&report, pretty);
    outcome.exit = exit;
    Ok(outcome)
}

fn embed(x: &FiniteMetricSpace, seed: u64, out: Option<&Path>) -> Result<Outcome> {
    let report = embed_report(x, seed);
    if report.status == EmbedStatus::Error {
        return Err(report.error.expect("error status carries the error"));
    }
    if let (Some(dir), Some(result)) = (out, &report.result) {
        ensure_dir(dir)?;
        write_json(dir, "anchor.json", &result.anchor.space)?;
        for (i, image) in result.images.iter().enumerate() {
            write_json(dir, &format!("image_{i}.json"), image)?;
        }
        write_json(dir, "report.json", &report)?;
    }
    let exit = match report.status {
        EmbedStatus::Isometric => EXIT_OK,
        EmbedStatus::Violated => EXIT_VERIFICATION_FAILED,
        EmbedStatus::Error => EXIT_ERROR,
    };
    let mut outcome = Outcome::new(&report, report.to_string());
    outcome.exit = exit;
    Ok(outcome)
}

#[derive(Serialize)]
struct GeodesicOutput<'a> {
    t: f64,
    distance: f64,
    correspondence: &'a gh_core::correspondence::Correspondence,
    space: &'a FiniteMetricSpace,
}

fn geodesic(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    t: f64,
    config: &RunConfig,
) -> Result<Outcome> {
    let gh = gh_exact_with_limit(a, b, config.max_exact_side)?;
    let point = geodesic_point(a, b, &gh.optimal, t)?;
    let output = GeodesicOutput {
        t,
        distance: gh.distance,
        correspondence: &gh.optimal,
        space: &point,
    };
    let mut pretty = format!("t: {t}\ndistance: {}\npoints: {}\n", gh.distance, point.n());
    for row in point.to_rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        let _ = writeln!(pretty, "  {}", cells.join(" "));
    }
    let mut outcome = Outcome::new(&output, pretty);
    outcome.space = Some(point);
    Ok(outcome)
}
