//! Command-line front end for `gradediv`.
//!
//! Every run prints exactly one JSON document on standard output; logs and
//! usage text go to standard error.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gradediv::{
    capacity_entropy_with_limit, corrected_entropy, divergence_continuous, divergence_discrete,
    partition_entropy, relative_entropy, shannon_entropy, symmetric_divergence, Capacity,
    CapacityEntropyReport, ContinuousGrading, DivergenceResult, GradingSample, Method,
    ProbabilityVector, QuadratureSpec, DEFAULT_EXHAUSTIVE_LIMIT,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

mod format;

pub use format::to_canonical_string;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable overriding the exhaustive capacity search cap.
pub const EXHAUSTIVE_LIMIT_VAR: &str = "GD_EXHAUSTIVE_LIMIT";

#[derive(Debug, Parser)]
#[command(name = "gradediv", version, about = "Relative divergence and entropy of grading functions")]
struct Cli {
    /// Treat a −∞ result as a computation error.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relative divergence of one grading function from another.
    #[command(subcommand)]
    Divergence(DivergenceCommand),
    /// Entropy formulas derived from relative divergence.
    #[command(subcommand)]
    Entropy(EntropyCommand),
    /// Parse an input file and print its canonical form.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<InputKind>,
    },
}

#[derive(Debug, Subcommand)]
enum DivergenceCommand {
    /// Series form over a finite ordered set (grading samples).
    Discrete {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Integral form for continuous gradings.
    Continuous {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[command(flatten)]
        quadrature: QuadratureArgs,
    },
    /// D(F‖G) + D(G‖F).
    Symmetric {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[command(flatten)]
        quadrature: QuadratureArgs,
    },
}

#[derive(Debug, Subcommand)]
enum EntropyCommand {
    /// Shannon entropy of a probability vector.
    Shannon {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Σ f ln(g/f) of two probability vectors.
    Relative {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// −Σ μ ln μ over partition cell masses.
    Partition {
        #[arg(long)]
        masses: PathBuf,
    },
    /// Minimum chain divergence of a capacity.
    Capacity {
        #[arg(long)]
        capacity: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Exhaustive)]
        method: MethodArg,
    },
    /// −∫ f ln((b − a) f) dx of a continuous probability grading.
    Corrected {
        #[arg(long)]
        f: PathBuf,
        #[command(flatten)]
        quadrature: QuadratureArgs,
    },
}

#[derive(Debug, Args)]
struct QuadratureArgs {
    /// Absolute quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Quadrature settings file; `--tol` overrides its `abs_tol`.
    #[arg(long)]
    quadrature: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Greedy,
    /// Exhaustive within the limit, greedy beyond it.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Grading,
    Distribution,
    Masses,
    Capacity,
    Continuous,
    Quadrature,
}

/// Cell masses for `entropy partition`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionMasses {
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RunResult {
    Divergence(DivergenceResult),
    Capacity(CapacityEntropyReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunError {
    pub kind: String,
    pub message: String,
}

/// The single JSON document printed by every computing subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RunResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RunError>,
    pub elapsed_ms: f64,
}

enum Failure {
    Input(String),
    Computation(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Computation(_) => EXIT_COMPUTATION,
        }
    }

    fn into_error(self) -> RunError {
        match self {
            Failure::Input(message) => RunError {
                kind: "input".into(),
                message,
            },
            Failure::Computation(message) => RunError {
                kind: "computation".into(),
                message,
            },
        }
    }
}

impl From<gradediv::Error> for Failure {
    fn from(e: gradediv::Error) -> Self {
        if e.is_computational() {
            Failure::Computation(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

/// Input files read so far, hashed in order.
#[derive(Default)]
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        Ok(bytes)
    }

    fn load<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, Failure> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn digest(self) -> String {
        format!("sha256:{}", hex::encode(self.hasher.finalize()))
    }
}

fn quadrature_spec(inputs: &mut Inputs, args: &QuadratureArgs) -> Result<QuadratureSpec, Failure> {
    let mut spec = match &args.quadrature {
        Some(path) => inputs.load::<QuadratureSpec>(path)?,
        None => QuadratureSpec::default(),
    };
    if let Some(tol) = args.tol {
        spec.abs_tol = tol;
    }
    spec.validate()?;
    Ok(spec)
}

fn exhaustive_limit() -> Result<usize, Failure> {
    match std::env::var(EXHAUSTIVE_LIMIT_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Input(format!("{EXHAUSTIVE_LIMIT_VAR}={v:?} is not a nonnegative integer"))
        }),
        Err(_) => Ok(DEFAULT_EXHAUSTIVE_LIMIT),
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Divergence(DivergenceCommand::Discrete { .. }) => "divergence discrete",
        Command::Divergence(DivergenceCommand::Continuous { .. }) => "divergence continuous",
        Command::Divergence(DivergenceCommand::Symmetric { .. }) => "divergence symmetric",
        Command::Entropy(EntropyCommand::Shannon { .. }) => "entropy shannon",
        Command::Entropy(EntropyCommand::Relative { .. }) => "entropy relative",
        Command::Entropy(EntropyCommand::Partition { .. }) => "entropy partition",
        Command::Entropy(EntropyCommand::Capacity { .. }) => "entropy capacity",
        Command::Entropy(EntropyCommand::Corrected { .. }) => "entropy corrected",
        Command::Validate { .. } => "validate",
    }
}

fn compute(command: &Command, inputs: &mut Inputs) -> Result<RunResult, Failure> {
    let divergence = |r: DivergenceResult| Ok(RunResult::Divergence(r));
    match command {
        Command::Divergence(DivergenceCommand::Discrete { f, g }) => {
            let f: GradingSample = inputs.load(f)?;
            let g: GradingSample = inputs.load(g)?;
            divergence(divergence_discrete(&f, &g)?)
        }
        Command::Divergence(DivergenceCommand::Continuous { f, g, quadrature }) => {
            let f: ContinuousGrading = inputs.load(f)?;
            let g: ContinuousGrading = inputs.load(g)?;
            let spec = quadrature_spec(inputs, quadrature)?;
            divergence(divergence_continuous(&f, &g, &spec)?)
        }
        Command::Divergence(DivergenceCommand::Symmetric { f, g, quadrature }) => {
            let f: ContinuousGrading = inputs.load(f)?;
            let g: ContinuousGrading = inputs.load(g)?;
            let spec = quadrature_spec(inputs, quadrature)?;
            divergence(symmetric_divergence(&f, &g, &spec)?)
        }
        Command::Entropy(EntropyCommand::Shannon { dist }) => {
            let f: ProbabilityVector = inputs.load(dist)?;
            divergence(shannon_entropy(&f)?)
        }
        Command::Entropy(EntropyCommand::Relative { f, g }) => {
            let f: ProbabilityVector = inputs.load(f)?;
            let g: ProbabilityVector = inputs.load(g)?;
            divergence(relative_entropy(&f, &g)?)
        }
        Command::Entropy(EntropyCommand::Partition { masses }) => {
            let m: PartitionMasses = inputs.load(masses)?;
            divergence(partition_entropy(&m.masses)?)
        }
        Command::Entropy(EntropyCommand::Capacity { capacity, method }) => {
            let mu: Capacity = inputs.load(capacity)?;
            let limit = exhaustive_limit()?;
            let method = match method {
                MethodArg::Exhaustive => Method::Exhaustive,
                MethodArg::Greedy => Method::Greedy,
                MethodArg::Auto if mu.ground_size() <= limit => Method::Exhaustive,
                MethodArg::Auto => Method::Greedy,
            };
            Ok(RunResult::Capacity(capacity_entropy_with_limit(
                &mu, method, limit,
            )?))
        }
        Command::Entropy(EntropyCommand::Corrected { f, quadrature }) => {
            let f: ContinuousGrading = inputs.load(f)?;
            let spec = quadrature_spec(inputs, quadrature)?;
            divergence(corrected_entropy(&f, &spec)?)
        }
        Command::Validate { .. } => unreachable!("validate is handled separately"),
    }
}

fn detect_kind(value: &serde_json::Value) -> Option<InputKind> {
    let obj = value.as_object()?;
    let kind = if obj.contains_key("grades") {
        InputKind::Grading
    } else if obj.contains_key("weights") {
        InputKind::Distribution
    } else if obj.contains_key("masses") {
        InputKind::Masses
    } else if obj.contains_key("ground_size") {
        InputKind::Capacity
    } else if obj.contains_key("family") {
        InputKind::Continuous
    } else if obj.contains_key("abs_tol") {
        InputKind::Quadrature
    } else {
        return None;
    };
    Some(kind)
}

fn canonical<T: DeserializeOwned + Serialize>(bytes: &[u8]) -> Result<String, Failure> {
    let parsed: T = serde_json::from_slice(bytes).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(to_canonical_string(&parsed))
}

fn validate(path: &Path, kind: Option<InputKind>, inputs: &mut Inputs) -> Result<String, Failure> {
    let bytes = inputs.read(path)?;
    let kind = match kind {
        Some(k) => k,
        None => {
            let value: serde_json::Value =
                serde_json::from_slice(&bytes).map_err(|e| Failure::Input(e.to_string()))?;
            detect_kind(&value).ok_or_else(|| {
                Failure::Input(format!("cannot tell what kind of input {} is", path.display()))
            })?
        }
    };
    match kind {
        InputKind::Grading => canonical::<GradingSample>(&bytes),
        InputKind::Distribution => canonical::<ProbabilityVector>(&bytes),
        InputKind::Masses => {
            let m: PartitionMasses =
                serde_json::from_slice(&bytes).map_err(|e| Failure::Input(e.to_string()))?;
            partition_entropy(&m.masses)?;
            Ok(to_canonical_string(&m))
        }
        InputKind::Capacity => canonical::<Capacity>(&bytes),
        InputKind::Continuous => canonical::<ContinuousGrading>(&bytes),
        InputKind::Quadrature => {
            let q: QuadratureSpec =
                serde_json::from_slice(&bytes).map_err(|e| Failure::Input(e.to_string()))?;
            q.validate()?;
            Ok(to_canonical_string(&q))
        }
    }
}

/// Runs one invocation (`argv[0]` is the program name) and returns the exit
/// status.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let name = command_name(&cli.command).to_string();
    let mut inputs = Inputs::default();

    if let Command::Validate { input, kind } = &cli.command {
        return match validate(input, *kind, &mut inputs) {
            Ok(doc) => {
                let _ = writeln!(stdout, "{doc}");
                EXIT_OK
            }
            Err(failure) => {
                let code = failure.exit_code();
                let _ = writeln!(stderr, "gradediv: validate failed");
                emit(stdout, &name, inputs, Err(failure), started);
                code
            }
        };
    }

    let outcome = compute(&cli.command, &mut inputs).and_then(|r| match &r {
        RunResult::Divergence(d) if cli.strict && d.is_negative_infinity() => Err(
            Failure::Computation("result is −∞ and --strict is set".into()),
        ),
        _ => Ok(r),
    });
    let code = match &outcome {
        Ok(_) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "gradediv: {name} failed");
            f.exit_code()
        }
    };
    emit(stdout, &name, inputs, outcome, started);
    code
}

fn emit(
    stdout: &mut dyn Write,
    command: &str,
    inputs: Inputs,
    outcome: Result<RunResult, Failure>,
    started: Instant,
) {
    let (result, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(f) => (None, Some(f.into_error())),
    };
    let report = RunReport {
        command: command.to_string(),
        inputs_digest: inputs.digest(),
        result,
        error,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let _ = writeln!(stdout, "{}", to_canonical_string(&report));
}

/// Entry point used by the binary.
pub fn main_with_env() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
