//! `vibrometer`: measurement-cost analysis of vibrational Hamiltonians.
//!
//! Exit codes: 0 success, 2 invalid input, 3 resource cap exceeded,
//! 4 internal invariant violated.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vibrometer_core::estimator::{DEFAULT_EPSILON, DEFAULT_T_CNOT_US};
use vibrometer_core::{Error, GroupingScheme};

const SCHEMAS: &str = "\
File formats (all JSON floats carry 17 significant digits):

  SOP Hamiltonian      {\"modes\": M, \"modals\": [N_0, ...], \"constant\": c,
                        \"terms\": [{\"coeff\": c, \"factors\": [{\"mode\": m, \"matrix\": [[...], ...]}]}]}
                       Factor matrices are real symmetric N_m x N_m, modes strictly increasing.
  Expanded Hamiltonian {\"modes\": M, \"modals\": [...], \"constant\": c,
                        \"strings\": [{\"modes\": [m, ...], \"pq\": [[p, q], ...], \"coeff\": c}]}
  PES config           {\"frequencies\": [w_0, ...], \"max_degree\": 4,
                        \"couplings\": [{\"modes\": [m, ...], \"exponents\": [e, ...], \"value\": c}]}
  Qubit layout         {\"modals\": [...], \"offsets\": [...]}; qubit offset(m) + i is modal i of mode m
  Pauli Hamiltonian    text, one `<coeff> <string>` per line, qubit 0 first; `#` starts a comment
  Grouping             {\"scheme\": \"qwc|fc|qwc-mcr|fc-mcr\",
                        \"groups\": [{\"tag\": null | \"(0,1)+(2)\", \"terms\": [{\"coeff\": c, \"pauli\": \"XZI\"}]}]}
  Variances            {\"scheme\": s, \"ground_energy\": e | null, \"variances\": [...], \"sum_sqrt_var\": x}
  Runtime report       {\"label\", \"molecule\", \"scheme\", \"groups\", \"epsilon\", \"sum_sqrt_var\", \"variances\",
                        \"total_shots\", \"modes\", \"n_virtuals\", \"t_cnot_us\", \"cnot_count\",
                        \"circuit_time_us\", \"total_time_us\", \"total_time_min\"}
  State                binary: b\"VIBSTATE\" then 2^n little-endian (re, im) doubles;
                       sidecar <file>.json: {\"n_qubits\", \"seed\", \"description\"}

Exit codes: 0 success, 2 invalid input, 3 resource cap exceeded, 4 internal invariant violated.";

#[derive(Parser)]
#[command(
    name = "vibrometer",
    version,
    about = "Measurement cost of vibrational Hamiltonians on qubit hardware",
    after_long_help = SCHEMAS
)]
struct Cli {
    /// Worker threads; results do not depend on this
    #[arg(long, global = true, env = "VIBROMETER_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a SOP Hamiltonian from a Taylor-expanded potential
    Synth(SynthArgs),
    /// Expand a SOP Hamiltonian into second-quantized strings
    Expand(ExpandArgs),
    /// Map expanded strings onto qubits with the one-hot encoding
    Encode(EncodeArgs),
    /// Partition a Pauli Hamiltonian into commuting measurement groups
    Group(GroupArgs),
    /// Ground-state variance of every measurement group
    Variance(VarianceArgs),
    /// Allocate shots and estimate the runtime
    Plan(PlanArgs),
    /// Rank runtime reports and compute the variance reduction
    Report(ReportArgs),
    /// Run every stage for one or more grouping schemes
    Pipeline(PipelineArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["harmonic", "pes", "random_seed"]))]
pub struct SynthArgs {
    /// Harmonic frequencies, one per mode
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub harmonic: Option<Vec<f64>>,
    /// PES configuration file
    #[arg(long)]
    pub pes: Option<PathBuf>,
    /// Seed of a random quartic potential
    #[arg(long)]
    pub random_seed: Option<u64>,
    /// Mode count (required to match the other sources when given)
    #[arg(long)]
    pub modes: Option<usize>,
    /// Modals per mode: one value for all modes or a comma-separated list
    #[arg(long, value_delimiter = ',', required = true)]
    pub modals: Vec<usize>,
    /// Rotation angle, e.g. `30deg` or `0.52rad` (bare numbers are degrees)
    #[arg(long)]
    pub rotate: Option<String>,
    /// Plane of the rotation
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub pair: Vec<usize>,
    /// Output SOP file
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write the (rotated) PES configuration
    #[arg(long)]
    pub pes_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExpandArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Drop strings with |coeff| at or below this value
    #[arg(long, default_value_t = 0.0)]
    pub drop_threshold: f64,
}

#[derive(Args)]
pub struct EncodeArgs {
    /// Expanded or SOP Hamiltonian
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output Pauli Hamiltonian (text)
    #[arg(short, long)]
    pub output: PathBuf,
    /// Output qubit layout
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long, default_value_t = vibrometer_core::encode::DEFAULT_MAX_QUBITS)]
    pub max_qubits: usize,
}

#[derive(Args)]
pub struct GroupArgs {
    /// Pauli Hamiltonian (text)
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long, default_value = "qwc", value_parser = parse_scheme)]
    pub scheme: GroupingScheme,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("wavefunction").required(true).args(["expanded", "state"]))]
pub struct VarianceArgs {
    /// Hamiltonian whose FVCI ground state is used
    #[arg(long)]
    pub expanded: Option<PathBuf>,
    /// Binary state file used instead of the FVCI ground state
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Write the FVCI ground state (plus a JSON sidecar)
    #[arg(long, requires = "expanded")]
    pub state_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(long)]
    pub variances: PathBuf,
    /// Qubit layout, for the mode and modal counts of the circuit
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_T_CNOT_US)]
    pub tcnot_us: f64,
    /// Coordinate-system label, e.g. `NC`
    #[arg(long, default_value = "default")]
    pub label: String,
    #[arg(long)]
    pub molecule: Option<String>,
    /// Runtime report output
    #[arg(short, long)]
    pub output: PathBuf,
    /// Per-group shot plan output
    #[arg(long)]
    pub detail: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Runtime report files
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Labels left out of the ranking
    #[arg(long)]
    pub exclude_label: Vec<String>,
    /// Re-plan every report at this precision
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Re-plan every report with this CNOT time
    #[arg(long)]
    pub tcnot_us: Option<f64>,
    /// CSV output
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print CSV instead of a table on standard output
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// SOP or expanded Hamiltonian
    #[arg(short, long)]
    pub input: PathBuf,
    /// Grouping schemes to run
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme,
          default_value = "qwc,fc,qwc-mcr,fc-mcr")]
    pub scheme: Vec<GroupingScheme>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_T_CNOT_US)]
    pub tcnot_us: f64,
    #[arg(long, default_value = "default")]
    pub label: String,
    #[arg(long)]
    pub molecule: Option<String>,
    /// Seed that produced the input, recorded in the CSV header
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub drop_threshold: f64,
    #[arg(long, default_value_t = vibrometer_core::encode::DEFAULT_MAX_QUBITS)]
    pub max_qubits: usize,
    /// CSV output (standard output when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Directory receiving one grouping file per scheme
    #[arg(long)]
    pub groups_dir: Option<PathBuf>,
    /// Directory receiving one runtime report per scheme
    #[arg(long)]
    pub reports_dir: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> Result<GroupingScheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::ResourceCap { .. } | Error::Overflow(_) => 3,
                Error::Hermiticity(_) | Error::Invariant(_) => 4,
                _ => 2,
            };
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            anyhow::bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Expand(a) => commands::expand(a),
        Command::Encode(a) => commands::encode(a),
        Command::Group(a) => commands::group(a),
        Command::Variance(a) => commands::variance(a),
        Command::Plan(a) => commands::plan(a),
        Command::Report(a) => commands::report(a),
        Command::Pipeline(a) => commands::pipeline(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
