use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use hidebits_core::{QubitSubset, Representation, StateLabel};

#[derive(Debug, Parser)]
#[command(
    name = "hidebits",
    version,
    about = "Build, verify and attack the two-bit hiding states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the ensemble dump of one family state.
    Build(BuildArgs),
    /// Run the structural checks on a family size or a dump.
    Verify(VerifyArgs),
    /// Run an attack and write its report.
    Attack(AttackArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackKind {
    Parity,
    Coalition,
    Unlock,
    #[value(name = "random-locc")]
    RandomLocc,
}

fn parse_label(s: &str) -> Result<StateLabel, String> {
    s.parse().map_err(|e: hidebits_core::Error| e.to_string())
}

fn parse_repr(s: &str) -> Result<Representation, String> {
    s.parse().map_err(|e: hidebits_core::Error| e.to_string())
}

fn parse_subset(s: &str) -> Result<QubitSubset, String> {
    QubitSubset::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Number of qubits (one per party); even and at least 4.
    #[arg(long, env = "HIDEBITS_QUBITS", default_value_t = 4)]
    pub qubits: usize,
    /// Family label: rho+, rho-, sigma+ or sigma-.
    #[arg(long, env = "HIDEBITS_LABEL", value_parser = parse_label)]
    pub label: Option<StateLabel>,
    /// Hidden message b in 0..=3 (b = 2·group + sign).
    #[arg(long, env = "HIDEBITS_BITS", value_parser = clap::value_parser!(u8).range(0..4))]
    pub bits: Option<u8>,
    /// dense or sparse; dense by default up to 12 qubits.
    #[arg(long, env = "HIDEBITS_REPR", value_parser = parse_repr)]
    pub repr: Option<Representation>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, env = "HIDEBITS_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "HIDEBITS_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Also write the dense matrix (JSON only, n ≤ 12).
    #[arg(long, env = "HIDEBITS_WITH_DENSE")]
    pub with_dense: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["qubits", "input"])))]
pub struct VerifyArgs {
    /// Verify the whole family at this size.
    #[arg(long, env = "HIDEBITS_QUBITS")]
    pub qubits: Option<usize>,
    /// Verify a state dump written by `build`.
    #[arg(long, env = "HIDEBITS_INPUT")]
    pub input: Option<PathBuf>,
    #[arg(long, env = "HIDEBITS_TOL", default_value_t = hidebits_core::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(value_enum)]
    pub attack: AttackKind,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, env = "HIDEBITS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Trials (per strategy for random-locc).
    #[arg(long, env = "HIDEBITS_TRIALS")]
    pub trials: Option<u64>,
    #[arg(long, env = "HIDEBITS_TOL", default_value_t = hidebits_core::DEFAULT_TOL)]
    pub tol: f64,
    /// Coalition parties, e.g. 1,2,3.
    #[arg(long, env = "HIDEBITS_COALITION", value_parser = parse_subset)]
    pub coalition: Option<QubitSubset>,
    /// The two unlocking parties; defaults to the last two.
    #[arg(long, env = "HIDEBITS_PAIR", value_parser = parse_subset)]
    pub pair: Option<QubitSubset>,
    /// Number of sampled strategies for random-locc.
    #[arg(long, env = "HIDEBITS_STRATEGIES")]
    pub strategies: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
