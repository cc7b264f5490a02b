use std::fmt;
use std::fs;

use hidebits_core::analysis::{verification_suite, verify_ensemble, PropertyReport, SuiteOptions};
use hidebits_core::family::{closed_form, EnsembleDump};
use hidebits_core::linalg::DENSE_QUBIT_CAP;
use hidebits_core::protocols::{
    coalition_attack_with, hide, parity_attack, random_locc_attack, unlock_trials, RandomLoccConfig,
};
use hidebits_core::rng::RNG_ALGORITHM;
use hidebits_core::{
    AttackReport, DensityMatrix, Error, GhzEnsemble, QubitSubset, Representation, StateLabel,
    DEFAULT_EIG_TOL, VERSION,
};
use serde::Serialize;

use crate::args::{AttackArgs, AttackKind, BuildArgs, Format, OutputArgs, StateArgs, VerifyArgs};
use crate::output::{csv_rows, emit, json};

const DEFAULT_TRIALS: u64 = 10_000;
const DEFAULT_LOCC_TRIALS: u64 = 100;
const DEFAULT_STRATEGIES: u64 = 200;

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad input; exit code 2.
    Usage(String),
    /// A check or attack assertion failed, or the run broke; exit code 1.
    Failed(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Failed(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotHermitian { .. }
            | Error::NoConvergence { .. }
            | Error::Construction { .. } => Self::Failed(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Failed(format!("cannot write output: {e}"))
    }
}

fn resolve_label(state: &StateArgs) -> Result<StateLabel, Failure> {
    let from_bits = state.bits.map(StateLabel::from_message).transpose()?;
    match (state.label, from_bits) {
        (Some(a), Some(b)) if a != b => Err(Failure::Usage(format!(
            "--label {a} and --bits {} disagree",
            b.message()
        ))),
        (Some(a), _) => Ok(a),
        (None, Some(b)) => Ok(b),
        (None, None) => Ok(StateLabel::RhoPlus),
    }
}

fn resolve_repr(state: &StateArgs) -> Representation {
    state.repr.unwrap_or(if state.qubits <= DENSE_QUBIT_CAP {
        Representation::Dense
    } else {
        Representation::Sparse
    })
}

#[derive(Serialize)]
struct DenseDump {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl DenseDump {
    fn of(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        Self {
            dim: d,
            re: (0..d)
                .map(|r| (0..d).map(|c| rho.get(r, c).re).collect())
                .collect(),
            im: (0..d)
                .map(|r| (0..d).map(|c| rho.get(r, c).im).collect())
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct BuildOutput {
    #[serde(flatten)]
    dump: EnsembleDump,
    #[serde(skip_serializing_if = "Option::is_none")]
    dense: Option<DenseDump>,
}

pub fn build(args: &BuildArgs) -> Result<(), Failure> {
    let label = resolve_label(&args.state)?;
    let ensemble = closed_form(args.state.qubits, label)?;
    let dense = if args.with_dense || args.state.repr == Some(Representation::Dense) {
        Some(ensemble.to_dense()?)
    } else {
        None
    };
    if args.with_dense && args.output.format == Format::Csv {
        return Err(Failure::Usage(
            "the dense matrix is only written as JSON".into(),
        ));
    }
    let bytes = match args.output.format {
        Format::Json => {
            let out = BuildOutput {
                dump: ensemble.to_dump(),
                dense: dense
                    .filter(|_| args.with_dense)
                    .as_ref()
                    .map(DenseDump::of),
            };
            let mut bytes = serde_json::to_vec(&out).expect("serializable");
            bytes.push(b'\n');
            bytes
        }
        Format::Csv => csv_rows(&ensemble.to_dump().members)?,
    };
    emit(args.output.out.as_deref(), &bytes)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    n: usize,
    source: String,
    pass: bool,
    failed: usize,
    properties: &'a [PropertyReport],
    rng: &'static str,
    tool_version: &'static str,
    tolerance: f64,
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let (n, source, properties) = match (&args.input, args.qubits) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let ensemble = GhzEnsemble::from_json(&text)?;
            let reports = verify_ensemble(&ensemble, args.tol)?;
            (ensemble.n_qubits(), path.display().to_string(), reports)
        }
        (None, Some(n)) => {
            let reports = verification_suite(n, args.tol, SuiteOptions::for_size(n))?;
            (n, "closed form and recursion".to_string(), reports)
        }
        (None, None) => {
            return Err(Failure::Usage(
                "either --qubits or --input is required".into(),
            ))
        }
    };
    let failed = properties.iter().filter(|p| !p.pass).count();
    let bytes = match args.output.format {
        Format::Json => json(&VerifyReport {
            command: "verify",
            n,
            source,
            pass: failed == 0,
            failed,
            properties: &properties,
            rng: RNG_ALGORITHM,
            tool_version: VERSION,
            tolerance: args.tol,
        }),
        Format::Csv => csv_rows(&properties)?,
    };
    emit(args.output.out.as_deref(), &bytes)?;
    if failed > 0 {
        let names: Vec<String> = properties
            .iter()
            .filter(|p| !p.pass)
            .take(5)
            .map(|p| format!("{} [{}]", p.property, p.label))
            .collect();
        return Err(Failure::Failed(format!(
            "{failed} propert{} failed: {}",
            if failed == 1 { "y" } else { "ies" },
            names.join(", ")
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct AttackRow<'a> {
    attack: &'a str,
    n: usize,
    trials: u64,
    seed: u64,
    group: Option<f64>,
    sign: Option<f64>,
    overall: f64,
    analytic_bound: Option<f64>,
    rng: &'a str,
    tool_version: &'a str,
    tolerance: f64,
}

impl<'a> From<&'a AttackReport> for AttackRow<'a> {
    fn from(r: &'a AttackReport) -> Self {
        Self {
            attack: &r.attack,
            n: r.n,
            trials: r.trials,
            seed: r.seed,
            group: r.per_bit.map(|p| p.group),
            sign: r.per_bit.map(|p| p.sign),
            overall: r.overall,
            analytic_bound: r.analytic_bound,
            rng: &r.rng,
            tool_version: &r.tool_version,
            tolerance: r.tolerance,
        }
    }
}

fn write_report(report: &AttackReport, output: &OutputArgs) -> Result<(), Failure> {
    let bytes = match output.format {
        Format::Json => json(report),
        Format::Csv => csv_rows(&[AttackRow::from(report)])?,
    };
    emit(output.out.as_deref(), &bytes)?;
    Ok(())
}

pub fn attack(args: &AttackArgs) -> Result<(), Failure> {
    let n = args.state.qubits;
    let label = resolve_label(&args.state)?;
    let repr = resolve_repr(&args.state);
    if args.trials == Some(0) {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let (report, check) = match args.attack {
        AttackKind::Parity => {
            let instance = hide(label.message(), n, repr)?;
            let r = parity_attack(&instance, args.trials.unwrap_or(DEFAULT_TRIALS), args.seed)?;
            let ok =
                r.metrics["wrong_parity_mass"] == 0.0 && r.per_bit.is_some_and(|p| p.group == 1.0);
            (
                r,
                ok.then_some(())
                    .ok_or("group bit was not recovered exactly"),
            )
        }
        AttackKind::Coalition => {
            let coalition = args
                .coalition
                .as_ref()
                .ok_or_else(|| Failure::Usage("coalition needs --coalition, e.g. 1,2,3".into()))?;
            let instance = hide(label.message(), n, repr)?;
            let r = coalition_attack_with(&instance, coalition, args.tol)?;
            let ok = r.overall == 0.25;
            (
                r,
                ok.then_some(()).ok_or("reduced states are distinguishable"),
            )
        }
        AttackKind::Unlock => {
            let pair = match &args.pair {
                Some(p) => p.clone(),
                None => QubitSubset::pair(n.saturating_sub(1).max(1), n.max(2))?,
            };
            let instance = hide(label.message(), n, repr)?;
            let mut r = unlock_trials(
                &instance,
                &pair,
                args.trials.unwrap_or(DEFAULT_TRIALS),
                args.seed,
            )?;
            r.tolerance = DEFAULT_EIG_TOL;
            let ok = r.overall == 1.0;
            (
                r,
                ok.then_some(())
                    .ok_or("a residual did not match its prediction"),
            )
        }
        AttackKind::RandomLocc => {
            let config = RandomLoccConfig::new(
                n,
                args.strategies.unwrap_or(DEFAULT_STRATEGIES),
                args.trials.unwrap_or(DEFAULT_LOCC_TRIALS),
            );
            let r = random_locc_attack(&config, args.seed)?;
            let ok = r.metrics["best_exact_overall"] <= 0.5 + args.tol;
            (
                r,
                ok.then_some(())
                    .ok_or("a sampled strategy beat the parity strategy"),
            )
        }
    };
    write_report(&report, &args.output)?;
    check.map_err(|m| Failure::Failed(m.into()))
}
