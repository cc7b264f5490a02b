//! The two-cbit hiding protocol: hiding, the global reveal, and the attacks
//! (σ_z parity, coalition, Bell unlocking, sampled adaptive LOCC).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{
    bell_projector, check_family_size, closed_form, compose, sparse_overlap, BellLabel,
    GhzEnsemble, StateLabel,
};
use crate::linalg::{
    overlap, partial_trace_op, trace_distance, von_neumann_entropy, DensityMatrix, Operator,
    QubitSubset, DEFAULT_TOL, DENSE_QUBIT_CAP,
};
use crate::measurement::{
    assign_ml_guesses, bell_branches, bell_measure_pair, exact_success, likelihood_table,
    run_strategy, AdaptiveStrategy, LeafGuess, SingleQubitBasis, StrategyNode, SuccessProfile,
    TranscriptBasis, TranscriptEntry, TranscriptOutcome, TranscriptParty,
};
use crate::rng::{stream_rng, RNG_ALGORITHM};

/// Transcripts kept per report.
pub const TRANSCRIPT_SAMPLE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dense,
    Sparse,
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "sparse" => Ok(Self::Sparse),
            other => Err(Error::Parse(format!("unknown representation '{other}'"))),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dense => "dense",
            Self::Sparse => "sparse",
        })
    }
}

#[derive(Debug, Clone)]
pub enum InstanceState {
    Dense(DensityMatrix),
    Sparse(GhzEnsemble),
}

/// One run of the hiding protocol.
#[derive(Debug, Clone)]
pub struct HiddenInstance {
    n_qubits: usize,
    bits: u8,
    label: StateLabel,
    state: InstanceState,
    /// Party id to qubit index; party i holds qubit i.
    registry: BTreeMap<usize, usize>,
}

/// Hides the message `b` among `n` parties.
pub fn hide(b: u8, n: usize, repr: Representation) -> Result<HiddenInstance> {
    let label = StateLabel::from_message(b)?;
    check_family_size(n)?;
    let ensemble = closed_form(n, label)?;
    let state = match repr {
        Representation::Dense => InstanceState::Dense(ensemble.to_dense()?),
        Representation::Sparse => InstanceState::Sparse(ensemble),
    };
    Ok(HiddenInstance {
        n_qubits: n,
        bits: b,
        label,
        state,
        registry: (1..=n).map(|i| (i, i)).collect(),
    })
}

impl HiddenInstance {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn label(&self) -> StateLabel {
        self.label
    }

    pub fn state(&self) -> &InstanceState {
        &self.state
    }

    pub fn registry(&self) -> &BTreeMap<usize, usize> {
        &self.registry
    }

    pub fn representation(&self) -> Representation {
        match self.state {
            InstanceState::Dense(_) => Representation::Dense,
            InstanceState::Sparse(_) => Representation::Sparse,
        }
    }

    pub fn dense(&self) -> Option<&DensityMatrix> {
        match &self.state {
            InstanceState::Dense(d) => Some(d),
            InstanceState::Sparse(_) => None,
        }
    }

    fn dense_required(&self) -> Result<&DensityMatrix> {
        self.dense()
            .ok_or_else(|| Error::Domain("this operation needs the dense representation".into()))
    }

    fn check_party(&self, q: usize) -> Result<()> {
        if self.registry.contains_key(&q) {
            Ok(())
        } else {
            Err(Error::InvalidSubset(format!(
                "party {q} is not among the {} parties",
                self.n_qubits
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RevealOutcome {
    Recovered(u8),
    /// Several candidates share the largest overlap.
    Inconclusive(Vec<u8>),
}

fn argmax_overlaps(overlaps: [f64; 4]) -> RevealOutcome {
    let best = overlaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<u8> = (0..4u8)
        .filter(|&b| overlaps[b as usize] >= best - DEFAULT_TOL)
        .collect();
    if tied.len() == 1 {
        RevealOutcome::Recovered(tied[0])
    } else {
        RevealOutcome::Inconclusive(tied)
    }
}

/// Global measurement: the candidate with the largest overlap.
pub fn reveal_global(instance: &HiddenInstance) -> Result<RevealOutcome> {
    match &instance.state {
        InstanceState::Dense(d) => reveal_state(d),
        InstanceState::Sparse(e) => {
            let mut overlaps = [0.0; 4];
            for label in StateLabel::ALL {
                let candidate = closed_form(e.n_qubits(), label)?;
                overlaps[label.message() as usize] = sparse_overlap(&candidate, e)?;
            }
            Ok(argmax_overlaps(overlaps))
        }
    }
}

/// [`reveal_global`] for an arbitrary dense state on an even n ≥ 4.
pub fn reveal_state(state: &Operator) -> Result<RevealOutcome> {
    let n = state.n_qubits();
    check_family_size(n)?;
    let mut overlaps = [0.0; 4];
    for label in StateLabel::ALL {
        let candidate = closed_form(n, label)?.to_dense()?;
        overlaps[label.message() as usize] = overlap(&candidate, state)?;
    }
    Ok(argmax_overlaps(overlaps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerBit {
    pub group: f64,
    pub sign: f64,
}

/// Outcome of an attack. Field order is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub per_bit: Option<PerBit>,
    pub overall: f64,
    pub analytic_bound: Option<f64>,
    pub notes: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub transcripts: Vec<Vec<TranscriptEntry>>,
    pub rng: String,
    pub tool_version: String,
    pub tolerance: f64,
}

impl AttackReport {
    fn new(attack: &str, n: usize, trials: u64, seed: u64) -> Self {
        Self {
            attack: attack.into(),
            n,
            trials,
            seed,
            per_bit: None,
            overall: 0.0,
            analytic_bound: None,
            notes: Vec::new(),
            metrics: BTreeMap::new(),
            transcripts: Vec::new(),
            rng: RNG_ALGORITHM.into(),
            tool_version: crate::VERSION.into(),
            tolerance: DEFAULT_TOL,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Success counts; merged by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    group: u64,
    sign: u64,
    overall: u64,
}

impl Tally {
    fn record(&mut self, guess: u8, truth: u8) {
        self.trials += 1;
        self.group += u64::from(guess >> 1 == truth >> 1);
        self.sign += u64::from(guess & 1 == truth & 1);
        self.overall += u64::from(guess == truth);
    }

    fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            group: self.group + other.group,
            sign: self.sign + other.sign,
            overall: self.overall + other.overall,
        }
    }

    fn frequencies(&self) -> (f64, f64, f64) {
        let t = self.trials as f64;
        (
            self.group as f64 / t,
            self.sign as f64 / t,
            self.overall as f64 / t,
        )
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    Ok(())
}

/// Full σ_z outcome distribution, sampled either from a dense diagonal or
/// from the ensemble.
enum ZSampler<'a> {
    Dense { n: usize, cumulative: Vec<f64> },
    Sparse(&'a GhzEnsemble),
}

impl<'a> ZSampler<'a> {
    fn new(instance: &'a HiddenInstance) -> Self {
        match &instance.state {
            InstanceState::Dense(d) => {
                let mut acc = 0.0;
                let cumulative = d
                    .diagonal()
                    .into_iter()
                    .map(|p| {
                        acc += p.max(0.0);
                        acc
                    })
                    .collect();
                Self::Dense {
                    n: d.n_qubits(),
                    cumulative,
                }
            }
            InstanceState::Sparse(e) => Self::Sparse(e),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Self::Dense { cumulative, .. } => {
                let u = rng.gen::<f64>() * cumulative.last().copied().unwrap_or(0.0);
                cumulative.partition_point(|&c| c <= u) as u64
            }
            Self::Sparse(e) => e.sample_z_string(rng),
        }
    }

    /// Probability that the first `k` outcome bits equal those of `x`.
    fn prefix_probability(&self, x: u64, k: usize) -> f64 {
        match self {
            Self::Dense { n, cumulative } => {
                let shift = n - k;
                let lo = ((x >> shift) << shift) as usize;
                let hi = lo + (1usize << shift);
                let below = if lo == 0 { 0.0 } else { cumulative[lo - 1] };
                cumulative[hi - 1] - below
            }
            // Outcomes are uniform over one parity class, so every prefix
            // shorter than n is equally likely.
            Self::Sparse(e) if k < e.n_qubits() => 0.5f64.powi(k as i32),
            Self::Sparse(e) => 0.5f64.powi(e.n_qubits() as i32 - 1),
        }
    }

    fn transcript(&self, x: u64, n: usize) -> Vec<TranscriptEntry> {
        (1..=n)
            .map(|q| {
                let bit = ((x >> (n - q)) & 1) as u8;
                let p = self.prefix_probability(x, q) / self.prefix_probability(x, q - 1);
                TranscriptEntry {
                    party: TranscriptParty::Single(q),
                    basis: TranscriptBasis::Angles {
                        theta: 0.0,
                        phi: 0.0,
                    },
                    outcome: TranscriptOutcome::Bit(bit),
                    probability: p,
                }
            })
            .collect()
    }
}

/// Every party measures σ_z; the weight parity of the outcome string is the
/// guessed group bit, the sign bit is a fair coin.
pub fn parity_attack(instance: &HiddenInstance, trials: u64, seed: u64) -> Result<AttackReport> {
    check_trials(trials)?;
    let n = instance.n_qubits;
    let truth = instance.bits;
    let group = instance.label.group_bit();
    let sampler = ZSampler::new(instance);

    // Support check: a string of the wrong parity must have zero probability.
    let support_leak = match &sampler {
        ZSampler::Dense { cumulative, .. } => {
            let mut prev = 0.0;
            let mut leak: f64 = 0.0;
            for (x, &c) in cumulative.iter().enumerate() {
                if (x.count_ones() % 2) as u8 != group {
                    leak += c - prev;
                }
                prev = c;
            }
            leak
        }
        ZSampler::Sparse(e) => {
            let wrong = e
                .members()
                .iter()
                .filter(|m| (m.bits.count_ones() % 2) as u8 != group)
                .count();
            wrong as f64 * e.weight()
        }
    };

    let tally = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let x = sampler.sample(&mut rng);
            let g = (x.count_ones() % 2) as u8;
            let s = u8::from(rng.gen::<bool>());
            let mut tally = Tally::default();
            tally.record(2 * g + s, truth);
            tally
        })
        .reduce(Tally::default, Tally::merge);

    let (fg, fs, fo) = tally.frequencies();
    let mut report = AttackReport::new("parity", n, trials, seed);
    report.per_bit = Some(PerBit {
        group: fg,
        sign: fs,
    });
    report.overall = fo;
    report.analytic_bound = Some(0.5);
    report.notes.push(format!(
        "hidden b = {truth} ({}); sign bit guessed by a fair coin",
        instance.label
    ));
    report
        .notes
        .push("analytic bound is the exact overall success of this strategy".into());
    report.metrics.insert(
        "group_exact".into(),
        if support_leak == 0.0 {
            1.0
        } else {
            1.0 - support_leak
        },
    );
    report
        .metrics
        .insert("wrong_parity_mass".into(), support_leak);
    report.transcripts = (0..trials.min(TRANSCRIPT_SAMPLE as u64))
        .map(|t| sampler.transcript(sampler.sample(&mut stream_rng(seed, t)), n))
        .collect();
    Ok(report)
}

/// The coalition holds `coalition` and nothing else; it faces the four
/// reduced states. Computed exactly from the reductions.
pub fn coalition_attack(
    instance: &HiddenInstance,
    coalition: &QubitSubset,
) -> Result<AttackReport> {
    coalition_attack_with(instance, coalition, DEFAULT_TOL)
}

/// [`coalition_attack`] treating reduced states closer than `tol` as equal.
pub fn coalition_attack_with(
    instance: &HiddenInstance,
    coalition: &QubitSubset,
    tol: f64,
) -> Result<AttackReport> {
    let n = instance.n_qubits;
    coalition.check(n)?;
    if coalition.is_empty() {
        return Err(Error::InvalidSubset("the coalition is empty".into()));
    }
    if coalition.len() == n {
        return Err(Error::InvalidSubset(
            "a coalition of every party is the global reveal, not an attack".into(),
        ));
    }
    let traced = coalition.complement(n);
    let reduced: Vec<Reduced> = StateLabel::ALL
        .iter()
        .map(|&l| Reduced::of(instance, l, coalition, &traced))
        .collect::<Result<_>>()?;

    let mut report = AttackReport::new("coalition", n, 1, 0);
    report.tolerance = tol;
    let mut distances = [[0.0; 4]; 4];
    let mut max_td: f64 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = reduced[i].distance(&reduced[j])?;
            distances[i][j] = d;
            distances[j][i] = d;
            max_td = max_td.max(d);
            report.metrics.insert(
                format!("td_{}_{}", StateLabel::ALL[i], StateLabel::ALL[j]),
                d,
            );
        }
    }
    report
        .metrics
        .insert("max_pairwise_trace_distance".into(), max_td);

    if max_td < report.tolerance {
        report.per_bit = Some(PerBit {
            group: 0.5,
            sign: 0.5,
        });
        report.overall = 0.25;
        report.analytic_bound = Some(0.25);
        report
            .notes
            .push("reduced states identical within tolerance: the best guess is uniform".into());
    } else {
        let group = 0.5 + 0.5 * Reduced::mixture_distance(&reduced, [0, 1], [2, 3])?;
        let sign = 0.5 + 0.5 * Reduced::mixture_distance(&reduced, [0, 2], [1, 3])?;
        let bound = (0..4)
            .map(|r| {
                (1.0 + (0..4)
                    .filter(|&i| i != r)
                    .map(|i| distances[r][i])
                    .sum::<f64>())
                    / 4.0
            })
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        report.per_bit = Some(PerBit { group, sign });
        report.overall = bound;
        report.analytic_bound = Some(bound);
        report
            .notes
            .push("reduced states differ: overall is an upper bound on the optimal guess".into());
    }
    report.notes.push(format!(
        "coalition {{{}}} acts alone on its reduced state",
        coalition
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    Ok(report)
}

/// A reduced state, dense or known to be diagonal.
enum Reduced {
    Dense(Operator),
    Diagonal(Vec<f64>),
}

impl Reduced {
    fn of(
        instance: &HiddenInstance,
        label: StateLabel,
        keep: &QubitSubset,
        traced: &QubitSubset,
    ) -> Result<Self> {
        let n = instance.n_qubits;
        let ensemble = closed_form(n, label)?;
        if instance.representation() == Representation::Dense && n <= DENSE_QUBIT_CAP {
            Ok(Self::Dense(partial_trace_op(
                ensemble.to_dense()?.as_operator(),
                traced,
            )?))
        } else {
            Ok(Self::Diagonal(ensemble.reduced_diagonal(keep)?))
        }
    }

    fn distance(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (Self::Dense(a), Self::Dense(b)) => trace_distance(a, b),
            (Self::Diagonal(a), Self::Diagonal(b)) => {
                Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
            }
            _ => Err(Error::Contract("mixed reduced representations".into())),
        }
    }

    /// Trace distance between the equal mixtures of two label pairs.
    fn mixture_distance(all: &[Reduced], a: [usize; 2], b: [usize; 2]) -> Result<f64> {
        match (&all[a[0]], &all[a[1]], &all[b[0]], &all[b[1]]) {
            (Self::Dense(a0), Self::Dense(a1), Self::Dense(b0), Self::Dense(b1)) => {
                trace_distance(&a0.add(a1)?.scale(0.5), &b0.add(b1)?.scale(0.5))
            }
            (Self::Diagonal(a0), Self::Diagonal(a1), Self::Diagonal(b0), Self::Diagonal(b1)) => {
                Ok(0.25
                    * (0..a0.len())
                        .map(|x| (a0[x] + a1[x] - b0[x] - b1[x]).abs())
                        .sum::<f64>())
            }
            _ => Err(Error::Contract("mixed reduced representations".into())),
        }
    }
}

/// What the residual state after a Bell measurement is predicted to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualClaim {
    /// Family member on n − 2 qubits.
    Family(StateLabel),
    /// Pure Bell pair left on the other two parties (n = 4).
    Bell(BellLabel),
}

impl ResidualClaim {
    fn predict(n: usize, label: StateLabel, outcome: BellLabel) -> Self {
        let child = compose(label, outcome);
        if n == 4 {
            Self::Bell(child.as_bell())
        } else {
            Self::Family(child)
        }
    }

    fn state(&self, n_residual: usize) -> Result<DensityMatrix> {
        match self {
            Self::Family(l) => closed_form(n_residual, *l)?.to_dense(),
            Self::Bell(b) => Ok(bell_projector(*b)),
        }
    }
}

impl fmt::Display for ResidualClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Family(l) => write!(f, "{l}"),
            Self::Bell(b) => write!(f, "P[{b}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnlockOutcome {
    pub outcome: BellLabel,
    pub probability: f64,
    pub claim: ResidualClaim,
    /// Trace distance between the measured residual and the claim.
    pub deviation: f64,
    pub verified: bool,
    /// Entanglement entropy of the residual pair, in ebits (n = 4 only).
    pub entropy: Option<f64>,
}

fn check_pair(instance: &HiddenInstance, pair: &QubitSubset) -> Result<()> {
    if pair.len() != 2 {
        return Err(Error::InvalidSubset(
            "unlocking needs exactly two parties".into(),
        ));
    }
    for q in pair.iter() {
        instance.check_party(q)?;
    }
    Ok(())
}

fn residual_entropy(residual: &DensityMatrix) -> Result<f64> {
    von_neumann_entropy(&partial_trace_op(residual, &QubitSubset::single(2)?)?)
}

/// The two parties in `pair` meet and Bell-measure their qubits; the rest
/// are left with the predicted residual.
pub fn unlock_pair(
    instance: &HiddenInstance,
    pair: &QubitSubset,
    seed: u64,
) -> Result<UnlockOutcome> {
    check_pair(instance, pair)?;
    let state = instance.dense_required()?;
    let n = instance.n_qubits;
    let (outcome, record) = bell_measure_pair(state, pair, &mut stream_rng(seed, 0))?;
    let claim = ResidualClaim::predict(n, instance.label, outcome);
    let deviation = trace_distance(&record.post_state, claim.state(n - 2)?.as_operator())?;
    let entropy = match claim {
        ResidualClaim::Bell(_) => Some(residual_entropy(&record.post_state)?),
        ResidualClaim::Family(_) => None,
    };
    Ok(UnlockOutcome {
        outcome,
        probability: record.probability,
        claim,
        deviation,
        verified: deviation < crate::linalg::DEFAULT_EIG_TOL,
        entropy,
    })
}

/// Branch drawn by trial `t`; zero-probability branches are never chosen.
fn pick_branch(probs: &[f64], total: f64, seed: u64, t: u64) -> usize {
    let u = stream_rng(seed, t).gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Repeats [`unlock_pair`] over seeded trials. The four branches are
/// computed and verified once; each trial samples one of them.
pub fn unlock_trials(
    instance: &HiddenInstance,
    pair: &QubitSubset,
    trials: u64,
    seed: u64,
) -> Result<AttackReport> {
    check_trials(trials)?;
    check_pair(instance, pair)?;
    let state = instance.dense_required()?;
    let n = instance.n_qubits;
    let branches = bell_branches(state, pair)?;

    let mut claims = Vec::with_capacity(4);
    for branch in &branches {
        let claim = ResidualClaim::predict(n, instance.label, branch.outcome);
        let checked = match &branch.residual {
            Some(r) => {
                let d = trace_distance(r, claim.state(n - 2)?.as_operator())?;
                let entropy = match claim {
                    ResidualClaim::Bell(_) => Some(residual_entropy(r)?),
                    ResidualClaim::Family(_) => None,
                };
                Some((d, entropy))
            }
            None => None,
        };
        claims.push((claim, checked));
    }

    let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let total: f64 = probs.iter().sum();
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut c = [0u64; 4];
            c[pick_branch(&probs, total, seed, t)] += 1;
            c
        })
        .reduce(
            || [0u64; 4],
            |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]],
        );

    let mut report = AttackReport::new("unlock", n, trials, seed);
    let mut verified_runs = 0u64;
    let mut max_dev: f64 = 0.0;
    for (k, branch) in branches.iter().enumerate() {
        let name = branch.outcome.name();
        report
            .metrics
            .insert(format!("freq_{name}"), counts[k] as f64 / trials as f64);
        report
            .metrics
            .insert(format!("prob_{name}"), branch.probability);
        if let Some((d, entropy)) = claims[k].1 {
            max_dev = max_dev.max(d);
            if d < crate::linalg::DEFAULT_EIG_TOL {
                verified_runs += counts[k];
            }
            report.metrics.insert(format!("residual_td_{name}"), d);
            if let Some(e) = entropy {
                report.metrics.insert(format!("entropy_{name}"), e);
            }
        }
    }
    report
        .metrics
        .insert("max_residual_trace_distance".into(), max_dev);
    report.overall = verified_runs as f64 / trials as f64;
    report.notes.push(format!(
        "parties {{{}}} Bell-measure {}; overall is the fraction of runs whose residual matched the prediction",
        pair.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
        instance.label
    ));
    for (k, branch) in branches.iter().enumerate() {
        report
            .notes
            .push(format!("{} -> {}", branch.outcome, claims[k].0));
    }
    report.transcripts = (0..trials.min(TRANSCRIPT_SAMPLE as u64))
        .map(|t| {
            let k = pick_branch(&probs, total, seed, t);
            vec![TranscriptEntry::bell(pair, branches[k].outcome, probs[k])]
        })
        .collect();
    Ok(report)
}

/// Settings for the sampled adaptive-LOCC attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomLoccConfig {
    pub n: usize,
    pub strategies: u64,
    /// Runs per strategy; the hidden message is drawn uniformly per run.
    pub trials: u64,
    /// Chance that a sampled basis is replaced by σ_x, σ_y or σ_z.
    pub pauli_snap: f64,
    /// Adds the parity strategy and σ_z-completed random trees.
    pub include_parity: bool,
    /// Defaults to n.
    pub max_depth: Option<usize>,
}

impl RandomLoccConfig {
    pub fn new(n: usize, strategies: u64, trials: u64) -> Self {
        Self {
            n,
            strategies,
            trials,
            pauli_snap: 0.25,
            include_parity: true,
            max_depth: None,
        }
    }
}

fn sample_basis<R: Rng + ?Sized>(rng: &mut R, pauli_snap: f64) -> SingleQubitBasis {
    if rng.gen::<f64>() < pauli_snap {
        match rng.gen_range(0..3) {
            0 => SingleQubitBasis::x(),
            1 => SingleQubitBasis::y(),
            _ => SingleQubitBasis::z(),
        }
    } else {
        SingleQubitBasis::random(rng)
    }
}

/// A random tree: each node picks an unused party and a basis, children are
/// sampled independently so later bases depend on earlier outcomes. With
/// `complete_with_z`, every remaining party then measures σ_z.
fn sample_tree<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    depth: usize,
    pauli_snap: f64,
    complete_with_z: bool,
) -> AdaptiveStrategy {
    fn build<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        remaining: usize,
        used: &mut Vec<usize>,
        pauli_snap: f64,
        complete_with_z: bool,
    ) -> StrategyNode {
        let free: Vec<usize> = (1..=n).filter(|q| !used.contains(q)).collect();
        if free.is_empty() || (remaining == 0 && !complete_with_z) {
            return StrategyNode::Leaf(LeafGuess::Fixed(0));
        }
        let (party, basis) = if remaining == 0 {
            (free[0], SingleQubitBasis::z())
        } else {
            (
                free[rng.gen_range(0..free.len())],
                sample_basis(rng, pauli_snap),
            )
        };
        used.push(party);
        let next = remaining.saturating_sub(1);
        let a = build(rng, n, next, used, pauli_snap, complete_with_z);
        let b = build(rng, n, next, used, pauli_snap, complete_with_z);
        used.pop();
        StrategyNode::Measure {
            party,
            basis,
            children: Box::new([a, b]),
        }
    }
    AdaptiveStrategy {
        root: build(rng, n, depth, &mut Vec::new(), pauli_snap, complete_with_z),
    }
}

struct StrategyResult {
    tally: Tally,
    exact: SuccessProfile,
    transcripts: Vec<Vec<TranscriptEntry>>,
}

fn evaluate_strategy(
    mut strategy: AdaptiveStrategy,
    states: &[DensityMatrix],
    trials: u64,
    seed: u64,
    stream_base: u64,
    keep_transcripts: bool,
) -> Result<StrategyResult> {
    let refs = [
        states[0].as_operator(),
        states[1].as_operator(),
        states[2].as_operator(),
        states[3].as_operator(),
    ];
    let table = likelihood_table(&strategy, &refs)?;
    assign_ml_guesses(&mut strategy, &table);
    let exact = exact_success(&strategy, &table);
    let mut tally = Tally::default();
    let mut transcripts = Vec::new();
    for t in 0..trials {
        let mut rng = stream_rng(seed, stream_base + t);
        let truth = rng.gen_range(0..4u8);
        let run = run_strategy(&states[truth as usize], &strategy, &mut rng)?;
        tally.record(run.guess, truth);
        if keep_transcripts && transcripts.len() < TRANSCRIPT_SAMPLE {
            transcripts.push(run.transcript);
        }
    }
    Ok(StrategyResult {
        tally,
        exact,
        transcripts,
    })
}

/// Samples adaptive single-qubit measurement trees, gives each its
/// maximum-likelihood leaf guesses and runs it against a uniformly drawn
/// hidden message. Reports the best frequencies observed.
pub fn random_locc_attack(config: &RandomLoccConfig, seed: u64) -> Result<AttackReport> {
    check_trials(config.trials)?;
    if config.strategies == 0 {
        return Err(Error::Domain("at least one strategy is needed".into()));
    }
    let n = config.n;
    check_family_size(n)?;
    let max_depth = config.max_depth.unwrap_or(n).min(n);
    if !(0.0..=1.0).contains(&config.pauli_snap) {
        return Err(Error::Domain("pauli_snap must lie in [0, 1]".into()));
    }
    let states: Vec<DensityMatrix> = StateLabel::ALL
        .iter()
        .map(|&l| closed_form(n, l)?.to_dense())
        .collect::<Result<_>>()?;

    // Stream k generates strategy k; its runs use streams above the block
    // reserved for generation.
    let total = config.strategies;
    let results: Vec<StrategyResult> = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let strategy = if config.include_parity && k == 0 {
                AdaptiveStrategy::parity(n)
            } else {
                let depth = rng.gen_range(0..=max_depth);
                let complete = config.include_parity && k % 2 == 1;
                sample_tree(&mut rng, n, depth, config.pauli_snap, complete)
            };
            let base = total + k * config.trials;
            evaluate_strategy(strategy, &states, config.trials, seed, base, k == 0)
        })
        .collect::<Result<_>>()?;

    let mut best = (0.0f64, 0.0f64, 0.0f64);
    let mut best_exact = SuccessProfile {
        group: 0.0,
        sign: 0.0,
        overall: 0.0,
    };
    let mut pooled = Tally::default();
    for r in &results {
        let (g, s, o) = r.tally.frequencies();
        best = (best.0.max(g), best.1.max(s), best.2.max(o));
        best_exact.group = best_exact.group.max(r.exact.group);
        best_exact.sign = best_exact.sign.max(r.exact.sign);
        best_exact.overall = best_exact.overall.max(r.exact.overall);
        pooled = pooled.merge(r.tally);
    }
    let (pg, ps, po) = pooled.frequencies();

    let mut report = AttackReport::new("random-locc", n, config.trials, seed);
    report.per_bit = Some(PerBit {
        group: best.0,
        sign: best.1,
    });
    report.overall = best.2;
    report.metrics.insert("strategies".into(), total as f64);
    report
        .metrics
        .insert("pauli_snap".into(), config.pauli_snap);
    report.metrics.insert("max_depth".into(), max_depth as f64);
    report
        .metrics
        .insert("best_exact_group".into(), best_exact.group);
    report
        .metrics
        .insert("best_exact_sign".into(), best_exact.sign);
    report
        .metrics
        .insert("best_exact_overall".into(), best_exact.overall);
    report.metrics.insert("pooled_group".into(), pg);
    report.metrics.insert("pooled_sign".into(), ps);
    report.metrics.insert("pooled_overall".into(), po);
    report.notes.push(
        "per_bit and overall are the largest frequencies observed over the sampled strategies"
            .into(),
    );
    report.notes.push(
        "a maximum over many sampled frequencies is biased upward by noise; best_exact_* metrics are noise-free"
            .into(),
    );
    report.notes.push(
        "strategies are adaptive single-qubit projective trees, a strict subclass of LOCC; no upper bound is asserted"
            .into(),
    );
    if config.include_parity {
        report.notes.push(
            "strategy 0 is the parity strategy; odd strategies finish with σ_z on every unmeasured party"
                .into(),
        );
    }
    report.transcripts = results[0].transcripts.clone();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hide_picks_label_and_registry() {
        let inst = hide(0, 4, Representation::Dense).unwrap();
        assert_eq!(inst.label(), StateLabel::RhoPlus);
        assert_eq!(inst.registry().len(), 4);
        assert_eq!(
            hide(3, 6, Representation::Dense).unwrap().label(),
            StateLabel::SigmaMinus
        );
        assert!(hide(4, 4, Representation::Dense).is_err());
        assert!(matches!(
            hide(0, 14, Representation::Dense),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn sparse_hide_at_twenty_qubits() {
        let inst = hide(1, 20, Representation::Sparse).unwrap();
        match inst.state() {
            InstanceState::Sparse(e) => assert_eq!(e.members().len(), 1 << 18),
            InstanceState::Dense(_) => panic!("dense state built"),
        }
    }

    #[test]
    fn reveal_recovers_message() {
        for b in 0..4 {
            let inst = hide(b, 4, Representation::Dense).unwrap();
            assert_eq!(reveal_global(&inst).unwrap(), RevealOutcome::Recovered(b));
            let inst = hide(b, 10, Representation::Sparse).unwrap();
            assert_eq!(reveal_global(&inst).unwrap(), RevealOutcome::Recovered(b));
        }
    }

    #[test]
    fn reveal_on_maximally_mixed_is_inconclusive() {
        let mm = DensityMatrix::maximally_mixed(4).unwrap();
        assert_eq!(
            reveal_state(&mm).unwrap(),
            RevealOutcome::Inconclusive(vec![0, 1, 2, 3])
        );
    }

    #[test]
    fn parity_attack_group_exact() {
        for repr in [Representation::Dense, Representation::Sparse] {
            let inst = hide(3, 4, repr).unwrap();
            let r = parity_attack(&inst, 2000, 7).unwrap();
            let pb = r.per_bit.unwrap();
            assert_eq!(pb.group, 1.0);
            assert!((pb.sign - 0.5).abs() < 0.05);
            assert_eq!(r.metrics["wrong_parity_mass"], 0.0);
            assert_eq!(r.transcripts.len(), TRANSCRIPT_SAMPLE);
            let last = r.transcripts[0].last().unwrap();
            assert!((last.probability - 1.0).abs() < 1e-12);
        }
        assert!(parity_attack(&hide(0, 4, Representation::Dense).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn parity_attack_is_deterministic() {
        let inst = hide(1, 6, Representation::Dense).unwrap();
        let a = parity_attack(&inst, 500, 9).unwrap();
        let b = parity_attack(&inst, 500, 9).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn coalition_sees_nothing() {
        let inst = hide(0, 4, Representation::Dense).unwrap();
        let r = coalition_attack(&inst, &QubitSubset::parse("1,2,3").unwrap()).unwrap();
        assert_eq!(r.overall, 0.25);
        assert!(r.metrics["max_pairwise_trace_distance"] < 1e-10);
        assert!(coalition_attack(&inst, &QubitSubset::all(4)).is_err());
        let inst = hide(2, 14, Representation::Sparse).unwrap();
        let r = coalition_attack(&inst, &QubitSubset::parse("2,5,9").unwrap()).unwrap();
        assert_eq!(r.overall, 0.25);
    }

    #[test]
    fn unlock_six_qubits() {
        let inst = hide(0, 6, Representation::Dense).unwrap();
        let out = unlock_pair(&inst, &QubitSubset::pair(5, 6).unwrap(), 3).unwrap();
        assert!(out.verified, "deviation {}", out.deviation);
        assert_eq!(
            out.claim,
            ResidualClaim::Family(compose(StateLabel::RhoPlus, out.outcome))
        );
        assert!(out.entropy.is_none());
    }

    #[test]
    fn unlock_four_qubits_leaves_a_bell_pair() {
        let inst = hide(0, 4, Representation::Dense).unwrap();
        for seed in 0..8 {
            let out = unlock_pair(&inst, &QubitSubset::pair(1, 2).unwrap(), seed).unwrap();
            assert!(out.verified);
            assert_eq!(out.claim, ResidualClaim::Bell(out.outcome));
            assert!((out.entropy.unwrap() - 1.0).abs() < 1e-9);
        }
        let sparse = hide(0, 4, Representation::Sparse).unwrap();
        assert!(unlock_pair(&sparse, &QubitSubset::pair(1, 2).unwrap(), 0).is_err());
        assert!(unlock_pair(&inst, &QubitSubset::pair(1, 5).unwrap(), 0).is_err());
    }

    #[test]
    fn unlock_trials_report() {
        let inst = hide(2, 6, Representation::Dense).unwrap();
        let r = unlock_trials(&inst, &QubitSubset::pair(2, 4).unwrap(), 1000, 5).unwrap();
        assert_eq!(r.overall, 1.0);
        for b in BellLabel::ALL {
            assert!((r.metrics[&format!("freq_{}", b.name())] - 0.25).abs() < 0.06);
        }
    }

    #[test]
    fn zero_depth_strategies_score_a_quarter() {
        let mut cfg = RandomLoccConfig::new(4, 3, 10);
        cfg.include_parity = false;
        cfg.max_depth = Some(0);
        let r = random_locc_attack(&cfg, 1).unwrap();
        assert!((r.metrics["best_exact_overall"] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn random_locc_includes_parity() {
        let cfg = RandomLoccConfig::new(4, 8, 50);
        let r = random_locc_attack(&cfg, 42).unwrap();
        assert_eq!(r.per_bit.unwrap().group, 1.0);
        assert!(r.metrics["best_exact_overall"] <= 0.5 + 1e-9);
        assert_eq!(r.to_json(), random_locc_attack(&cfg, 42).unwrap().to_json());
    }
}
