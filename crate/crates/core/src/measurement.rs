//! Projective measurements on dense states: Born-rule distributions,
//! seeded sampling with collapse, Bell measurements on qubit pairs, and
//! adaptive local strategies expressed as decision trees.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::BellLabel;
use crate::linalg::{conjugate_single_qubit_in_place, DensityMatrix, Mat2, Operator, QubitSubset};
use crate::rng::stream_rng;

/// Measurement axis on the Bloch sphere. Outcome 0 is the state
/// `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`, outcome 1 its orthogonal complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitBasis {
    pub theta: f64,
    pub phi: f64,
}

impl SingleQubitBasis {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::Domain(format!(
                "basis angles out of range: theta {theta}, phi {phi}"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn z() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn x() -> Self {
        Self {
            theta: FRAC_PI_2,
            phi: 0.0,
        }
    }

    pub fn y() -> Self {
        Self {
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
        }
    }

    /// Uniform on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u: f64 = rng.gen();
        let v: f64 = rng.gen();
        Self {
            theta: (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(),
            phi: 2.0 * PI * v,
        }
    }

    /// Columns are the outcome-0 and outcome-1 vectors.
    fn unitary(&self) -> Mat2 {
        let (c, s) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let e = Complex64::from_polar(1.0, self.phi);
        [
            [Complex64::new(c, 0.0), -e.conj() * s],
            [e * s, Complex64::new(c, 0.0)],
        ]
    }

    fn unitary_adjoint(&self) -> Mat2 {
        let u = self.unitary();
        [
            [u[0][0].conj(), u[1][0].conj()],
            [u[0][1].conj(), u[1][1].conj()],
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisDescriptor {
    Local(Vec<SingleQubitBasis>),
    Bell,
}

#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub subset: QubitSubset,
    pub basis: BasisDescriptor,
    /// One bit per measured qubit; for a Bell measurement, (flip, phase).
    pub outcomes: Vec<u8>,
    pub probability: f64,
    pub post_state: DensityMatrix,
}

fn check_bases(state: &Operator, subset: &QubitSubset, bases: &[SingleQubitBasis]) -> Result<()> {
    subset.check(state.n_qubits())?;
    if subset.len() != bases.len() {
        return Err(Error::Contract(format!(
            "{} bases given for {} measured qubits",
            bases.len(),
            subset.len()
        )));
    }
    Ok(())
}

/// Rotates every measured qubit so its basis becomes the computational one.
fn rotate_in(
    state: &Operator,
    subset: &QubitSubset,
    bases: &[SingleQubitBasis],
) -> Result<Operator> {
    let mut op = state.clone();
    for (q, b) in subset.iter().zip(bases) {
        conjugate_single_qubit_in_place(&mut op, q, &b.unitary_adjoint())?;
    }
    Ok(op)
}

fn rotate_out(op: &mut Operator, subset: &QubitSubset, bases: &[SingleQubitBasis]) -> Result<()> {
    for (q, b) in subset.iter().zip(bases) {
        conjugate_single_qubit_in_place(op, q, &b.unitary())?;
    }
    Ok(())
}

/// Outcome probabilities, indexed with the first subset qubit as the most
/// significant bit.
pub fn born_distribution(
    state: &Operator,
    subset: &QubitSubset,
    bases: &[SingleQubitBasis],
) -> Result<Vec<f64>> {
    check_bases(state, subset, bases)?;
    let rotated = rotate_in(state, subset, bases)?;
    let n = state.n_qubits();
    let mut probs = vec![0.0; 1usize << subset.len()];
    for (x, d) in rotated.diagonal().into_iter().enumerate() {
        probs[subset.gather(x, n)] += d;
    }
    Ok(probs)
}

/// The unnormalised post-measurement operator `Π ρ Π` for one outcome.
fn project(
    state: &Operator,
    subset: &QubitSubset,
    bases: &[SingleQubitBasis],
    outcome: usize,
) -> Result<Operator> {
    let n = state.n_qubits();
    let mut op = rotate_in(state, subset, bases)?;
    let d = op.dim();
    let zero = Complex64::new(0.0, 0.0);
    let keep: Vec<bool> = (0..d).map(|x| subset.gather(x, n) == outcome).collect();
    for r in 0..d {
        for c in 0..d {
            if !(keep[r] && keep[c]) {
                op.set(r, c, zero);
            }
        }
    }
    rotate_out(&mut op, subset, bases)?;
    Ok(op)
}

/// Every outcome with its probability and unnormalised post-measurement
/// operator, indexed as in [`born_distribution`].
pub fn measurement_branches(
    state: &Operator,
    subset: &QubitSubset,
    bases: &[SingleQubitBasis],
) -> Result<Vec<(f64, Operator)>> {
    let probs = born_distribution(state, subset, bases)?;
    probs
        .into_iter()
        .enumerate()
        .map(|(k, p)| Ok((p, project(state, subset, bases, k)?)))
        .collect()
}

/// Draws an index from `probs`, never choosing a zero-probability entry.
fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probs.iter().filter(|&&p| p > 0.0).sum();
    if total <= 0.0 {
        return Err(Error::Domain("no outcome has positive probability".into()));
    }
    let mut u = rng.gen::<f64>() * total;
    let mut last = None;
    for (k, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = Some(k);
        if u < p {
            return Ok(k);
        }
        u -= p;
    }
    Ok(last.expect("total > 0 implies a positive entry"))
}

fn bits_of(index: usize, k: usize) -> Vec<u8> {
    (0..k)
        .map(|pos| ((index >> (k - 1 - pos)) & 1) as u8)
        .collect()
}

/// Samples one outcome and returns the renormalised collapsed state (all
/// qubits kept).
pub fn sample_measure<R: Rng + ?Sized>(
    state: &DensityMatrix,
    subset: &QubitSubset,
    bases: &[SingleQubitBasis],
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let probs = born_distribution(state, subset, bases)?;
    let outcome = sample_index(&probs, rng)?;
    let projected = project(state, subset, bases, outcome)?;
    let p = projected.trace().re;
    Ok(MeasurementRecord {
        subset: subset.clone(),
        basis: BasisDescriptor::Local(bases.to_vec()),
        outcomes: bits_of(outcome, subset.len()),
        probability: probs[outcome],
        post_state: DensityMatrix::from_operator_unchecked(projected.scale(1.0 / p)),
    })
}

/// [`sample_measure`] on stream 0 of `seed`.
pub fn sample_measure_seeded(
    state: &DensityMatrix,
    subset: &QubitSubset,
    bases: &[SingleQubitBasis],
    seed: u64,
) -> Result<MeasurementRecord> {
    sample_measure(state, subset, bases, &mut stream_rng(seed, 0))
}

/// One branch of a Bell measurement.
#[derive(Debug, Clone)]
pub struct BellBranch {
    pub outcome: BellLabel,
    pub probability: f64,
    /// State of the unmeasured qubits (original order), `None` when the
    /// branch has zero probability.
    pub residual: Option<DensityMatrix>,
}

/// Every branch of a Bell measurement on `pair`. The pair may be any two
/// qubits; the first listed qubit is the first tensor factor of the Bell
/// vector.
pub fn bell_branches(state: &Operator, pair: &QubitSubset) -> Result<Vec<BellBranch>> {
    let n = state.n_qubits();
    pair.check(n)?;
    if pair.len() != 2 {
        return Err(Error::InvalidSubset(
            "a Bell measurement needs exactly two qubits".into(),
        ));
    }
    let rest = pair.complement(n);
    let rest_idx = rest.scatter_table(n);
    let pair_idx = pair.scatter_table(n);
    let mut branches = Vec::with_capacity(4);
    for bell in BellLabel::ALL {
        let amps = bell.amplitudes();
        let support: Vec<(usize, Complex64)> = amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(u, &a)| (pair_idx[u], a))
            .collect();
        let mut out = Operator::zeros(rest.len())?;
        for (r, &gr) in rest_idx.iter().enumerate() {
            for (c, &gc) in rest_idx.iter().enumerate() {
                let mut v = Complex64::new(0.0, 0.0);
                for &(pu, au) in &support {
                    for &(pv, av) in &support {
                        v += au.conj() * av * state.get(gr | pu, gc | pv);
                    }
                }
                out.set(r, c, v);
            }
        }
        let p = out.trace().re;
        let residual =
            (p > 1e-15).then(|| DensityMatrix::from_operator_unchecked(out.scale(1.0 / p)));
        branches.push(BellBranch {
            outcome: bell,
            probability: p.max(0.0),
            residual,
        });
    }
    Ok(branches)
}

/// Bell-measures `pair`, returning the outcome and a record whose post state
/// lives on the remaining qubits.
pub fn bell_measure_pair<R: Rng + ?Sized>(
    state: &DensityMatrix,
    pair: &QubitSubset,
    rng: &mut R,
) -> Result<(BellLabel, MeasurementRecord)> {
    let branches = bell_branches(state, pair)?;
    let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let k = sample_index(&probs, rng)?;
    let branch = &branches[k];
    let record = MeasurementRecord {
        subset: pair.clone(),
        basis: BasisDescriptor::Bell,
        outcomes: vec![branch.outcome.flip_bit(), branch.outcome.phase_bit()],
        probability: branch.probability,
        post_state: branch
            .residual
            .clone()
            .expect("sampled branch has positive probability"),
    };
    Ok((branch.outcome, record))
}

/// What a leaf of a strategy tree guesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LeafGuess {
    Fixed(u8),
    /// Uniformly random among the listed messages.
    Uniform(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StrategyNode {
    Measure {
        party: usize,
        basis: SingleQubitBasis,
        /// Subtrees followed on outcome 0 and outcome 1.
        children: Box<[StrategyNode; 2]>,
    },
    Leaf(LeafGuess),
}

/// A local measurement strategy: each node lets one party measure their
/// qubit, the outcome is broadcast, and the next node depends on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveStrategy {
    pub root: StrategyNode,
}

impl AdaptiveStrategy {
    /// Measures nothing and guesses `b`.
    pub fn guess(b: u8) -> Self {
        Self {
            root: StrategyNode::Leaf(LeafGuess::Fixed(b)),
        }
    }

    /// Every party measures in `basis`, in qubit order; `leaf` maps the
    /// parity of the outcome bits to a guess.
    pub fn uniform_basis(
        n: usize,
        basis: SingleQubitBasis,
        leaf: impl Fn(u8) -> LeafGuess,
    ) -> Self {
        fn build(
            q: usize,
            n: usize,
            parity: u8,
            basis: SingleQubitBasis,
            leaf: &dyn Fn(u8) -> LeafGuess,
        ) -> StrategyNode {
            if q > n {
                return StrategyNode::Leaf(leaf(parity));
            }
            StrategyNode::Measure {
                party: q,
                basis,
                children: Box::new([
                    build(q + 1, n, parity, basis, leaf),
                    build(q + 1, n, parity ^ 1, basis, leaf),
                ]),
            }
        }
        Self {
            root: build(1, n, 0, basis, &leaf),
        }
    }

    /// Everyone measures σ_z; the weight parity is the group bit and the sign
    /// bit is guessed uniformly.
    pub fn parity(n: usize) -> Self {
        Self::uniform_basis(n, SingleQubitBasis::z(), |g| {
            LeafGuess::Uniform(vec![2 * g, 2 * g + 1])
        })
    }

    /// Everyone measures σ_x; the outcome parity is the sign bit and the
    /// group bit is guessed uniformly.
    pub fn sign_probe(n: usize) -> Self {
        Self::uniform_basis(n, SingleQubitBasis::x(), |s| {
            LeafGuess::Uniform(vec![s, 2 + s])
        })
    }

    pub fn depth(&self) -> usize {
        fn depth(node: &StrategyNode) -> usize {
            match node {
                StrategyNode::Leaf(_) => 0,
                StrategyNode::Measure { children, .. } => {
                    1 + depth(&children[0]).max(depth(&children[1]))
                }
            }
        }
        depth(&self.root)
    }

    /// Checks parties are in range, no party measures twice on a path,
    /// depth ≤ n and leaf guesses are messages.
    pub fn validate(&self, n: usize) -> Result<()> {
        fn walk(node: &StrategyNode, n: usize, used: &mut Vec<usize>) -> Result<()> {
            match node {
                StrategyNode::Leaf(LeafGuess::Fixed(b)) if *b > 3 => {
                    Err(Error::Contract(format!("leaf guess {b} is not a message")))
                }
                StrategyNode::Leaf(LeafGuess::Uniform(bs))
                    if bs.is_empty() || bs.iter().any(|&b| b > 3) =>
                {
                    Err(Error::Contract(
                        "uniform leaf needs messages in 0..4".into(),
                    ))
                }
                StrategyNode::Leaf(_) => Ok(()),
                StrategyNode::Measure {
                    party, children, ..
                } => {
                    if *party == 0 || *party > n {
                        return Err(Error::Contract(format!("party {party} out of range")));
                    }
                    if used.contains(party) {
                        return Err(Error::Contract(format!(
                            "party {party} measures twice on one path"
                        )));
                    }
                    used.push(*party);
                    for child in children.iter() {
                        walk(child, n, used)?;
                    }
                    used.pop();
                    Ok(())
                }
            }
        }
        if self.depth() > n {
            return Err(Error::Contract(
                "strategy deeper than the number of parties".into(),
            ));
        }
        walk(&self.root, n, &mut Vec::new())
    }

    /// Leaves in depth-first order, outcome 0 before outcome 1.
    pub fn leaves_mut(&mut self) -> Vec<&mut LeafGuess> {
        fn collect<'a>(node: &'a mut StrategyNode, out: &mut Vec<&'a mut LeafGuess>) {
            match node {
                StrategyNode::Leaf(g) => out.push(g),
                StrategyNode::Measure { children, .. } => {
                    let [a, b] = &mut **children;
                    collect(a, out);
                    collect(b, out);
                }
            }
        }
        let mut out = Vec::new();
        collect(&mut self.root, &mut out);
        out
    }

    pub fn leaves(&self) -> Vec<&LeafGuess> {
        fn collect<'a>(node: &'a StrategyNode, out: &mut Vec<&'a LeafGuess>) {
            match node {
                StrategyNode::Leaf(g) => out.push(g),
                StrategyNode::Measure { children, .. } => {
                    collect(&children[0], out);
                    collect(&children[1], out);
                }
            }
        }
        let mut out = Vec::new();
        collect(&self.root, &mut out);
        out
    }
}

/// Party reference in a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TranscriptParty {
    Single(usize),
    Pair([usize; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TranscriptBasis {
    Angles { theta: f64, phi: f64 },
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TranscriptOutcome {
    Bit(u8),
    Bell(BellLabel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub party: TranscriptParty,
    pub basis: TranscriptBasis,
    pub outcome: TranscriptOutcome,
    pub probability: f64,
}

impl TranscriptEntry {
    pub fn bell(pair: &QubitSubset, outcome: BellLabel, probability: f64) -> Self {
        let p = pair.indices();
        Self {
            party: TranscriptParty::Pair([p[0], p[1]]),
            basis: TranscriptBasis::Named("bell".into()),
            outcome: TranscriptOutcome::Bell(outcome),
            probability,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRun {
    pub guess: u8,
    pub transcript: Vec<TranscriptEntry>,
}

fn pick_guess<R: Rng + ?Sized>(leaf: &LeafGuess, rng: &mut R) -> u8 {
    match leaf {
        LeafGuess::Fixed(b) => *b,
        LeafGuess::Uniform(bs) if bs.len() == 1 => bs[0],
        LeafGuess::Uniform(bs) => bs[rng.gen_range(0..bs.len())],
    }
}

/// Walks the tree on `state`, sampling each prescribed measurement on the
/// evolving (collapsed) state.
pub fn run_strategy<R: Rng + ?Sized>(
    state: &DensityMatrix,
    strategy: &AdaptiveStrategy,
    rng: &mut R,
) -> Result<StrategyRun> {
    strategy.validate(state.n_qubits())?;
    let mut current = state.as_operator().clone();
    let mut node = &strategy.root;
    let mut transcript = Vec::new();
    loop {
        match node {
            StrategyNode::Leaf(leaf) => {
                return Ok(StrategyRun {
                    guess: pick_guess(leaf, rng),
                    transcript,
                })
            }
            StrategyNode::Measure {
                party,
                basis,
                children,
            } => {
                let subset = QubitSubset::single(*party)?;
                let bases = [*basis];
                let probs = born_distribution(&current, &subset, &bases)?;
                let k = sample_index(&probs, rng)?;
                let projected = project(&current, &subset, &bases, k)?;
                let p = projected.trace().re;
                current = projected.scale(1.0 / p);
                transcript.push(TranscriptEntry {
                    party: TranscriptParty::Single(*party),
                    basis: TranscriptBasis::Angles {
                        theta: basis.theta,
                        phi: basis.phi,
                    },
                    outcome: TranscriptOutcome::Bit(k as u8),
                    probability: probs[k],
                });
                node = &children[k];
            }
        }
    }
}

/// Exact probability of reaching each leaf (depth-first order) on `state`.
pub fn leaf_likelihoods(strategy: &AdaptiveStrategy, state: &Operator) -> Result<Vec<f64>> {
    fn walk(node: &StrategyNode, op: &Operator, out: &mut Vec<f64>) -> Result<()> {
        match node {
            StrategyNode::Leaf(_) => {
                out.push(op.trace().re.max(0.0));
                Ok(())
            }
            StrategyNode::Measure {
                party,
                basis,
                children,
            } => {
                let subset = QubitSubset::single(*party)?;
                for (k, child) in children.iter().enumerate() {
                    let projected = project(op, &subset, &[*basis], k)?;
                    walk(child, &projected, out)?;
                }
                Ok(())
            }
        }
    }
    strategy.validate(state.n_qubits())?;
    let mut out = Vec::new();
    walk(&strategy.root, state, &mut out)?;
    Ok(out)
}

/// Exact success probabilities of a strategy under a uniform prior over the
/// four candidate states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProfile {
    pub group: f64,
    pub sign: f64,
    pub overall: f64,
}

/// `likelihoods[b][leaf]` for each candidate message `b`.
pub fn likelihood_table(
    strategy: &AdaptiveStrategy,
    candidates: &[&Operator; 4],
) -> Result<Vec<Vec<f64>>> {
    candidates
        .iter()
        .map(|s| leaf_likelihoods(strategy, s))
        .collect()
}

/// Replaces each leaf guess with the maximum-likelihood message given the
/// path, ties shared uniformly.
pub fn assign_ml_guesses(strategy: &mut AdaptiveStrategy, likelihoods: &[Vec<f64>]) {
    for (leaf_idx, leaf) in strategy.leaves_mut().into_iter().enumerate() {
        let column: Vec<f64> = likelihoods.iter().map(|row| row[leaf_idx]).collect();
        let best = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-12 * best.abs().max(1e-300);
        let tied: Vec<u8> = column
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= best - slack)
            .map(|(b, _)| b as u8)
            .collect();
        *leaf = if tied.len() == 1 {
            LeafGuess::Fixed(tied[0])
        } else {
            LeafGuess::Uniform(tied)
        };
    }
}

/// Exact success of the strategy's current leaf guesses.
pub fn exact_success(strategy: &AdaptiveStrategy, likelihoods: &[Vec<f64>]) -> SuccessProfile {
    let mut profile = SuccessProfile {
        group: 0.0,
        sign: 0.0,
        overall: 0.0,
    };
    for (leaf_idx, leaf) in strategy.leaves().into_iter().enumerate() {
        let guesses: Vec<(u8, f64)> = match leaf {
            LeafGuess::Fixed(b) => vec![(*b, 1.0)],
            LeafGuess::Uniform(bs) => bs.iter().map(|&b| (b, 1.0 / bs.len() as f64)).collect(),
        };
        for (truth, row) in likelihoods.iter().enumerate() {
            let p = 0.25 * row[leaf_idx];
            let truth = truth as u8;
            for &(g, w) in &guesses {
                if g >> 1 == truth >> 1 {
                    profile.group += p * w;
                }
                if g & 1 == truth & 1 {
                    profile.sign += p * w;
                }
                if g == truth {
                    profile.overall += p * w;
                }
            }
        }
    }
    profile
}
