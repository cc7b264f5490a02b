//! The four activable bound entangled states on an even number of qubits.
//!
//! Dense states are built from Bell-pair mixtures, starting from the
//! four-qubit base and growing two qubits at a time; the sparse
//! [`GhzEnsemble`] gives the same states in closed form.

mod ensemble;
mod labels;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{
    check_cap, tensor_product, trace_distance, DensityMatrix, Operator, DEFAULT_TOL,
};

pub use ensemble::{
    closed_form, format_bits, parse_bits, sparse_overlap, sparse_trace_distance, EnsembleDump,
    GhzEnsemble, Member, MemberDump, SPARSE_QUBIT_CAP,
};
pub use labels::{compose, composition_table, BellLabel, StateLabel};

pub(crate) use ensemble::check_family_size;

/// The four family states at one size, keyed by label.
pub type Family = BTreeMap<StateLabel, DensityMatrix>;

use BellLabel::{PhiMinus, PhiPlus, PsiMinus, PsiPlus};
use StateLabel::{RhoMinus, RhoPlus, SigmaMinus, SigmaPlus};

/// Four-qubit members as equal mixtures of Bell ⊗ Bell products.
const BASE_TERMS: [(StateLabel, [(BellLabel, BellLabel); 4]); 4] = [
    (
        RhoPlus,
        [
            (PhiPlus, PhiPlus),
            (PhiMinus, PhiMinus),
            (PsiPlus, PsiPlus),
            (PsiMinus, PsiMinus),
        ],
    ),
    (
        RhoMinus,
        [
            (PhiPlus, PhiMinus),
            (PhiMinus, PhiPlus),
            (PsiPlus, PsiMinus),
            (PsiMinus, PsiPlus),
        ],
    ),
    (
        SigmaPlus,
        [
            (PhiPlus, PsiPlus),
            (PhiMinus, PsiMinus),
            (PsiPlus, PhiPlus),
            (PsiMinus, PhiMinus),
        ],
    ),
    (
        SigmaMinus,
        [
            (PhiPlus, PsiMinus),
            (PhiMinus, PsiPlus),
            (PsiPlus, PhiMinus),
            (PsiMinus, PhiPlus),
        ],
    ),
];

/// Parent ⊗ Bell terms feeding each child in the two-qubit growth step.
pub const RECURSION_TERMS: [(StateLabel, [(StateLabel, BellLabel); 4]); 4] = [
    (
        RhoPlus,
        [
            (RhoPlus, PhiPlus),
            (RhoMinus, PhiMinus),
            (SigmaPlus, PsiPlus),
            (SigmaMinus, PsiMinus),
        ],
    ),
    (
        RhoMinus,
        [
            (RhoPlus, PhiMinus),
            (RhoMinus, PhiPlus),
            (SigmaPlus, PsiMinus),
            (SigmaMinus, PsiPlus),
        ],
    ),
    (
        SigmaPlus,
        [
            (RhoPlus, PsiPlus),
            (RhoMinus, PsiMinus),
            (SigmaPlus, PhiPlus),
            (SigmaMinus, PhiMinus),
        ],
    ),
    (
        SigmaMinus,
        [
            (RhoPlus, PsiMinus),
            (RhoMinus, PsiPlus),
            (SigmaPlus, PhiMinus),
            (SigmaMinus, PhiPlus),
        ],
    ),
];

fn terms_for<T: Copy>(table: &[(StateLabel, [T; 4]); 4], label: StateLabel) -> [T; 4] {
    table
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, t)| *t)
        .expect("every label has a row")
}

/// Rank-1 projector onto the named Bell vector.
pub fn bell_projector(label: BellLabel) -> DensityMatrix {
    DensityMatrix::from_operator_unchecked(
        Operator::projector(2, &label.amplitudes()).expect("2 qubits"),
    )
}

/// The four-qubit member built as a Bell-pair mixture, cross-checked
/// against its closed form.
pub fn base_four(label: StateLabel) -> Result<DensityMatrix> {
    let mut acc = Operator::zeros(4)?;
    for (left, right) in terms_for(&BASE_TERMS, label) {
        let term = tensor_product(&bell_projector(left), &bell_projector(right))?;
        acc.add_scaled_in_place(&term, 0.25)?;
    }
    let closed = closed_form(4, label)?.to_dense()?;
    let deviation = trace_distance(&acc, &closed)?;
    if deviation >= DEFAULT_TOL {
        return Err(Error::Construction {
            what: format!("Bell-pair and closed forms of {label} disagree"),
            deviation,
        });
    }
    Ok(DensityMatrix::from_operator_unchecked(acc))
}

/// All four base states.
pub fn base_family() -> Result<Family> {
    StateLabel::ALL
        .iter()
        .map(|&l| Ok((l, base_four(l)?)))
        .collect()
}

/// One growth step: the `(n+2)`-qubit member `label` as the equal mixture
/// of `parent ⊗ P[bell]` terms, with the Bell pair on the last two qubits.
pub fn recurse(parents: &Family, label: StateLabel) -> Result<DensityMatrix> {
    let n = parent_size(parents)?;
    check_cap(n + 2)?;
    let mut acc = Operator::zeros(n + 2)?;
    for (parent, bell) in terms_for(&RECURSION_TERMS, label) {
        let state = parents.get(&parent).ok_or(Error::MissingParent(parent))?;
        let term = tensor_product(state, &bell_projector(bell))?;
        acc.add_scaled_in_place(&term, 0.25)?;
    }
    Ok(DensityMatrix::from_operator_unchecked(acc))
}

fn parent_size(parents: &Family) -> Result<usize> {
    for label in StateLabel::ALL {
        if !parents.contains_key(&label) {
            return Err(Error::MissingParent(label));
        }
    }
    let n = parents[&RhoPlus].n_qubits();
    if parents.values().any(|s| s.n_qubits() != n) {
        return Err(Error::Domain("parent states differ in size".into()));
    }
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "parents must be on an even n ≥ 4 (got {n})"
        )));
    }
    Ok(n)
}

/// Grows a whole family by two qubits.
pub fn recurse_family(parents: &Family) -> Result<Family> {
    StateLabel::ALL
        .iter()
        .map(|&l| Ok((l, recurse(parents, l)?)))
        .collect()
}

/// The dense family on `n` qubits, built from the four-qubit base by repeated
/// growth steps.
pub fn dense_family(n: usize) -> Result<Family> {
    check_family_size(n)?;
    check_cap(n)?;
    let mut family = base_family()?;
    while family[&RhoPlus].n_qubits() < n {
        family = recurse_family(&family)?;
    }
    Ok(family)
}

/// The dense family on `n` qubits from the closed form.
pub fn closed_form_family(n: usize) -> Result<Family> {
    check_cap(n)?;
    StateLabel::ALL
        .iter()
        .map(|&l| Ok((l, closed_form(n, l)?.to_dense()?)))
        .collect()
}
