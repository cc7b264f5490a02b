//! Structural checks on family states: permutation symmetry, maximal
//! ignorance of every proper coalition, PPT structure across cuts, and the
//! single-qubit Pauli links between family members.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{
    closed_form, dense_family, sparse_overlap, sparse_trace_distance, Family, GhzEnsemble,
    StateLabel,
};
use crate::linalg::{
    conjugate_single_qubit, hermitian_eigen, overlap, partial_trace, partial_transpose,
    swap_qubits, trace_distance, DensityMatrix, Mat2, Operator, QubitSubset, DENSE_QUBIT_CAP,
};

/// Minimum partial-transpose eigenvalue above which a cut is reported PPT.
pub const PPT_THRESHOLD: f64 = -1e-10;

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub label: String,
    pub n: usize,
    pub pass: bool,
    pub deviation: f64,
    pub tolerance: f64,
}

impl PropertyReport {
    pub fn new(property: impl Into<String>, n: usize, deviation: f64, tolerance: f64) -> Self {
        Self {
            property: property.into(),
            label: String::new(),
            n,
            pass: deviation < tolerance,
            deviation,
            tolerance,
        }
    }

    pub fn labelled(mut self, label: impl fmt::Display) -> Self {
        self.label = label.to_string();
        self
    }
}

/// Two complementary, nonempty sides of a cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    side_a: QubitSubset,
    side_b: QubitSubset,
}

impl Bipartition {
    pub fn new(side_a: QubitSubset, side_b: QubitSubset, n: usize) -> Result<Self> {
        side_a.check(n)?;
        side_b.check(n)?;
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::InvalidSubset(
                "both sides of a cut must be nonempty".into(),
            ));
        }
        if side_a.iter().any(|q| side_b.contains(q)) {
            return Err(Error::InvalidSubset("sides of a cut overlap".into()));
        }
        if side_a.len() + side_b.len() != n {
            return Err(Error::InvalidSubset(
                "cut does not cover every qubit".into(),
            ));
        }
        Ok(Self { side_a, side_b })
    }

    /// `side_b` against everything else.
    pub fn from_side(side_b: QubitSubset, n: usize) -> Result<Self> {
        let side_a = side_b.complement(n);
        Self::new(side_a, side_b, n)
    }

    pub fn side_a(&self) -> &QubitSubset {
        &self.side_a
    }

    pub fn side_b(&self) -> &QubitSubset {
        &self.side_b
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.side_a, self.side_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Mat2 {
        let (o, l, i) = (
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        );
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, qubit 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        QubitSubset::single(qubit)?.check(n)?;
        let mut s = Self::identity(n);
        s.0[qubit - 1] = p;
        Ok(s)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// `(qubit, letter)` of every non-identity factor.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(k, &p)| (k + 1, p))
            .collect()
    }

    /// `P A P†`.
    pub fn conjugate(&self, op: &Operator) -> Result<Operator> {
        if self.0.len() != op.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: self.0.len(),
                right: op.n_qubits(),
            });
        }
        let mut out = op.clone();
        for (q, p) in self.support() {
            out = conjugate_single_qubit(&out, q, &p.matrix())?;
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.letter()))
    }
}

/// Deviation of a state from its image under the exchange of two qubits.
pub fn check_permutation_symmetry(
    state: &DensityMatrix,
    swap: (usize, usize),
    tol: f64,
) -> Result<PropertyReport> {
    let (i, j) = swap;
    let swapped = swap_qubits(state, i, j)?;
    let deviation = trace_distance(state, &swapped)?;
    Ok(PropertyReport::new(
        format!("permutation_symmetry({i},{j})"),
        state.n_qubits(),
        deviation,
        tol,
    ))
}

/// Distance between the state with `traced` discarded and the maximally
/// mixed state on the rest.
pub fn reduction_deviation(state: &DensityMatrix, traced: &QubitSubset) -> Result<f64> {
    let reduced = partial_trace(state, traced)?;
    let mixed = DensityMatrix::maximally_mixed(reduced.n_qubits())?;
    trace_distance(&reduced, &mixed)
}

pub fn check_maximal_ignorance(
    state: &DensityMatrix,
    traced_party: usize,
    tol: f64,
) -> Result<PropertyReport> {
    if state.n_qubits() < 2 {
        return Err(Error::Domain(
            "maximal ignorance needs at least two qubits".into(),
        ));
    }
    let deviation = reduction_deviation(state, &QubitSubset::single(traced_party)?)?;
    Ok(PropertyReport::new(
        format!("maximal_ignorance(trace {traced_party})"),
        state.n_qubits(),
        deviation,
        tol,
    ))
}

/// Spectrum (ascending) of the partial transpose over `side_b`.
pub fn ppt_spectrum(state: &DensityMatrix, cut: &Bipartition) -> Result<Vec<f64>> {
    let pt = partial_transpose(state, cut.side_b())?;
    Ok(hermitian_eigen(&pt)?.eigenvalues)
}

pub fn ppt_min_eigenvalue(state: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    Ok(ppt_spectrum(state, cut)?.first().copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PptVerdict {
    #[serde(rename = "PPT")]
    Ppt,
    #[serde(rename = "NPT")]
    Npt,
}

impl fmt::Display for PptVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ppt => "PPT",
            Self::Npt => "NPT",
        })
    }
}

pub fn ppt_verdict(min_eigenvalue: f64) -> PptVerdict {
    if min_eigenvalue >= PPT_THRESHOLD {
        PptVerdict::Ppt
    } else {
        PptVerdict::Npt
    }
}

/// Lower bound on the trace distance that avoids an eigendecomposition:
/// `||D||_1 >= ||D||_F`.
fn frobenius_lower_bound(a: &Operator, b: &Operator) -> Result<f64> {
    Ok(0.5 * a.sub(b)?.frobenius_norm())
}

fn within(a: &Operator, b: &Operator, tol: f64) -> Result<bool> {
    if frobenius_lower_bound(a, b)? >= tol {
        return Ok(false);
    }
    Ok(trace_distance(a, b)? < tol)
}

/// Searches weight-1 Pauli strings `P` with `P a P† = b`, qubit by qubit in
/// the order X, Y, Z. Returns the identity string when `a = b` already.
pub fn find_pauli_connection(
    a: &DensityMatrix,
    b: &DensityMatrix,
    tol: f64,
) -> Result<Option<PauliString>> {
    let n = a.n_qubits();
    if b.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: b.n_qubits(),
        });
    }
    if within(a, b, tol)? {
        return Ok(Some(PauliString::identity(n)));
    }
    for q in 1..=n {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let image = conjugate_single_qubit(a, q, &p.matrix())?;
            if within(&image, b, tol)? {
                return Ok(Some(PauliString::single(n, q, p)?));
            }
        }
    }
    Ok(None)
}

/// Exhaustive search over every Pauli string, lowest weight first. Only
/// offered for four qubits (256 strings).
pub fn find_pauli_connection_exhaustive(
    a: &DensityMatrix,
    b: &DensityMatrix,
    tol: f64,
) -> Result<Option<PauliString>> {
    let n = a.n_qubits();
    if n != 4 || b.n_qubits() != 4 {
        return Err(Error::Domain(
            "exhaustive Pauli search is limited to n = 4".into(),
        ));
    }
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut strings: Vec<PauliString> = (0..1usize << (2 * n))
        .map(|code| {
            PauliString(
                (0..n)
                    .map(|k| LETTERS[(code >> (2 * (n - 1 - k))) & 3])
                    .collect(),
            )
        })
        .collect();
    strings.sort_by_key(PauliString::weight);
    for s in strings {
        if within(&s.conjugate(a)?, b, tol)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Letter that maps `from` to `to` under the label algebra: Z flips the
/// sign bit, X the group bit, Y both.
pub fn predicted_letter(from: StateLabel, to: StateLabel) -> Pauli {
    match (
        from.group_bit() != to.group_bit(),
        from.sign_bit() != to.sign_bit(),
    ) {
        (false, false) => Pauli::I,
        (true, false) => Pauli::X,
        (false, true) => Pauli::Z,
        (true, true) => Pauli::Y,
    }
}

/// `Tr(ρ_i ρ_j)` over the family, rows and columns in label order.
pub fn overlap_matrix(family: &Family) -> Result<[[f64; 4]; 4]> {
    let mut m = [[0.0; 4]; 4];
    for (i, a) in StateLabel::ALL.iter().enumerate() {
        for (j, b) in StateLabel::ALL.iter().enumerate() {
            let (sa, sb) = (state_of(family, *a)?, state_of(family, *b)?);
            m[i][j] = overlap(sa, sb)?;
        }
    }
    Ok(m)
}

pub fn sparse_overlap_matrix(n: usize) -> Result<[[f64; 4]; 4]> {
    let ensembles = StateLabel::ALL
        .iter()
        .map(|&l| closed_form(n, l))
        .collect::<Result<Vec<_>>>()?;
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = sparse_overlap(&ensembles[i], &ensembles[j])?;
        }
    }
    Ok(m)
}

fn state_of(family: &Family, label: StateLabel) -> Result<&DensityMatrix> {
    family.get(&label).ok_or(Error::MissingParent(label))
}

/// Largest entrywise deviation of an overlap matrix from `diag(2^-(n-2))`.
pub fn orthogonality_deviation(m: &[[f64; 4]; 4], n: usize) -> f64 {
    let purity = 0.5f64.powi(n as i32 - 2);
    let mut worst = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let expected = if i == j { purity } else { 0.0 };
            worst = worst.max((v - expected).abs());
        }
    }
    worst
}

/// Which checks [`verification_suite`] runs.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    /// Dense checks; otherwise only the sparse ones.
    pub dense: bool,
    /// PPT over every two-qubit subset; dense eigensolves of size 2^n.
    pub ppt_pairs: bool,
    pub pauli_links: bool,
}

impl SuiteOptions {
    pub fn for_size(n: usize) -> Self {
        Self {
            dense: n <= 10,
            ppt_pairs: n <= 6,
            pauli_links: n <= 8,
        }
    }
}

/// Runs every structural check on the family at `n`.
///
/// Within the dense cap this covers construction equivalence, orthogonality,
/// validity, symmetry under every transposition, single-party ignorance and,
/// per `options`, PPT over pair cuts and the Pauli link graph. Above the cap
/// it falls back to the checks the sparse form supports exactly.
pub fn verification_suite(
    n: usize,
    tol: f64,
    options: SuiteOptions,
) -> Result<Vec<PropertyReport>> {
    crate::family::check_family_size(n)?;
    if !options.dense || n > DENSE_QUBIT_CAP {
        return sparse_suite(n, tol);
    }
    let recursive = dense_family(n)?;
    let mut reports = Vec::new();

    for &label in &StateLabel::ALL {
        let closed = closed_form(n, label)?.to_dense()?;
        let dev = trace_distance(&recursive[&label], &closed)?;
        reports.push(PropertyReport::new("construction_equivalence", n, dev, tol).labelled(label));
    }

    let overlaps = overlap_matrix(&recursive)?;
    reports.push(
        PropertyReport::new(
            "orthogonality",
            n,
            orthogonality_deviation(&overlaps, n),
            tol,
        )
        .labelled("family"),
    );

    for (&label, state) in &recursive {
        let herm = state.hermiticity_deviation();
        let trace = (state.trace().re - 1.0).abs();
        reports.push(PropertyReport::new("hermitian", n, herm, tol).labelled(label));
        reports.push(PropertyReport::new("unit_trace", n, trace, tol).labelled(label));
    }

    for (&label, state) in &recursive {
        for i in 1..=n {
            for j in (i + 1)..=n {
                reports.push(check_permutation_symmetry(state, (i, j), tol)?.labelled(label));
            }
        }
        for q in 1..=n {
            reports.push(check_maximal_ignorance(state, q, tol)?.labelled(label));
        }
    }

    if options.ppt_pairs {
        for (&label, state) in &recursive {
            for i in 1..=n {
                for j in (i + 1)..=n {
                    let cut = Bipartition::from_side(QubitSubset::pair(i, j)?, n)?;
                    let min = ppt_min_eigenvalue(state, &cut)?;
                    reports.push(
                        PropertyReport::new(
                            format!("ppt_pair_cut({cut})"),
                            n,
                            (-min).max(0.0),
                            tol,
                        )
                        .labelled(label),
                    );
                }
            }
        }
    }

    if options.pauli_links {
        reports.extend(pauli_link_reports(&recursive, tol)?);
    }
    Ok(reports)
}

fn pauli_link_reports(family: &Family, tol: f64) -> Result<Vec<PropertyReport>> {
    let mut reports = Vec::new();
    for &from in &StateLabel::ALL {
        for &to in &StateLabel::ALL {
            if from == to {
                continue;
            }
            let (a, b) = (&family[&from], &family[&to]);
            let n = a.n_qubits();
            let found = find_pauli_connection(a, b, tol)?;
            let deviation = match &found {
                Some(p) if p.weight() == 1 && p.support()[0].1 == predicted_letter(from, to) => {
                    trace_distance(&p.conjugate(a)?, b)?
                }
                _ => f64::INFINITY,
            };
            reports.push(
                PropertyReport::new("pauli_connection", n, deviation, tol)
                    .labelled(format!("{from}->{to}")),
            );
        }
    }
    Ok(reports)
}

fn sparse_suite(n: usize, tol: f64) -> Result<Vec<PropertyReport>> {
    let mut reports = Vec::new();
    let m = sparse_overlap_matrix(n)?;
    reports.push(
        PropertyReport::new("orthogonality", n, orthogonality_deviation(&m, n), tol)
            .labelled("family"),
    );
    for &label in &StateLabel::ALL {
        let e = closed_form(n, label)?;
        for (i, j) in [(1, 2), (1, n), (n / 2, n / 2 + 1), (2, n - 1)] {
            let dev = sparse_trace_distance(&e, &e.swap_qubits(i, j)?)?;
            reports.push(
                PropertyReport::new(format!("permutation_symmetry({i},{j})"), n, dev, tol)
                    .labelled(label),
            );
        }
        for q in [1, n] {
            let keep = QubitSubset::single(q)?.complement(n);
            let dev = sparse_ignorance_deviation(&e, &keep)?;
            reports.push(
                PropertyReport::new(format!("maximal_ignorance(trace {q})"), n, dev, tol)
                    .labelled(label),
            );
        }
    }
    Ok(reports)
}

/// Distance between the reduction of `e` onto `keep` and the maximally mixed
/// state. The reduction is diagonal, so this is half an L1 distance.
pub fn sparse_ignorance_deviation(e: &GhzEnsemble, keep: &QubitSubset) -> Result<f64> {
    let diag = e.reduced_diagonal(keep)?;
    let uniform = 1.0 / diag.len() as f64;
    Ok(0.5 * diag.iter().map(|d| (d - uniform).abs()).sum::<f64>())
}

/// Checks a loaded ensemble (e.g. a dump from disk) against the family: it
/// must be orthogonal to the three other members, have the family purity,
/// and match the closed form of its own label.
pub fn verify_ensemble(e: &GhzEnsemble, tol: f64) -> Result<Vec<PropertyReport>> {
    let n = e.n_qubits();
    let mut reports = Vec::new();
    for &other in &StateLabel::ALL {
        let reference = closed_form(n, other)?;
        let ov = sparse_overlap(e, &reference)?;
        if other == e.label() {
            let dev = sparse_trace_distance(e, &reference)?;
            reports.push(PropertyReport::new("matches_closed_form", n, dev, tol).labelled(other));
        } else {
            reports.push(
                PropertyReport::new("orthogonality", n, ov.abs(), tol)
                    .labelled(format!("{}|{other}", e.label())),
            );
        }
    }
    let purity = sparse_overlap(e, e)?;
    let expected = 0.5f64.powi(n as i32 - 2);
    reports
        .push(PropertyReport::new("purity", n, (purity - expected).abs(), tol).labelled(e.label()));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{base_four, bell_projector, closed_form, BellLabel};
    use crate::linalg::tensor_product;

    fn dense(n: usize, l: StateLabel) -> DensityMatrix {
        closed_form(n, l).unwrap().to_dense().unwrap()
    }

    #[test]
    fn symmetric_under_outer_swap() {
        let r = check_permutation_symmetry(&dense(4, StateLabel::RhoPlus), (1, 4), 1e-10).unwrap();
        assert!(r.pass && r.deviation < 1e-12);
    }

    #[test]
    fn product_state_is_not_symmetric() {
        let p = tensor_product(
            &bell_projector(BellLabel::PhiPlus),
            &bell_projector(BellLabel::PsiPlus),
        )
        .unwrap();
        let p = DensityMatrix::new(p, 1e-10).unwrap();
        let r = check_permutation_symmetry(&p, (2, 3), 1e-10).unwrap();
        assert!(!r.pass && r.deviation > 0.1);
    }

    #[test]
    fn repeated_swap_index_rejected() {
        assert!(check_permutation_symmetry(&dense(4, StateLabel::RhoPlus), (2, 2), 1e-10).is_err());
    }

    #[test]
    fn ignorance_examples() {
        let r =
            check_maximal_ignorance(&base_four(StateLabel::RhoPlus).unwrap(), 1, 1e-10).unwrap();
        assert!(r.pass);
        let r = check_maximal_ignorance(&dense(6, StateLabel::SigmaMinus), 5, 1e-10).unwrap();
        assert!(r.pass);
        let pp = tensor_product(
            &bell_projector(BellLabel::PhiPlus),
            &bell_projector(BellLabel::PhiPlus),
        )
        .unwrap();
        let pp = DensityMatrix::new(pp, 1e-10).unwrap();
        let r = check_maximal_ignorance(&pp, 1, 1e-10).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn bell_cut_is_npt() {
        let phi = bell_projector(BellLabel::PhiPlus);
        let cut = Bipartition::from_side(QubitSubset::single(2).unwrap(), 2).unwrap();
        let min = ppt_min_eigenvalue(&phi, &cut).unwrap();
        assert!((min + 0.5).abs() < 1e-12);
        assert_eq!(ppt_verdict(min), PptVerdict::Npt);
    }

    #[test]
    fn bipartition_validation() {
        let a = QubitSubset::new(vec![1, 2]).unwrap();
        let b = QubitSubset::new(vec![2, 3]).unwrap();
        assert!(Bipartition::new(a.clone(), b, 3).is_err());
        assert!(Bipartition::new(a, QubitSubset::empty(), 2).is_err());
    }

    #[test]
    fn pauli_examples() {
        let rp = dense(4, StateLabel::RhoPlus);
        let z = find_pauli_connection(&rp, &dense(4, StateLabel::RhoMinus), 1e-10).unwrap();
        assert_eq!(z.unwrap().to_string(), "ZIII");
        let x = find_pauli_connection(&rp, &dense(4, StateLabel::SigmaPlus), 1e-10).unwrap();
        assert_eq!(x.unwrap().to_string(), "XIII");
        let id = find_pauli_connection(&rp, &rp, 1e-10).unwrap().unwrap();
        assert_eq!(id.weight(), 0);
    }

    #[test]
    fn exhaustive_agrees_on_weight_one() {
        let rp = dense(4, StateLabel::RhoPlus);
        let sm = dense(4, StateLabel::SigmaMinus);
        let p = find_pauli_connection_exhaustive(&rp, &sm, 1e-10)
            .unwrap()
            .unwrap();
        assert_eq!(p.weight(), 1);
        assert_eq!(p.support()[0].1, Pauli::Y);
        assert!(find_pauli_connection_exhaustive(
            &dense(6, StateLabel::RhoPlus),
            &dense(6, StateLabel::RhoPlus),
            1e-10
        )
        .is_err());
    }

    #[test]
    fn unconnected_states_give_none() {
        let rp = dense(4, StateLabel::RhoPlus);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(find_pauli_connection(&rp, &mixed, 1e-10).unwrap().is_none());
    }

    #[test]
    fn suite_passes_at_four() {
        let reports = verification_suite(4, 1e-10, SuiteOptions::for_size(4)).unwrap();
        let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn sparse_suite_passes() {
        let reports = verification_suite(16, 1e-10, SuiteOptions::for_size(16)).unwrap();
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn corrupted_ensemble_fails_orthogonality() {
        let mut dump = closed_form(4, StateLabel::RhoPlus).unwrap().to_dump();
        dump.members[0].sign = -1;
        let e = GhzEnsemble::from_dump(&dump).unwrap();
        let reports = verify_ensemble(&e, 1e-10).unwrap();
        assert!(reports
            .iter()
            .any(|r| r.property == "orthogonality" && !r.pass));
    }
}
