//! Sparse GHZ-ensemble form of the family: an equal mixture of projectors
//! onto `(|x> + s|x̄>)/sqrt(2)` over every bitstring `x` with a leading zero
//! and a fixed Hamming-weight parity.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_cap, DensityMatrix, Operator, QubitSubset};

use super::StateLabel;

/// Largest register accepted by the sparse representation (2^24 members).
pub const SPARSE_QUBIT_CAP: usize = 26;

/// One GHZ-like member: the bitstring with qubit 1 as its most significant
/// bit, and the relative sign of its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Member {
    pub bits: u64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhzEnsemble {
    n_qubits: usize,
    label: StateLabel,
    members: Vec<Member>,
}

pub(crate) fn check_family_size(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::Domain(format!("n must be even and ≥ 4 (got {n})")));
    }
    if n > SPARSE_QUBIT_CAP {
        return Err(Error::SizeLimit {
            n,
            cap: SPARSE_QUBIT_CAP,
        });
    }
    Ok(())
}

/// Enumerates the ensemble of `label` on `n` qubits.
pub fn closed_form(n: usize, label: StateLabel) -> Result<GhzEnsemble> {
    check_family_size(n)?;
    let parity = u32::from(label.group_bit());
    let sign = label.sign();
    let members = (0..1u64 << (n - 1))
        .filter(|x| x.count_ones() % 2 == parity)
        .map(|bits| Member { bits, sign })
        .collect();
    Ok(GhzEnsemble {
        n_qubits: n,
        label,
        members,
    })
}

impl GhzEnsemble {
    /// Assembles an ensemble from explicit members, checking the structural
    /// invariants. Member signs need not agree with the label; use
    /// [`GhzEnsemble::sign_consistent`] for that.
    pub fn from_parts(n: usize, label: StateLabel, mut members: Vec<Member>) -> Result<Self> {
        check_family_size(n)?;
        let expected = 1usize << (n - 2);
        if members.len() != expected {
            return Err(Error::Domain(format!(
                "expected {expected} members, found {}",
                members.len()
            )));
        }
        let parity = u32::from(label.group_bit());
        for m in &members {
            if m.bits >> (n - 1) != 0 {
                return Err(Error::Domain(format!(
                    "member {} does not start with 0",
                    format_bits(m.bits, n)
                )));
            }
            if m.bits.count_ones() % 2 != parity {
                return Err(Error::Domain(format!(
                    "member {} has the wrong weight parity for {label}",
                    format_bits(m.bits, n)
                )));
            }
            if m.sign != 1 && m.sign != -1 {
                return Err(Error::Domain(format!("sign {} is not ±1", m.sign)));
            }
        }
        members.sort_by_key(|m| m.bits);
        if members.windows(2).any(|w| w[0].bits == w[1].bits) {
            return Err(Error::Domain("repeated member bitstring".into()));
        }
        Ok(Self {
            n_qubits: n,
            label,
            members,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn label(&self) -> StateLabel {
        self.label
    }

    /// Members in ascending bitstring order.
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.members.len() as f64
    }

    /// Whether every member carries the sign its label prescribes.
    pub fn sign_consistent(&self) -> bool {
        let s = self.label.sign();
        self.members.iter().all(|m| m.sign == s)
    }

    fn complement(&self, bits: u64) -> u64 {
        !bits & ((1u64 << self.n_qubits) - 1)
    }

    pub fn to_dense(&self) -> Result<DensityMatrix> {
        check_cap(self.n_qubits)?;
        let mut op = Operator::zeros(self.n_qubits)?;
        let half = 0.5 * self.weight();
        for m in &self.members {
            let x = m.bits as usize;
            let xc = self.complement(m.bits) as usize;
            let diag = Complex64::new(half, 0.0);
            let off = Complex64::new(half * f64::from(m.sign), 0.0);
            op.set(x, x, diag);
            op.set(xc, xc, diag);
            op.set(x, xc, off);
            op.set(xc, x, off);
        }
        Ok(DensityMatrix::from_operator_unchecked(op))
    }

    /// Relabels qubits by exchanging `i` and `j`, then re-canonicalises every
    /// member so its leading bit is zero.
    pub fn swap_qubits(&self, i: usize, j: usize) -> Result<Self> {
        let n = self.n_qubits;
        QubitSubset::pair(i, j)?.check(n)?;
        let (bi, bj) = (1u64 << (n - i), 1u64 << (n - j));
        let lead = 1u64 << (n - 1);
        let mut members: Vec<Member> = self
            .members
            .iter()
            .map(|m| {
                let mut x = m.bits;
                if (x & bi != 0) != (x & bj != 0) {
                    x ^= bi ^ bj;
                }
                if x & lead != 0 {
                    x = self.complement(x);
                }
                Member {
                    bits: x,
                    sign: m.sign,
                }
            })
            .collect();
        members.sort_by_key(|m| m.bits);
        Ok(Self {
            members,
            ..self.clone()
        })
    }

    /// Diagonal of the reduced state on `keep`, which must be a proper subset.
    /// Reductions of a GHZ pair onto fewer qubits lose the coherence term, so
    /// the reduced state is exactly this diagonal.
    pub fn reduced_diagonal(&self, keep: &QubitSubset) -> Result<Vec<f64>> {
        let n = self.n_qubits;
        keep.check(n)?;
        if keep.len() >= n {
            return Err(Error::Domain(
                "reduced_diagonal needs a proper subset of qubits".into(),
            ));
        }
        let mut diag = vec![0.0; 1usize << keep.len()];
        let half = 0.5 * self.weight();
        for m in &self.members {
            diag[keep.gather(m.bits as usize, n)] += half;
            diag[keep.gather(self.complement(m.bits) as usize, n)] += half;
        }
        Ok(diag)
    }

    /// Dense reduced state on `keep` (qubits in the order given).
    pub fn reduce_dense(&self, keep: &QubitSubset) -> Result<DensityMatrix> {
        check_cap(keep.len())?;
        if keep.len() == self.n_qubits {
            keep.check(self.n_qubits)?;
            let dense = self.to_dense()?;
            let natural: Vec<usize> = (1..=self.n_qubits).collect();
            if keep.indices() == natural.as_slice() {
                return Ok(dense);
            }
            return Err(Error::Domain(
                "reordering every qubit is not supported; pass qubits in order".into(),
            ));
        }
        let diag = self.reduced_diagonal(keep)?;
        let mut op = Operator::zeros(keep.len())?;
        for (i, d) in diag.into_iter().enumerate() {
            op.set(i, i, Complex64::new(d, 0.0));
        }
        Ok(DensityMatrix::from_operator_unchecked(op))
    }

    /// Samples the outcome of measuring every qubit in the computational basis.
    pub fn sample_z_string<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let m = self.members[rng.gen_range(0..self.members.len())];
        if rng.gen_bool(0.5) {
            m.bits
        } else {
            self.complement(m.bits)
        }
    }

    pub fn to_dump(&self) -> EnsembleDump {
        EnsembleDump {
            n: self.n_qubits,
            label: self.label,
            members: self
                .members
                .iter()
                .map(|m| MemberDump {
                    bits: format_bits(m.bits, self.n_qubits),
                    sign: m.sign,
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: &EnsembleDump) -> Result<Self> {
        check_family_size(dump.n)?;
        let members = dump
            .members
            .iter()
            .map(|m| {
                Ok(Member {
                    bits: parse_bits(&m.bits, dump.n)?,
                    sign: m.sign,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(dump.n, dump.label, members)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dump()).expect("dump serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: EnsembleDump =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_dump(&dump)
    }
}

/// `Tr(a b)` from bitstring and sign bookkeeping alone.
pub fn sparse_overlap(a: &GhzEnsemble, b: &GhzEnsemble) -> Result<f64> {
    check_same_n(a, b)?;
    let (wa, wb) = (a.weight(), b.weight());
    let mut acc = 0.0;
    for_each_pair(a, b, |ma, mb| {
        if let (Some(sa), Some(sb)) = (ma, mb) {
            acc += wa * wb * 0.5 * (1.0 + f64::from(sa * sb));
        }
    });
    Ok(acc)
}

/// Trace distance between two ensembles. Both are block diagonal over the
/// pairs `{x, x̄}`, so the distance is a sum of 2x2 block contributions.
pub fn sparse_trace_distance(a: &GhzEnsemble, b: &GhzEnsemble) -> Result<f64> {
    check_same_n(a, b)?;
    let (wa, wb) = (a.weight(), b.weight());
    let mut norm = 0.0;
    for_each_pair(a, b, |ma, mb| {
        let (wa, sa) = ma.map_or((0.0, 0.0), |s| (wa, f64::from(s)));
        let (wb, sb) = mb.map_or((0.0, 0.0), |s| (wb, f64::from(s)));
        let diag = wa - wb;
        let off = sa * wa - sb * wb;
        norm += 0.5 * ((diag + off).abs() + (diag - off).abs());
    });
    Ok(0.5 * norm)
}

fn check_same_n(a: &GhzEnsemble, b: &GhzEnsemble) -> Result<()> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch {
            left: a.n_qubits,
            right: b.n_qubits,
        });
    }
    Ok(())
}

/// Merge-join over the sorted member lists, yielding the sign each side
/// holds for every bitstring present in either.
fn for_each_pair(a: &GhzEnsemble, b: &GhzEnsemble, mut f: impl FnMut(Option<i8>, Option<i8>)) {
    let (xs, ys) = (&a.members, &b.members);
    let (mut i, mut j) = (0, 0);
    while i < xs.len() || j < ys.len() {
        match (xs.get(i), ys.get(j)) {
            (Some(x), Some(y)) if x.bits == y.bits => {
                f(Some(x.sign), Some(y.sign));
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.bits < y.bits => {
                f(Some(x.sign), None);
                i += 1;
            }
            (Some(x), None) => {
                f(Some(x.sign), None);
                i += 1;
            }
            (_, Some(y)) => {
                f(None, Some(y.sign));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Serialised ensemble: `{n, label, members: [{bits, sign}, ..]}` with bits
/// written qubit 1 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDump {
    pub n: usize,
    pub label: StateLabel,
    pub members: Vec<MemberDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDump {
    pub bits: String,
    pub sign: i8,
}

pub fn format_bits(bits: u64, n: usize) -> String {
    (0..n)
        .map(|k| {
            if bits >> (n - 1 - k) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

pub fn parse_bits(text: &str, n: usize) -> Result<u64> {
    if text.len() != n {
        return Err(Error::Parse(format!(
            "bitstring {text:?} has length {}, expected {n}",
            text.len()
        )));
    }
    text.chars().try_fold(0u64, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::Parse(format!("invalid bit {other:?}"))),
    })
}
