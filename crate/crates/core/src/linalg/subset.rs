use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered set of qubit positions, 1-based, with qubit 1 the leftmost
/// (most significant) tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct QubitSubset(Vec<usize>);

impl QubitSubset {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidSubset("qubit indices are 1-based".into()));
        }
        let mut seen = indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != indices.len() {
            return Err(Error::InvalidSubset(format!(
                "repeated index in {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// All qubits `1..=n` in order.
    pub fn all(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn single(q: usize) -> Result<Self> {
        Self::new(vec![q])
    }

    pub fn pair(a: usize, b: usize) -> Result<Self> {
        Self::new(vec![a, b])
    }

    /// Parses a comma separated list such as `1,2,5`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(Self::empty());
        }
        let indices = trimmed
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad qubit index {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices)
    }

    /// Verifies every index lies in `1..=n`.
    pub fn check(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|&&q| q > n) {
            Some(q) => Err(Error::InvalidSubset(format!(
                "qubit {q} out of range for a {n}-qubit system"
            ))),
            None => Ok(()),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.contains(&q)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Qubits of `1..=n` not in this subset, ascending.
    pub fn complement(&self, n: usize) -> Self {
        Self((1..=n).filter(|q| !self.contains(*q)).collect())
    }

    /// Basis-index bit mask of the subset in an `n`-qubit register.
    pub fn mask(&self, n: usize) -> usize {
        self.0.iter().fold(0, |m, &q| m | bit_of(q, n))
    }

    /// Lists, for each local index `0..2^k`, the global bit pattern it
    /// scatters to. The first subset element is the most significant local bit.
    pub(crate) fn scatter_table(&self, n: usize) -> Vec<usize> {
        let k = self.0.len();
        (0..1usize << k)
            .map(|local| {
                self.0.iter().enumerate().fold(0, |acc, (pos, &q)| {
                    if local >> (k - 1 - pos) & 1 == 1 {
                        acc | bit_of(q, n)
                    } else {
                        acc
                    }
                })
            })
            .collect()
    }

    /// Reads the subset's bits out of a global basis index, first element
    /// most significant.
    pub(crate) fn gather(&self, index: usize, n: usize) -> usize {
        self.0.iter().fold(0, |acc, &q| {
            (acc << 1) | usize::from(index & bit_of(q, n) != 0)
        })
    }
}

impl TryFrom<Vec<usize>> for QubitSubset {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QubitSubset> for Vec<usize> {
    fn from(s: QubitSubset) -> Self {
        s.0
    }
}

impl fmt::Display for QubitSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Basis-index bit for 1-based qubit `q` of an `n`-qubit register.
#[inline]
pub(crate) fn bit_of(q: usize, n: usize) -> usize {
    1 << (n - q)
}
