use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::eigen::hermitian_eigen;
use super::{DEFAULT_TOL, DENSE_QUBIT_CAP};

/// A square complex matrix acting on `n_qubits` qubits, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

pub(crate) fn check_cap(n: usize) -> Result<()> {
    if n > DENSE_QUBIT_CAP {
        Err(Error::SizeLimit {
            n,
            cap: DENSE_QUBIT_CAP,
        })
    } else {
        Ok(())
    }
}

impl Operator {
    pub fn zeros(n_qubits: usize) -> Result<Self> {
        check_cap(n_qubits)?;
        Ok(Self::zeros_raw(n_qubits))
    }

    pub(crate) fn zeros_raw(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        let mut op = Self::zeros(n_qubits)?;
        for i in 0..op.dim {
            op.data[i * op.dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(op)
    }

    /// Builds an operator from row-major entries. The length must be `4^n`.
    pub fn from_vec(n_qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        check_cap(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: dim * dim,
            });
        }
        Ok(Self {
            n_qubits,
            dim,
            data,
        })
    }

    pub fn from_fn(n_qubits: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let mut op = Self::zeros(n_qubits)?;
        let dim = op.dim;
        for r in 0..dim {
            for c in 0..dim {
                op.data[r * dim + c] = f(r, c);
            }
        }
        Ok(op)
    }

    /// Projector `|v><v|` onto an (unnormalised) state vector.
    pub fn projector(n_qubits: usize, v: &[Complex64]) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                left: v.len(),
                right: dim,
            });
        }
        Self::from_fn(n_qubits, |r, c| v[r] * v[c].conj())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] += v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros_raw(self.n_qubits);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.get(r, c).conj();
            }
        }
        out
    }

    /// Largest entrywise deviation `|a_rc - conj(a_cr)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { data, ..*self })
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            data: self.data.iter().map(|a| a * k).collect(),
            ..*self
        }
    }

    pub(crate) fn add_scaled_in_place(&mut self, other: &Self, k: f64) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * k;
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let d = self.dim;
        let mut out = Self::zeros_raw(self.n_qubits);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out.data[r * d..(r + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
///
/// Construction through [`DensityMatrix::new`] checks Hermiticity and trace.
/// Positivity needs a full eigendecomposition and is checked separately by
/// [`DensityMatrix::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator, tol: f64) -> Result<Self> {
        let dev = op.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = op.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::Domain(format!("trace {tr} is not 1")));
        }
        Ok(Self(op))
    }

    /// Wraps an operator that is a state by construction.
    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self(op)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let scale = 1.0 / (1usize << n_qubits) as f64;
        Ok(Self(Operator::identity(n_qubits)?.scale(scale)))
    }

    /// Pure state from a normalised vector.
    pub fn pure(n_qubits: usize, v: &[Complex64]) -> Result<Self> {
        Self::new(Operator::projector(n_qubits, v)?, DEFAULT_TOL)
    }

    /// Full check of Hermiticity, unit trace and positivity. Returns the
    /// minimum eigenvalue on success.
    pub fn validate(&self, tol: f64) -> Result<f64> {
        let dev = self.0.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = self.0.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::Domain(format!("trace {tr} is not 1")));
        }
        let spectrum = hermitian_eigen(&self.0)?;
        let min = spectrum.eigenvalues.first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::Domain(format!("negative eigenvalue {min:e}")));
        }
        Ok(min)
    }

    pub fn purity(&self) -> f64 {
        super::overlap(self, self).unwrap_or(f64::NAN)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }
}

impl Deref for DensityMatrix {
    type Target = Operator;

    fn deref(&self) -> &Operator {
        &self.0
    }
}

impl AsRef<Operator> for DensityMatrix {
    fn as_ref(&self) -> &Operator {
        &self.0
    }
}

impl AsRef<Operator> for Operator {
    fn as_ref(&self) -> &Operator {
        self
    }
}
