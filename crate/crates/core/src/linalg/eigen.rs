//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies a real Givens rotation, so the composite
//! transformation stays unitary and the diagonal stays real. Pivots are
//! visited in row-major order `(0,1), (0,2), .., (n-2,n-1)` every sweep,
//! which makes the result a deterministic function of the input.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{Operator, DEFAULT_TOL};

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors stored
/// as the columns of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Operator,
}

impl HermitianSpectrum {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> Operator {
        let v = &self.eigenvectors;
        let d = v.dim();
        let mut out = Operator::zeros_raw(v.n_qubits());
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            if lambda == 0.0 {
                continue;
            }
            for r in 0..d {
                let vr = v.get(r, k) * lambda;
                if vr == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    out.add_at(r, c, vr * v.get(c, k).conj());
                }
            }
        }
        out
    }

    /// Induced infinity norm (max absolute row sum) of `A - V diag(λ) V†`.
    pub fn reconstruction_error(&self, a: &Operator) -> Result<f64> {
        let diff = a.sub(&self.reconstruct())?;
        let d = diff.dim();
        Ok((0..d)
            .map(|r| (0..d).map(|c| diff.get(r, c).norm()).sum::<f64>())
            .fold(0.0, f64::max))
    }

    /// Largest deviation of `V†V` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.adjoint().matmul(v).expect("square");
        let id = Operator::identity(v.n_qubits()).expect("within cap");
        gram.max_abs_diff(&id).expect("same shape")
    }
}

/// Eigendecomposition with the default Hermiticity tolerance and sweep cap.
pub fn hermitian_eigen(a: &Operator) -> Result<HermitianSpectrum> {
    hermitian_eigen_with(a, DEFAULT_TOL, MAX_SWEEPS)
}

pub fn hermitian_eigen_with(
    a: &Operator,
    hermiticity_tol: f64,
    max_sweeps: usize,
) -> Result<HermitianSpectrum> {
    let deviation = a.hermiticity_deviation();
    if deviation > hermiticity_tol {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.dim();
    let mut m = a.clone();
    // Symmetrise so round-off in the input cannot accumulate.
    for r in 0..n {
        m.set(r, r, Complex64::new(m.get(r, r).re, 0.0));
        for c in (r + 1)..n {
            let avg = (a.get(r, c) + a.get(c, r).conj()) * 0.5;
            m.set(r, c, avg);
            m.set(c, r, avg.conj());
        }
    }
    let mut v = Operator::identity(a.n_qubits())?;

    let fro = m.frobenius_norm();
    let threshold = 1e-14 * fro.max(1.0);
    let skip = threshold / (n.max(1) as f64);

    let mut converged = false;
    let mut residual = off_diagonal_norm(&m);
    for _ in 0..max_sweeps {
        if residual <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                let magnitude = apq.norm();
                if magnitude <= skip {
                    continue;
                }
                rotate(&mut m, &mut v, p, q, apq, magnitude);
            }
        }
        residual = off_diagonal_norm(&m);
    }
    if !converged && residual > threshold {
        return Err(Error::NoConvergence {
            sweeps: max_sweeps,
            residual,
        });
    }

    let raw: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: equal eigenvalues keep first-occurrence order.
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));
    let eigenvalues = order.iter().map(|&i| raw[i]).collect();
    let mut eigenvectors = Operator::zeros_raw(a.n_qubits());
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(m: &Operator) -> f64 {
    let n = m.dim();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += m.get(r, c).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(m: &mut Operator, v: &mut Operator, p: usize, q: usize, apq: Complex64, magnitude: f64) {
    let n = m.dim();
    let app = m.get(p, p).re;
    let aqq = m.get(q, q).re;
    let theta = (aqq - app) / (2.0 * magnitude);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = apq / magnitude;
    let phase_conj = phase.conj();

    // m <- m J with J = [[c, s], [-s e*, c e*]] on (p, q).
    for k in 0..n {
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        m.set(k, p, akp * c - akq * phase_conj * s);
        m.set(k, q, akp * s + akq * phase_conj * c);
    }
    // m <- J† m
    for k in 0..n {
        let apk = m.get(p, k);
        let aqk = m.get(q, k);
        m.set(p, k, apk * c - aqk * phase * s);
        m.set(q, k, apk * s + aqk * phase * c);
    }
    m.set(p, q, Complex64::new(0.0, 0.0));
    m.set(q, p, Complex64::new(0.0, 0.0));
    m.set(p, p, Complex64::new(app - t * magnitude, 0.0));
    m.set(q, q, Complex64::new(aqq + t * magnitude, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c - vkq * phase_conj * s);
        v.set(k, q, vkp * s + vkq * phase_conj * c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let spec = hermitian_eigen(&Operator::identity(2).unwrap()).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn pauli_z_and_y() {
        let z = Operator::from_vec(1, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap();
        let spec = hermitian_eigen(&z).unwrap();
        assert_eq!(spec.eigenvalues, vec![-1.0, 1.0]);

        let y = Operator::from_vec(1, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let spec = hermitian_eigen(&y).unwrap();
        assert!((spec.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((spec.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(spec.reconstruction_error(&y).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Operator::from_vec(1, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(
            hermitian_eigen(&a),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn sweep_cap_reports_residual() {
        let a = Operator::from_vec(1, vec![c(0., 0.), c(0., 1.), c(0., -1.), c(0., 0.)]).unwrap();
        match hermitian_eigen_with(&a, 1e-10, 0) {
            Err(Error::NoConvergence { residual, .. }) => assert!(residual > 1.0),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let a = Operator::from_fn(3, |r, k| {
            let x = (r * 7 + k * 3) as f64;
            let y = (k * 7 + r * 3) as f64;
            c(
                (x + y).sin(),
                if r == k {
                    0.0
                } else {
                    (x - y).cos() * (r as f64 - k as f64)
                },
            )
        })
        .unwrap();
        let a = a.add(&a.adjoint()).unwrap().scale(0.5);
        let s1 = hermitian_eigen(&a).unwrap();
        let s2 = hermitian_eigen(&a).unwrap();
        assert_eq!(s1.eigenvalues, s2.eigenvalues);
        assert_eq!(s1.eigenvectors, s2.eigenvectors);
    }
}
