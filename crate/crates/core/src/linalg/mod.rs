//! Dense complex linear algebra over multi-qubit operators.
//!
//! Qubit 1 is the leftmost tensor factor, i.e. the most significant bit of a
//! basis index. All subset indices are 1-based.

mod eigen;
mod operator;
mod subset;

pub use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::{hermitian_eigen, hermitian_eigen_with, HermitianSpectrum, MAX_SWEEPS};
pub use operator::{DensityMatrix, Operator};
pub use subset::QubitSubset;

pub(crate) use operator::check_cap;
pub(crate) use subset::bit_of;

/// Largest register held as a dense matrix (4096 x 4096).
pub const DENSE_QUBIT_CAP: usize = 12;

/// Default tolerance for equality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default tolerance for eigensolver residuals.
pub const DEFAULT_EIG_TOL: f64 = 1e-9;

/// A 2x2 single-qubit matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

/// Kronecker product, left operand first.
pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    let n = a.n_qubits() + b.n_qubits();
    let mut out = Operator::zeros(n)?;
    let db = b.dim();
    for ia in 0..a.dim() {
        for ja in 0..a.dim() {
            let x = a.get(ia, ja);
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..db {
                for jb in 0..db {
                    out.set(ia * db + ib, ja * db + jb, x * b.get(ib, jb));
                }
            }
        }
    }
    Ok(out)
}

/// Traces out `traced`; the result acts on the remaining qubits in their
/// original order.
pub fn partial_trace(rho: &DensityMatrix, traced: &QubitSubset) -> Result<DensityMatrix> {
    partial_trace_op(rho, traced).map(DensityMatrix::from_operator_unchecked)
}

pub fn partial_trace_op(op: &Operator, traced: &QubitSubset) -> Result<Operator> {
    let n = op.n_qubits();
    traced.check(n)?;
    if traced.len() == n {
        return Err(Error::Domain("cannot trace out every qubit".into()));
    }
    let kept = traced.complement(n);
    let kept_idx = kept.scatter_table(n);
    let traced_idx = traced.scatter_table(n);
    let mut out = Operator::zeros(kept.len())?;
    for (i, &gi) in kept_idx.iter().enumerate() {
        for (j, &gj) in kept_idx.iter().enumerate() {
            let v: Complex64 = traced_idx.iter().map(|&t| op.get(gi | t, gj | t)).sum();
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Transposes the tensor factors in `subset`, leaving the rest untouched.
pub fn partial_transpose(op: &Operator, subset: &QubitSubset) -> Result<Operator> {
    let n = op.n_qubits();
    subset.check(n)?;
    let mask = subset.mask(n);
    let d = op.dim();
    let mut out = Operator::zeros_raw(n);
    for r in 0..d {
        for c in 0..d {
            let r2 = (r & !mask) | (c & mask);
            let c2 = (c & !mask) | (r & mask);
            out.set(r, c, op.get(r2, c2));
        }
    }
    Ok(out)
}

/// `S A S†` where `S` swaps qubits `i` and `j`. Implemented as the
/// equivalent basis-index relabelling.
pub fn swap_qubits(op: &Operator, i: usize, j: usize) -> Result<Operator> {
    let n = op.n_qubits();
    let swap = index_swap(n, i, j)?;
    let d = op.dim();
    let mut out = Operator::zeros_raw(n);
    for r in 0..d {
        for c in 0..d {
            out.set(swap(r), swap(c), op.get(r, c));
        }
    }
    Ok(out)
}

/// The permutation matrix exchanging qubits `i` and `j`.
pub fn swap_operator(n: usize, i: usize, j: usize) -> Result<Operator> {
    let swap = index_swap(n, i, j)?;
    let mut out = Operator::zeros(n)?;
    for x in 0..out.dim() {
        out.set(swap(x), x, Complex64::new(1.0, 0.0));
    }
    Ok(out)
}

fn index_swap(n: usize, i: usize, j: usize) -> Result<impl Fn(usize) -> usize> {
    QubitSubset::pair(i, j)?.check(n)?;
    let (bi, bj) = (bit_of(i, n), bit_of(j, n));
    Ok(move |x: usize| {
        if (x & bi != 0) == (x & bj != 0) {
            x
        } else {
            x ^ bi ^ bj
        }
    })
}

/// `U_q A U_q†` for a single-qubit `u` acting on qubit `q`.
pub fn conjugate_single_qubit(op: &Operator, q: usize, u: &Mat2) -> Result<Operator> {
    let mut out = op.clone();
    conjugate_single_qubit_in_place(&mut out, q, u)?;
    Ok(out)
}

pub(crate) fn conjugate_single_qubit_in_place(op: &mut Operator, q: usize, u: &Mat2) -> Result<()> {
    let n = op.n_qubits();
    QubitSubset::single(q)?.check(n)?;
    let bit = bit_of(q, n);
    let d = op.dim();
    // Left: rows.
    for c in 0..d {
        for r0 in (0..d).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            let (a0, a1) = (op.get(r0, c), op.get(r1, c));
            op.set(r0, c, u[0][0] * a0 + u[0][1] * a1);
            op.set(r1, c, u[1][0] * a0 + u[1][1] * a1);
        }
    }
    // Right by U†: columns.
    let data = op.as_mut_slice();
    for r in 0..d {
        let row = &mut data[r * d..(r + 1) * d];
        for c0 in (0..d).filter(|c| c & bit == 0) {
            let c1 = c0 | bit;
            let (a0, a1) = (row[c0], row[c1]);
            row[c0] = a0 * u[0][0].conj() + a1 * u[0][1].conj();
            row[c1] = a0 * u[1][0].conj() + a1 * u[1][1].conj();
        }
    }
    Ok(())
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &Operator, sigma: &Operator) -> Result<f64> {
    let diff = rho.sub(sigma)?;
    let spectrum = hermitian_eigen(&diff)?;
    Ok(0.5 * spectrum.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// `Tr(rho sigma)`, real part.
pub fn overlap(rho: &Operator, sigma: &Operator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let d = rho.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (rho.get(i, j) * sigma.get(j, i)).re;
        }
    }
    Ok(acc)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &Operator) -> Result<f64> {
    let spectrum = hermitian_eigen(rho)?;
    Ok(spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-15)
        .map(|&l| -l * l.log2())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn phi_plus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(2, &[c(h), c(0.0), c(0.0), c(h)]).unwrap()
    }

    fn psi_plus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(2, &[c(0.0), c(h), c(h), c(0.0)]).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i1 = Operator::identity(1).unwrap();
        assert_eq!(
            tensor_product(&i1, &i1).unwrap(),
            Operator::identity(2).unwrap()
        );
    }

    #[test]
    fn bell_tensor_bell_corner_entry() {
        // (|00>+|11>)(<00|+<11|)/2 twice: the |0000><1111| entry is 1/4.
        let p = tensor_product(&phi_plus(), &phi_plus()).unwrap();
        assert_eq!(p.dim(), 16);
        assert!((p.get(0b0000, 0b1111) - c(0.25)).norm() < 1e-15);
        assert!((p.trace() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn tensor_respects_cap() {
        let a = Operator::identity(7).unwrap();
        let b = Operator::identity(6).unwrap();
        assert!(matches!(
            tensor_product(&a, &b),
            Err(Error::SizeLimit { n: 13, .. })
        ));
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let r = partial_trace(&phi_plus(), &QubitSubset::single(1).unwrap()).unwrap();
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(r.max_abs_diff(&half).unwrap() < 1e-15);
    }

    #[test]
    fn cannot_trace_everything() {
        let all = QubitSubset::all(2);
        assert!(matches!(
            partial_trace(&phi_plus(), &all),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn product_factorises() {
        let a = phi_plus();
        let b = psi_plus();
        let ab = DensityMatrix::from_operator_unchecked(tensor_product(&a, &b).unwrap());
        let back = partial_trace(&ab, &QubitSubset::new(vec![3, 4]).unwrap()).unwrap();
        assert!(back.max_abs_diff(&a).unwrap() < 1e-12);
        let front = partial_trace(&ab, &QubitSubset::new(vec![1, 2]).unwrap()).unwrap();
        assert!(front.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_bell() {
        let pt = partial_transpose(&phi_plus(), &QubitSubset::single(1).unwrap()).unwrap();
        let spec = hermitian_eigen(&pt).unwrap();
        assert!((spec.eigenvalues[0] + 0.5).abs() < 1e-12);
        let same = partial_transpose(&phi_plus(), &QubitSubset::empty()).unwrap();
        assert_eq!(&same, phi_plus().as_operator());
    }

    #[test]
    fn swap_matches_explicit_conjugation() {
        let op = tensor_product(&phi_plus(), &psi_plus()).unwrap();
        let s = swap_operator(4, 2, 3).unwrap();
        let explicit = s.matmul(&op).unwrap().matmul(&s.adjoint()).unwrap();
        let fast = swap_qubits(&op, 2, 3).unwrap();
        assert!(explicit.max_abs_diff(&fast).unwrap() < 1e-15);
    }

    #[test]
    fn orthogonal_pure_states_are_distance_one() {
        assert!((trace_distance(&phi_plus(), &psi_plus()).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&phi_plus(), &phi_plus()).unwrap() < 1e-15);
        assert!(trace_distance(&phi_plus(), &Operator::identity(1).unwrap()).is_err());
    }

    #[test]
    fn overlap_with_maximally_mixed() {
        let mm = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((overlap(&mm, &phi_plus()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_qubit_conjugation_with_x() {
        let x: Mat2 = [[c(0.0), c(1.0)], [c(1.0), c(0.0)]];
        let flipped = conjugate_single_qubit(&phi_plus(), 1, &x).unwrap();
        assert!(flipped.max_abs_diff(&psi_plus()).unwrap() < 1e-15);
    }

    #[test]
    fn entropy_of_bell_marginal() {
        let r = partial_trace(&phi_plus(), &QubitSubset::single(2).unwrap()).unwrap();
        assert!((von_neumann_entropy(&r).unwrap() - 1.0).abs() < 1e-12);
        assert!(von_neumann_entropy(&phi_plus()).unwrap().abs() < 1e-12);
    }
}
