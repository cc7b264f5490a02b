//! Shared fixtures for the criterion benches.

use hidebits_core::family::{dense_family, Family};
use hidebits_core::linalg::{Complex64, Operator};
use hidebits_core::Result;

pub fn family(n: usize) -> Result<Family> {
    dense_family(n)
}

/// A deterministic dense Hermitian matrix on `n` qubits.
pub fn hermitian_fixture(n: usize) -> Result<Operator> {
    let a = Operator::from_fn(n, |r, c| {
        let x = (r * 31 + c * 17) as f64;
        Complex64::new(x.sin(), if r == c { 0.0 } else { (x * 0.5).cos() })
    })?;
    Ok(a.add(&a.adjoint())?.scale(0.5))
}
