use hidebits_core::linalg::{
    hermitian_eigen, partial_trace, tensor_product, trace_distance, Complex64, DensityMatrix,
    Operator,
};
use hidebits_core::QubitSubset;
use proptest::prelude::*;

fn random_density(n: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let d = 1usize << n;
    let a = Operator::from_fn(n, |r, c| {
        let (re, im) = entries[(r * d + c) % entries.len()];
        Complex64::new(re + (r as f64 * 0.37).sin(), im + (c as f64 * 0.91).cos())
    })
    .unwrap();
    let rho = a.matmul(&a.adjoint()).unwrap();
    let tr = rho.trace().re;
    DensityMatrix::new(rho.scale(1.0 / tr), 1e-9).unwrap()
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trace_distance_triangle(n in 1usize..4, a in entries(), b in entries(), c in entries()) {
        let (ra, rb, rc) = (random_density(n, &a), random_density(n, &b), random_density(n, &c));
        let ab = trace_distance(&ra, &rb).unwrap();
        let bc = trace_distance(&rb, &rc).unwrap();
        let ac = trace_distance(&ra, &rc).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&ab));
    }

    #[test]
    fn partial_trace_undoes_tensor(na in 1usize..4, nb in 1usize..4, a in entries(), b in entries()) {
        let ra = random_density(na, &a);
        let rb = random_density(nb, &b);
        let joint = DensityMatrix::new(tensor_product(&ra, &rb).unwrap(), 1e-9).unwrap();
        let traced = QubitSubset::new(((na + 1)..=(na + nb)).collect()).unwrap();
        let back = partial_trace(&joint, &traced).unwrap();
        prop_assert!(back.max_abs_diff(&ra).unwrap() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn eigen_reconstruction(n in 1usize..=8, a in entries()) {
        let rho = random_density(n, &a);
        let spec = hermitian_eigen(&rho).unwrap();
        let scale = rho.frobenius_norm().max(1.0);
        prop_assert!(spec.reconstruction_error(&rho).unwrap() < 1e-9 * scale);
        prop_assert!(spec.orthonormality_error() < 1e-9);
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}
