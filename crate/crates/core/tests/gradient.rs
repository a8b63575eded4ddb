mod common;

use arff_core::features::ActivationKind;
use arff_core::{Complex64, DMatrix};
use proptest::prelude::*;

fn instance(xs: &[f64], ys: &[f64], ws: &[f64], bs: &[f64]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<Complex64>) {
    (
        DMatrix::from_row_slice(5, 2, xs),
        DMatrix::from_row_slice(5, 1, ys),
        DMatrix::from_row_slice(3, 2, ws),
        DMatrix::from_fn(3, 1, |k, _| Complex64::new(bs[2 * k], bs[2 * k + 1])),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gradient_matches_central_differences(
        xs in prop::collection::vec(-2.0..2.0f64, 10),
        ys in prop::collection::vec(-1.0..1.0f64, 5),
        ws in prop::collection::vec(-2.0..2.0f64, 6),
        bs in prop::collection::vec(-1.0..1.0f64, 6),
        sigmoid in any::<bool>(),
    ) {
        let (x, y, omega, beta) = instance(&xs, &ys, &ws, &bs);
        let act = if sigmoid { ActivationKind::Sigmoid } else { ActivationKind::Fourier };
        let worst = common::gradient_mismatch(&x, &y, &omega, &beta, act, 1e-6);
        prop_assert!(worst < 1e-5, "relative mismatch {}", worst);
    }
}
