use num_complex::Complex64 as C64;
use proptest::prelude::*;
use spinorsurf::cquat::{from_mat2, to_mat2, CQuat, Mat2C, SpinElem};
use spinorsurf::desitter::desitter_point;
use spinorsurf::seeddomain::{alpha_from, coframe_of, generator_from};

fn c64(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn frame_fields_solve_the_linear_relation(
        f1 in c64(3.0), f2 in c64(3.0), h1 in -3.0..3.0f64, h2 in -3.0..3.0f64
    ) {
        prop_assume!((f1 * f1 - f2 * f2).norm() > 0.05);
        let (a1, a2) = alpha_from(f1, f2, h1, h2).unwrap();
        let lhs = (CQuat::scalar(a1 * C64::i()) + CQuat::I * a2) * generator_from(f1, f2);
        let rhs = CQuat::J * h1 + CQuat::K * h2;
        let scale = (a1.norm() + a2.norm()) * (f1.norm() + f2.norm());
        prop_assert!((lhs - rhs).max_abs() <= 1e-10 * scale.max(1.0), "{lhs:?}");
    }

    #[test]
    fn coframe_inverts_the_frame(a1 in c64(2.0), a2 in c64(2.0)) {
        let det = a1.re * a2.im - a2.re * a1.im;
        prop_assume!(det.abs() > 0.05);
        let w = coframe_of(a1, a2);
        // w_k(alpha_l) = delta_kl
        let ev = |k: usize, a: C64| w[k][0] * a.re + w[k][1] * a.im;
        let tol = 1e-10 * (a1.norm() + a2.norm()).powi(2) / det.abs();
        prop_assert!((ev(0, a1) - 1.0).abs() <= tol);
        prop_assert!(ev(0, a2).abs() <= tol);
        prop_assert!(ev(1, a1).abs() <= tol);
        prop_assert!((ev(1, a2) - 1.0).abs() <= tol);
    }

    #[test]
    fn spin_elements_map_to_unimodular_matrices(
        q in (c64(2.0), c64(2.0), c64(2.0), c64(2.0))
    ) {
        let q = CQuat::new(q.0, q.1, q.2, q.3);
        prop_assume!(q.h(&q).norm() > 0.05);
        let p = SpinElem::normalize(q).unwrap();
        let b = to_mat2(&p.value());
        prop_assert!((b.det() - 1.0).norm() <= 1e-10 * p.value().norm().powi(2).max(1.0));
        prop_assert!((from_mat2(&b) - p.value()).max_abs() <= 1e-12 * p.value().norm().max(1.0));
    }

    #[test]
    fn hermitian_image_is_unimodular(a in c64(2.0), b in c64(2.0), c in c64(2.0)) {
        prop_assume!(a.norm() > 0.1);
        let m = Mat2C::new(a, b, c, (1.0 + b * c) / a);
        let f = desitter_point(&m).unwrap();
        let scale = m.max_abs().powi(4);
        prop_assert!((f.det() - 1.0).norm() <= 1e-10 * scale.max(1.0));
        // F is i times a Hermitian matrix
        let herm = f.scale(-C64::i());
        prop_assert!((herm - herm.conj_transpose()).max_abs() <= 1e-12 * scale.max(1.0));
    }
}
