use num_complex::Complex64 as C64;
use proptest::prelude::*;
use spinorsurf::cquat::{
    cross, from_mat2, mixed, spin_act, to_mat2, CQuat, ImQuat, MinkVec, SpinElem,
};

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn quat() -> impl Strategy<Value = CQuat> {
    (c64(), c64(), c64(), c64()).prop_map(|(a, b, c, d)| CQuat::new(a, b, c, d))
}

fn spin() -> impl Strategy<Value = SpinElem> {
    quat()
        .prop_filter("H away from zero", |q| q.h(q).norm() > 0.05)
        .prop_map(|q| SpinElem::normalize(q).unwrap())
        // keep the boost part moderate so relative errors stay meaningful
        .prop_filter("moderate", |p| p.value().norm() < 8.0)
}

fn mink() -> impl Strategy<Value = MinkVec> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(a, b, c, d)| MinkVec::new(a, b, c, d))
}

fn close(a: CQuat, b: CQuat, scale: f64) -> bool {
    (a - b).max_abs() <= 1e-10 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn product_is_associative(p in quat(), q in quat(), r in quat()) {
        let s = p.norm() * q.norm() * r.norm();
        prop_assert!(close((p * q) * r, p * (q * r), s));
    }

    #[test]
    fn conjugations_are_involutive_and_anti_or_auto(p in quat(), q in quat()) {
        prop_assert_eq!(p.conj_bar().conj_bar(), p);
        prop_assert_eq!(p.conj_hat().conj_hat(), p);
        let s = p.norm() * q.norm();
        prop_assert!(close((p * q).conj_bar(), q.conj_bar() * p.conj_bar(), s));
        prop_assert!(close((p * q).conj_hat(), p.conj_hat() * q.conj_hat(), s));
    }

    #[test]
    fn h_is_multiplicative(p in quat(), q in quat()) {
        let lhs = (p * q).h(&(p * q));
        let rhs = p.h(&p) * q.h(&q);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (p.norm() * q.norm()).powi(2).max(1.0));
    }

    #[test]
    fn double_cover_is_an_isometry(p in spin(), v in mink()) {
        let w = spin_act(&p, &v).unwrap();
        let scale = p.value().norm().powi(4) * v.euclid_norm().powi(2);
        prop_assert!((w.norm_sq() - v.norm_sq()).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn matrix_image_is_a_homomorphism(p in quat(), q in quat()) {
        let s = p.norm() * q.norm();
        let d = to_mat2(&(p * q)) - to_mat2(&p) * to_mat2(&q);
        prop_assert!(d.max_abs() <= 1e-10 * s.max(1.0));
        prop_assert!((to_mat2(&p).det() - p.h(&p)).norm() <= 1e-10 * p.norm().powi(2).max(1.0));
        let star = to_mat2(&p.conj_bar().conj_hat()) - to_mat2(&p).conj_transpose();
        prop_assert!(star.max_abs() <= 1e-12 * p.norm().max(1.0));
        prop_assert!(close(from_mat2(&to_mat2(&p)), p, p.norm()));
    }

    #[test]
    fn invert_round_trips(q in quat()) {
        prop_assume!(q.h(&q).norm() > 1e-2);
        let inv = q.invert().unwrap();
        let s = q.norm() * inv.norm();
        prop_assert!(close(q * inv, CQuat::ONE, s));
        prop_assert!(close(inv * q, CQuat::ONE, s));
    }

    #[test]
    fn grassmannian_membership(p in spin()) {
        // image of the orthonormal pair (e1, e2) under a Lorentz transformation
        let u1 = spin_act(&p, &MinkVec::E1).unwrap().to_cquat();
        let u2 = spin_act(&p, &MinkVec::E2).unwrap().to_cquat();
        let x = u1 * u2.conj_hat();
        let scale = p.value().norm().powi(4);
        prop_assert!(x.coeffs()[0].norm() <= 1e-10 * scale.max(1.0));
        let im = ImQuat::from_cquat_unchecked(&x);
        prop_assert!((im.h(&im) + 1.0).norm() <= 1e-10 * scale.powi(2).max(1.0));
    }

    #[test]
    fn cross_is_antisymmetric_and_mixed_alternates(
        a in (c64(), c64(), c64()), b in (c64(), c64(), c64()), c in (c64(), c64(), c64())
    ) {
        let a = ImQuat::new(a.0, a.1, a.2);
        let b = ImQuat::new(b.0, b.1, b.2);
        let c = ImQuat::new(c.0, c.1, c.2);
        let ab = cross(&a, &b).to_cquat();
        let ba = cross(&b, &a).to_cquat();
        prop_assert!(close(ab, -ba, 16.0));
        prop_assert!(cross(&a, &a).to_cquat().max_abs() <= 1e-12);
        let m = mixed(&a, &b, &c);
        prop_assert!((m + mixed(&b, &a, &c)).norm() <= 1e-10 * 64.0);
        prop_assert!((m - mixed(&b, &c, &a)).norm() <= 1e-10 * 64.0);
    }
}
