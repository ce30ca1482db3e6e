//! Complexified quaternions `H^C` and the structures built on them.
//!
//! A [`CQuat`] is `q1 + q2 I + q3 J + q4 K` with complex coefficients, where
//! the complex unit commutes with `I, J, K`. Minkowski space `R^{3,1}` sits
//! inside as `i x1 + x2 I + x3 J + x4 K`, `Spin(3,1)` is the quadric
//! `H(p,p) = 1`, and [`Mat2C`] realises the algebra isomorphism with 2x2
//! complex matrices.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const IM: C64 = C64::new(0.0, 1.0);

/// Relative threshold below which `H(q,q)` is treated as zero.
pub const EPS_INV: f64 = 1e-12;
/// Largest imaginary residue tolerated when projecting back to `R^{3,1}`.
pub const EPS_REAL: f64 = 1e-9;
/// Tolerance on `|H(p,p) - 1|` for spin elements.
pub const SPIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CQuat {
    pub q1: C64,
    pub q2: C64,
    pub q3: C64,
    pub q4: C64,
}

impl CQuat {
    pub const ONE: CQuat = CQuat::new(ONE, ZERO, ZERO, ZERO);
    pub const I: CQuat = CQuat::new(ZERO, ONE, ZERO, ZERO);
    pub const J: CQuat = CQuat::new(ZERO, ZERO, ONE, ZERO);
    pub const K: CQuat = CQuat::new(ZERO, ZERO, ZERO, ONE);
    pub const ZERO: CQuat = CQuat::new(ZERO, ZERO, ZERO, ZERO);

    #[inline]
    pub const fn new(q1: C64, q2: C64, q3: C64, q4: C64) -> Self {
        Self { q1, q2, q3, q4 }
    }

    /// The scalar `c * 1`.
    #[inline]
    pub const fn scalar(c: C64) -> Self {
        Self::new(c, ZERO, ZERO, ZERO)
    }

    #[inline]
    pub fn from_real(q1: f64, q2: f64, q3: f64, q4: f64) -> Self {
        Self::new(q1.into(), q2.into(), q3.into(), q4.into())
    }

    #[inline]
    pub fn coeffs(&self) -> [C64; 4] {
        [self.q1, self.q2, self.q3, self.q4]
    }

    #[inline]
    pub fn from_coeffs(c: [C64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    #[inline]
    pub fn scale(self, s: C64) -> Self {
        Self::new(self.q1 * s, self.q2 * s, self.q3 * s, self.q4 * s)
    }

    #[inline]
    pub fn scale_re(self, s: f64) -> Self {
        Self::new(self.q1 * s, self.q2 * s, self.q3 * s, self.q4 * s)
    }

    /// The C-bilinear symmetric form `H(p,q) = sum p_k q_k`.
    #[inline]
    pub fn h(&self, other: &CQuat) -> C64 {
        self.q1 * other.q1 + self.q2 * other.q2 + self.q3 * other.q3 + self.q4 * other.q4
    }

    /// Real part of `H`, the signature-(4,4) scalar product.
    #[inline]
    pub fn real_dot(&self, other: &CQuat) -> f64 {
        self.h(other).re
    }

    /// Quaternionic conjugation: negates the `I, J, K` parts.
    #[inline]
    pub fn conj_bar(&self) -> Self {
        Self::new(self.q1, -self.q2, -self.q3, -self.q4)
    }

    /// Complex conjugation of every coefficient.
    #[inline]
    pub fn conj_hat(&self) -> Self {
        Self::new(self.q1.conj(), self.q2.conj(), self.q3.conj(), self.q4.conj())
    }

    /// Largest coefficient modulus.
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Euclidean norm of the eight real components.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `q^{-1} = conj_bar(q) / H(q,q)`; refuses null and near-null elements.
    pub fn invert(&self) -> Result<CQuat> {
        let n = self.h(self);
        let scale = self.max_abs();
        if scale == 0.0 || n.norm() <= EPS_INV * scale * scale {
            return Err(Error::NotInvertible { norm: n.norm() });
        }
        Ok(self.conj_bar().scale(n.inv()))
    }

    /// Commutator `pq - qp`.
    #[inline]
    pub fn commutator(&self, other: &CQuat) -> CQuat {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Mul for CQuat {
    type Output = CQuat;

    #[inline]
    fn mul(self, b: CQuat) -> CQuat {
        let a = self;
        CQuat::new(
            a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3 - a.q4 * b.q4,
            a.q1 * b.q2 + a.q2 * b.q1 + a.q3 * b.q4 - a.q4 * b.q3,
            a.q1 * b.q3 - a.q2 * b.q4 + a.q3 * b.q1 + a.q4 * b.q2,
            a.q1 * b.q4 + a.q2 * b.q3 - a.q3 * b.q2 + a.q4 * b.q1,
        )
    }
}

impl Mul<C64> for CQuat {
    type Output = CQuat;
    #[inline]
    fn mul(self, s: C64) -> CQuat {
        self.scale(s)
    }
}

impl Mul<CQuat> for C64 {
    type Output = CQuat;
    #[inline]
    fn mul(self, q: CQuat) -> CQuat {
        q.scale(self)
    }
}

impl Mul<f64> for CQuat {
    type Output = CQuat;
    #[inline]
    fn mul(self, s: f64) -> CQuat {
        self.scale_re(s)
    }
}

impl Add for CQuat {
    type Output = CQuat;
    #[inline]
    fn add(self, b: CQuat) -> CQuat {
        CQuat::new(self.q1 + b.q1, self.q2 + b.q2, self.q3 + b.q3, self.q4 + b.q4)
    }
}

impl AddAssign for CQuat {
    #[inline]
    fn add_assign(&mut self, b: CQuat) {
        *self = *self + b;
    }
}

impl Sub for CQuat {
    type Output = CQuat;
    #[inline]
    fn sub(self, b: CQuat) -> CQuat {
        CQuat::new(self.q1 - b.q1, self.q2 - b.q2, self.q3 - b.q3, self.q4 - b.q4)
    }
}

impl Neg for CQuat {
    type Output = CQuat;
    #[inline]
    fn neg(self) -> CQuat {
        CQuat::new(-self.q1, -self.q2, -self.q3, -self.q4)
    }
}

/// A vector of `R^{3,1}` with metric `-dx1^2 + dx2^2 + dx3^2 + dx4^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MinkVec {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl MinkVec {
    pub const E1: MinkVec = MinkVec::new(1.0, 0.0, 0.0, 0.0);
    pub const E2: MinkVec = MinkVec::new(0.0, 1.0, 0.0, 0.0);
    pub const E3: MinkVec = MinkVec::new(0.0, 0.0, 1.0, 0.0);
    pub const E4: MinkVec = MinkVec::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self { x1, x2, x3, x4 }
    }

    #[inline]
    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }

    #[inline]
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Embedding `i x1 + x2 I + x3 J + x4 K`.
    #[inline]
    pub fn to_cquat(&self) -> CQuat {
        CQuat::new(
            C64::new(0.0, self.x1),
            self.x2.into(),
            self.x3.into(),
            self.x4.into(),
        )
    }

    /// Largest component that violates `q = -conj_hat(conj_bar(q))`.
    pub fn imaginary_residue(q: &CQuat) -> f64 {
        q.q1.re
            .abs()
            .max(q.q2.im.abs())
            .max(q.q3.im.abs())
            .max(q.q4.im.abs())
    }

    /// Drops the imaginary residue without checking it.
    #[inline]
    pub fn from_cquat_unchecked(q: &CQuat) -> Self {
        Self::new(q.q1.im, q.q2.re, q.q3.re, q.q4.re)
    }

    /// Projects back to `R^{3,1}`, clamping residue below `EPS_REAL`
    /// (relative to the magnitude of `q` when that exceeds one).
    pub fn from_cquat(q: &CQuat) -> Result<Self> {
        let residue = Self::imaginary_residue(q);
        if residue > EPS_REAL * q.max_abs().max(1.0) {
            return Err(Error::ImaginaryResidue { residue });
        }
        Ok(Self::from_cquat_unchecked(q))
    }

    #[inline]
    pub fn dot(&self, o: &MinkVec) -> f64 {
        -self.x1 * o.x1 + self.x2 * o.x2 + self.x3 * o.x3 + self.x4 * o.x4
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Euclidean length of the coordinate vector.
    #[inline]
    pub fn euclid_norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x1 * s, self.x2 * s, self.x3 * s, self.x4 * s)
    }
}

impl Add for MinkVec {
    type Output = MinkVec;
    #[inline]
    fn add(self, o: MinkVec) -> MinkVec {
        MinkVec::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3, self.x4 + o.x4)
    }
}

impl Sub for MinkVec {
    type Output = MinkVec;
    #[inline]
    fn sub(self, o: MinkVec) -> MinkVec {
        MinkVec::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3, self.x4 - o.x4)
    }
}

impl Mul<f64> for MinkVec {
    type Output = MinkVec;
    #[inline]
    fn mul(self, s: f64) -> MinkVec {
        self.scale(s)
    }
}

/// An element of `Spin(3,1) = { p : H(p,p) = 1 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinElem(CQuat);

impl SpinElem {
    pub const IDENTITY: SpinElem = SpinElem(CQuat::ONE);

    pub fn new(value: CQuat) -> Result<Self> {
        let deviation = (value.h(&value) - ONE).norm();
        if deviation > SPIN_TOL || !deviation.is_finite() {
            return Err(Error::NotASpinElement { deviation });
        }
        Ok(Self(value))
    }

    /// Rescales by the principal square root of `H(q,q)`.
    pub fn normalize(value: CQuat) -> Result<Self> {
        let n = value.h(&value);
        if n.norm() <= EPS_INV * value.max_abs().powi(2) || !n.is_finite() {
            return Err(Error::NotInvertible { norm: n.norm() });
        }
        Ok(Self(value.scale(n.sqrt().inv())))
    }

    #[inline]
    pub fn value(&self) -> CQuat {
        self.0
    }

    /// For `H(p,p) = 1` the inverse is `conj_bar(p)`.
    #[inline]
    pub fn inverse(&self) -> CQuat {
        self.0.conj_bar()
    }

    /// `p̂^{-1}`, which equals `conj_bar(conj_hat(p))` on the spin group.
    #[inline]
    pub fn hat_inverse(&self) -> CQuat {
        self.0.conj_hat().conj_bar()
    }

    /// `g^{-1} q ĝ`, the frame transport used by the representation formula.
    #[inline]
    pub fn transport(&self, q: &CQuat) -> CQuat {
        self.inverse() * *q * self.0.conj_hat()
    }

    #[inline]
    pub fn mul(&self, other: &SpinElem) -> SpinElem {
        SpinElem(self.0 * other.0)
    }
}

/// The double cover `Φ(p): v ↦ p v p̂^{-1}`.
pub fn spin_act(p: &SpinElem, v: &MinkVec) -> Result<MinkVec> {
    SpinElem::new(p.value())?;
    let q = p.value() * v.to_cquat() * p.hat_inverse();
    MinkVec::from_cquat(&q)
}

/// Element of `Im H^C`, stored in the basis `(iI, J, iK)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImQuat {
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
}

impl ImQuat {
    #[inline]
    pub const fn new(c1: C64, c2: C64, c3: C64) -> Self {
        Self { c1, c2, c3 }
    }

    #[inline]
    pub fn to_cquat(&self) -> CQuat {
        CQuat::new(ZERO, IM * self.c1, self.c2, IM * self.c3)
    }

    /// Fails if the `1`-component exceeds `tol` (relative to the magnitude).
    pub fn from_cquat(q: &CQuat, tol: f64) -> Result<Self> {
        let residue = q.q1.norm();
        if residue > tol * q.max_abs().max(1.0) {
            return Err(Error::ImaginaryResidue { residue });
        }
        Ok(Self::from_cquat_unchecked(q))
    }

    #[inline]
    pub fn from_cquat_unchecked(q: &CQuat) -> Self {
        Self::new(-IM * q.q2, q.q3, -IM * q.q4)
    }

    #[inline]
    pub fn h(&self, o: &ImQuat) -> C64 {
        self.to_cquat().h(&o.to_cquat())
    }
}

/// `a × b = (ab - ba) / 2`.
pub fn cross(a: &ImQuat, b: &ImQuat) -> ImQuat {
    let (p, q) = (a.to_cquat(), b.to_cquat());
    ImQuat::from_cquat_unchecked(&(p * q - q * p).scale_re(0.5))
}

/// `[a, b, c] = H(a × b, c)`.
pub fn mixed(a: &ImQuat, b: &ImQuat, c: &ImQuat) -> C64 {
    cross(a, b).h(c)
}

/// Row-major 2x2 complex matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2C {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2C {
    pub const IDENTITY: Mat2C = Mat2C::new(ONE, ZERO, ZERO, ONE);

    #[inline]
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    #[inline]
    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn conj_transpose(&self) -> Self {
        Self::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    #[inline]
    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let scale = self.max_abs();
        if scale == 0.0 || det.norm() <= EPS_INV * scale * scale {
            return Err(Error::NotInvertible { norm: det.norm() });
        }
        let inv = det.inv();
        Ok(Self::new(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv))
    }

    #[inline]
    pub fn max_abs(&self) -> f64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    #[inline]
    pub fn entries(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    #[inline]
    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    #[inline]
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    #[inline]
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

/// The algebra isomorphism `A: H^C -> M_2(C)`.
pub fn to_mat2(q: &CQuat) -> Mat2C {
    Mat2C::new(
        q.q1 + IM * q.q2,
        q.q3 + IM * q.q4,
        -q.q3 + IM * q.q4,
        q.q1 - IM * q.q2,
    )
}

/// Inverse of [`to_mat2`].
pub fn from_mat2(m: &Mat2C) -> CQuat {
    let half = 0.5;
    CQuat::new(
        (m.a + m.d) * half,
        (m.a - m.d) * (-IM * half),
        (m.b - m.c) * half,
        (m.b + m.c) * (-IM * half),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_table() {
        let (i, j, k) = (CQuat::I, CQuat::J, CQuat::K);
        assert_eq!(i * i, -CQuat::ONE);
        assert_eq!(j * j, -CQuat::ONE);
        assert_eq!(k * k, -CQuat::ONE);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
    }

    #[test]
    fn unit_is_neutral() {
        let q = CQuat::new(c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(4.0, -1.0));
        assert_eq!(CQuat::ONE * q, q);
        assert_eq!(q * CQuat::ONE, q);
    }

    #[test]
    fn zero_divisor() {
        let a = CQuat::scalar(IM) + CQuat::J;
        let b = CQuat::scalar(IM) - CQuat::J;
        assert_eq!(a * b, CQuat::ZERO);
    }

    #[test]
    fn bilinear_form_examples() {
        assert_eq!(CQuat::ONE.h(&CQuat::ONE), ONE);
        let ik = CQuat::K.scale(IM);
        assert_eq!(ik.h(&ik), c(-1.0, 0.0));
        let z = c(0.7, -1.3);
        let q = CQuat::scalar(z.cos()) + CQuat::I.scale(z.sin());
        assert!((q.h(&q) - ONE).norm() < 1e-14);
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!((CQuat::ONE + CQuat::I).conj_bar(), CQuat::ONE - CQuat::I);
        assert_eq!(CQuat::scalar(IM).conj_hat(), CQuat::scalar(-IM));
        let v = MinkVec::new(0.3, -1.2, 2.0, 0.4).to_cquat();
        assert_eq!(v.conj_bar().conj_hat(), -v);
    }

    #[test]
    fn invert_examples() {
        assert_eq!(CQuat::I.invert().unwrap(), -CQuat::I);
        assert_eq!(
            CQuat::from_real(2.0, 0.0, 0.0, 0.0).invert().unwrap(),
            CQuat::from_real(0.5, 0.0, 0.0, 0.0)
        );
        let null = CQuat::scalar(IM) + CQuat::J;
        assert!(matches!(null.invert(), Err(Error::NotInvertible { .. })));
        assert!(matches!(CQuat::ZERO.invert(), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn minkowski_norm_is_real_part_of_h() {
        let v = MinkVec::new(1.5, 0.5, -2.0, 0.25);
        let q = v.to_cquat();
        assert!((q.h(&q).re - v.norm_sq()).abs() < 1e-14);
        assert_eq!(q.h(&q).im, 0.0);
    }

    #[test]
    fn spin_act_identity_and_rotation() {
        let v = MinkVec::new(0.3, 1.0, -2.0, 0.7);
        assert_eq!(spin_act(&SpinElem::IDENTITY, &v).unwrap(), v);

        let r = 0.4_f64;
        let p = SpinElem::new(CQuat::from_real(r.cos(), r.sin(), 0.0, 0.0)).unwrap();
        let out = spin_act(&p, &MinkVec::E3).unwrap();
        let want = MinkVec::new(0.0, 0.0, (2.0 * r).cos(), (2.0 * r).sin());
        assert!((out - want).euclid_norm() < 1e-14);
    }

    #[test]
    fn spin_act_boost() {
        let s = 0.35_f64;
        let p = SpinElem::new(CQuat::new(
            s.cosh().into(),
            c(0.0, s.sinh()),
            ZERO,
            ZERO,
        ))
        .unwrap();
        let out = spin_act(&p, &MinkVec::E1).unwrap();
        let want = MinkVec::new((2.0 * s).cosh(), -(2.0 * s).sinh(), 0.0, 0.0);
        assert!((out - want).euclid_norm() < 1e-13);
    }

    #[test]
    fn spin_act_rejects_non_spin() {
        let p = SpinElem(CQuat::from_real(2.0, 0.0, 0.0, 0.0));
        assert!(matches!(
            spin_act(&p, &MinkVec::E1),
            Err(Error::NotASpinElement { .. })
        ));
        assert!(SpinElem::new(CQuat::from_real(1.0, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn cross_and_mixed_examples() {
        let ii = ImQuat::new(ONE, ZERO, ZERO);
        let j = ImQuat::new(ZERO, ONE, ZERO);
        let ik = ImQuat::new(ZERO, ZERO, ONE);
        assert_eq!(cross(&ii, &j), ik);
        assert_eq!(mixed(&ii, &j, &ik), c(-1.0, 0.0));
        let a = ImQuat::new(c(0.2, 1.0), c(-3.0, 0.5), c(0.0, 2.0));
        assert_eq!(cross(&a, &a), ImQuat::default());
    }

    #[test]
    fn im_quat_embedding() {
        let a = ImQuat::new(c(0.2, 1.0), c(-3.0, 0.5), c(0.0, 2.0));
        let q = a.to_cquat();
        assert_eq!(q.q1, ZERO);
        assert_eq!(ImQuat::from_cquat(&q, 1e-12).unwrap(), a);
        assert!(ImQuat::from_cquat(&CQuat::ONE, 1e-12).is_err());
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(to_mat2(&CQuat::ONE), Mat2C::IDENTITY);
        assert_eq!(to_mat2(&CQuat::K), Mat2C::new(ZERO, IM, IM, ZERO));
        let q = CQuat::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.0, 3.0), c(4.0, -1.0));
        let back = from_mat2(&to_mat2(&q));
        assert!((back - q).max_abs() < 1e-15);
    }

    #[test]
    fn mat2_inverse() {
        let m = Mat2C::new(c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0), c(3.0, 0.5));
        let p = m * m.inverse().unwrap();
        assert!((p - Mat2C::IDENTITY).max_abs() < 1e-14);
        assert!(Mat2C::default().inverse().is_err());
    }
}
