//! Flat timelike surfaces in de Sitter space `S^{2,1}` through holomorphic
//! curves in `Sl2(C)`, and reduction tests for `R^{3,1}` patches.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budgets;
use crate::cquat::{from_mat2, to_mat2, Mat2C, MinkVec};
use crate::error::{Error, Result};
use crate::fd;
use crate::geomverify::induced_metric;
use crate::seeddomain::{FlatSeed, GridDomain, SeedS21};
use crate::synth::{sweep, ImmersionPatch, ResidualReport, SpinFrameField, SweepOrder};

/// The base point `[[0, i], [i, 0]]`.
pub const BASE: Mat2C = Mat2C::new(
    C64::new(0.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(0.0, 1.0),
    C64::new(0.0, 0.0),
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sl2Field {
    pub domain: GridDomain,
    pub b: Vec<Mat2C>,
}

impl Sl2Field {
    pub fn max_det_defect(&self) -> f64 {
        self.b
            .iter()
            .map(|m| (m.det() - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

/// Points of `S^{2,1}` realized as `i Herm(2)` matrices of determinant one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermPatch {
    pub domain: GridDomain,
    pub b: Vec<Mat2C>,
    pub f: Vec<Mat2C>,
    /// `(E, F, G)` of the induced metric at interior points.
    pub metric: Vec<Option<[f64; 3]>>,
    pub max_det_defect: f64,
    /// Largest `|F* + F|`, the departure from `i Herm(2)`.
    pub max_herm_defect: f64,
}

impl HermPatch {
    /// Coordinates in `R^{3,1}` through `i x1 + x2 I + x3 J + x4 K`.
    pub fn points(&self) -> Result<Vec<MinkVec>> {
        self.f
            .iter()
            .map(|m| MinkVec::from_cquat(&from_mat2(m)))
            .collect()
    }

    /// Largest induced-metric determinant `EG - F^2` over interior points.
    pub fn max_metric_det(&self) -> f64 {
        self.metric
            .iter()
            .flatten()
            .map(|[e, f, g]| e * g - f * f)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Plain immersion patch carrying only the point samples.
    pub fn to_immersion(&self) -> Result<ImmersionPatch> {
        Ok(ImmersionPatch {
            domain: self.domain,
            points: self.points()?,
            flat: None,
            loop_residual_max: 0.0,
            loop_budget: 0.0,
            imaginary_residue_max: 0.0,
        })
    }
}

/// `B = A(conj_bar(g))`.
pub fn spinor_to_sl2(g: &SpinFrameField) -> Sl2Field {
    Sl2Field {
        domain: g.domain,
        b: g.g.iter().map(|p| to_mat2(&p.value().conj_bar())).collect(),
    }
}

/// `F = B [[0, i], [i, 0]] B*`.
pub fn desitter_point(b: &Mat2C) -> Result<Mat2C> {
    let deviation = (b.det() - 1.0).norm();
    if !(deviation <= budgets::UNIMODULAR_TOL) {
        return Err(Error::NotUnimodular { deviation });
    }
    Ok(*b * BASE * b.conj_transpose())
}

fn connection(theta: C64, omega: C64) -> Mat2C {
    Mat2C::new(C64::new(0.0, 0.0), theta, omega, C64::new(0.0, 0.0))
}

fn rk4_right<N>(gen: &N, b: Mat2C, z: C64, dz: C64) -> Result<Mat2C>
where
    N: Fn(C64) -> Result<Mat2C>,
{
    let s = |m: Mat2C, c: f64| m.scale(C64::new(c, 0.0));
    let nm = gen(z + dz * 0.5)?.scale(dz);
    let k1 = b * gen(z)?.scale(dz);
    let k2 = (b + s(k1, 0.5)) * nm;
    let k3 = (b + s(k2, 0.5)) * nm;
    let k4 = (b + k3) * gen(z + dz)?.scale(dz);
    Ok(b + s(k1 + s(k2, 2.0) + s(k3, 2.0) + k4, 1.0 / 6.0))
}

/// Integrates `B^{-1} dB = [[0, theta], [omega, 0]] dz` from `B0` and maps
/// every sample to `S^{2,1}`.
pub fn synthesize_flat_s21(seed: &SeedS21, dom: &GridDomain, b0: Mat2C) -> Result<HermPatch> {
    dom.validate()?;
    seed.validate(dom)?;
    let deviation = (b0.det() - 1.0).norm();
    if !(deviation <= budgets::UNIMODULAR_TOL) {
        return Err(Error::NotUnimodular { deviation });
    }
    let gen = |z: C64| {
        let (t, w) = seed.coefficients(z)?;
        Ok(connection(t, w))
    };
    let b = sweep(dom, b0, SweepOrder::RowsFirst, |b, from, to| {
        let z = dom.point(from.0, from.1);
        let dz = dom.point(to.0, to.1) - z;
        let next = rk4_right(&gen, b, z, dz)?;
        let d = next.det();
        if !(d.norm() >= budgets::RENORM_FLOOR) {
            return Err(Error::RenormalizationFailure {
                i: to.0,
                j: to.1,
                norm: d.norm(),
            });
        }
        Ok(next.scale(d.sqrt().inv()))
    })?;
    herm_patch(dom, b)
}

/// Maps stored `Sl2` samples to `S^{2,1}` and samples the induced metric.
pub fn herm_patch(dom: &GridDomain, b: Vec<Mat2C>) -> Result<HermPatch> {
    if b.len() != dom.len() {
        return Err(Error::ShapeMismatch("Sl2 field size differs from grid".into()));
    }
    let f = b
        .par_iter()
        .map(desitter_point)
        .collect::<Result<Vec<_>>>()?;
    let max_det_defect = f
        .iter()
        .map(|m| (m.det() - 1.0).norm())
        .fold(0.0, f64::max);
    let max_herm_defect = f
        .iter()
        .map(|m| (*m + m.conj_transpose()).max_abs())
        .fold(0.0, f64::max);
    let points = f
        .iter()
        .map(|m| MinkVec::from_cquat_unchecked(&from_mat2(m)))
        .collect::<Vec<_>>();
    let metric = induced_metric(dom, &points);
    Ok(HermPatch {
        domain: *dom,
        b,
        f,
        metric,
        max_det_defect,
        max_herm_defect,
    })
}

/// Off-diagonal coefficients of `B^{-1} dB/dz` recovered from samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub domain: GridDomain,
    pub theta: Vec<Option<C64>>,
    pub omega: Vec<Option<C64>>,
    pub max_diagonal: f64,
    pub budget: f64,
    pub min_abs_theta: f64,
    pub min_abs_omega: f64,
    pub nowhere_vanishing: bool,
}

/// Finite-difference `B^{-1} dB` at interior points.
pub fn extract_connection(b: &Sl2Field) -> Result<Connection> {
    let dom = b.domain;
    if b.b.len() != dom.len() {
        return Err(Error::ShapeMismatch("Sl2 field size differs from grid".into()));
    }
    let per_point: Vec<Option<(C64, C64, f64)>> = (0..dom.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = dom.ij(k);
            if !dom.is_interior(i, j, 1) {
                return None;
            }
            let (dx, _) = fd::d1(&dom, &b.b, i, j);
            let inv = b.b[k].inverse().ok()?;
            let m = inv * dx;
            Some((m.b, m.c, m.a.norm().max(m.d.norm())))
        })
        .collect();
    let max_diagonal = per_point
        .iter()
        .flatten()
        .map(|v| v.2)
        .fold(0.0, f64::max);
    let h = dom.h();
    let scale = b.b.iter().map(Mat2C::max_abs).fold(1.0, f64::max);
    let budget = budgets::C_DIAGONAL * h * h * scale * scale;
    if max_diagonal > budget {
        return Err(Error::NonOffDiagonal {
            max_diagonal,
            budget,
        });
    }
    let theta: Vec<Option<C64>> = per_point.iter().map(|v| v.map(|v| v.0)).collect();
    let omega: Vec<Option<C64>> = per_point.iter().map(|v| v.map(|v| v.1)).collect();
    let min = |v: &[Option<C64>]| {
        v.iter()
            .flatten()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min)
    };
    let (min_abs_theta, min_abs_omega) = (min(&theta), min(&omega));
    let floor = budgets::VANISHING_FLOOR;
    Ok(Connection {
        domain: dom,
        theta,
        omega,
        max_diagonal,
        budget,
        min_abs_theta,
        min_abs_omega,
        nowhere_vanishing: min_abs_theta > floor && min_abs_omega > floor,
    })
}

/// Residual of `omega theta = -(f1^2 - f2^2)` against a flat seed.
pub fn check_linkage(conn: &Connection, seed: &FlatSeed) -> Result<ResidualReport> {
    let dom = conn.domain;
    let mut max: f64 = 0.0;
    for k in 0..dom.len() {
        if let (Some(t), Some(w)) = (conn.theta[k], conn.omega[k]) {
            let (i, j) = dom.ij(k);
            let (f1, f2) = seed.f_pair(dom.point(i, j))?;
            max = max.max((w * t + f1 * f1 - f2 * f2).norm());
        }
    }
    Ok(ResidualReport::new(max, budgets::C_LINKAGE, dom.h()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub in_r21: bool,
    /// `+1` or `-1` when the normal `e4` is constant `+-K`.
    pub r21_sign: Option<i8>,
    pub r21_deviation: Option<f64>,
    pub in_s21: bool,
    pub s21_center: [f64; 4],
    pub s21_deviation: f64,
}

/// Tests whether a patch lies in a copy of `R^{2,1}` or of `S^{2,1}`.
pub fn check_reduction(patch: &ImmersionPatch) -> ReductionReport {
    let (in_r21, r21_sign, r21_deviation) = match patch.frame() {
        Some(frame) => {
            let dev = |s: f64| {
                frame
                    .iter()
                    .map(|f| (f.e4 - MinkVec::E4 * s).euclid_norm())
                    .fold(0.0, f64::max)
            };
            let (plus, minus) = (dev(1.0), dev(-1.0));
            let (sign, d) = if plus <= minus { (1, plus) } else { (-1, minus) };
            let ok = d <= budgets::R21_TOL;
            (ok, ok.then_some(sign), Some(d))
        }
        None => (false, None, None),
    };
    let (center, s21_deviation) = fit_pseudosphere(&patch.points);
    ReductionReport {
        in_r21,
        r21_sign,
        r21_deviation,
        in_s21: s21_deviation <= budgets::S21_TOL,
        s21_center: center.to_array(),
        s21_deviation,
    }
}

/// Least-squares center `c` of `<F - c, F - c> = const`, and the largest
/// departure of `<F - c, F - c>` from one.
fn fit_pseudosphere(points: &[MinkVec]) -> (MinkVec, f64) {
    let n = points.len();
    // <F,F> = 2<F,c> + d, unknowns (c1..c4, d).
    let mut a = DMatrix::<f64>::zeros(n, 5);
    let mut rhs = DVector::<f64>::zeros(n);
    for (r, p) in points.iter().enumerate() {
        let x = p.to_array();
        a[(r, 0)] = -2.0 * x[0];
        a[(r, 1)] = 2.0 * x[1];
        a[(r, 2)] = 2.0 * x[2];
        a[(r, 3)] = 2.0 * x[3];
        a[(r, 4)] = 1.0;
        rhs[r] = p.norm_sq();
    }
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(5));
    let c = MinkVec::new(sol[0], sol[1], sol[2], sol[3]);
    let dev = points
        .iter()
        .map(|p| ((*p - c).norm_sq() - 1.0).abs())
        .fold(0.0, f64::max);
    (c, dev)
}

/// Closed form `B(z) = cosh(sqrt(c) z) + sinh(sqrt(c) z)/sqrt(c) [[0,1],[c,0]]`
/// for `theta = 1`, `omega = c` and `B(0) = 1`.
pub fn constant_connection_closed_form(c: C64, z: C64) -> Mat2C {
    let r = c.sqrt();
    let (ch, sh) = ((r * z).cosh(), (r * z).sinh() / r);
    Mat2C::new(ch, sh, sh * c, ch)
}
