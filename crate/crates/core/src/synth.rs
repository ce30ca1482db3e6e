//! Integration of the holomorphic spin frame and of the immersion it induces.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budgets;
use crate::cquat::{CQuat, MinkVec, SpinElem};
use crate::error::{Error, Result};
use crate::fd;
use crate::seeddomain::{
    coframe_of, dual_forms, generator_from, AlphaField, Coframe, FlatSeed, GridDomain, SeedR31,
};

/// Order in which the grid is swept from the origin corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// Bottom row left to right, then every column upwards.
    #[default]
    RowsFirst,
    /// Left column upwards, then every row to the right.
    ColumnsFirst,
}

/// Fills a grid by repeated one-step maps from `(0, 0)`.
///
/// `step(value, from, to)` advances between neighbouring grid points.
pub(crate) fn sweep<T, F>(dom: &GridDomain, start: T, order: SweepOrder, step: F) -> Result<Vec<T>>
where
    T: Copy + Send + Sync,
    F: Fn(T, (usize, usize), (usize, usize)) -> Result<T> + Sync,
{
    let (nx, ny) = (dom.nx, dom.ny);
    // `spine` runs along the first axis, `rib` along the second.
    let (n_spine, n_rib) = match order {
        SweepOrder::RowsFirst => (nx, ny),
        SweepOrder::ColumnsFirst => (ny, nx),
    };
    let at = |s: usize, r: usize| match order {
        SweepOrder::RowsFirst => (s, r),
        SweepOrder::ColumnsFirst => (r, s),
    };
    let mut spine = Vec::with_capacity(n_spine);
    spine.push(start);
    for s in 1..n_spine {
        let v = step(spine[s - 1], at(s - 1, 0), at(s, 0))?;
        spine.push(v);
    }
    let ribs: Vec<Result<Vec<T>>> = spine
        .par_iter()
        .enumerate()
        .map(|(s, &v0)| {
            let mut rib = Vec::with_capacity(n_rib);
            rib.push(v0);
            for r in 1..n_rib {
                let v = step(rib[r - 1], at(s, r - 1), at(s, r))?;
                rib.push(v);
            }
            Ok(rib)
        })
        .collect();
    let mut out = vec![start; dom.len()];
    // Report the first failure in spine order for reproducibility.
    for (s, rib) in ribs.into_iter().enumerate() {
        for (r, v) in rib?.into_iter().enumerate() {
            let (i, j) = at(s, r);
            out[dom.idx(i, j)] = v;
        }
    }
    Ok(out)
}

/// One classical RK4 step of `g' = P(z) g` from `z` to `z + dz`.
pub(crate) fn rk4_step<P>(gen: &P, g: CQuat, z: C64, dz: C64) -> Result<CQuat>
where
    P: Fn(C64) -> Result<CQuat>,
{
    let half = dz * 0.5;
    let pm = gen(z + half)?;
    let k1 = gen(z)? * g * dz;
    let k2 = pm * (g + k1 * 0.5) * dz;
    let k3 = pm * (g + k2 * 0.5) * dz;
    let k4 = gen(z + dz)? * (g + k3) * dz;
    Ok(g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (1.0 / 6.0))
}

/// Divides by the principal root of `H(g,g)`.
fn renormalize(g: CQuat, at: (usize, usize)) -> Result<(SpinElem, f64)> {
    let n = g.h(&g);
    if !(n.norm() >= budgets::RENORM_FLOOR) {
        return Err(Error::RenormalizationFailure {
            i: at.0,
            j: at.1,
            norm: n.norm(),
        });
    }
    let drift = (n - 1.0).norm();
    Ok((SpinElem::normalize(g)?, drift))
}

/// Holomorphic frame `g: U -> Spin(3,1)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinFrameField {
    pub domain: GridDomain,
    pub g: Vec<SpinElem>,
    pub order: SweepOrder,
    /// Largest `|H(g,g) - 1|` seen before renormalizing.
    pub max_drift: f64,
}

impl SpinFrameField {
    pub fn at(&self, i: usize, j: usize) -> &SpinElem {
        &self.g[self.domain.idx(i, j)]
    }

    /// Largest `|H(g,g) - 1|` over the stored samples.
    pub fn max_spin_defect(&self) -> f64 {
        self.g
            .iter()
            .map(|p| (p.value().h(&p.value()) - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

pub fn integrate_spin_frame(
    seed: &FlatSeed,
    dom: &GridDomain,
    g0: SpinElem,
) -> Result<SpinFrameField> {
    integrate_spin_frame_ordered(seed, dom, g0, SweepOrder::RowsFirst)
}

pub fn integrate_spin_frame_ordered(
    seed: &FlatSeed,
    dom: &GridDomain,
    g0: SpinElem,
    order: SweepOrder,
) -> Result<SpinFrameField> {
    dom.validate()?;
    SpinElem::new(g0.value())?;
    let gen = |z: C64| seed.generator(z);
    let vals = sweep(dom, (g0, 0.0), order, |(g, _), from, to| {
        let z = dom.point(from.0, from.1);
        let dz = dom.point(to.0, to.1) - z;
        let next = rk4_step(&gen, g.value(), z, dz)?;
        renormalize(next, to)
    })?;
    let max_drift = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(SpinFrameField {
        domain: *dom,
        g: vals.into_iter().map(|v| v.0).collect(),
        order,
        max_drift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub budget: f64,
    pub h: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(max_residual: f64, c: f64, h: f64) -> Self {
        let budget = c * h * h;
        Self {
            max_residual,
            budget,
            h,
            pass: max_residual <= budget,
        }
    }
}

/// Structure equation `d eta'(X,Y) - [eta'(X), eta'(Y)]` on `(d/dx, d/dy)`.
pub fn structure_residual(seed: &FlatSeed, dom: &GridDomain) -> Result<ResidualReport> {
    structure_residual_with(dom, |x, y| seed.f_pair(C64::new(x, y)))
}

/// Same as [`structure_residual`] for an arbitrary coefficient pair `(f1, f2)`,
/// which need not be holomorphic.
pub fn structure_residual_with<F>(dom: &GridDomain, f: F) -> Result<ResidualReport>
where
    F: Fn(f64, f64) -> Result<(C64, C64)> + Sync,
{
    let p = (0..dom.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = dom.ij(k);
            let (x, y) = dom.xy(i, j);
            let (a, b) = f(x, y)?;
            Ok(generator_from(a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let i_unit = C64::i();
    let (hx, hy) = (dom.hx(), dom.hy());
    let max = (0..dom.len())
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = dom.ij(k);
            if !dom.is_interior(i, j, 1) {
                return None;
            }
            // eta'(d/dx) = P, eta'(d/dy) = iP.
            let px = (p[dom.idx(i + 1, j)] - p[dom.idx(i - 1, j)]) * (0.5 / hx);
            let py = (p[dom.idx(i, j + 1)] - p[dom.idx(i, j - 1)]) * (0.5 / hy);
            let d_eta = px * i_unit - py;
            let bracket = p[k].commutator(&(p[k] * i_unit));
            Some((d_eta - bracket).norm())
        })
        .reduce(|| 0.0, f64::max);
    Ok(ResidualReport::new(max, budgets::C_STRUCTURE, dom.h()))
}

/// Images of the parallel frame `(e1, e2, e3, e4)` under `q -> g^{-1} q ĝ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub e1: MinkVec,
    pub e2: MinkVec,
    pub e3: MinkVec,
    pub e4: MinkVec,
}

impl FrameSample {
    pub fn of(g: &SpinElem) -> (Self, f64) {
        let i1 = CQuat::scalar(C64::i());
        let qs = [i1, CQuat::I, CQuat::J, CQuat::K].map(|q| g.transport(&q));
        let residue = qs
            .iter()
            .map(MinkVec::imaginary_residue)
            .fold(0.0, f64::max);
        let [e1, e2, e3, e4] = qs.map(|q| MinkVec::from_cquat_unchecked(&q));
        (Self { e1, e2, e3, e4 }, residue)
    }

    pub fn as_array(&self) -> [MinkVec; 4] {
        [self.e1, self.e2, self.e3, self.e4]
    }
}

/// Data carried by patches coming out of the flat pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatData {
    pub spin: Vec<SpinElem>,
    pub frame: Vec<FrameSample>,
    pub alpha: AlphaField,
    /// `(h1, h2)` per point.
    pub mean_curvature: Vec<[f64; 2]>,
}

/// Sampled immersion `F: U -> R^{3,1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionPatch {
    pub domain: GridDomain,
    pub points: Vec<MinkVec>,
    pub flat: Option<FlatData>,
    pub loop_residual_max: f64,
    pub loop_budget: f64,
    pub imaginary_residue_max: f64,
}

impl ImmersionPatch {
    pub fn at(&self, i: usize, j: usize) -> MinkVec {
        self.points[self.domain.idx(i, j)]
    }

    pub fn frame(&self) -> Option<&[FrameSample]> {
        self.flat.as_ref().map(|f| f.frame.as_slice())
    }
}

/// Value of `xi(v)` for a real tangent vector `v = (vx, vy)`.
fn xi_on(g: &SpinElem, w: &Coframe, v: [f64; 2]) -> CQuat {
    let w1 = w[0][0] * v[0] + w[0][1] * v[1];
    let w2 = w[1][0] * v[0] + w[1][1] * v[1];
    let q = CQuat::new(C64::new(0.0, w1), C64::new(w2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    g.transport(&q)
}

/// Integrates `xi = g^{-1} (omega1 i + omega2 I) ĝ` over the grid.
///
/// Each edge uses Simpson's rule; the midpoint frame comes from an RK4
/// half step and the midpoint coframe from the seed.
pub fn integrate_immersion(
    g: &SpinFrameField,
    a: &AlphaField,
    seed: &FlatSeed,
) -> Result<ImmersionPatch> {
    let eps = a.eps_ind();
    integrate_immersion_with(g, a, seed, |z| {
        let (a1, a2) = seed.alpha_at(z)?.ok_or(Error::DegenerateOsculating {
            i: 0,
            j: 0,
            value: 0.0,
        })?;
        let det = a1.re * a2.im - a2.re * a1.im;
        if !(det.abs() > eps) {
            return Err(Error::DependentFrame { i: 0, j: 0, det });
        }
        Ok(coframe_of(a1, a2))
    })
}

/// As [`integrate_immersion`] with the coframe between grid points supplied
/// by `mid`, which must agree with `a` on the grid.
pub fn integrate_immersion_with<M>(
    g: &SpinFrameField,
    a: &AlphaField,
    seed: &FlatSeed,
    mid: M,
) -> Result<ImmersionPatch>
where
    M: Fn(C64) -> Result<Coframe> + Sync,
{
    let dom = g.domain;
    if a.domain != dom {
        return Err(Error::ShapeMismatch("alpha field and spin frame grids differ".into()));
    }
    let w = dual_forms(a)?;
    let gen = |z: C64| seed.generator(z);
    let (nx, ny) = (dom.nx, dom.ny);

    // Edge integral from (i, j) towards +x (dir 0) or +y (dir 1).
    let edge = |i: usize, j: usize, dir: usize| -> Result<CQuat> {
        let (i2, j2) = if dir == 0 { (i + 1, j) } else { (i, j + 1) };
        let z0 = dom.point(i, j);
        let dz = dom.point(i2, j2) - z0;
        let v = [dz.re, dz.im];
        let gm = rk4_step(&gen, g.at(i, j).value(), z0, dz * 0.5)?;
        let gm = SpinElem::normalize(gm)?;
        let wm = mid(z0 + dz * 0.5).map_err(|e| match e {
            Error::DegenerateOsculating { value, .. } => {
                Error::DegenerateOsculating { i, j, value }
            }
            Error::DependentFrame { det, .. } => Error::DependentFrame { i, j, det },
            e => e,
        })?;
        let s0 = xi_on(g.at(i, j), &w[dom.idx(i, j)], v);
        let s1 = xi_on(g.at(i2, j2), &w[dom.idx(i2, j2)], v);
        let sm = xi_on(&gm, &wm, v);
        Ok((s0 + sm * 4.0 + s1) * (1.0 / 6.0))
    };

    let horiz = (0..(nx - 1) * ny)
        .into_par_iter()
        .map(|k| edge(k % (nx - 1), k / (nx - 1), 0))
        .collect::<Result<Vec<_>>>()?;
    let vert = (0..nx * (ny - 1))
        .into_par_iter()
        .map(|k| edge(k % nx, k / nx, 1))
        .collect::<Result<Vec<_>>>()?;
    let h_at = |i: usize, j: usize| horiz[j * (nx - 1) + i];
    let v_at = |i: usize, j: usize| vert[j * nx + i];

    let mut f = vec![CQuat::ZERO; dom.len()];
    for i in 1..nx {
        f[dom.idx(i, 0)] = f[dom.idx(i - 1, 0)] + h_at(i - 1, 0);
    }
    for i in 0..nx {
        for j in 1..ny {
            f[dom.idx(i, j)] = f[dom.idx(i, j - 1)] + v_at(i, j - 1);
        }
    }

    let loop_max = (0..(nx - 1) * (ny - 1))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % (nx - 1), k / (nx - 1));
            (h_at(i, j) + v_at(i + 1, j) - h_at(i, j + 1) - v_at(i, j)).norm()
        })
        .reduce(|| 0.0, f64::max);
    let w_scale = w
        .iter()
        .flat_map(|m| m.iter().flatten())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let loop_budget = budgets::C_LOOP * dom.hx() * dom.hy() * w_scale.max(1.0);

    let imaginary = f
        .iter()
        .map(MinkVec::imaginary_residue)
        .fold(0.0, f64::max);
    let (frame, frame_residue): (Vec<_>, Vec<_>) = g.g.par_iter().map(FrameSample::of).unzip();
    let imaginary = frame_residue.into_iter().fold(imaginary, f64::max);
    if imaginary > budgets::REALITY_TOL {
        return Err(Error::ImaginaryResidue { residue: imaginary });
    }
    if loop_max > loop_budget {
        return Err(Error::ClosednessFailure {
            max_residual: loop_max,
            budget: loop_budget,
        });
    }

    let mean_curvature = seed
        .mean_curvature(&dom)?
        .into_iter()
        .map(|(a, b)| [a, b])
        .collect();
    Ok(ImmersionPatch {
        domain: dom,
        points: f.iter().map(MinkVec::from_cquat_unchecked).collect(),
        flat: Some(FlatData {
            spin: g.g.clone(),
            frame,
            alpha: a.clone(),
            mean_curvature,
        }),
        loop_residual_max: loop_max,
        loop_budget,
        imaginary_residue_max: imaginary,
    })
}

/// Residual of `i dg(e1) g^{-1} + I dg(e2) g^{-1} = h1 J + h2 K`.
pub fn verify_dirac_flat(
    g: &SpinFrameField,
    a: &AlphaField,
    h: &[[f64; 2]],
) -> Result<ResidualReport> {
    let dom = g.domain;
    if a.domain != dom || h.len() != dom.len() {
        return Err(Error::ShapeMismatch("Dirac check inputs disagree in size".into()));
    }
    let vals: Vec<CQuat> = g.g.iter().map(SpinElem::value).collect();
    let i1 = C64::i();
    let max = (0..dom.len())
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = dom.ij(k);
            if !dom.is_interior(i, j, 1) {
                return None;
            }
            let d = fd::d1(&dom, &vals, i, j);
            let inv = g.g[k].inverse();
            let t1 = fd::along(a.a1[k], d) * inv;
            let t2 = fd::along(a.a2[k], d) * inv;
            let lhs = t1 * i1 + CQuat::I * t2;
            let rhs = CQuat::J * h[k][0] + CQuat::K * h[k][1];
            Some((lhs - rhs).norm())
        })
        .reduce(|| 0.0, f64::max);
    Ok(ResidualReport::new(max, budgets::C_DIRAC, dom.h()))
}

/// Arc-length data: `h` with `h^2 = f1^2 - f2^2` and the angle `psi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcLengthData {
    pub domain: GridDomain,
    pub h: Vec<C64>,
    pub psi: Vec<C64>,
    /// Largest `|cosh^2 psi - sinh^2 psi - 1|` and fit defect against `f/h`.
    pub max_identity_defect: f64,
}

fn nearest_root(d: C64, prev: C64) -> C64 {
    let r = d.sqrt();
    if (r - prev).norm() <= (-r - prev).norm() {
        r
    } else {
        -r
    }
}

fn nearest_log(w: C64, prev: C64) -> C64 {
    let l = w.ln();
    let tau = 2.0 * std::f64::consts::PI;
    let k = ((prev.im - l.im) / tau).round();
    C64::new(l.re, l.im + k * tau)
}

/// Reduces an `R^{3,1}` seed to arc-length form with tracked branches.
pub fn arc_length_reduce(seed: &SeedR31, dom: &GridDomain) -> Result<ArcLengthData> {
    dom.validate()?;
    let flat = FlatSeed::R31(seed.clone());
    let f = (0..dom.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = dom.ij(k);
            flat.f_pair(dom.point(i, j))
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = f
        .iter()
        .map(|(a, b)| a.norm_sqr().max(b.norm_sqr()))
        .fold(0.0, f64::max);
    let d: Vec<C64> = f.iter().map(|(a, b)| a * a - b * b).collect();
    for (k, v) in d.iter().enumerate() {
        if v.norm() <= 1e-8 * scale {
            let (i, j) = dom.ij(k);
            return Err(Error::DegenerateOsculating { i, j, value: v.norm() });
        }
    }
    let h0 = d[0].sqrt();
    let root = |order| {
        sweep(dom, h0, order, |prev, _, to| Ok(nearest_root(d[dom.idx(to.0, to.1)], prev)))
    };
    let h = root(SweepOrder::RowsFirst)?;
    let hc = root(SweepOrder::ColumnsFirst)?;
    for k in 0..dom.len() {
        if (h[k] / hc[k]).arg().abs() > std::f64::consts::FRAC_PI_2 {
            let (i, j) = dom.ij(k);
            return Err(Error::BranchConflict {
                i,
                j,
                reason: "square root continuation depends on the path".into(),
            });
        }
    }
    // e^psi = (f1 + f2) / h.
    let mut expo = Vec::with_capacity(dom.len());
    for k in 0..dom.len() {
        let w = (f[k].0 + f[k].1) / h[k];
        if w.norm() <= 1e-12 * (f[k].0.norm() + f[k].1.norm()) / h[k].norm() {
            let (i, j) = dom.ij(k);
            return Err(Error::BranchConflict {
                i,
                j,
                reason: "f1 + f2 vanishes, no finite angle".into(),
            });
        }
        expo.push(w);
    }
    let psi0 = expo[0].ln();
    let psi = sweep(dom, psi0, SweepOrder::RowsFirst, |prev, _, to| {
        Ok(nearest_log(expo[dom.idx(to.0, to.1)], prev))
    })?;
    let mut defect: f64 = 0.0;
    for k in 0..dom.len() {
        let (c, s) = (psi[k].cosh(), psi[k].sinh());
        defect = defect.max((c * c - s * s - 1.0).norm());
        let fit = ((c - f[k].0 / h[k]).norm() + (s - f[k].1 / h[k]).norm())
            / (1.0 + c.norm() + s.norm());
        defect = defect.max(fit);
    }
    if defect > budgets::ARC_IDENTITY_TOL {
        return Err(Error::BranchConflict {
            i: 0,
            j: 0,
            reason: format!("angle recovery defect {defect:e}"),
        });
    }
    Ok(ArcLengthData {
        domain: *dom,
        h,
        psi,
        max_identity_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeddomain::{build_alpha, SeedArc};

    fn golden() -> FlatSeed {
        SeedR31::parse("1", "0", "1", "1").unwrap().into()
    }

    fn golden_g(z: C64) -> CQuat {
        CQuat::new(z.cos(), C64::new(0.0, 0.0), z.sin(), C64::new(0.0, 0.0))
    }

    #[test]
    fn origin_keeps_initial_value() {
        let dom = GridDomain::unit_square(9).unwrap();
        let p = SpinElem::normalize(CQuat::from_real(1.0, 0.3, -0.2, 0.1)).unwrap();
        let s: FlatSeed = SeedR31::parse("exp(z)", "z", "1", "0").unwrap().into();
        let g = integrate_spin_frame(&s, &dom, p).unwrap();
        assert_eq!(*g.at(0, 0), p);
    }

    #[test]
    fn golden_frame_matches_closed_form() {
        let dom = GridDomain::unit_square(33).unwrap();
        for seed in [golden(), SeedArc::parse("0", "1", "1").unwrap().into()] {
            let g = integrate_spin_frame(&seed, &dom, SpinElem::IDENTITY).unwrap();
            let err = (0..dom.len())
                .map(|k| {
                    let (i, j) = dom.ij(k);
                    (g.g[k].value() - golden_g(dom.point(i, j))).norm()
                })
                .fold(0.0, f64::max);
            assert!(err < 1e-7, "{err}");
            assert!(g.max_spin_defect() < 1e-12);
        }
    }

    #[test]
    fn renormalization_failure_on_wild_seed() {
        let dom = GridDomain::unit_square(3).unwrap();
        // Step 2.5 along x: the RK4 polynomial gives H(g,g) = 1 - t^6/72 + t^8/576 ~ 0.27.
        let s: FlatSeed = SeedR31::parse("5", "0", "1", "1").unwrap().into();
        assert!(matches!(
            integrate_spin_frame(&s, &dom, SpinElem::IDENTITY),
            Err(Error::RenormalizationFailure { .. })
        ));
    }

    #[test]
    fn structure_residual_examples() {
        let dom = GridDomain::unit_square(17).unwrap();
        let r = structure_residual(&golden(), &dom).unwrap();
        assert_eq!(r.max_residual, 0.0);
        let s: FlatSeed = SeedR31::parse("cosh(z)", "sinh(z)", "1", "1").unwrap().into();
        let r1 = structure_residual(&s, &dom).unwrap().max_residual;
        let r2 = structure_residual(&s, &dom.refine(2).unwrap()).unwrap().max_residual;
        assert!((r1 / r2 - 4.0).abs() < 0.2, "{}", r1 / r2);
        let bad = structure_residual_with(&dom, |x, y| Ok((C64::new(x * x + y * y, 0.0), C64::new(0.0, 0.0))))
            .unwrap();
        assert!(bad.max_residual > 0.1 && !bad.pass);
    }

    #[test]
    fn golden_immersion_basics() {
        let dom = GridDomain::unit_square(33).unwrap();
        let seed = golden();
        let g = integrate_spin_frame(&seed, &dom, SpinElem::IDENTITY).unwrap();
        let a = build_alpha(&seed, &dom).unwrap();
        let p = integrate_immersion(&g, &a, &seed).unwrap();
        assert_eq!(p.at(0, 0), MinkVec::new(0.0, 0.0, 0.0, 0.0));
        assert!(p.imaginary_residue_max < 1e-12);
        assert!(p.loop_residual_max <= p.loop_budget);
        let frame = p.frame().unwrap();
        for s in frame {
            assert!((s.e1.norm_sq() + 1.0).abs() < 1e-12);
            assert!((s.e2.norm_sq() - 1.0).abs() < 1e-12);
            assert!(s.e1.dot(&s.e2).abs() < 1e-12);
            assert!((s.e3.norm_sq() - 1.0).abs() < 1e-12);
            assert!((s.e4.norm_sq() - 1.0).abs() < 1e-12);
        }
        let r = verify_dirac_flat(&g, &a, &p.flat.as_ref().unwrap().mean_curvature).unwrap();
        assert!(r.pass, "{r:?}");
        let mut h = p.flat.as_ref().unwrap().mean_curvature.clone();
        for v in &mut h {
            v[0] += 0.1;
        }
        let r = verify_dirac_flat(&g, &a, &h).unwrap();
        assert!(!r.pass && (r.max_residual - 0.1).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn non_closed_form_is_rejected() {
        // Frame fields that drop the factors of i on the f2 terms do not
        // solve the Dirac relation, so xi picks up curl.
        let (f1, f2, h1, h2) = (1.0, 0.5, 1.0, 0.3);
        let d = f1 * f1 - f2 * f2;
        let a1 = C64::new(0.0, -(h1 * f1 + h2 * f2) / d);
        let a2 = C64::new((h2 * f1 - h1 * f2) / d, 0.0);
        let dom = GridDomain::unit_square(17).unwrap();
        let seed: FlatSeed = SeedR31::parse("1", "0.5", "1", "0.3").unwrap().into();
        let g = integrate_spin_frame(&seed, &dom, SpinElem::IDENTITY).unwrap();
        let wrong = AlphaField::constant(dom, a1, a2);
        let r = integrate_immersion_with(&g, &wrong, &seed, |_| Ok(coframe_of(a1, a2)));
        assert!(matches!(r, Err(Error::ClosednessFailure { .. })), "{r:?}");
        let right = build_alpha(&seed, &dom).unwrap();
        assert!(integrate_immersion(&g, &right, &seed).is_ok());
    }

    #[test]
    fn path_independence_is_fourth_order() {
        let s: FlatSeed = SeedR31::parse("cosh(z)", "0.5*sinh(z)", "1", "1").unwrap().into();
        let diff = |n: usize| {
            let dom = GridDomain::unit_square(n).unwrap();
            let a = integrate_spin_frame_ordered(&s, &dom, SpinElem::IDENTITY, SweepOrder::RowsFirst)
                .unwrap();
            let b = integrate_spin_frame_ordered(&s, &dom, SpinElem::IDENTITY, SweepOrder::ColumnsFirst)
                .unwrap();
            a.g.iter()
                .zip(&b.g)
                .map(|(p, q)| (p.value() - q.value()).norm())
                .fold(0.0, f64::max)
        };
        let (d1, d2) = (diff(9), diff(17));
        let order = (d1 / d2).log2();
        assert!(order > 3.5, "order {order}, {d1:e} {d2:e}");
    }

    #[test]
    fn arc_length_examples() {
        let dom = GridDomain::unit_square(5).unwrap();
        let r = arc_length_reduce(&SeedR31::parse("1", "0", "1", "1").unwrap(), &dom).unwrap();
        assert!(r.h.iter().all(|v| (v - 1.0).norm() < 1e-15));
        assert!(r.psi.iter().all(|v| v.norm() < 1e-15));
        let c = C64::new(0.4, -0.7);
        let src = |f: &str| format!("{f}(0.4 - 0.7i)");
        let seed = SeedR31::parse(&src("cosh"), &src("sinh"), "1", "0").unwrap();
        let r = arc_length_reduce(&seed, &dom).unwrap();
        assert!(r.h.iter().all(|v| (v - 1.0).norm() < 1e-12));
        assert!(r.psi.iter().all(|v| (v - c).norm() < 1e-12));
        let r = arc_length_reduce(&SeedR31::parse("0", "1", "1", "1").unwrap(), &dom).unwrap();
        assert!((r.h[0] - C64::i()).norm() < 1e-15);
        assert!((r.psi[0] - C64::new(0.0, -std::f64::consts::FRAC_PI_2)).norm() < 1e-15);
        assert!(matches!(
            arc_length_reduce(&SeedR31::parse("1", "-1", "1", "1").unwrap(), &dom),
            Err(Error::DegenerateOsculating { .. })
        ));
    }

    #[test]
    fn arc_length_branch_tracks_across_the_negative_axis() {
        // f1^2 - f2^2 = z^2 + 4 winds once around -4 on this box but not around 0.
        let dom = GridDomain::new(-1.0, 1.0, -1.0, 1.0, 21, 21).unwrap();
        let seed = SeedR31::parse("z", "2i", "1", "1").unwrap();
        let r = arc_length_reduce(&seed, &dom).unwrap();
        for k in 0..dom.len() {
            let (i, j) = dom.ij(k);
            let z = dom.point(i, j);
            let d = z * z + 4.0;
            assert!((r.h[k] * r.h[k] - d).norm() < 1e-12);
        }
    }

    #[test]
    fn branch_conflict_around_a_zero() {
        // f1^2 - f2^2 = z; the two sweeps disagree in the quadrant x, y > 0.
        let dom = GridDomain::new(-1.0, 1.0, -1.0, 1.0, 20, 20).unwrap();
        let seed = SeedR31::parse("(z + 1)/2", "(z - 1)/2", "1", "1").unwrap();
        match arc_length_reduce(&seed, &dom) {
            Err(Error::BranchConflict { i, j, .. }) => {
                let (x, y) = dom.xy(i, j);
                assert!(x > 0.0 && y > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
