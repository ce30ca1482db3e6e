//! Parameter grids, seed data and the frame fields derived from them.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cquat::CQuat;
use crate::error::{Error, Result};
use crate::holoexpr::{parse, ExprAst, ExprError, Mode};

/// Closed rectangle `[x0,x1] x [y0,y1]` sampled at `nx * ny` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridDomain {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        let d = Self {
            x0,
            x1,
            y0,
            y1,
            nx,
            ny,
        };
        d.validate()?;
        Ok(d)
    }

    /// Unit square with `n * n` samples.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(0.0, 1.0, 0.0, 1.0, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidDomain("bounds must be finite".into()));
        }
        if !(self.x0 < self.x1 && self.y0 < self.y1) {
            return Err(Error::InvalidDomain("need x0 < x1 and y0 < y1".into()));
        }
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::InvalidDomain("need at least 3 samples per axis".into()));
        }
        if self.nx.checked_mul(self.ny).is_none_or(|n| n > 1 << 26) {
            return Err(Error::InvalidDomain("grid too large".into()));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / (self.ny - 1) as f64
    }

    /// Largest spacing, used for `C h^2` budgets.
    pub fn h(&self) -> f64 {
        self.hx().max(self.hy())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, rows along x.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn xy(&self, i: usize, j: usize) -> (f64, f64) {
        // Interpolate from both ends so the far edge is hit exactly.
        let t = i as f64 / (self.nx - 1) as f64;
        let s = j as f64 / (self.ny - 1) as f64;
        (
            self.x0 + (self.x1 - self.x0) * t,
            self.y0 + (self.y1 - self.y0) * s,
        )
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        let (x, y) = self.xy(i, j);
        C64::new(x, y)
    }

    /// Same rectangle with `k` times finer spacing; old grid points are kept.
    pub fn refine(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDomain("refinement factor must be positive".into()));
        }
        Self::new(
            self.x0,
            self.x1,
            self.y0,
            self.y1,
            (self.nx - 1) * k + 1,
            (self.ny - 1) * k + 1,
        )
    }

    /// True if `(i, j)` is at least `ring` cells away from the boundary.
    pub fn is_interior(&self, i: usize, j: usize, ring: usize) -> bool {
        i >= ring && j >= ring && i + ring < self.nx && j + ring < self.ny
    }
}

fn seed_eval(x: f64, y: f64) -> impl FnOnce(ExprError) -> Error {
    move |source| Error::SeedEval { x, y, source }
}

fn parse_in(src: &str, mode: Mode) -> Result<ExprAst> {
    Ok(parse(src, mode)?)
}

/// `g' g^{-1} = f1 J + f2 iK` with mean curvature components `h1, h2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedR31 {
    pub f1: ExprAst,
    pub f2: ExprAst,
    pub h1: ExprAst,
    pub h2: ExprAst,
}

impl SeedR31 {
    pub fn parse(f1: &str, f2: &str, h1: &str, h2: &str) -> Result<Self> {
        Ok(Self {
            f1: parse_in(f1, Mode::Analytic)?,
            f2: parse_in(f2, Mode::Analytic)?,
            h1: parse_in(h1, Mode::RealSmooth)?,
            h2: parse_in(h2, Mode::RealSmooth)?,
        })
    }
}

/// Arc-length form: `g' g^{-1} = cosh(psi) J + sinh(psi) iK`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedArc {
    pub psi: ExprAst,
    pub h1: ExprAst,
    pub h2: ExprAst,
}

impl SeedArc {
    pub fn parse(psi: &str, h1: &str, h2: &str) -> Result<Self> {
        Ok(Self {
            psi: parse_in(psi, Mode::Analytic)?,
            h1: parse_in(h1, Mode::RealSmooth)?,
            h2: parse_in(h2, Mode::RealSmooth)?,
        })
    }
}

/// Holomorphic connection coefficients for the de Sitter construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedS21 {
    pub theta: ExprAst,
    pub omega: ExprAst,
}

impl SeedS21 {
    pub fn parse(theta: &str, omega: &str) -> Result<Self> {
        Ok(Self {
            theta: parse_in(theta, Mode::Analytic)?,
            omega: parse_in(omega, Mode::Analytic)?,
        })
    }

    pub fn coefficients(&self, z: C64) -> Result<(C64, C64)> {
        let e = seed_eval(z.re, z.im);
        let t = self.theta.eval_z(z).map_err(e)?;
        let e = seed_eval(z.re, z.im);
        let w = self.omega.eval_z(z).map_err(e)?;
        Ok((t, w))
    }

    /// Checks that theta and omega never vanish and that `Im(omega/theta) != 0`.
    pub fn validate(&self, dom: &GridDomain) -> Result<Vec<(C64, C64)>> {
        let vals = (0..dom.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = dom.ij(k);
                self.coefficients(dom.point(i, j))
            })
            .collect::<Result<Vec<_>>>()?;
        let scale = vals
            .iter()
            .map(|(t, w)| t.norm().max(w.norm()))
            .fold(0.0, f64::max);
        let eps = 1e-8 * scale.max(f64::MIN_POSITIVE);
        for (k, (t, w)) in vals.iter().enumerate() {
            let (i, j) = dom.ij(k);
            if t.norm() <= eps || w.norm() <= eps {
                return Err(Error::SeedInvalid {
                    i,
                    j,
                    reason: "connection coefficient vanishes".into(),
                });
            }
            let ratio = w / t;
            if ratio.im.abs() <= 1e-8 * ratio.norm() {
                return Err(Error::SeedInvalid {
                    i,
                    j,
                    reason: format!("Im(omega/theta) = {:e}", ratio.im),
                });
            }
        }
        Ok(vals)
    }
}

/// Either flat seed shape.
#[derive(Debug, Clone, PartialEq)]
pub enum FlatSeed {
    R31(SeedR31),
    Arc(SeedArc),
}

impl From<SeedR31> for FlatSeed {
    fn from(s: SeedR31) -> Self {
        FlatSeed::R31(s)
    }
}

impl From<SeedArc> for FlatSeed {
    fn from(s: SeedArc) -> Self {
        FlatSeed::Arc(s)
    }
}

impl FlatSeed {
    /// `(f1, f2)` at `z`; for arc seeds `(cosh psi, sinh psi)`.
    pub fn f_pair(&self, z: C64) -> Result<(C64, C64)> {
        match self {
            FlatSeed::R31(s) => {
                let a = s.f1.eval_z(z).map_err(seed_eval(z.re, z.im))?;
                let b = s.f2.eval_z(z).map_err(seed_eval(z.re, z.im))?;
                Ok((a, b))
            }
            FlatSeed::Arc(s) => {
                let p = s.psi.eval_z(z).map_err(seed_eval(z.re, z.im))?;
                Ok((p.cosh(), p.sinh()))
            }
        }
    }

    /// The generator `f1 J + f2 iK` of `g' g^{-1}`.
    pub fn generator(&self, z: C64) -> Result<CQuat> {
        let (a, b) = self.f_pair(z)?;
        Ok(generator_from(a, b))
    }

    pub fn h_pair(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (h1, h2) = match self {
            FlatSeed::R31(s) => (&s.h1, &s.h2),
            FlatSeed::Arc(s) => (&s.h1, &s.h2),
        };
        let a = h1.eval_xy(x, y).map_err(seed_eval(x, y))?;
        let b = h2.eval_xy(x, y).map_err(seed_eval(x, y))?;
        Ok((a, b))
    }

    /// Frame fields at `z`, or `None` when `f1^2 - f2^2` vanishes.
    pub fn alpha_at(&self, z: C64) -> Result<Option<(C64, C64)>> {
        let (f1, f2) = self.f_pair(z)?;
        let (h1, h2) = self.h_pair(z.re, z.im)?;
        Ok(alpha_from(f1, f2, h1, h2))
    }

    /// Mean curvature vector components `(h1, h2)` on every grid point.
    pub fn mean_curvature(&self, dom: &GridDomain) -> Result<Vec<(f64, f64)>> {
        (0..dom.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = dom.ij(k);
                let (x, y) = dom.xy(i, j);
                self.h_pair(x, y)
            })
            .collect()
    }
}

pub fn generator_from(f1: C64, f2: C64) -> CQuat {
    CQuat::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), f1, C64::i() * f2)
}

/// Solves `(a1 i + a2 I)(f1 J + f2 iK) = h1 J + h2 K` for `(a1, a2)`.
pub fn alpha_from(f1: C64, f2: C64, h1: f64, h2: f64) -> Option<(C64, C64)> {
    let d = f1 * f1 - f2 * f2;
    if d.norm() == 0.0 {
        return None;
    }
    let i = C64::i();
    let a1 = -i * (h1 * f1 + i * h2 * f2) / d;
    let a2 = (h2 * f1 - i * h1 * f2) / d;
    Some((a1, a2))
}

/// Per-point complex values of the two frame fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaField {
    pub domain: GridDomain,
    pub a1: Vec<C64>,
    pub a2: Vec<C64>,
}

impl AlphaField {
    pub fn new(domain: GridDomain, a1: Vec<C64>, a2: Vec<C64>) -> Result<Self> {
        if a1.len() != domain.len() || a2.len() != domain.len() {
            return Err(Error::ShapeMismatch(format!(
                "alpha fields have {} and {} samples, grid has {}",
                a1.len(),
                a2.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, a1, a2 })
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(C64) -> (C64, C64) + Sync) -> Self {
        let (a1, a2) = (0..domain.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = domain.ij(k);
                f(domain.point(i, j))
            })
            .unzip();
        Self { domain, a1, a2 }
    }

    pub fn constant(domain: GridDomain, a1: C64, a2: C64) -> Self {
        Self::from_fn(domain, |_| (a1, a2))
    }

    pub fn max_abs(&self) -> f64 {
        self.a1
            .iter()
            .chain(&self.a2)
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// `det [Re a1, Re a2; Im a1, Im a2]` at index `k`.
    pub fn det(&self, k: usize) -> f64 {
        let (a, b) = (self.a1[k], self.a2[k]);
        a.re * b.im - b.re * a.im
    }

    /// Scale-relative threshold on the independence determinant.
    pub fn eps_ind(&self) -> f64 {
        let m = self.max_abs();
        1e-8 * m * m
    }
}

/// Builds the frame fields from a flat seed.
pub fn build_alpha(seed: &FlatSeed, dom: &GridDomain) -> Result<AlphaField> {
    dom.validate()?;
    let samples = (0..dom.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = dom.ij(k);
            let z = dom.point(i, j);
            let f = seed.f_pair(z)?;
            let h = seed.h_pair(z.re, z.im)?;
            Ok((f, h))
        })
        .collect::<Result<Vec<_>>>()?;
    let fmax = samples
        .iter()
        .map(|((a, b), _)| a.norm_sqr().max(b.norm_sqr()))
        .fold(0.0, f64::max);
    let eps_deg = 1e-8 * fmax;
    let mut a1 = Vec::with_capacity(dom.len());
    let mut a2 = Vec::with_capacity(dom.len());
    for (k, ((f1, f2), (h1, h2))) in samples.into_iter().enumerate() {
        let d = f1 * f1 - f2 * f2;
        if d.norm() <= eps_deg {
            let (i, j) = dom.ij(k);
            return Err(Error::DegenerateOsculating {
                i,
                j,
                value: d.norm(),
            });
        }
        let (u, v) = alpha_from(f1, f2, h1, h2).expect("nonzero discriminant");
        a1.push(u);
        a2.push(v);
    }
    Ok(AlphaField {
        domain: *dom,
        a1,
        a2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub min_abs_det: f64,
    pub worst: (usize, usize),
    pub eps: f64,
    pub pass: bool,
}

/// Checks that `a1, a2` are independent real vectors at every grid point.
pub fn check_independence(a: &AlphaField) -> Result<IndependenceReport> {
    let eps = a.eps_ind();
    let (k, min) = (0..a.a1.len())
        .map(|k| (k, a.det(k).abs()))
        .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
    let worst = a.domain.ij(k);
    if !(min > eps) {
        return Err(Error::DependentFrame {
            i: worst.0,
            j: worst.1,
            det: a.det(k),
        });
    }
    Ok(IndependenceReport {
        min_abs_det: min,
        worst,
        eps,
        pass: true,
    })
}

/// Budget constant for the discrete bracket, relative to `max|alpha|^2`.
pub const C_COMMUTATOR: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub max_residual: f64,
    pub budget: f64,
    pub h: f64,
    pub pass: bool,
}

/// Discrete Lie bracket `(a.grad) b - (b.grad) a` at interior points.
pub fn bracket_field(a: &AlphaField) -> Vec<Option<[f64; 2]>> {
    let dom = &a.domain;
    let (hx, hy) = (dom.hx(), dom.hy());
    let vec = |v: C64| [v.re, v.im];
    (0..dom.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = dom.ij(k);
            if !dom.is_interior(i, j, 1) {
                return None;
            }
            let d = |f: &[C64]| {
                let dx = (f[dom.idx(i + 1, j)] - f[dom.idx(i - 1, j)]) / (2.0 * hx);
                let dy = (f[dom.idx(i, j + 1)] - f[dom.idx(i, j - 1)]) / (2.0 * hy);
                (dx, dy)
            };
            let (p, q) = (vec(a.a1[k]), vec(a.a2[k]));
            let (bx, by) = d(&a.a2);
            let (ax, ay) = d(&a.a1);
            let ab = p[0] * bx + p[1] * by;
            let ba = q[0] * ax + q[1] * ay;
            let r = ab - ba;
            Some([r.re, r.im])
        })
        .collect()
}

pub fn check_commutator(a: &AlphaField) -> CommutatorReport {
    let max = bracket_field(a)
        .into_iter()
        .flatten()
        .map(|[u, v]| u.hypot(v))
        .fold(0.0, f64::max);
    let h = a.domain.h();
    let m = a.max_abs().max(1.0);
    let budget = C_COMMUTATOR * h * h * m * m;
    CommutatorReport {
        max_residual: max,
        budget,
        h,
        pass: max <= budget,
    }
}

/// Dual coframe: rows `omega1`, `omega2` with `omega_i(alpha_j) = delta_ij`.
pub type Coframe = [[f64; 2]; 2];

/// Inverse of `[[Re a1, Re a2], [Im a1, Im a2]]`; callers check the determinant.
pub fn coframe_of(a1: C64, a2: C64) -> Coframe {
    let det = a1.re * a2.im - a2.re * a1.im;
    [[a2.im / det, -a2.re / det], [-a1.im / det, a1.re / det]]
}

pub fn dual_forms(a: &AlphaField) -> Result<Vec<Coframe>> {
    let eps = a.eps_ind();
    (0..a.a1.len())
        .map(|k| {
            let det = a.det(k);
            if !(det.abs() > eps) {
                let (i, j) = a.domain.ij(k);
                return Err(Error::DependentFrame { i, j, det });
            }
            Ok(coframe_of(a.a1[k], a.a2[k]))
        })
        .collect()
}
