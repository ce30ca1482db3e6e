//! Central finite differences on grid fields.

use std::ops::{Add, Sub};

use num_complex::Complex64 as C64;

use crate::cquat::{CQuat, Mat2C, MinkVec};
use crate::seeddomain::GridDomain;

/// Values that can be differenced on a grid.
pub trait GridValue: Copy + Add<Output = Self> + Sub<Output = Self> {
    fn scaled(self, s: f64) -> Self;
}

impl GridValue for f64 {
    fn scaled(self, s: f64) -> Self {
        self * s
    }
}

impl GridValue for C64 {
    fn scaled(self, s: f64) -> Self {
        self * s
    }
}

impl GridValue for CQuat {
    fn scaled(self, s: f64) -> Self {
        self * s
    }
}

impl GridValue for MinkVec {
    fn scaled(self, s: f64) -> Self {
        self * s
    }
}

impl GridValue for Mat2C {
    fn scaled(self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }
}

/// First partials `(d/dx, d/dy)` at an interior point.
pub fn d1<T: GridValue>(dom: &GridDomain, v: &[T], i: usize, j: usize) -> (T, T) {
    let dx = (v[dom.idx(i + 1, j)] - v[dom.idx(i - 1, j)]).scaled(0.5 / dom.hx());
    let dy = (v[dom.idx(i, j + 1)] - v[dom.idx(i, j - 1)]).scaled(0.5 / dom.hy());
    (dx, dy)
}

/// Second partials `(xx, xy, yy)` at an interior point.
pub fn d2<T: GridValue>(dom: &GridDomain, v: &[T], i: usize, j: usize) -> (T, T, T) {
    let (hx, hy) = (dom.hx(), dom.hy());
    let c = v[dom.idx(i, j)];
    let xx = (v[dom.idx(i + 1, j)] + v[dom.idx(i - 1, j)] - c - c).scaled(1.0 / (hx * hx));
    let yy = (v[dom.idx(i, j + 1)] + v[dom.idx(i, j - 1)] - c - c).scaled(1.0 / (hy * hy));
    let xy = (v[dom.idx(i + 1, j + 1)] + v[dom.idx(i - 1, j - 1)]
        - v[dom.idx(i + 1, j - 1)]
        - v[dom.idx(i - 1, j + 1)])
        .scaled(0.25 / (hx * hy));
    (xx, xy, yy)
}

/// Directional derivative along the real vector `(a.re, a.im)`.
pub fn along<T: GridValue>(a: C64, d: (T, T)) -> T {
    d.0.scaled(a.re) + d.1.scaled(a.im)
}

/// Maximum of `f` over points at least `ring` cells from the boundary.
pub fn interior_max<F>(dom: &GridDomain, ring: usize, f: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    use rayon::prelude::*;
    (0..dom.len())
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = dom.ij(k);
            dom.is_interior(i, j, ring).then(|| f(i, j))
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quadratics() {
        let dom = GridDomain::new(0.0, 2.0, -1.0, 1.0, 5, 9).unwrap();
        let v: Vec<f64> = (0..dom.len())
            .map(|k| {
                let (i, j) = dom.ij(k);
                let (x, y) = dom.xy(i, j);
                3.0 * x * x - 2.0 * x * y + y * y + x
            })
            .collect();
        let (x, y) = dom.xy(2, 3);
        let (dx, dy) = d1(&dom, &v, 2, 3);
        assert!((dx - (6.0 * x - 2.0 * y + 1.0)).abs() < 1e-12);
        assert!((dy - (-2.0 * x + 2.0 * y)).abs() < 1e-12);
        let (xx, xy, yy) = d2(&dom, &v, 2, 3);
        assert!((xx - 6.0).abs() < 1e-11 && (xy + 2.0).abs() < 1e-11 && (yy - 2.0).abs() < 1e-11);
    }
}
