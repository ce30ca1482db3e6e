//! Pass thresholds. Residual budgets are `C * h^2` with `h` the largest grid
//! spacing. In the full verification suite they are further multiplied by
//! `s^3`, where `s >= 1` is the derivative scale of the spin frame. The
//! constants sit roughly ten times above the residuals of the seed
//! `f1 = 1, f2 = 0, h1 = h2 = 1` on the unit square (where `s^3 ~ 7`).

/// Smallest `|H(g,g)|` accepted before renormalizing a step.
pub const RENORM_FLOOR: f64 = 0.5;
/// Largest imaginary residue allowed in points or frame vectors.
pub const REALITY_TOL: f64 = 1e-9;
/// Defect allowed when recovering the arc-length angle.
pub const ARC_IDENTITY_TOL: f64 = 1e-9;

/// Structure equation of the connection form.
pub const C_STRUCTURE: f64 = 1.0;
/// Per-face loop integral, relative to face area and coframe size.
pub const C_LOOP: f64 = 1e-3;
/// Flat-frame Dirac identity.
pub const C_DIRAC: f64 = 0.35;
/// Diagonal part of the recovered `Sl2` connection.
pub const C_DIAGONAL: f64 = 1.0;
/// `omega theta + f1^2 - f2^2`.
pub const C_LINKAGE: f64 = 1.0;
/// Cauchy-Riemann residual of the spin frame.
pub const C_CR: f64 = 1.0;
/// Cauchy-Riemann residual of the Gauss map.
pub const C_CR_GAUSS: f64 = 20.0;
/// `Delta F - 2 H`.
pub const C_LAPLACIAN_F: f64 = 5.0;
/// `H(dG, dG) + 4 (f1^2 - f2^2) dz^2`.
pub const C_PULLBACK: f64 = 7.5;
/// `Delta G + 2 |H|^2 G`.
pub const C_LAPLACIAN_G: f64 = 1.0;
/// `dG - 2 G g^{-1} dg`.
pub const C_GAUSS_DERIVATIVE: f64 = 7.5;
/// Finite-difference frame pattern `(-1, 1, 0)`.
pub const C_INDUCED_METRIC: f64 = 2.0;
/// Gaussian curvature of flat patches.
pub const C_BRIOSCHI: f64 = 0.1;

/// Largest `|det B - 1|` accepted for `Sl2` input.
pub const UNIMODULAR_TOL: f64 = 1e-6;
/// `|det F - 1|` and `|F* + F|` for de Sitter samples.
pub const DET_F_TOL: f64 = 1e-9;
/// Floor below which a connection coefficient counts as vanishing.
pub const VANISHING_FLOOR: f64 = 1e-8;
/// `max |xi(e4) -+ K|` for a patch to lie in `R^{2,1}`.
pub const R21_TOL: f64 = 1e-6;
/// `max |<F - c, F - c> - 1|` for a patch to lie in `S^{2,1}`.
pub const S21_TOL: f64 = 1e-5;
/// Allowed variation of `h1, h2` for the Gauss-map Laplacian check.
pub const CONSTANT_H_TOL: f64 = 1e-12;
/// Stored frame inner products against `(-1, 1, 1, 1)`.
pub const FRAME_PATTERN_TOL: f64 = 1e-6;
/// `|H(g,g) - 1|` on stored spin frames.
pub const SPIN_CONSTRAINT_TOL: f64 = 1e-9;
/// `|H(G,G) + 1|` on the Gauss map.
pub const GAUSS_NORM_TOL: f64 = 1e-8;
/// Residuals below this are treated as rounding noise when measuring orders.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Rounding noise of a quantity built from `k` nested difference quotients
/// with spacing `h`: `max(ROUNDOFF_FLOOR, 1e3 eps h^-k)`.
pub fn roundoff_floor(k: i32, h: f64) -> f64 {
    (1e3 * f64::EPSILON * h.powi(-k)).max(ROUNDOFF_FLOOR)
}
