//! Mesh and table output of sampled patches.

use std::fmt::Write;
use std::str::FromStr;

use spinorsurf::cquat::MinkVec;
use spinorsurf::seeddomain::GridDomain;

use crate::error::{CliError, CliResult, Code};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Obj,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "obj" => Ok(Format::Obj),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected obj, csv or json)")),
        }
    }
}

/// Map from `R^{3,1}` to three coordinates for mesh output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    DropX1,
    DropX4,
    /// Stereographic projection from `(p, 0, 0, 0)` onto `x1 = 0`:
    /// `(x2, x3, x4) p / (p - x1)`. `None` picks `p = max x1 + 1`.
    Stereo(Option<f64>),
}

impl FromStr for Projection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "drop-x1" => Ok(Projection::DropX1),
            "drop-x4" => Ok(Projection::DropX4),
            "stereo" => Ok(Projection::Stereo(None)),
            _ => {
                let pole = s.strip_prefix("stereo:").ok_or_else(|| {
                    format!("unknown projection {s:?} (expected drop-x1, drop-x4, stereo or stereo:<pole>)")
                })?;
                let p: f64 = pole
                    .parse()
                    .map_err(|_| format!("bad stereographic pole {pole:?}"))?;
                if !p.is_finite() {
                    return Err(format!("bad stereographic pole {pole:?}"));
                }
                Ok(Projection::Stereo(Some(p)))
            }
        }
    }
}

/// Projected coordinates plus the coordinate that was projected away.
fn project(points: &[MinkVec], proj: Projection) -> CliResult<Vec<([f64; 3], f64)>> {
    match proj {
        Projection::DropX1 => Ok(points.iter().map(|p| ([p.x2, p.x3, p.x4], p.x1)).collect()),
        Projection::DropX4 => Ok(points.iter().map(|p| ([p.x1, p.x2, p.x3], p.x4)).collect()),
        Projection::Stereo(pole) => {
            let p = pole.unwrap_or_else(|| {
                points.iter().map(|v| v.x1).fold(f64::NEG_INFINITY, f64::max) + 1.0
            });
            points
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let d = p - v.x1;
                    if d.abs() <= 1e-12 * p.abs().max(1.0) {
                        return Err(CliError::new(
                            Code::Input,
                            format!("stereographic projection singular at point {k}: x1 = {} is the pole", v.x1),
                        ));
                    }
                    let s = p / d;
                    Ok(([v.x2 * s, v.x3 * s, v.x4 * s], v.x1))
                })
                .collect()
        }
    }
}

/// Header `x1,x2,x3,x4` then one row per grid point in storage order.
pub fn csv(points: &[MinkVec]) -> String {
    let mut out = String::from("x1,x2,x3,x4\n");
    for p in points {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", p.x1, p.x2, p.x3, p.x4);
    }
    out
}

/// Grid-quad mesh; each vertex is followed by a comment holding the dropped
/// coordinate.
pub fn obj(dom: &GridDomain, points: &[MinkVec], proj: Projection) -> CliResult<String> {
    let verts = project(points, proj)?;
    let dropped = match proj {
        Projection::DropX4 => "x4",
        _ => "x1",
    };
    let mut out = format!("# spinorsurf grid mesh {} x {}\n", dom.nx, dom.ny);
    for ([a, b, c], d) in &verts {
        let _ = writeln!(out, "v {a:.16e} {b:.16e} {c:.16e}");
        let _ = writeln!(out, "# {dropped} {d:.16e}");
    }
    for j in 0..dom.ny - 1 {
        for i in 0..dom.nx - 1 {
            let v = |i: usize, j: usize| dom.idx(i, j) + 1;
            let _ = writeln!(out, "f {} {} {} {}", v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
        }
    }
    Ok(out)
}
