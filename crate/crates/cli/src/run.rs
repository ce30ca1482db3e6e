//! The three subcommands.

use std::fs;
use std::path::Path;

use serde::Serialize;
use spinorsurf::budgets;
use spinorsurf::cquat::{Mat2C, SpinElem};
use spinorsurf::desitter::{
    check_reduction, extract_connection, herm_patch, synthesize_flat_s21, HermPatch, Sl2Field,
};
use spinorsurf::geomverify::{
    convergence_order, curvature_brioschi, identity_floor, names, order_ok, verify_flat_patch,
    IdentityResult,
};
use spinorsurf::seeddomain::{
    build_alpha, check_commutator, check_independence, FlatSeed, GridDomain, SeedS21,
};
use spinorsurf::synth::{
    arc_length_reduce, integrate_immersion, integrate_spin_frame_ordered, ImmersionPatch,
    SweepOrder,
};

use crate::config::{RunConfig, Seed, SeedConfig};
use crate::error::{CliError, CliResult, Code};
use crate::export::{self, Format, Projection};
use crate::patchio::{self, PatchFile};

/// Checks reported by `synth` for flat seeds; the rest belong to `verify`.
const SYNTH_CHECKS: &[&str] = &[
    names::SPIN_CONSTRAINT,
    names::STRUCTURE,
    names::LOOP,
    names::REALITY,
    names::DIRAC,
    names::FRAME_PATTERN,
];

/// Stored seed-derived fields may differ from a fresh evaluation by this much.
const SEED_TOL: f64 = 1e-12;

/// Minimum order required between a patch and its refinement.
const MIN_ORDER: f64 = 1.8;

/// A hypothesis of the construction, checked on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub rule: &'static str,
}

#[derive(Debug, Serialize)]
struct ErrorInfo {
    code: u8,
    message: String,
}

#[derive(Debug, Serialize)]
struct SynthReport {
    kind: &'static str,
    domain: GridDomain,
    hypotheses: Vec<Hypothesis>,
    checks: Vec<IdentityResult>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refinement: Option<RefinementInfo>,
}

#[derive(Debug, Serialize)]
struct RefinementInfo {
    factor: usize,
    /// Largest distance between the two runs at shared grid points.
    max_point_difference: f64,
}

struct Synthesized {
    file: PatchFile,
    hypotheses: Vec<Hypothesis>,
    checks: Vec<IdentityResult>,
}

fn synth_flat(
    cfg: &SeedConfig,
    seed: &FlatSeed,
    dom: &GridDomain,
    order: SweepOrder,
    hyps: &mut Vec<Hypothesis>,
) -> CliResult<Synthesized> {
    let a = build_alpha(seed, dom)?;
    let ind = check_independence(&a)?;
    hyps.push(Hypothesis {
        name: "frame_independence",
        value: ind.min_abs_det,
        bound: ind.eps,
        pass: ind.pass,
        rule: "min |det(alpha1, alpha2)| above bound",
    });
    let com = check_commutator(&a);
    hyps.push(Hypothesis {
        name: "frame_commutator",
        value: com.max_residual,
        bound: com.budget,
        pass: com.pass,
        rule: "max |[alpha1, alpha2]| within bound",
    });
    if !com.pass {
        return Err(CliError::new(
            Code::Hypothesis,
            format!(
                "frame fields do not commute: bracket {:e} exceeds {:e}",
                com.max_residual, com.budget
            ),
        ));
    }
    if let FlatSeed::R31(s) = seed {
        let arc = arc_length_reduce(s, dom)?;
        hyps.push(Hypothesis {
            name: "arc_length_branch",
            value: arc.max_identity_defect,
            bound: budgets::ARC_IDENTITY_TOL,
            pass: arc.max_identity_defect <= budgets::ARC_IDENTITY_TOL,
            rule: "arc-length angle reproduces (f1, f2) within bound",
        });
    }
    let g = integrate_spin_frame_ordered(seed, dom, SpinElem::IDENTITY, order)?;
    let patch = integrate_immersion(&g, &a, seed)?;
    let report = verify_flat_patch(&patch, Some(seed))?;
    let checks = report
        .identities
        .into_iter()
        .filter(|r| SYNTH_CHECKS.contains(&r.name.as_str()))
        .collect();
    Ok(Synthesized {
        file: PatchFile::new(cfg.clone(), patch, None),
        hypotheses: hyps.clone(),
        checks,
    })
}

fn fixed(name: &'static str, value: f64, budget: f64, pass: bool) -> IdentityResult {
    IdentityResult {
        name: name.into(),
        max_residual: value,
        budget,
        pass,
        note: None,
    }
}

/// Checks on a de Sitter patch.
fn s21_checks(hp: &HermPatch) -> CliResult<Vec<IdentityResult>> {
    let dom = hp.domain;
    let mut out = Vec::new();
    let tol = budgets::DET_F_TOL;
    out.push(fixed("det_f", hp.max_det_defect, tol, hp.max_det_defect <= tol));
    out.push(fixed("hermitian", hp.max_herm_defect, tol, hp.max_herm_defect <= tol));
    let mdet = hp.max_metric_det();
    out.push(IdentityResult {
        note: Some("largest EG - F^2; must be negative".into()),
        ..fixed("metric_signature", mdet, 0.0, mdet < 0.0)
    });
    let k = curvature_brioschi(&dom, &hp.metric)?;
    out.push(fixed(names::BRIOSCHI, k.max_abs_k, k.budget, k.pass));
    let red = check_reduction(&hp.to_immersion()?);
    out.push(fixed(
        "s21_membership",
        red.s21_deviation,
        budgets::S21_TOL,
        red.in_s21,
    ));
    let conn = extract_connection(&Sl2Field {
        domain: dom,
        b: hp.b.clone(),
    })?;
    out.push(fixed(
        "connection_diagonal",
        conn.max_diagonal,
        conn.budget,
        conn.max_diagonal <= conn.budget,
    ));
    let min = conn.min_abs_theta.min(conn.min_abs_omega);
    out.push(IdentityResult {
        note: Some("smallest |theta|, |omega|; must exceed the floor".into()),
        ..fixed(
            "connection_nonvanishing",
            min,
            budgets::VANISHING_FLOOR,
            conn.nowhere_vanishing,
        )
    });
    Ok(out)
}

fn synth_s21(cfg: &SeedConfig, seed: &SeedS21, dom: &GridDomain) -> CliResult<Synthesized> {
    let hp = synthesize_flat_s21(seed, dom, Mat2C::IDENTITY)?;
    let checks = s21_checks(&hp)?;
    let patch = hp.to_immersion()?;
    Ok(Synthesized {
        file: PatchFile::new(cfg.clone(), patch, Some(hp.b)),
        hypotheses: Vec::new(),
        checks,
    })
}

fn write_outputs(dir: &Path, cfg: &RunConfig, s: &Synthesized) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    patchio::write_json(&dir.join(patchio::PATCH_FILE), &s.file)?;
    let points = &s.file.patch.points;
    for f in &cfg.output.formats {
        match f.parse::<Format>().map_err(|e| CliError::new(Code::Input, e))? {
            Format::Csv => {
                let path = dir.join("patch.csv");
                fs::write(&path, export::csv(points)).map_err(|e| CliError::io(&path, e))?;
            }
            Format::Obj => {
                let proj: Projection = cfg
                    .output
                    .projection
                    .parse()
                    .map_err(|e| CliError::new(Code::Input, e))?;
                let text = export::obj(&s.file.patch.domain, points, proj)?;
                let path = dir.join("patch.obj");
                fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            }
            Format::Json => {}
        }
    }
    Ok(())
}

fn write_report(dir: &Path, report: &SynthReport) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    patchio::write_json(&dir.join(patchio::REPORT_FILE), report)
}

/// Runs one synthesis and writes its directory. On success returns the patch,
/// its report and the exit code when a check failed.
fn synth_one(
    cfg: &RunConfig,
    seed: &Seed,
    dom: &GridDomain,
    dir: &Path,
) -> CliResult<(PatchFile, SynthReport, Option<Code>)> {
    let mut hyps = Vec::new();
    let res = match seed {
        Seed::Flat(s) => synth_flat(&cfg.seed, s, dom, cfg.integrator.order, &mut hyps),
        Seed::S21(s) => synth_s21(&cfg.seed, s, dom),
    };
    let mut report = SynthReport {
        kind: cfg.seed.kind(),
        domain: *dom,
        hypotheses: hyps,
        checks: Vec::new(),
        pass: false,
        error: None,
        refinement: None,
    };
    match res {
        Ok(s) => {
            write_outputs(dir, cfg, &s)?;
            let hyp_ok = s.hypotheses.iter().all(|h| h.pass);
            let checks_ok = s.checks.iter().all(|c| c.pass);
            report.hypotheses = s.hypotheses;
            report.checks = s.checks;
            report.pass = hyp_ok && checks_ok;
            write_report(dir, &report)?;
            let code = if !hyp_ok {
                Some(Code::Hypothesis)
            } else {
                (!checks_ok).then_some(Code::Budget)
            };
            Ok((s.file, report, code))
        }
        Err(e) if e.code == Code::Hypothesis || e.code == Code::Budget => {
            report.error = Some(ErrorInfo {
                code: e.code as u8,
                message: e.message.clone(),
            });
            write_report(dir, &report)?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

pub fn synth(config: &Path, out: &Path, refine: Option<usize>) -> CliResult<Option<Code>> {
    let mut cfg = RunConfig::load(config)?;
    if refine.is_some() {
        cfg.integrator.refine = refine;
        cfg.validate()?;
    }
    let seed = cfg.seed.parse()?;
    let dom = cfg.domain;
    let (coarse, mut report, mut code) = synth_one(&cfg, &seed, &dom, out)?;
    if let Some(k) = cfg.integrator.refine {
        let fine_dom = dom.refine(k)?;
        let (fine, _, fine_code) =
            synth_one(&cfg, &seed, &fine_dom, &out.join(patchio::REFINED_DIR))?;
        code = code.or(fine_code);
        let diff = (0..dom.len())
            .map(|m| {
                let (i, j) = dom.ij(m);
                (coarse.patch.points[m] - fine.patch.at(i * k, j * k)).euclid_norm()
            })
            .fold(0.0, f64::max);
        report.refinement = Some(RefinementInfo {
            factor: k,
            max_point_difference: diff,
        });
        write_report(out, &report)?;
    }
    Ok(code)
}

#[derive(Debug, Serialize)]
struct OrderResult {
    name: String,
    /// `None` when the fine residual is at rounding level.
    order: Option<f64>,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Resolution {
    h: f64,
    identities: Vec<IdentityResult>,
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    kind: &'static str,
    coarse: Resolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    refined: Option<Resolution>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    orders: Vec<OrderResult>,
    pass: bool,
}

/// Replaces the seed-determined fields of a stored flat patch and reports how
/// far the stored copies were from them.
fn reseed(patch: &mut ImmersionPatch, seed: &FlatSeed) -> CliResult<IdentityResult> {
    let dom = patch.domain;
    let alpha = build_alpha(seed, &dom)?;
    let h: Vec<[f64; 2]> = seed
        .mean_curvature(&dom)?
        .into_iter()
        .map(|(a, b)| [a, b])
        .collect();
    let flat = patch
        .flat
        .as_mut()
        .ok_or_else(|| CliError::new(Code::Input, "flat patch without flat data"))?;
    let da = flat
        .alpha
        .a1
        .iter()
        .zip(&alpha.a1)
        .chain(flat.alpha.a2.iter().zip(&alpha.a2))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let dh = flat
        .mean_curvature
        .iter()
        .zip(&h)
        .map(|(x, y)| (x[0] - y[0]).abs().max((x[1] - y[1]).abs()))
        .fold(0.0, f64::max);
    flat.alpha = alpha;
    flat.mean_curvature = h;
    let dev = da.max(dh);
    Ok(IdentityResult {
        note: Some("stored frame fields and mean curvature against the seed".into()),
        ..fixed("seed_consistency", dev, SEED_TOL, dev <= SEED_TOL)
    })
}

fn verify_file(file: &PatchFile) -> CliResult<Resolution> {
    let dom = file.patch.domain;
    let identities = match (file.seed.parse()?, &file.sl2) {
        (Seed::Flat(seed), _) => {
            // The seed is authoritative: the stored frame and points are checked
            // against fields rebuilt from it, not against their stored copies.
            let mut patch = file.patch.clone();
            let consistency = reseed(&mut patch, &seed)?;
            let mut ids = verify_flat_patch(&patch, Some(&seed))?.identities;
            ids.insert(0, consistency);
            ids
        }
        (Seed::S21(_), Some(b)) => s21_checks(&herm_patch(&dom, b.clone())?)?,
        (Seed::S21(_), None) => {
            return Err(CliError::new(Code::Input, "s21 patch without sl2 samples"))
        }
    };
    Ok(Resolution {
        h: dom.h(),
        identities,
    })
}

pub fn verify(dir: &Path) -> CliResult<Option<Code>> {
    let file = patchio::read_patch(dir)?;
    let coarse = verify_file(&file)?;
    let fine_dir = dir.join(patchio::REFINED_DIR);
    let refined = if fine_dir.join(patchio::PATCH_FILE).is_file() {
        let fine = patchio::read_patch(&fine_dir)?;
        if fine.seed != file.seed {
            return Err(CliError::new(
                Code::Input,
                format!("{}: seed differs from the coarse patch", fine_dir.display()),
            ));
        }
        Some(verify_file(&fine)?)
    } else {
        None
    };
    let mut orders = Vec::new();
    if let Some(fine) = &refined {
        for c in &coarse.identities {
            let Some(f) = fine.identities.iter().find(|f| f.name == c.name) else {
                continue;
            };
            // fixed tolerances carry no order
            if c.budget == f.budget {
                continue;
            }
            let floor = identity_floor(&c.name, fine.h);
            let floored = f.max_residual <= floor.max(budgets::ROUNDOFF_FLOOR);
            orders.push(OrderResult {
                name: c.name.clone(),
                order: if floored {
                    None
                } else {
                    convergence_order(c.max_residual, coarse.h, f.max_residual, fine.h)
                },
                pass: order_ok(c.max_residual, coarse.h, f.max_residual, fine.h, MIN_ORDER, floor),
            });
        }
    }
    let pass = coarse.identities.iter().all(|r| r.pass)
        && refined
            .as_ref()
            .is_none_or(|r| r.identities.iter().all(|r| r.pass))
        && orders.iter().all(|o| o.pass);
    let out = VerifyOutput {
        kind: file.seed.kind(),
        coarse,
        refined,
        orders,
        pass,
    };
    patchio::write_json(&dir.join(patchio::VERIFY_FILE), &out)?;
    for r in &out.coarse.identities {
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} {:<26} {:>10.3e}  budget {:.3e}",
            r.name, r.max_residual, r.budget
        );
        if let (false, Some(note)) = (r.pass, &r.note) {
            println!("     {note}");
        }
    }
    for o in &out.orders {
        let status = if o.pass { "PASS" } else { "FAIL" };
        match o.order {
            Some(p) => println!("{status} order {:<20} {p:.2}", o.name),
            None => println!("{status} order {:<20} at rounding level", o.name),
        }
    }
    Ok((!pass).then_some(Code::Budget))
}

pub fn export(dir: &Path, format: Format, proj: Projection, out: Option<&Path>) -> CliResult<()> {
    let text = match format {
        Format::Json => {
            // validate, then emit the file verbatim
            patchio::read_patch(dir)?;
            let path = dir.join(patchio::PATCH_FILE);
            fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?
        }
        Format::Csv => export::csv(&patchio::read_patch(dir)?.patch.points),
        Format::Obj => {
            let file = patchio::read_patch(dir)?;
            export::obj(&file.patch.domain, &file.patch.points, proj)?
        }
    };
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::new(Code::Io, e))
                }
                _ => Ok(()),
            }
        }
    }
}
