//! On-disk patch directories: `patch.json`, optional `patch.csv` and
//! `patch.obj`, `report.json`, and an optional `refined/` sibling run.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spinorsurf::cquat::Mat2C;
use spinorsurf::synth::ImmersionPatch;

use crate::config::SeedConfig;
use crate::error::{CliError, CliResult, Code};

pub const PATCH_FILE: &str = "patch.json";
pub const REPORT_FILE: &str = "report.json";
pub const VERIFY_FILE: &str = "verify.json";
pub const REFINED_DIR: &str = "refined";
const MAGIC: &str = "spinorsurf-patch";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchFile {
    pub format: String,
    pub version: u32,
    pub seed: SeedConfig,
    pub patch: ImmersionPatch,
    /// `Sl2` samples for de Sitter patches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sl2: Option<Vec<Mat2C>>,
}

impl PatchFile {
    pub fn new(seed: SeedConfig, patch: ImmersionPatch, sl2: Option<Vec<Mat2C>>) -> Self {
        Self {
            format: MAGIC.into(),
            version: 1,
            seed,
            patch,
            sl2,
        }
    }

    /// Structural checks on a file read from disk.
    fn check(&self) -> Result<(), String> {
        if self.format != MAGIC || self.version != 1 {
            return Err(format!("not a version-1 {MAGIC} file"));
        }
        let dom = &self.patch.domain;
        dom.validate().map_err(|e| e.to_string())?;
        let n = dom.len();
        let len_ok = |what: &str, len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(format!("{what} has {len} entries, grid has {n}"))
            }
        };
        len_ok("points", self.patch.points.len())?;
        if let Some(f) = &self.patch.flat {
            len_ok("flat.spin", f.spin.len())?;
            len_ok("flat.frame", f.frame.len())?;
            len_ok("flat.mean_curvature", f.mean_curvature.len())?;
            len_ok("flat.alpha.a1", f.alpha.a1.len())?;
            len_ok("flat.alpha.a2", f.alpha.a2.len())?;
            if f.alpha.domain != *dom {
                return Err("flat.alpha.domain differs from the patch domain".into());
            }
        }
        if let Some(b) = &self.sl2 {
            len_ok("sl2", b.len())?;
        }
        match (&self.seed, &self.patch.flat, &self.sl2) {
            (SeedConfig::S21 { .. }, None, Some(_)) => Ok(()),
            (SeedConfig::S21 { .. }, _, _) => Err("s21 patch needs sl2 samples and no flat data".into()),
            (_, Some(_), None) => Ok(()),
            _ => Err("flat patch needs flat data and no sl2 samples".into()),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(Code::Io, format!("{}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_patch(dir: &Path) -> CliResult<PatchFile> {
    let path = dir.join(PATCH_FILE);
    if !path.is_file() {
        return Err(CliError::new(
            Code::Input,
            format!("{}: no patch file", path.display()),
        ));
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let file: PatchFile = serde_json::from_str(&text)
        .map_err(|e| CliError::new(Code::Input, format!("{}: {e}", path.display())))?;
    file.check()
        .map_err(|e| CliError::new(Code::Input, format!("{}: {e}", path.display())))?;
    Ok(file)
}
