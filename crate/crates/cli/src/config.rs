//! Run configuration. See `docs/config.md` for the schema.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spinorsurf::seeddomain::{FlatSeed, GridDomain, SeedArc, SeedR31, SeedS21};
use spinorsurf::synth::SweepOrder;

use crate::error::{CliError, CliResult, Code};
use crate::export::{Format, Projection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: GridDomain,
    pub seed: SeedConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Seed expressions, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SeedConfig {
    R31 {
        f1: String,
        f2: String,
        h1: String,
        h2: String,
    },
    Arc {
        psi: String,
        h1: String,
        h2: String,
    },
    S21 {
        theta: String,
        omega: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Also synthesize on the grid refined by this factor (at least 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<usize>,
    #[serde(default)]
    pub order: SweepOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Extra files written next to `patch.json`: `csv`, `obj`.
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
    /// Projection used for `obj` output.
    #[serde(default = "default_projection")]
    pub projection: String,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

fn default_projection() -> String {
    "drop-x1".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            formats: default_formats(),
            projection: default_projection(),
        }
    }
}

/// A seed with every expression parsed.
pub enum Seed {
    Flat(FlatSeed),
    S21(SeedS21),
}

impl SeedConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            SeedConfig::R31 { .. } => "r31",
            SeedConfig::Arc { .. } => "arc",
            SeedConfig::S21 { .. } => "s21",
        }
    }

    pub fn parse(&self) -> CliResult<Seed> {
        let field = |name: &str, src: &str, mode| {
            spinorsurf::holoexpr::parse(src, mode)
                .map(|_| ())
                .map_err(|e| CliError::new(Code::Input, format!("seed.{name} = {src:?}: {e}")))
        };
        use spinorsurf::holoexpr::Mode::{Analytic, RealSmooth};
        Ok(match self {
            SeedConfig::R31 { f1, f2, h1, h2 } => {
                field("f1", f1, Analytic)?;
                field("f2", f2, Analytic)?;
                field("h1", h1, RealSmooth)?;
                field("h2", h2, RealSmooth)?;
                Seed::Flat(SeedR31::parse(f1, f2, h1, h2)?.into())
            }
            SeedConfig::Arc { psi, h1, h2 } => {
                field("psi", psi, Analytic)?;
                field("h1", h1, RealSmooth)?;
                field("h2", h2, RealSmooth)?;
                Seed::Flat(SeedArc::parse(psi, h1, h2)?.into())
            }
            SeedConfig::S21 { theta, omega } => {
                field("theta", theta, Analytic)?;
                field("omega", omega, Analytic)?;
                Seed::S21(SeedS21::parse(theta, omega)?)
            }
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::new(Code::Input, format!("{}: {e}", path.display()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not need the grid: domain shape, refine
    /// factor, output formats and projection. Expressions are checked by
    /// [`SeedConfig::parse`].
    pub fn validate(&self) -> CliResult<()> {
        self.domain
            .validate()
            .map_err(|e| CliError::from(e).context("domain"))?;
        if let Some(k) = self.integrator.refine {
            if k < 2 {
                return Err(CliError::new(
                    Code::Input,
                    format!("integrator.refine must be at least 2, got {k}"),
                ));
            }
            self.domain
                .refine(k)
                .map_err(|e| CliError::from(e).context("integrator.refine"))?;
        }
        for f in &self.output.formats {
            f.parse::<Format>()
                .map_err(|e| CliError::new(Code::Input, format!("output.formats: {e}")))?;
        }
        self.output
            .projection
            .parse::<Projection>()
            .map_err(|e| CliError::new(Code::Input, format!("output.projection: {e}")))?;
        Ok(())
    }
}
