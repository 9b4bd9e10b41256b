//! Run configuration: a JSON file whose fields can each be overridden on the
//! command line. Everything is validated before any computation starts.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use steplike::riemann::SheetSignature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[value(name = "r-")]
    #[serde(rename = "r-")]
    RMinus,
    #[value(name = "r+")]
    #[serde(rename = "r+")]
    RPlus,
    #[value(name = "t-")]
    #[serde(rename = "t-")]
    TMinus,
    #[value(name = "t+")]
    #[serde(rename = "t+")]
    TPlus,
    /// `R-(z) R-(w- z)`.
    #[value(name = "r-prod")]
    #[serde(rename = "r-prod")]
    RMinusProduct,
}

/// Contents of a `--config` file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PathBuf>,
    pub sheet: Option<String>,
    pub rect: Option<[f64; 4]>,
    pub tol: Option<f64>,
    pub rmax: Option<f64>,
    pub rmin: Option<f64>,
    pub ratio: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub truncation_k: Option<f64>,
    pub threads: Option<usize>,
    pub allow_unresolved: Option<bool>,
    pub ode_step: Option<f64>,
    pub points: Option<Vec<[f64; 2]>>,
    pub side: Option<String>,
    pub samples: Option<usize>,
    pub phi: Option<Vec<f64>>,
    pub target: Option<Target>,
    pub zmin: Option<f64>,
    pub zmax: Option<f64>,
    pub grid: Option<usize>,
    pub a_priori_c0: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("config {} does not match the schema", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Field-level checks that do not depend on the command.
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.sheet {
            parse_sheet_choice(s)?;
        }
        if let Some(r) = self.rect {
            check_rect(r)?;
        }
        positive("tol", self.tol)?;
        positive("rmax", self.rmax)?;
        positive("rmin", self.rmin)?;
        positive("truncation_k", self.truncation_k)?;
        positive("ode_step", self.ode_step)?;
        if let Some(q) = self.ratio {
            if !(q > 1.0) {
                bail!("ratio must exceed 1, got {q}");
            }
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        if let Some(s) = &self.side {
            parse_side(s)?;
        }
        if let Some(phis) = &self.phi {
            for &p in phis {
                if !(p > 0.0 && p < std::f64::consts::PI) {
                    bail!("phi must lie in (0, pi), got {p}");
                }
            }
        }
        if let Some(pts) = &self.points {
            if pts.iter().flatten().any(|x| !x.is_finite()) {
                bail!("points must be finite");
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => bail!("{name} must be positive and finite, got {x}"),
        _ => Ok(()),
    }
}

pub fn check_rect(r: [f64; 4]) -> Result<()> {
    if r.iter().any(|x| !x.is_finite()) {
        bail!("rect must be finite");
    }
    if r[0] > r[1] || r[2] > r[3] {
        bail!("rect must be given as re0 re1 im0 im1 with re0 <= re1 and im0 <= im1");
    }
    Ok(())
}

/// A sheet name, `all`, or (for counting) `sum`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SheetChoice {
    One(SheetSignature),
    All,
    Sum,
}

pub fn parse_sheet_choice(s: &str) -> Result<SheetChoice> {
    match s {
        "all" => Ok(SheetChoice::All),
        "sum" => Ok(SheetChoice::Sum),
        _ => Ok(SheetChoice::One(
            SheetSignature::parse(s).with_context(|| format!("unknown sheet `{s}` (pp, pm, mp, mm, all, sum)"))?,
        )),
    }
}

pub fn parse_side(s: &str) -> Result<steplike::riemann::Sign> {
    match s {
        "+" | "plus" | "upper" => Ok(steplike::riemann::Sign::Plus),
        "-" | "minus" | "lower" => Ok(steplike::riemann::Sign::Minus),
        _ => bail!("side must be + or -, got `{s}`"),
    }
}
