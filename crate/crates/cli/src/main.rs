mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, Target};

#[derive(Debug, Parser)]
#[command(name = "steplike", version, about = "Scattering and resonances for steplike potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficient table at given points.
    Scatter,
    /// Certified resonance list for a rectangle on one or all sheets.
    Resonances,
    /// Counting function N(r) and slope fit.
    Count,
    /// Residuals of the coefficient identities at random points.
    Identities,
    /// Growth of a coefficient along rays in the k-plane.
    Indicator,
    /// Round trip of the inverse-side formulas against forward data.
    InverseCheck,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Opts {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Potential file (JSON).
    #[arg(long, global = true)]
    pub potential: Option<PathBuf>,
    /// pp, pm, mp, mm (sign of Im r+, then Im r-), all, or sum.
    #[arg(long, global = true)]
    pub sheet: Option<String>,
    #[arg(long, global = true, num_args = 4, value_names = ["RE0", "RE1", "IM0", "IM1"], allow_negative_numbers = true)]
    pub rect: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    #[arg(long, global = true)]
    pub rmin: Option<f64>,
    /// Ratio of the geometric radius grid.
    #[arg(long, global = true)]
    pub ratio: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Truncation radius in the r+ plane for product reconstructions.
    #[arg(long = "truncation-K", global = true)]
    pub truncation_k: Option<f64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub allow_unresolved: bool,
    /// Uniform mesh step for continuous perturbations.
    #[arg(long, global = true)]
    pub ode_step: Option<f64>,
    /// Evaluation point `re,im` (repeatable).
    #[arg(long = "z", global = true, value_parser = parse_point, allow_negative_numbers = true)]
    pub points: Vec<[f64; 2]>,
    /// Boundary side for points on the cut: + or -.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub side: Option<String>,
    /// Random points per sheet.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Ray angle in (0, pi) (repeatable).
    #[arg(long, global = true)]
    pub phi: Vec<f64>,
    #[arg(long, global = true, value_enum)]
    pub target: Option<Target>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub zmin: Option<f64>,
    #[arg(long, global = true)]
    pub zmax: Option<f64>,
    /// Number of trace points.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Declare the potential a continuous perturbation of a step.
    #[arg(long, global = true)]
    pub a_priori_c0: bool,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected re,im, got `{s}`"))?;
    let re = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([re, im])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(err) => {
            let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            let body = serde_json::json!({ "error": chain.first(), "causes": &chain[1..] });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}
