use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "nentire", version, about = "Spectral diagnostics for perturbed Bessel operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Eigenvalues, norming constants and tail fit.
    Eigs(EigsArgs),
    /// Weyl function samples, residues and Stieltjes recovery.
    Weyl(WeylArgs),
    /// L² ladder of the Weyl solution jets and the minimal n.
    Nentire(NentireArgs),
    /// A single identity check.
    Verify(VerifyArgs),
    /// Conditions (C1)-(C3) for a pair of boundary angles.
    Cconds(CcondsArgs),
    /// Reproducing kernel by quadrature and by the E-formula.
    Kernel(KernelArgs),
    /// Markdown summary of a run directory.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eigs(_) => "eigs",
            Command::Weyl(_) => "weyl",
            Command::Nentire(_) => "nentire",
            Command::Verify(_) => "verify",
            Command::Cconds(_) => "cconds",
            Command::Kernel(_) => "kernel",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct Common {
    /// Problem file (JSON) or `builtin:<name>`.
    #[arg(long)]
    pub problem: String,
    /// Output directory; runs are appended to `<out>/runs.jsonl`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Tolerance overrides (JSON).
    #[arg(long)]
    pub tol: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct EigsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Stop at this eigenvalue instead of a fixed count.
    #[arg(long)]
    pub lmax: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct WeylArgs {
    #[command(flatten)]
    pub common: Common,
    /// Sample points, one `re,im` pair per line; default is a line above the axis.
    #[arg(long)]
    pub z_grid: Option<PathBuf>,
    /// Gauge `{"g": [...], "f": [...]}` applied to an extra column.
    #[arg(long)]
    pub gauge: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct NentireArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub jmax: usize,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub z: String,
    /// Atoms used for the moment test.
    #[arg(long, default_value_t = 60)]
    pub count: usize,
    /// Also write the regular solution jets at z.
    #[arg(long)]
    pub dump_jets: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    Mf1,
    Mf2,
    Mf3,
    Trace,
    Kernel,
    Parseval,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub identity: Identity,
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub z: String,
    /// Second spectral parameter for two-point identities.
    #[arg(long, default_value = "0.5+0.5i", allow_hyphen_values = true)]
    pub w: String,
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    /// Atom index (1-based) for mf3.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long)]
    pub dump_jets: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct CcondsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub count: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pairs `re_w,im_w,re_z,im_z` per line; default is 20 seeded random pairs.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    pub run_dir: PathBuf,
}
