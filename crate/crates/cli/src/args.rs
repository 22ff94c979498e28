use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selectrelax::relax::{DEFAULT_MAX_ITER, DEFAULT_RESIDUAL_TOL};
use selectrelax::{CubicSpline, Parity, Potential, StencilKind, TimeStep};

use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "selectrelax", version, about = "Selective relaxation eigensolver for 1D Schrödinger operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relax to the eigenpair closest to one selecting energy
    Solve(SolveArgs),
    /// Tunneling splitting of the quartic double well
    Split(SplitArgs),
    /// Relax across a range of selecting energies and group the levels found
    Scan(ScanArgs),
    /// Follow one level over several lattice steps and fit the Δx² law
    Sweep(SweepArgs),
    /// Run a job described in a TOML file
    Run(RunArgs),
}

/// A named potential, remembered together with the text it was parsed from.
#[derive(Clone, Debug)]
pub struct PotentialArg {
    pub spec: String,
    pub potential: Potential,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Auto,
    Range(f64, f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
    #[default]
    None,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
            ParityArg::None => Parity::None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum StencilArg {
    Analytic,
    #[default]
    Factored,
}

impl From<StencilArg> for StencilKind {
    fn from(s: StencilArg) -> Self {
        match s {
            StencilArg::Analytic => StencilKind::Analytic,
            StencilArg::Factored => StencilKind::Factored,
        }
    }
}

/// Time stepping and stopping controls shared by every command.
#[derive(Clone, Debug, Args)]
pub struct SolverArgs {
    /// Time step: `auto` or a positive value
    #[arg(long, default_value = "auto", value_parser = parse_dt)]
    pub dt: TimeStep<f64>,

    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,

    /// Residual ‖(H - E_rel)ψ‖ below which an iterate counts as converged
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t)]
    pub stencil: StencilArg,
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct SolveArgs {
    /// morse:mu=M | dwell:lambda=L | harmonic:omega=W | table:FILE.csv
    #[arg(long, value_parser = parse_potential)]
    pub potential: PotentialArg,

    /// Selecting energy
    #[arg(long = "E", allow_hyphen_values = true)]
    pub energy: f64,

    #[arg(long)]
    pub dx: f64,

    /// `auto` or `lo,hi`
    #[arg(long, default_value = "auto", allow_hyphen_values = true, value_parser = parse_domain)]
    pub domain: Domain,

    #[arg(long, value_enum, default_value_t)]
    pub parity: ParityArg,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Also write the normalized wavefunction as `x,psi` CSV
    #[arg(long)]
    pub psi_out: Option<PathBuf>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SplitArgs {
    /// λ in V = -λx² + x⁴
    #[arg(long)]
    pub lambda: f64,

    #[arg(long, conflicts_with = "dx_list", required_unless_present = "dx_list")]
    pub dx: Option<f64>,

    /// Comma-separated lattice steps
    #[arg(long, value_delimiter = ',')]
    pub dx_list: Option<Vec<f64>>,

    /// Fit T_rel = a + b·Δx² over the list
    #[arg(long)]
    pub fit: bool,

    /// Selecting energy; defaults to a harmonic estimate of the doublet
    #[arg(long = "E", allow_hyphen_values = true)]
    pub energy: Option<f64>,

    /// `auto` or `lo,hi` (must be symmetric about 0)
    #[arg(long, default_value = "auto", allow_hyphen_values = true, value_parser = parse_domain)]
    pub domain: Domain,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Worker threads for lattice-step lists
    #[arg(long)]
    pub jobs: Option<usize>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_parser = parse_potential)]
    pub potential: PotentialArg,

    /// `lo,hi`
    #[arg(long = "E-range", allow_hyphen_values = true, value_parser = parse_pair)]
    pub e_range: (f64, f64),

    #[arg(long)]
    pub points: usize,

    #[arg(long)]
    pub dx: f64,

    #[arg(long, default_value = "auto", allow_hyphen_values = true, value_parser = parse_domain)]
    pub domain: Domain,

    #[arg(long, value_enum, default_value_t)]
    pub parity: ParityArg,

    /// Relative tolerance for grouping relaxed energies into one level
    #[arg(long, default_value_t = selectrelax::analysis::DEFAULT_CLUSTER_TOL)]
    pub cluster_tol: f64,

    #[command(flatten)]
    pub solver: SolverArgs,

    #[arg(long)]
    pub jobs: Option<usize>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_potential)]
    pub potential: PotentialArg,

    #[arg(long = "E", allow_hyphen_values = true)]
    pub energy: f64,

    /// At least three comma-separated lattice steps
    #[arg(long, value_delimiter = ',', required = true)]
    pub dx_list: Vec<f64>,

    #[arg(long, default_value = "auto", allow_hyphen_values = true, value_parser = parse_domain)]
    pub domain: Domain,

    #[arg(long, value_enum, default_value_t)]
    pub parity: ParityArg,

    #[command(flatten)]
    pub solver: SolverArgs,

    #[arg(long)]
    pub jobs: Option<usize>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub job: PathBuf,
}

pub fn parse_potential(s: &str) -> Result<PotentialArg, String> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected KIND:PARAMS, got `{s}`"))?;
    let param = |name: &str| -> Result<f64, String> {
        let (key, value) = rest.split_once('=').ok_or_else(|| format!("expected {kind}:{name}=VALUE"))?;
        if key.trim() != name {
            return Err(format!("unknown parameter `{key}` for {kind}, expected `{name}`"));
        }
        value.trim().parse::<f64>().map_err(|e| format!("{name}: {e}"))
    };
    let potential = match kind {
        "morse" => Potential::morse(param("mu")?),
        "dwell" => Potential::double_well(param("lambda")?),
        "harmonic" => Potential::harmonic(param("omega")?),
        "table" => Potential::Tabulated(CubicSpline::from_csv_path(rest).map_err(|e| e.to_string())?),
        other => return Err(format!("unknown potential `{other}` (morse, dwell, harmonic, table)")),
    };
    potential.validate().map_err(|e| e.to_string())?;
    Ok(PotentialArg { spec: s.to_string(), potential })
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
    if !(lo < hi) {
        return Err(format!("need lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

pub fn parse_domain(s: &str) -> Result<Domain, String> {
    if s == "auto" {
        return Ok(Domain::Auto);
    }
    parse_pair(s).map(|(lo, hi)| Domain::Range(lo, hi))
}

pub fn parse_dt(s: &str) -> Result<TimeStep<f64>, String> {
    if s == "auto" {
        return Ok(TimeStep::Auto);
    }
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("time step must be positive and finite, got {v}"));
    }
    Ok(TimeStep::Fixed(v))
}
