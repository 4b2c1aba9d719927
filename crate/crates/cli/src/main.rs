use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coopscatter_cli::commands::{command_defaults, run};
use coopscatter_cli::config::RunConfig;
use coopscatter_cli::{write_outputs, CliError};

#[derive(Parser)]
#[command(name = "coopscatter", version, about = "Cooperative scattering from atomic lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// R, T, Δ and Γ against lattice spacing at fixed incidence.
    SweepLattice(Common),
    /// Reflectance over (a, δ) at normal incidence.
    MapDetuning(Common),
    /// Polarization-resolved R and T over the light cone.
    AngleMap(Common),
    /// Collective bands along Γ-X-M-Γ.
    Bands(Common),
    /// Finite array driven by a Gaussian beam.
    Beam(Common),
    /// Ensemble of randomly displaced arrays.
    Disorder(Common),
    /// Single-photon saturation estimate.
    Saturation(Common),
    /// Kramers-Kronig reconstruction of Δ at normal incidence.
    KkCheck(Common),
}

#[derive(Args, Default)]
struct Common {
    /// Config file (flat `key = value` or JSON); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; a `.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    a: Option<String>,
    /// Detuning in γ, or `resonance`.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    gamma_nr: Option<String>,
    /// Polar angle in degrees.
    #[arg(long)]
    theta: Option<String>,
    /// Azimuth in degrees.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// p, s, x or y.
    #[arg(long)]
    pol: Option<String>,
    /// Beam waist in λ, or `auto`.
    #[arg(long)]
    waist: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    ny: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Further parameters as key=value (e.g. --set a-step=0.01).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::SweepLattice(c) => ("sweep-lattice", c),
            Command::MapDetuning(c) => ("map-detuning", c),
            Command::AngleMap(c) => ("angle-map", c),
            Command::Bands(c) => ("bands", c),
            Command::Beam(c) => ("beam", c),
            Command::Disorder(c) => ("disorder", c),
            Command::Saturation(c) => ("saturation", c),
            Command::KkCheck(c) => ("kk-check", c),
        }
    }
}

fn configure(name: &str, c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = command_defaults(name);
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path)?;
        cfg.apply_text(&text)?;
        cfg.command = name.to_string();
    }
    let flags = [
        ("a", &c.a),
        ("delta", &c.delta),
        ("gamma_nr", &c.gamma_nr),
        ("theta", &c.theta),
        ("phi", &c.phi),
        ("pol", &c.pol),
        ("waist", &c.waist),
        ("nx", &c.nx),
        ("ny", &c.ny),
        ("tol", &c.tol),
        ("seed", &c.seed),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        if k.trim() == "command" {
            return Err(CliError::Config("the command is chosen by the subcommand".into()));
        }
        cfg.set(k, v)?;
    }
    cfg.out = c.out.clone();
    cfg.jobs = c.jobs;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<usize, CliError> {
    let (name, common) = cli.command.parts();
    let cfg = configure(name, common)?;
    cfg.validate()?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    }
    let table = run(&cfg)?;
    match &cfg.out {
        Some(path) => write_outputs(&table, &cfg, path)?,
        None => print!("{}", table.to_csv()),
    }
    Ok(table.failures())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} grid points failed; see the status column");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
