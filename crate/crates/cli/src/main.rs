use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

use esqpt_lab::{run, Invocation, Subcommand};

#[derive(Parser)]
#[command(name = "esqpt-lab", version, about = "ESQPT spectra, gap scaling and OTOC scans for two-level boson models")]
enum Cli {
    /// Correlation energy diagram: scaled excitation energies against xi.
    Ced(Common),
    /// Inter-sector gaps against xi.
    GapsXi(Common),
    /// Inter-sector gaps against N with exponential and power-law fits.
    GapsN(Common),
    /// Band-head gaps of the 2D vibron model divided by l.
    Centrifugal(Common),
    /// Microcanonical OTOC over the eigenstates of one sector.
    OtocScan(Common),
    /// Mean-field and level-density estimates of the ESQPT energy.
    CriticalEnergy(Common),
    /// Block spectra against brute-force Fock-space diagonalization.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG figures.
    #[arg(long)]
    plots: bool,
    /// Worker threads.
    #[arg(long, env = "ESQPT_LAB_WORKERS")]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (subcommand, common) = match Cli::parse() {
        Cli::Ced(c) => (Subcommand::Ced, c),
        Cli::GapsXi(c) => (Subcommand::GapsXi, c),
        Cli::GapsN(c) => (Subcommand::GapsN, c),
        Cli::Centrifugal(c) => (Subcommand::Centrifugal, c),
        Cli::OtocScan(c) => (Subcommand::OtocScan, c),
        Cli::CriticalEnergy(c) => (Subcommand::CriticalEnergy, c),
        Cli::OracleCheck(c) => (Subcommand::OracleCheck, c),
    };
    if let Some(k) = common.workers {
        if k == 0 {
            eprintln!("{}", serde_json::json!({"error": {"kind": "validation", "message": "--workers must be positive", "subcommand": subcommand.name(), "exit_code": 2}}));
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let outcome = run(&Invocation {
        subcommand,
        config: common.config,
        out: common.out,
        plots: common.plots,
    });
    for line in &outcome.stdout {
        println!("{line}");
    }
    if let Some(record) = &outcome.error {
        eprintln!("{record}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
