use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use harmext_cli::config::{JobConfig, PointsSpec, Stage};
use harmext_cli::{run, CliError};

#[derive(Parser)]
#[command(name = "harmext", version, about = "Exterior harmonic extension of planar boundary data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Job file (JSON, or TOML with a .toml extension).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the job file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the stages listed under `outputs` in the job file.
    Run(Common),
    /// Distance profile and d*.
    Analyze(Common),
    /// Curve Hilbert transform of the normal data.
    Hilbert(Common),
    /// Compatibility diagnostic.
    Compat(Common),
    /// Field evaluation on a point set.
    Extend {
        #[command(flatten)]
        common: Common,
        /// CSV with header x,y; overrides the job file.
        #[arg(long)]
        points: Option<PathBuf>,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HC_THREADS") {
        let n: usize = v.parse().with_context(|| format!("HC_THREADS={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (common, stages, points) = match cli.command {
        Command::Run(c) => (c, None, None),
        Command::Analyze(c) => (c, Some(Stage::Analyze), None),
        Command::Hilbert(c) => (c, Some(Stage::Hilbert), None),
        Command::Compat(c) => (c, Some(Stage::Compat), None),
        Command::Extend { common, points } => (common, Some(Stage::Extend), points),
    };
    let mut cfg = JobConfig::load(&common.config)?;
    if let Some(path) = points {
        cfg.points = Some(PointsSpec::Csv { path });
    }
    let stages = stages.map_or_else(|| cfg.outputs.clone(), |s| vec![s]);
    let out = common.out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("harmext-out"));
    let outcome = run(&cfg, &stages, &out)?;
    let r = &outcome.report;
    if let Some(c) = &r.compatibility {
        println!("compat: verdict {:?}, rho {:.6e}, strip width {:.6e}", c.verdict, c.rho, c.strip_width);
    }
    if let Some(h) = &r.hilbert {
        println!("hilbert: {} nodes, max |Hh| {:.6e}", h.grid, h.max_abs);
    }
    if let Some(d) = &r.distance {
        println!("analyze: d* = {:.12e} (inf d = {:.12e} at t = {:.6}, l* = {:e})", d.d_star, d.d_inf, d.argmin_t, d.l_star);
    }
    if let Some(e) = &r.extension {
        println!("extend: {} points, {} certified, max certified error {:.3e}", e.points, e.certified, e.max_certified_error);
    }
    for w in &r.warnings {
        eprintln!("warning [{}]: {}", w.stage, w.message);
    }
    println!("outputs written to {}", outcome.out_dir.display());
    Ok(r.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(3);
    }
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
