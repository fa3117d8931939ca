use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cellfade_cli::{run, CliError, Command, Output, RunOptions, ScenarioConfig, EXIT_MISMATCH};

#[derive(Parser)]
#[command(name = "cellfade", version, about = "Coverage and cell-capacity statistics of Poisson cellular networks with fading")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Outage probability on a log-spaced threshold grid.
    OutageCurve(GridArgs),
    /// Mean, variance bounds and Monte Carlo moments of each cell capacity.
    CellStats(McArgs),
    /// Distribution of the ordered path-loss-fading values seen from a point.
    XiDist(GridArgs),
    /// Raw per-replication Monte Carlo output.
    Simulate(Common),
    /// Analytic values against Monte Carlo estimates; exits 4 if any |z| > 3.
    Compare(CompareArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Output directory; standard output when absent from both flag and file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the replication pool.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: Common,
    /// Analytic columns only.
    #[arg(long)]
    no_mc: bool,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    mc: McArgs,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, hide = true)]
    b_scale: Option<f64>,
}

fn options(common: &Common) -> RunOptions {
    RunOptions {
        seed: common.seed,
        replications: common.replications,
        threads: common.threads,
        ..Default::default()
    }
}

fn execute(cli: Cli) -> Result<Output, CliError> {
    let (command, common, opts) = match &cli.command {
        Sub::OutageCurve(g) | Sub::XiDist(g) => {
            let command = match cli.command {
                Sub::OutageCurve(_) => Command::OutageCurve,
                _ => Command::XiDist,
            };
            let opts = RunOptions {
                no_mc: g.mc.no_mc,
                t_min: g.t_min,
                t_max: g.t_max,
                points: g.points,
                ..options(&g.mc.common)
            };
            (command, &g.mc.common, opts)
        }
        Sub::CellStats(m) => (
            Command::CellStats,
            &m.common,
            RunOptions {
                no_mc: m.no_mc,
                ..options(&m.common)
            },
        ),
        Sub::Simulate(c) => (Command::Simulate, c, options(c)),
        Sub::Compare(c) => (
            Command::Compare,
            &c.common,
            RunOptions {
                b_scale: c.b_scale,
                ..options(&c.common)
            },
        ),
    };
    let config = ScenarioConfig::load(&common.config)?;
    let output = run(command, &config, &opts)?;
    match common.out.as_ref().or(config.output.directory.as_ref()) {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.csv", command.file_stem()));
            std::fs::write(&path, &output.csv)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(&output.csv)?,
    }
    Ok(output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(output) => {
            if let Some(report) = &output.report {
                eprint!("{report}");
            }
            if output.mismatch {
                ExitCode::from(EXIT_MISMATCH as u8)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
