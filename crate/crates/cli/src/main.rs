use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jeffreys_cli::commands::{
    self, divergence_json, DivergenceArgs, MethodChoice, RunArgs, SweepArgs,
};
use jeffreys_cli::Failure;
use jeffreys_core::Side;

#[derive(Parser)]
#[command(
    name = "jeffreys",
    version,
    about = "Games of prediction and Sceptic strategies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one seed of a scenario and write its trace and report.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        #[arg(long)]
        report_json: Option<PathBuf>,
    },
    /// Play many seeds in parallel and write an aggregate report.
    Sweep {
        config: PathBuf,
        /// Comma-separated seeds, overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        aggregate_json: Option<PathBuf>,
    },
    /// Print an alpha-divergence between two predictions as one JSON line.
    Divergence {
        #[arg(long)]
        game: String,
        #[arg(long, allow_hyphen_values = true)]
        g1: String,
        #[arg(long, allow_hyphen_values = true)]
        g2: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Lower)]
        side: SideArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        grid_size: Option<usize>,
        /// Prediction window `lo,hi` for unbounded games.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        /// Number of outcomes for log-loss.
        #[arg(long)]
        outcomes: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Lower,
    Upper,
    Standard,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Closed,
    Numeric,
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            seed,
            trace_csv,
            report_json,
        } => commands::run(&RunArgs {
            config,
            seed,
            trace_csv,
            report_json,
        })
        .map(drop),
        Command::Sweep {
            config,
            seeds,
            aggregate_json,
        } => commands::sweep(&SweepArgs {
            config,
            seeds,
            aggregate_json,
        })
        .map(drop),
        Command::Divergence {
            game,
            g1,
            g2,
            alpha,
            side,
            method,
            tol,
            grid_size,
            window,
            outcomes,
        } => {
            let args = DivergenceArgs {
                game,
                g1,
                g2,
                alpha,
                side: match side {
                    SideArg::Lower => Side::Lower,
                    SideArg::Upper => Side::Upper,
                    SideArg::Standard => Side::Standard,
                },
                method: match method {
                    MethodArg::Auto => MethodChoice::Auto,
                    MethodArg::Closed => MethodChoice::Closed,
                    MethodArg::Numeric => MethodChoice::Numeric,
                },
                tol,
                grid_size,
                window: window.map(|w| (w[0], w[1])),
                outcomes,
            };
            let d = commands::divergence(&args)?;
            println!("{}", divergence_json(&args.game, &d));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code())
        }
    }
}
