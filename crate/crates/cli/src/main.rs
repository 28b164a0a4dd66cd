use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mplp::mpp_core::Resolution;
use mplp_cli::{cmd_eval, cmd_partition, cmd_plot_data, parse_box, parse_theta, CliError, InputKind, RunConfig};

#[derive(Parser)]
#[command(name = "mplp", version, about = "Multi-parametric LP partitioner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lp,
    Fba,
}

#[derive(Clone, Copy, ValueEnum)]
enum Resolve {
    None,
    Lex,
    Eqcost,
    Qp,
}

#[derive(Subcommand)]
enum Command {
    /// Partition the parameter box into critical regions.
    Partition {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "lp")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "eqcost")]
        resolve: Resolve,
        /// Auxiliary cost on the original variables for `--resolve lex`; repeat for more levels.
        #[arg(long = "lex-cost", allow_hyphen_values = true)]
        lex_cost: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Parameter box as `lo1,lo2:hi1,hi2`.
        #[arg(long = "box", allow_hyphen_values = true)]
        param_box: Option<String>,
        #[arg(long)]
        tol_zero: Option<f64>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a stored partition at one parameter value.
    Eval {
        partition: PathBuf,
        /// Comma-separated parameter vector.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
    },
    /// Region polygons for two-parameter partitions.
    PlotData {
        partition: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Partition { input, kind, resolve, lex_cost, seed, param_box, tol_zero, workers, out } => {
            let resolution = match resolve {
                Resolve::None => Resolution::None,
                Resolve::Eqcost => Resolution::EqCost,
                Resolve::Qp => Resolution::Qp,
                Resolve::Lex => {
                    if lex_cost.is_empty() {
                        return Err(CliError::Input("--resolve lex needs at least one --lex-cost".into()));
                    }
                    Resolution::Lex(lex_cost.iter().map(|s| parse_theta(s)).collect::<Result<_, _>>()?)
                }
            };
            let cfg = RunConfig {
                input,
                kind: match kind {
                    Kind::Lp => InputKind::GeneralLp,
                    Kind::Fba => InputKind::FbaModel,
                },
                param_box: param_box.as_deref().map(parse_box).transpose()?,
                resolution,
                seed,
                tol_zero,
                out: out.clone(),
                workers,
            };
            let run = cmd_partition(&cfg)?;
            if out.is_none() {
                print!("{}", run.json);
            }
            let f = &run.file;
            eprintln!("{} regions, {} infeasible, {} unresolved", f.regions.len(), f.infeasible.len(), f.unresolved.len());
            Ok(if run.complete { 0 } else { 2 })
        }
        Command::Eval { partition, theta } => {
            print!("{}", cmd_eval(&partition, &theta)?);
            Ok(0)
        }
        Command::PlotData { partition, out } => {
            let text = cmd_plot_data(&partition)?;
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
