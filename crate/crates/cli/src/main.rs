use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use relaysim::commands::{default_out_dir, parse_axis, seed_offset_from_env};
use relaysim::{cmd_oracle, cmd_run, cmd_sweep, CliError, PolicySelection, RunOptions};

#[derive(Parser, Debug)]
#[command(version, about = "Relay-enhanced OFDMA downlink scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a seed batch for one or both policies.
    Run(CommonArgs),
    /// Repeat the batch over a range of relay or user counts.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// `relays` or `users`.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long)]
        values: String,
    },
    /// Check both policies on the two-user reference example.
    Oracle,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Scenario file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// variance, maxsnr or both.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    slots: Option<usize>,
    /// Seed list, e.g. `1..20` or `1,5,9`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the allocation constraints in every slot.
    #[arg(long)]
    verify: bool,
}

impl CommonArgs {
    fn into_options(self) -> Result<RunOptions, CliError> {
        Ok(RunOptions {
            config: self.config,
            policy: self.policy.as_deref().map(str::parse::<PolicySelection>).transpose()?,
            slots: self.slots,
            seeds: self.seeds,
            out: self.out.unwrap_or_else(|| default_out_dir().to_path_buf()),
            verify: self.verify,
            seed_offset: seed_offset_from_env()?,
        })
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let bundle = cmd_run(&args.into_options()?)?;
            for path in [bundle.per_slot_csv, bundle.summary_json].into_iter().flatten() {
                println!("wrote {}", path.display());
            }
        }
        Command::Sweep { common, axis, values } => {
            let axis = parse_axis(&axis)?;
            let bundle = cmd_sweep(&common.into_options()?, axis, &values)?;
            if let Some(path) = bundle.sweep_csv {
                println!("wrote {}", path.display());
            }
        }
        Command::Oracle => {
            let report = cmd_oracle()?;
            println!("variance: {}, maxsnr: {}", report.variance, report.maxsnr);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
