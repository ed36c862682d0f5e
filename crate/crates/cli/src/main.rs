use std::path::PathBuf;
use std::process::ExitCode;

use blackboard_cli::{execute, Command, Format, RunConfig, EXIT_SUITE_FAILED};
use blackboard_core::distributions::{SigmaMode, ToyOverrides, Variant};
use blackboard_core::protocols::ProtocolSpec;
use blackboard_core::verify::Suite;
use blackboard_core::Exec;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "blackboard", version, about = "Shared-blackboard protocol simulator and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a hard instance and write it as JSON.
    Gen(Common),
    /// Run a protocol repeatedly and report its success.
    Run(Common),
    /// Run a verification suite.
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Mis,
    Apx,
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaArg {
    Full,
    Blocks,
    Identity,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    r: Option<usize>,
    /// Fooling blocks per level, comma separated; one value is reused.
    #[arg(long = "toy-f", value_delimiter = ',')]
    toy_f: Vec<u64>,
    /// Principal blocks per level, comma separated; one value is reused.
    #[arg(long = "toy-p", value_delimiter = ',')]
    toy_p: Vec<u64>,
    #[arg(long = "sigma-mode", value_enum, default_value = "blocks")]
    sigma_mode: SigmaArg,
    /// NAME[:PARAMS], e.g. luby:12, xor:fooling_xor, bipartite:greedy.
    #[arg(long)]
    protocol: Option<ProtocolSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// base-cases, structure, infotheory, embedding or all.
    #[arg(long)]
    suite: Option<Suite>,
    /// Instance or graph JSON file for `run`.
    #[arg(long)]
    instance: Option<PathBuf>,
}

fn config(command: Command, a: Common) -> RunConfig {
    let toy = (!a.toy_f.is_empty() || !a.toy_p.is_empty()).then_some(ToyOverrides { f: a.toy_f, p: a.toy_p });
    RunConfig {
        command,
        variant: a.variant.map(|v| match v {
            VariantArg::Mis => Variant::Mis,
            VariantArg::Apx => Variant::Apx,
        }),
        k: a.k,
        r: a.r,
        toy,
        sigma_mode: match a.sigma_mode {
            SigmaArg::Full => SigmaMode::Full,
            SigmaArg::Blocks => SigmaMode::Blocks,
            SigmaArg::Identity => SigmaMode::Identity,
        },
        protocol: a.protocol,
        seed: a.seed,
        trials: a.trials,
        format: match a.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        },
        out: a.out,
        suite: a.suite,
        instance: a.instance,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command {
        Cmd::Gen(a) => config(Command::Gen, a),
        Cmd::Run(a) => config(Command::Run, a),
        Cmd::Verify(a) => config(Command::Verify, a),
    };
    let outcome = match execute(&cfg, Exec::default()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.body) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.body);
            eprintln!("{}", outcome.summary);
        }
    }
    if outcome.failed {
        ExitCode::from(EXIT_SUITE_FAILED as u8)
    } else {
        ExitCode::SUCCESS
    }
}
