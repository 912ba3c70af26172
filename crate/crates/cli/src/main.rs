use clap::Parser;
use evoguide_cli::commands;
use evoguide_cli::opts::{Cli, Command};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => commands::run::main(args),
        Command::Aggregate(args) => commands::aggregate::main(args),
        Command::AblatePredictor(args) => commands::ablate::main(args),
        Command::OracleSweep(args) => commands::oracle_sweep::main(args),
        Command::HillclimbCheck(args) => commands::hillclimb::main(args),
        Command::Counterfactual(args) => commands::counterfactual::main(args),
    }
}
