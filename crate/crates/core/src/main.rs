use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use admissible_flow::cli::{cmd_analyze, cmd_flow, cmd_gqe, cmd_sweep, read_config, AppError};
use admissible_flow::config::RunConfig;

#[derive(Parser)]
#[command(name = "admissible-flow", version, about = "Reduced Kähler-Ricci flow on admissible bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class invariants, k0, profile checks and the decay condition.
    Analyze(Common),
    /// Writes the GQE profile on the grid.
    Gqe(Common),
    /// Integrates the reduced flow.
    Flow(Common),
    /// Analyzes and flows each x-scale listed in the config.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides grid.n.
    #[arg(long)]
    n: Option<usize>,
    /// Overrides flow.t_end.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, AppError> {
        let mut config = read_config(&self.config)?;
        if let Some(n) = self.n {
            config.flow.n = n;
        }
        if let Some(t) = self.t_end {
            config.flow.t_end = t;
        }
        config.flow.validate()?;
        Ok(config)
    }
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Analyze(c) => {
            let text = cmd_analyze(&c.load()?, &c.out)?;
            print!("{text}");
        }
        Command::Gqe(c) => {
            let path = cmd_gqe(&c.load()?, &c.out)?;
            println!("wrote {}", path.display());
        }
        Command::Flow(c) => {
            let outcome = cmd_flow(&c.load()?, &c.out)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let s = &outcome.summary;
            println!(
                "converged {} at t = {} after {} steps, sup|phi| = {:e}",
                s.converged, s.t_final, s.steps, s.sup_phi_final
            );
            match s.decay_rate {
                Some(r) => println!("decay rate {r}"),
                None => println!("decay rate undefined"),
            }
        }
        Command::Sweep(c) => {
            let rows = cmd_sweep(&c.load()?, &c.out)?;
            println!("wrote {} rows to {}", rows.len(), c.out.join("sweep.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
