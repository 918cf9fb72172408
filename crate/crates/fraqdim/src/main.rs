use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fraqdim::commands::{self, Outcome};
use fraqdim::{Experiment, ExperimentConfig};
use fraqdim_core::symbolic::AntichainKind;

#[derive(Parser)]
#[command(name = "fraqdim", version, about = "Quantization and local dimensions of recurrent IFS measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replaces every configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, env = "FRAQDIM_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary vector of the transition matrix.
    Stationary,
    /// Point clouds approximating the attractor components.
    Attractor,
    /// Chaos-game trajectory.
    Sample,
    /// Finite maximal antichain(s).
    Antichain {
        /// Threshold; defaults to the configured list.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value_t = Kind::Probability)]
        kind: Kind,
    },
    /// Quantization curve and codebooks.
    Quantize {
        /// Comma-separated budgets; overrides the config.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Dimension bounds and estimates.
    Dims,
    /// Runs every validator and prints a pass/fail table.
    Verify,
    /// Writes every artifact into the output directory.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Probability,
    Contraction,
}

fn run(cli: Cli) -> Result<Outcome> {
    let Some(path) = cli.config else { bail!("--config is required") };
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Command::Quantize { n_list: Some(ns) } = &cli.command {
        if ns.is_empty() || ns.contains(&0) {
            bail!("--n-list: budgets must be positive");
        }
        cfg.quantization.n_list = ns.clone();
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let mut exp = Experiment::new(cfg)?;
    let dir = commands::out_dir(&exp, cli.out.as_deref())?;
    match cli.command {
        Command::Stationary => {
            for q in commands::stationary(&exp, &dir)? {
                println!("{q:.17}");
            }
        }
        Command::Attractor => commands::attractor(&exp, &dir)?,
        Command::Sample => commands::sample(&exp, &dir)?,
        Command::Antichain { eps, kind } => {
            let eps = eps.map_or_else(|| exp.config.antichain.eps.clone(), |e| vec![e]);
            let kind = match kind {
                Kind::Probability => AntichainKind::Probability,
                Kind::Contraction => AntichainKind::Contraction,
            };
            for (e, n) in eps.iter().zip(commands::antichain(&exp, &dir, &eps, kind)?) {
                println!("eps={e} words={n}");
            }
        }
        Command::Quantize { .. } => {
            let outcome = commands::quantize(&mut exp, &dir)?;
            for e in &exp.curve()?.entries {
                println!("n={} e={:.6} [{:.6}, {:.6}]", e.n, e.e_best, e.enclosure.lo, e.enclosure.hi);
            }
            return Ok(outcome);
        }
        Command::Dims => {
            commands::dims(&mut exp, &dir)?;
            let rep = exp.dimension_report()?;
            println!("alpha1={:.6} alpha2={:.6}", rep.alpha1, rep.alpha2);
            if let Some(d) = rep.d_estimate {
                println!("D={:.6} stderr={:.2e}", d.d, d.stderr);
            }
        }
        Command::Verify | Command::Report => {
            let table = if matches!(cli.command, Command::Report) {
                commands::report(&mut exp, &dir)?
            } else {
                commands::verify(&mut exp, &dir)?
            };
            print!("{table}");
            if table.failed() {
                return Ok(Outcome::ValidationFailed);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
