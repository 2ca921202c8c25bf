use std::process::ExitCode;

use clap::{Parser, Subcommand};
use segrl::harness::{improvement_report, random_policy_baseline, run_experiment, run_training, RunArgs};

#[derive(Parser)]
#[command(version, about = "Train PPO agents on raw or segmented pixel observations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single training run.
    Train(RunArgs),
    /// Train a raw and a segmented agent and print the improvement row.
    Experiment(RunArgs),
    /// Measure the random-policy return distribution.
    Baseline {
        #[arg(long, default_value = "MiniCatch-v0")]
        env_id: String,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 47)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        frameskip: u32,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(args) => {
            let (config, outputs) = args.into_config()?;
            let run = run_training(&config, &outputs)?;
            let returns = run.metrics.episodic_returns();
            println!(
                "{} steps, {} updates, {} episodes, {:.1} sps, {:.1}s",
                run.global_step,
                run.updates,
                returns.len(),
                run.sps(),
                run.elapsed.as_secs_f64()
            );
            if !returns.is_empty() {
                let end = segrl::harness::ema_smooth(&returns, segrl::harness::EMA_FACTOR)?;
                println!("end result (EMA 0.99): {:.2}", end.last().unwrap());
            }
        }
        Command::Experiment(args) => {
            let (config, outputs) = args.into_config()?;
            let outcome = run_experiment(&config, outputs.out_dir.as_deref())?;
            let report = improvement_report(std::slice::from_ref(&outcome.pair));
            print!("{}", report.to_text());
            println!(
                "objects: {}, raw {:.1}s ({:.1} sps), segmented {:.1}s ({:.1} sps), overhead {:.2}x",
                outcome.objects.map_or("unknown", |o| o.as_str()),
                outcome.raw.elapsed.as_secs_f64(),
                outcome.raw.sps,
                outcome.segmented.elapsed.as_secs_f64(),
                outcome.segmented.sps,
                outcome.overhead()
            );
            if let Some(dir) = outputs.out_dir {
                std::fs::write(dir.join("report.csv"), report.to_csv()?)?;
                std::fs::write(dir.join("report.txt"), report.to_text())?;
            }
        }
        Command::Baseline { env_id, episodes, seed, frameskip } => {
            let stats = random_policy_baseline(&env_id, episodes, seed, frameskip)?;
            println!("{env_id}: mean {:.3}, std {:.3} over {episodes} episodes", stats.mean, stats.std);
        }
    }
    Ok(())
}
