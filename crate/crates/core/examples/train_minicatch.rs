//! Trains a PPO agent with the full set of training flags.
//!
//! cargo run --release --example train_minicatch -- --total-timesteps 4096 --segmenter builtin

use anyhow::Result;
use clap::Parser;
use segrl::harness::{ema_smooth, run_training, RunArgs, EMA_FACTOR};

#[derive(Parser)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
}

fn main() -> Result<()> {
    let (config, outputs) = Cli::parse().run.into_config()?;
    println!("{}", config.to_json());
    let run = run_training(&config, &outputs)?;
    let returns = run.metrics.episodic_returns();
    println!(
        "{} updates, {} steps, {} episodes, {:.1} sps",
        run.updates,
        run.global_step,
        returns.len(),
        run.sps()
    );
    if let Some(last) = ema_smooth(&returns, EMA_FACTOR).ok().and_then(|s| s.last().copied()) {
        println!("EMA end result: {last:.2}");
    }
    Ok(())
}
