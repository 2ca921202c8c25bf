//! Compares training throughput with and without builtin segmentation.

use anyhow::Result;
use segrl::harness::{run_training, RunConfig, RunOutputs};
use segrl::pipeline::SegmenterKind;

fn main() -> Result<()> {
    let steps = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(512);
    let mut sps = Vec::new();
    for kind in [SegmenterKind::None, SegmenterKind::Builtin] {
        let mut config = RunConfig::default();
        config.ppo.total_timesteps = steps;
        config.pipeline.segmenter = kind;
        let run = run_training(&config, &RunOutputs::default())?;
        println!("{kind:?}: {:.1} sps", run.sps());
        sps.push(run.sps());
    }
    println!("segmentation overhead {:.2}x", sps[0] / sps[1]);
    Ok(())
}
