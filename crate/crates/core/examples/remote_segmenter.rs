//! Runs a loopback segmentation service and trains against it over TCP.
//! The service uses the builtin segmenter, so the labels match in-process
//! segmentation exactly.

use std::net::TcpListener;

use anyhow::Result;
use segrl::harness::{run_training, RunConfig, RunOutputs};
use segrl::pipeline::SegmenterKind;
use segrl::proto::{builtin_handler, spawn_server, SegClient, SegClientConfig};
use segrl::segment::{segment_labels, SegmenterConfig};

fn main() -> Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let endpoint = listener.local_addr()?.to_string();
    spawn_server(listener, builtin_handler(SegmenterConfig::default()));
    println!("service listening on {endpoint}");

    let mut env = segrl::env::make_env(segrl::env::MINICATCH)?;
    let frame = env.reset(1);
    let mut client = SegClient::connect(SegClientConfig::new(&endpoint))?;
    let remote = client.segment(&frame)?;
    assert_eq!(remote, segment_labels(&frame, &SegmenterConfig::default())?);
    println!("reset frame: {} segments, identical to local", remote.segment_count());
    // The loopback service handles one connection at a time.
    drop(client);

    let mut config = RunConfig::default();
    config.ppo.total_timesteps = 512;
    config.pipeline.segmenter = SegmenterKind::Remote;
    config.pipeline.remote = Some(SegClientConfig::new(endpoint));
    let run = run_training(&config, &RunOutputs::default())?;
    println!("{} steps through the service at {:.1} sps", run.global_step, run.sps());
    Ok(())
}
