use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dump_frame, HarnessError, MetricsLog, RunConfig, RunOutputs};
use crate::env::{make_env, Env, EnvError};
use crate::nn::{AdamState, NetShape, PolicyValueNet};
use crate::pipeline::Pipeline;
use crate::ppo::{compute_gae, ppo_update, RolloutCollector};

/// Result of a completed training run.
#[derive(Debug)]
pub struct TrainingRun {
    pub config: RunConfig,
    pub metrics: MetricsLog,
    pub net: PolicyValueNet<f32>,
    pub updates: u64,
    pub global_step: u64,
    pub elapsed: Duration,
    /// Where the final parameters were saved, if an output directory was set.
    pub params_path: Option<PathBuf>,
}

impl TrainingRun {
    /// Environment steps per second over the whole run.
    pub fn sps(&self) -> f64 {
        self.global_step as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

/// Runs collect, advantage and update cycles until the step budget is spent.
///
/// Network initialization, action sampling and minibatch shuffling all draw
/// from one ChaCha8 stream seeded with `config.seed`; episode `i` resets the
/// environment with `seed + i`. On error, metrics gathered so far are flushed
/// before the error is returned.
pub fn run_training(config: &RunConfig, outputs: &RunOutputs) -> Result<TrainingRun, HarnessError> {
    run_training_with(config, outputs, &make_env)
}

/// Builds environments by id.
pub type EnvFactory<'a> = &'a dyn Fn(&str) -> Result<Box<dyn Env>, EnvError>;

/// [`run_training`] with a caller-supplied environment constructor.
pub fn run_training_with(
    config: &RunConfig,
    outputs: &RunOutputs,
    factory: EnvFactory<'_>,
) -> Result<TrainingRun, HarnessError> {
    config.validate()?;
    let env = factory(&config.env_id)?;
    if let Some(dir) = &outputs.out_dir {
        std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        let path = dir.join("config.json");
        std::fs::write(&path, config.to_json()).map_err(HarnessError::io(path))?;
    }
    if let Some(dir) = &outputs.frames_out {
        std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    }
    let mut metrics = match outputs.metrics_path() {
        Some(path) => MetricsLog::to_file(&path)?,
        None => MetricsLog::in_memory(),
    };
    let result = train_loop(config, outputs, env, &mut metrics);
    let finished = metrics.finish();
    let (net, updates, global_step, elapsed) = result?;
    finished?;

    let params_path = match &outputs.out_dir {
        Some(dir) => {
            let path = dir.join("params.bin");
            let file = std::fs::File::create(&path).map_err(HarnessError::io(&path))?;
            net.save(std::io::BufWriter::new(file)).map_err(HarnessError::io(&path))?;
            Some(path)
        }
        None => None,
    };
    Ok(TrainingRun { config: config.clone(), metrics, net, updates, global_step, elapsed, params_path })
}

type LoopResult = (PolicyValueNet<f32>, u64, u64, Duration);

fn train_loop(
    config: &RunConfig,
    outputs: &RunOutputs,
    env: Box<dyn Env>,
    metrics: &mut MetricsLog,
) -> Result<LoopResult, HarnessError> {
    let hyper = &config.ppo;
    let actions = env.action_count();
    let pipeline = Pipeline::build(env, config.pipeline.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut shape = NetShape::atari(actions);
    shape.in_channels = config.pipeline.stack_depth;
    let mut net = PolicyValueNet::<f32>::new(shape, &mut rng)?;
    let mut optimizer = AdamState::new(net.params());
    let mut collector = RolloutCollector::new(pipeline, config.seed)?;

    let start = Instant::now();
    let sps_now = |step: u64| step as f64 / start.elapsed().as_secs_f64().max(1e-9);
    let num_updates = hyper.num_updates();
    for update in 1..=num_updates {
        let frames_dir = outputs.frames_out.as_deref();
        let every = outputs.frame_every;
        let mut step_err = None;
        // Episodes are logged as they finish so a failing rollout keeps them.
        let collected = collector.collect(&net, hyper.num_steps, &mut rng, |step, pipeline, episode| {
            if step_err.is_some() {
                return;
            }
            if let Some(ep) = episode {
                let logged = metrics.record_episode(step, ep.episodic_return, ep.episodic_length, sps_now(step));
                if let Err(e) = logged {
                    step_err = Some(e);
                    return;
                }
            }
            if let (Some(dir), true) = (frames_dir, every > 0 && step % every == 0) {
                if let Some(frame) = pipeline.last_frame() {
                    if let Err(e) = dump_frame(frame, &dir.join(format!("frame_{step:08}.ppm"))) {
                        step_err = Some(e);
                    }
                }
            }
        });
        if let Some(e) = step_err {
            return Err(e);
        }
        let (buffer, _) = collected?;
        let (advantages, returns) = compute_gae(
            &buffer.rewards,
            &buffer.values,
            &buffer.dones,
            buffer.bootstrap_value,
            hyper.gamma,
            hyper.gae_lambda,
        )?;
        let lr = hyper.learning_rate_at(update);
        let stats = ppo_update(&mut net, &mut optimizer, &buffer, &advantages, &returns, hyper, lr, &mut rng)?;
        let step = collector.global_step();
        metrics.record_update(step, &stats, sps_now(step))?;
    }
    Ok((net, num_updates, collector.global_step(), start.elapsed()))
}
